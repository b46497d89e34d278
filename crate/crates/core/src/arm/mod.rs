// Copyright 2026 The Profiler Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Frequent itemsets and association rules over transactions.

mod apriori;
mod fpgrowth;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::table::Table;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ArmError {
    #[error("no transactions")]
    EmptyTransactions,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("itemset {0:?} is listed but its subset {1:?} is not")]
    NotDownwardClosed(Vec<u32>, Vec<u32>),
    #[error("singular layout needs exactly two columns (transaction id, item), found {0}")]
    BadLayout(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Algorithm {
    Apriori,
    #[cfg_attr(feature = "serde", serde(alias = "fp_growth", alias = "fp-growth"))]
    FpGrowth,
}

/// How a table encodes transactions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Layout {
    /// Two columns: transaction id, item. One row per item occurrence.
    Singular,
    /// One row per transaction; every non-null cell is an item.
    Tabular,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransactionSet {
    /// Sorted, duplicate-free item ids per transaction.
    transactions: Vec<Vec<u32>>,
    items: Vec<String>,
}

impl TransactionSet {
    /// Builds from item names. Ids follow first occurrence.
    pub fn from_names<I, T, S>(transactions: I) -> Result<Self, ArmError>
    where
        I: IntoIterator<Item = T>,
        T: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut ids: BTreeMap<String, u32> = BTreeMap::new();
        let mut items: Vec<String> = Vec::new();
        let mut out = Vec::new();
        for t in transactions {
            let mut row: Vec<u32> = t
                .into_iter()
                .map(|name| {
                    let name = name.as_ref();
                    *ids.entry(name.to_string()).or_insert_with(|| {
                        items.push(name.to_string());
                        (items.len() - 1) as u32
                    })
                })
                .collect();
            row.sort_unstable();
            row.dedup();
            out.push(row);
        }
        if out.is_empty() {
            return Err(ArmError::EmptyTransactions);
        }
        Ok(TransactionSet { transactions: out, items })
    }

    pub fn from_table(table: &Table, layout: Layout) -> Result<Self, ArmError> {
        match layout {
            Layout::Tabular => Self::from_names(
                (0..table.row_count())
                    .map(|r| (0..table.column_count()).filter_map(move |c| table.value(r, c))),
            ),
            Layout::Singular => {
                if table.column_count() != 2 {
                    return Err(ArmError::BadLayout(table.column_count()));
                }
                let mut order: Vec<&str> = Vec::new();
                let mut groups: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
                for r in 0..table.row_count() {
                    let (Some(tid), Some(item)) = (table.value(r, 0), table.value(r, 1)) else {
                        continue;
                    };
                    groups
                        .entry(tid)
                        .or_insert_with(|| {
                            order.push(tid);
                            Vec::new()
                        })
                        .push(item);
                }
                Self::from_names(order.iter().map(|tid| groups[tid].iter().copied()))
            }
        }
    }

    pub fn len(&self) -> usize {
        self.transactions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transactions.is_empty()
    }

    pub fn transactions(&self) -> &[Vec<u32>] {
        &self.transactions
    }

    pub fn item_name(&self, id: u32) -> &str {
        self.items.get(id as usize).map_or("?", String::as_str)
    }

    pub fn item_count(&self) -> usize {
        self.items.len()
    }

    /// `{a, b}`
    pub fn render_items(&self, items: &[u32]) -> String {
        let names: Vec<&str> = items.iter().map(|&i| self.item_name(i)).collect();
        format!("{{{}}}", names.join(", "))
    }

    /// Transactions containing every item of `items` (sorted).
    pub fn count_containing(&self, items: &[u32]) -> usize {
        self.transactions.iter().filter(|t| is_sorted_subset(items, t)).count()
    }
}

pub(crate) fn is_sorted_subset(small: &[u32], big: &[u32]) -> bool {
    let mut it = big.iter();
    small.iter().all(|x| it.any(|y| y == x))
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ItemsetResult {
    /// Sorted item ids.
    pub items: Vec<u32>,
    pub count: usize,
    pub support: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Rule {
    pub antecedent: Vec<u32>,
    pub consequent: Vec<u32>,
    pub support: f64,
    pub confidence: f64,
}

impl ItemsetResult {
    /// `{items} (support=s)`
    pub fn render(&self, txns: &TransactionSet) -> String {
        format!("{} (support={})", txns.render_items(&self.items), self.support)
    }
}

impl Rule {
    /// `{antecedent} -> {consequent} (sup=s, conf=c)`
    pub fn render(&self, txns: &TransactionSet) -> String {
        format!(
            "{} -> {} (sup={}, conf={})",
            txns.render_items(&self.antecedent),
            txns.render_items(&self.consequent),
            self.support,
            self.confidence
        )
    }
}

/// Smallest transaction count whose share reaches `min_support`.
pub(crate) fn min_count(min_support: f64, total: usize) -> usize {
    let mut c = ((min_support * total as f64) as usize).saturating_sub(1).max(1);
    while (c as f64 / total as f64) < min_support {
        c += 1;
    }
    c
}

/// Every itemset whose support is at least `min_support`, ordered by size
/// then item ids.
pub fn mine_frequent_itemsets(
    txns: &TransactionSet,
    min_support: f64,
    algorithm: Algorithm,
) -> Result<Vec<ItemsetResult>, ArmError> {
    if !(min_support > 0.0 && min_support <= 1.0) {
        return Err(ArmError::InvalidParameter(format!("min_support {min_support} outside (0, 1]")));
    }
    if txns.is_empty() {
        return Err(ArmError::EmptyTransactions);
    }
    let total = txns.len();
    let threshold = min_count(min_support, total);
    let counted = match algorithm {
        Algorithm::Apriori => apriori::mine(txns, threshold),
        Algorithm::FpGrowth => fpgrowth::mine(txns, threshold),
    };
    let mut out: Vec<ItemsetResult> = counted
        .into_iter()
        .map(|(items, count)| ItemsetResult { items, count, support: count as f64 / total as f64 })
        .collect();
    out.sort_by(|a, b| a.items.len().cmp(&b.items.len()).then_with(|| a.items.cmp(&b.items)));
    Ok(out)
}

/// Rules `A -> C` for every frequent itemset `A ∪ C` and non-empty proper
/// split, kept when `count(A ∪ C) / count(A) >= min_confidence`.
pub fn derive_rules(itemsets: &[ItemsetResult], min_confidence: f64) -> Result<Vec<Rule>, ArmError> {
    if !(min_confidence > 0.0 && min_confidence <= 1.0) {
        return Err(ArmError::InvalidParameter(format!(
            "min_confidence {min_confidence} outside (0, 1]"
        )));
    }
    let counts: BTreeMap<&[u32], usize> = itemsets.iter().map(|i| (i.items.as_slice(), i.count)).collect();
    let mut rules = Vec::new();
    for set in itemsets.iter().filter(|s| (2..64).contains(&s.items.len())) {
        let k = set.items.len();
        for mask in 1u64..((1u64 << k) - 1) {
            let in_antecedent = |i: &usize| mask & (1 << i) != 0;
            let antecedent: Vec<u32> =
                (0..k).filter(in_antecedent).map(|i| set.items[i]).collect();
            let consequent: Vec<u32> =
                (0..k).filter(|i| !in_antecedent(i)).map(|i| set.items[i]).collect();
            let Some(&base) = counts.get(antecedent.as_slice()) else {
                return Err(ArmError::NotDownwardClosed(set.items.clone(), antecedent));
            };
            let confidence = set.count as f64 / base as f64;
            if confidence >= min_confidence {
                rules.push(Rule { antecedent, consequent, support: set.support, confidence });
            }
        }
    }
    rules.sort_by(|a, b| {
        (a.antecedent.len() + a.consequent.len())
            .cmp(&(b.antecedent.len() + b.consequent.len()))
            .then_with(|| a.antecedent.cmp(&b.antecedent))
            .then_with(|| a.consequent.cmp(&b.consequent))
    });
    Ok(rules)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::CsvOptions;
    use alloc::vec;

    pub(super) fn basket() -> TransactionSet {
        TransactionSet::from_names([
            vec!["bread", "milk"],
            vec!["bread", "diaper", "beer"],
            vec!["milk", "diaper", "beer"],
            vec!["bread", "milk", "diaper", "beer"],
            vec!["bread", "milk", "diaper"],
        ])
        .unwrap()
    }

    fn rendered(txns: &TransactionSet, sets: &[ItemsetResult]) -> Vec<String> {
        sets.iter().map(|s| s.render(txns)).collect()
    }

    #[test]
    fn classic_basket_both_algorithms() {
        let txns = basket();
        // Expected values come from enumerating every subset of the four
        // items and counting containing transactions.
        let expected = vec![
            "{bread} (support=0.8)",
            "{milk} (support=0.8)",
            "{diaper} (support=0.8)",
            "{beer} (support=0.6)",
            "{bread, milk} (support=0.6)",
            "{bread, diaper} (support=0.6)",
            "{milk, diaper} (support=0.6)",
            "{diaper, beer} (support=0.6)",
        ];
        for algo in [Algorithm::Apriori, Algorithm::FpGrowth] {
            let sets = mine_frequent_itemsets(&txns, 0.6, algo).unwrap();
            assert_eq!(rendered(&txns, &sets), expected, "{algo:?}");
        }
    }

    #[test]
    fn diaper_implies_beer() {
        let txns = basket();
        let sets = mine_frequent_itemsets(&txns, 0.6, Algorithm::Apriori).unwrap();
        let rules = derive_rules(&sets, 0.7).unwrap();
        let lines: Vec<String> = rules.iter().map(|r| r.render(&txns)).collect();
        assert!(lines.contains(&"{diaper} -> {beer} (sup=0.6, conf=0.75)".to_string()), "{lines:?}");
        assert!(lines.contains(&"{beer} -> {diaper} (sup=0.6, conf=1)".to_string()));
        // Without beer (id 3) every rule has confidence 0.75.
        let no_beer: Vec<ItemsetResult> = sets.into_iter().filter(|s| !s.items.contains(&3)).collect();
        let rules = derive_rules(&no_beer, 0.5).unwrap();
        let top = rules.iter().map(|r| r.confidence).fold(0.0, f64::max);
        assert_eq!(top, 0.75);
        assert!(derive_rules(&no_beer, top + 1e-9).unwrap().is_empty());
    }

    #[test]
    fn nothing_common_at_full_support() {
        let txns = TransactionSet::from_names([vec!["a"], vec!["b"]]).unwrap();
        for algo in [Algorithm::Apriori, Algorithm::FpGrowth] {
            assert!(mine_frequent_itemsets(&txns, 1.0, algo).unwrap().is_empty());
        }
    }

    #[test]
    fn single_transaction() {
        let txns = TransactionSet::from_names([vec!["a"]]).unwrap();
        for algo in [Algorithm::Apriori, Algorithm::FpGrowth] {
            let sets = mine_frequent_itemsets(&txns, 1.0, algo).unwrap();
            assert_eq!(rendered(&txns, &sets), vec!["{a} (support=1)"]);
            assert!(derive_rules(&sets, 0.5).unwrap().is_empty());
        }
    }

    #[test]
    fn parameter_checks() {
        let txns = basket();
        assert!(matches!(mine_frequent_itemsets(&txns, 0.0, Algorithm::Apriori), Err(ArmError::InvalidParameter(_))));
        assert!(matches!(mine_frequent_itemsets(&txns, 1.5, Algorithm::FpGrowth), Err(ArmError::InvalidParameter(_))));
        assert!(matches!(derive_rules(&[], 0.0), Err(ArmError::InvalidParameter(_))));
        let empty: [[&str; 0]; 0] = [];
        assert_eq!(TransactionSet::from_names(empty), Err(ArmError::EmptyTransactions));
    }

    #[test]
    fn missing_subset_is_reported() {
        let sets = vec![ItemsetResult { items: vec![0, 1], count: 2, support: 1.0 }];
        assert!(matches!(derive_rules(&sets, 0.5), Err(ArmError::NotDownwardClosed(..))));
    }

    #[test]
    fn table_layouts() {
        let singular = Table::from_csv_str("s", "tid,item\n1,a\n1,b\n2,a\n1,a\n", CsvOptions::default()).unwrap();
        let t = TransactionSet::from_table(&singular, Layout::Singular).unwrap();
        assert_eq!(t.transactions(), &[vec![0, 1], vec![0]]);
        let tabular = Table::from_csv_str("t", "i1,i2,i3\na,b,\nb,,\n", CsvOptions::default()).unwrap();
        let t = TransactionSet::from_table(&tabular, Layout::Tabular).unwrap();
        assert_eq!(t.transactions(), &[vec![0, 1], vec![1]]);
        assert_eq!(TransactionSet::from_table(&tabular, Layout::Singular), Err(ArmError::BadLayout(3)));
    }

    #[test]
    fn min_count_matches_fraction() {
        assert_eq!(min_count(0.6, 5), 3);
        assert_eq!(min_count(0.29, 100), 29);
        assert_eq!(min_count(1.0, 7), 7);
        assert_eq!(min_count(0.0001, 7), 1);
    }
}
