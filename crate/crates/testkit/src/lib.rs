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

//! Brute-force oracles and seeded random instances for tests.
//!
//! Nothing here uses `profiler-core`: every oracle works on plain rows of
//! optional strings, so it stays independent of the code it checks.

pub use rand;
use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Row = Vec<Option<String>>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A table of `width` columns and `height` rows; each column draws from its
/// own alphabet of `2..=max_alphabet` values.
pub fn random_rows(rng: &mut impl Rng, width: usize, height: usize, max_alphabet: usize) -> Vec<Row> {
    let alphabets: Vec<usize> = (0..width).map(|_| rng.random_range(2..=max_alphabet.max(2))).collect();
    (0..height)
        .map(|_| {
            alphabets
                .iter()
                .map(|&k| Some(format!("v{}", rng.random_range(0..k))))
                .collect()
        })
        .collect()
}

/// CSV text with header `c0..` for values that need no quoting. `None`
/// becomes an empty field.
pub fn to_csv(rows: &[Row], width: usize) -> String {
    let mut out = (0..width).map(|c| format!("c{c}")).collect::<Vec<_>>().join(",");
    out.push('\n');
    for row in rows {
        let line: Vec<&str> = row.iter().map(|v| v.as_deref().unwrap_or("")).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

fn cells_equal(a: &Option<String>, b: &Option<String>, nulls_equal: bool) -> bool {
    match (a, b) {
        (Some(x), Some(y)) => x == y,
        (None, None) => nulls_equal,
        _ => false,
    }
}

/// `lhs -> rhs` holds on the chosen rows, by scanning every row pair.
pub fn holds_by_pair_scan(rows: &[Row], keep: &[usize], lhs: &[usize], rhs: usize, nulls_equal: bool) -> bool {
    for (i, &r) in keep.iter().enumerate() {
        for &s in &keep[i + 1..] {
            let agree = lhs.iter().all(|&c| cells_equal(&rows[r][c], &rows[s][c], nulls_equal));
            if agree && !cells_equal(&rows[r][rhs], &rows[s][rhs], nulls_equal) {
                return false;
            }
        }
    }
    true
}

/// Smallest number of rows to delete so `lhs -> rhs` holds, by trying every
/// subset of rows to keep. Only for small inputs (at most ~16 rows).
pub fn min_removal_exhaustive(rows: &[Row], lhs: &[usize], rhs: usize, nulls_equal: bool) -> usize {
    let n = rows.len();
    assert!(n <= 20, "exhaustive search is exponential");
    let mut best = n;
    for mask in 0u32..(1u32 << n) {
        let removed = n - mask.count_ones() as usize;
        if removed >= best {
            continue;
        }
        let keep: Vec<usize> = (0..n).filter(|&r| mask & (1 << r) != 0).collect();
        if holds_by_pair_scan(rows, &keep, lhs, rhs, nulls_equal) {
            best = removed;
        }
    }
    best
}

/// g3 numerator by grouping rows on the left-hand tuple and keeping the
/// most common right-hand value per group. Nulls compare equal.
pub fn min_removal_grouping(rows: &[Row], lhs: &[usize], rhs: usize) -> usize {
    let mut groups: BTreeMap<Vec<Option<String>>, BTreeMap<Option<String>, usize>> = BTreeMap::new();
    for row in rows {
        let key = lhs.iter().map(|&c| row[c].clone()).collect();
        *groups.entry(key).or_default().entry(row[rhs].clone()).or_default() += 1;
    }
    groups
        .values()
        .map(|counts| counts.values().sum::<usize>() - counts.values().max().copied().unwrap_or(0))
        .sum()
}

fn subsets(width: usize, max_size: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = (0u32..(1u32 << width))
        .map(|m| (0..width).filter(|&c| m & (1 << c) != 0).collect::<Vec<_>>())
        .filter(|s| s.len() <= max_size)
        .collect();
    out.sort();
    out
}

/// Every minimal exact FD `(lhs, rhs)`, checked by row-pair scan. Nulls
/// compare equal. Sorted by lhs then rhs.
pub fn minimal_exact_fds(rows: &[Row], width: usize, max_lhs: usize) -> Vec<(Vec<usize>, usize)> {
    let keep: Vec<usize> = (0..rows.len()).collect();
    minimal_fds_by(width, max_lhs, |lhs, rhs| holds_by_pair_scan(rows, &keep, lhs, rhs, true))
}

/// Every minimal FD whose g3 numerator is at most `max_removed`.
pub fn minimal_approximate_fds(
    rows: &[Row],
    width: usize,
    max_lhs: usize,
    max_removed: usize,
) -> Vec<(Vec<usize>, usize)> {
    minimal_fds_by(width, max_lhs, |lhs, rhs| min_removal_grouping(rows, lhs, rhs) <= max_removed)
}

fn minimal_fds_by(
    width: usize,
    max_lhs: usize,
    valid: impl Fn(&[usize], usize) -> bool,
) -> Vec<(Vec<usize>, usize)> {
    let mut out = Vec::new();
    let all = subsets(width, max_lhs.min(width));
    for rhs in 0..width {
        let holding: Vec<&Vec<usize>> = all.iter().filter(|s| !s.contains(&rhs) && valid(s, rhs)).collect();
        for lhs in &holding {
            let has_smaller = holding
                .iter()
                .any(|other| other.len() < lhs.len() && other.iter().all(|c| lhs.contains(c)));
            if !has_smaller {
                out.push(((*lhs).clone(), rhs));
            }
        }
    }
    out.sort();
    out
}

/// Distinct non-null values of a column.
pub fn distinct_values(rows: &[Row], column: usize) -> BTreeSet<String> {
    rows.iter().filter_map(|r| r[column].clone()).collect()
}

/// Unary INDs over named tables: `((dep_table, dep_col), (ref_table, ref_col))`
/// for every ordered pair of distinct attributes whose non-null value set is
/// contained in the other's.
pub fn unary_inds(tables: &[(String, Vec<Row>, usize)]) -> BTreeSet<((String, usize), (String, usize))> {
    let mut attrs = Vec::new();
    for (name, rows, width) in tables {
        for c in 0..*width {
            attrs.push(((name.clone(), c), distinct_values(rows, c)));
        }
    }
    let mut out = BTreeSet::new();
    for (a, va) in &attrs {
        for (b, vb) in &attrs {
            if a != b && va.is_subset(vb) {
                out.insert((a.clone(), b.clone()));
            }
        }
    }
    out
}

/// Random tables for IND checks: values come from a shared small pool so that
/// containments actually occur; some cells are null.
pub fn random_ind_tables(rng: &mut impl Rng, max_columns: usize, max_rows: usize) -> Vec<(String, Vec<Row>, usize)> {
    let table_count = rng.random_range(1..=3usize);
    let mut budget = max_columns;
    let mut out = Vec::new();
    for t in 0..table_count {
        if budget == 0 {
            break;
        }
        let width = rng.random_range(1..=budget.min(4));
        budget -= width;
        let height = rng.random_range(1..=max_rows);
        let pools: Vec<usize> = (0..width).map(|_| rng.random_range(1..=8usize)).collect();
        let rows = (0..height)
            .map(|_| {
                pools
                    .iter()
                    .map(|&p| {
                        if rng.random_bool(0.05) {
                            None
                        } else {
                            Some(format!("{}", rng.random_range(0..p)))
                        }
                    })
                    .collect()
            })
            .collect();
        out.push((format!("t{t}"), rows, width));
    }
    out
}

/// Every itemset with at least `min_count` supporting transactions, by
/// enumerating all subsets of the item universe. Items are sorted.
pub fn frequent_itemsets(transactions: &[BTreeSet<u32>], min_count: usize) -> BTreeMap<Vec<u32>, usize> {
    let universe: Vec<u32> = transactions.iter().flatten().copied().collect::<BTreeSet<_>>().into_iter().collect();
    assert!(universe.len() <= 16, "subset enumeration is exponential");
    let mut out = BTreeMap::new();
    for mask in 1u32..(1u32 << universe.len()) {
        let items: Vec<u32> = (0..universe.len()).filter(|&i| mask & (1 << i) != 0).map(|i| universe[i]).collect();
        let count = transactions.iter().filter(|t| items.iter().all(|i| t.contains(i))).count();
        if count >= min_count && count > 0 {
            out.insert(items, count);
        }
    }
    out
}

pub fn random_transactions(rng: &mut impl Rng, max_items: u32, max_transactions: usize) -> Vec<BTreeSet<u32>> {
    let items = rng.random_range(1..=max_items);
    let count = rng.random_range(1..=max_transactions);
    let density: f64 = rng.random_range(0.1..0.7);
    (0..count)
        .map(|_| {
            let mut t: BTreeSet<u32> = (0..items).filter(|_| rng.random_bool(density)).collect();
            if t.is_empty() {
                t.insert(rng.random_range(0..items));
            }
            t
        })
        .collect()
}

/// Largest pairwise distance within each group of rows sharing `lhs`,
/// with the caller's metric. Rows where `point` returns `None` are skipped.
pub fn max_group_diameter<P>(
    rows: &[Row],
    lhs: &[usize],
    point: impl Fn(&Row) -> Option<P>,
    distance: impl Fn(&P, &P) -> f64,
) -> f64 {
    let mut groups: BTreeMap<Vec<Option<String>>, Vec<P>> = BTreeMap::new();
    for row in rows {
        if let Some(p) = point(row) {
            groups.entry(lhs.iter().map(|&c| row[c].clone()).collect()).or_default().push(p);
        }
    }
    let mut worst = 0.0f64;
    for points in groups.values() {
        for (i, a) in points.iter().enumerate() {
            for b in &points[i + 1..] {
                worst = worst.max(distance(a, b));
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t1() -> Vec<Row> {
        [["1", "a", "x"], ["1", "a", "y"], ["2", "b", "x"], ["2", "b", "x"]]
            .iter()
            .map(|r| r.iter().map(|v| Some(v.to_string())).collect())
            .collect()
    }

    #[test]
    fn oracles_agree_on_t1() {
        let rows = t1();
        assert_eq!(min_removal_exhaustive(&rows, &[0], 2, true), 1);
        assert_eq!(min_removal_grouping(&rows, &[0], 2), 1);
        assert_eq!(min_removal_exhaustive(&rows, &[0], 1, true), 0);
        assert_eq!(minimal_exact_fds(&rows, 3, 2), vec![(vec![0], 1), (vec![1], 0)]);
    }

    #[test]
    fn classic_basket() {
        // bread=0 milk=1 diaper=2 beer=3
        let t: Vec<BTreeSet<u32>> = [vec![0, 1], vec![0, 2, 3], vec![1, 2, 3], vec![0, 1, 2, 3], vec![0, 1, 2]]
            .into_iter()
            .map(|v| v.into_iter().collect())
            .collect();
        let f = frequent_itemsets(&t, 3);
        assert_eq!(f.len(), 8);
        assert_eq!(f[&vec![2, 3]], 3);
        assert_eq!(f[&vec![2]], 4);
    }
}
