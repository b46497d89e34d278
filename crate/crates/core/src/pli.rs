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

//! Stripped partitions (position list indexes).
//!
//! A stripped partition of a column set `X` groups row indexes that agree on
//! every column of `X` and drops groups of one row. Clusters are stored
//! flattened, each cluster sorted ascending, and clusters ordered by their
//! first row, so two partitions over the same equivalence are `==`.

use alloc::vec;
use alloc::vec::Vec;

use crate::colset::ColumnSet;
use crate::table::{Column, DatasetError, Table, UNCODED};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrippedPartition {
    rows: Vec<u32>,
    // cluster i is rows[bounds[i]..bounds[i + 1]]
    bounds: Vec<u32>,
    columns: ColumnSet,
    source_row_count: usize,
}

impl StrippedPartition {
    /// Partition of the empty column set: every row in one cluster.
    pub fn all_rows(row_count: usize) -> Self {
        let mut p = StrippedPartition {
            rows: Vec::new(),
            bounds: vec![0],
            columns: ColumnSet::empty(),
            source_row_count: row_count,
        };
        if row_count >= 2 {
            p.rows.extend(0..row_count as u32);
            p.bounds.push(row_count as u32);
        }
        p
    }

    /// Groups rows by dictionary code. [`UNCODED`] cells are never grouped.
    pub fn from_column(column: &Column, index: usize) -> Self {
        let mut groups: Vec<Vec<u32>> = vec![Vec::new(); column.code_count()];
        for (row, &code) in column.codes().iter().enumerate() {
            if code != UNCODED {
                groups[code as usize].push(row as u32);
            }
        }
        // Codes are handed out in first-occurrence order, so groups are
        // already ordered by first row.
        Self::from_groups(groups.into_iter(), ColumnSet::single(index), column.len())
    }

    pub fn build(table: &Table, column: usize) -> Result<Self, DatasetError> {
        Ok(Self::from_column(table.column(column)?, column))
    }

    /// Partition over `columns` built by successive intersection. An empty
    /// set gives [`StrippedPartition::all_rows`].
    pub fn for_columns(table: &Table, columns: &ColumnSet) -> Result<Self, DatasetError> {
        let mut iter = columns.iter();
        let Some(first) = iter.next() else {
            return Ok(Self::all_rows(table.row_count()));
        };
        let mut acc = Self::build(table, first)?;
        for c in iter {
            acc = acc.intersect(&Self::build(table, c)?)?;
        }
        Ok(acc)
    }

    fn from_groups(
        groups: impl Iterator<Item = Vec<u32>>,
        columns: ColumnSet,
        source_row_count: usize,
    ) -> Self {
        let mut rows = Vec::new();
        let mut bounds = vec![0u32];
        for g in groups.filter(|g| g.len() >= 2) {
            rows.extend_from_slice(&g);
            bounds.push(rows.len() as u32);
        }
        StrippedPartition { rows, bounds, columns, source_row_count }
    }

    pub fn columns(&self) -> &ColumnSet {
        &self.columns
    }

    pub fn source_row_count(&self) -> usize {
        self.source_row_count
    }

    pub fn cluster_count(&self) -> usize {
        self.bounds.len() - 1
    }

    /// Total rows over all clusters.
    pub fn covered_rows(&self) -> usize {
        self.rows.len()
    }

    /// `true` when no two rows agree, i.e. the column set is a superkey.
    pub fn is_unique(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn cluster(&self, i: usize) -> &[u32] {
        &self.rows[self.bounds[i] as usize..self.bounds[i + 1] as usize]
    }

    pub fn clusters(&self) -> impl ExactSizeIterator<Item = &[u32]> + '_ {
        self.bounds
            .windows(2)
            .map(move |w| &self.rows[w[0] as usize..w[1] as usize])
    }

    /// Approximate heap footprint in bytes.
    pub fn heap_bytes(&self) -> usize {
        (self.rows.capacity() + self.bounds.capacity()) * core::mem::size_of::<u32>()
    }

    /// Product partition: rows share a result cluster exactly when they share
    /// a cluster in both inputs.
    pub fn intersect(&self, other: &StrippedPartition) -> Result<Self, DatasetError> {
        if self.source_row_count != other.source_row_count {
            return Err(DatasetError::SourceMismatch {
                left: self.source_row_count,
                right: other.source_row_count,
            });
        }
        let mut probe = vec![u32::MAX; self.source_row_count];
        for (id, cluster) in self.clusters().enumerate() {
            for &row in cluster {
                probe[row as usize] = id as u32;
            }
        }
        let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); self.cluster_count()];
        let mut touched: Vec<u32> = Vec::new();
        let mut out: Vec<Vec<u32>> = Vec::new();
        for cluster in other.clusters() {
            for &row in cluster {
                let id = probe[row as usize];
                if id != u32::MAX {
                    let bucket = &mut buckets[id as usize];
                    if bucket.is_empty() {
                        touched.push(id);
                    }
                    bucket.push(row);
                }
            }
            for &id in &touched {
                let bucket = core::mem::take(&mut buckets[id as usize]);
                if bucket.len() >= 2 {
                    out.push(bucket);
                }
            }
            touched.clear();
        }
        out.sort_unstable_by_key(|c| c[0]);
        let columns = other.columns.iter().fold(self.columns.clone(), |acc, c| acc.with(c));
        Ok(Self::from_groups(out.into_iter(), columns, self.source_row_count))
    }

    /// Number of rows that must be removed so that `self`'s column set
    /// determines the columns of `refined`, where `refined` is the partition
    /// of `self`'s columns plus the right-hand side.
    ///
    /// Every cluster of `refined` lies inside a cluster of `self`; rows of
    /// `self` outside any `refined` cluster count as groups of one.
    pub fn removal_count(&self, refined: &StrippedPartition) -> usize {
        let mut sizes = vec![0u32; self.source_row_count];
        for cluster in refined.clusters() {
            sizes[cluster[0] as usize] = cluster.len() as u32;
        }
        let mut removed = 0usize;
        for cluster in self.clusters() {
            let largest = cluster.iter().map(|&r| sizes[r as usize]).max().unwrap_or(0).max(1);
            removed += cluster.len() - largest as usize;
        }
        removed
    }

    /// Same count as [`removal_count`](Self::removal_count), computed
    /// straight from the right-hand-side column codes.
    pub fn removal_count_for_column(&self, rhs: &Column) -> usize {
        let codes = rhs.codes();
        let mut counts = vec![0u32; rhs.code_count()];
        let mut removed = 0usize;
        for cluster in self.clusters() {
            let mut largest = 1u32;
            for &row in cluster {
                let code = codes[row as usize];
                if code != UNCODED {
                    let n = &mut counts[code as usize];
                    *n += 1;
                    largest = largest.max(*n);
                }
            }
            for &row in cluster {
                let code = codes[row as usize];
                if code != UNCODED {
                    counts[code as usize] = 0;
                }
            }
            removed += cluster.len() - largest as usize;
        }
        removed
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::{CsvOptions, NullMode};
    use alloc::vec::Vec;

    fn t1() -> Table {
        Table::from_csv_str("T1", "A,B,C\n1,a,x\n1,a,y\n2,b,x\n2,b,x\n", CsvOptions::default()).unwrap()
    }

    fn as_sets(p: &StrippedPartition) -> Vec<Vec<u32>> {
        p.clusters().map(<[u32]>::to_vec).collect()
    }

    #[test]
    fn build_groups_equal_values() {
        let t = t1();
        assert_eq!(as_sets(&StrippedPartition::build(&t, 0).unwrap()), vec![vec![0, 1], vec![2, 3]]);
        assert_eq!(as_sets(&StrippedPartition::build(&t, 2).unwrap()), vec![vec![0, 2, 3]]);
        assert!(matches!(
            StrippedPartition::build(&t, 3),
            Err(DatasetError::IndexOutOfRange { index: 3, count: 3 })
        ));
    }

    #[test]
    fn all_distinct_column_is_empty() {
        let t = Table::from_csv_str("t", "k\n1\n2\n3\n", CsvOptions::default()).unwrap();
        let p = StrippedPartition::build(&t, 0).unwrap();
        assert!(p.is_unique());
        assert_eq!(p.cluster_count(), 0);
    }

    #[test]
    fn intersect_examples() {
        let t = t1();
        let a = StrippedPartition::build(&t, 0).unwrap();
        let c = StrippedPartition::build(&t, 2).unwrap();
        let ac = a.intersect(&c).unwrap();
        assert_eq!(as_sets(&ac), vec![vec![2, 3]]);
        assert_eq!(ac.columns(), &[0, 2].into_iter().collect::<ColumnSet>());
        assert_eq!(as_sets(&a.intersect(&a).unwrap()), as_sets(&a));
        let empty = StrippedPartition::from_groups(core::iter::empty(), ColumnSet::single(1), 4);
        assert!(a.intersect(&empty).unwrap().is_unique());
    }

    #[test]
    fn intersect_rejects_mismatched_sources() {
        let a = StrippedPartition::all_rows(3);
        let b = StrippedPartition::all_rows(4);
        assert_eq!(a.intersect(&b).unwrap_err(), DatasetError::SourceMismatch { left: 3, right: 4 });
    }

    #[test]
    fn null_distinct_rows_never_cluster() {
        let opts = CsvOptions { null_mode: NullMode::NullDistinct, ..CsvOptions::default() };
        let t = Table::from_csv_str("t", "a\n\n\nx\nx\n", opts).unwrap();
        assert_eq!(as_sets(&StrippedPartition::build(&t, 0).unwrap()), vec![vec![2, 3]]);
        let t = Table::from_csv_str("t", "a\n\n\nx\nx\n", CsvOptions::default()).unwrap();
        assert_eq!(as_sets(&StrippedPartition::build(&t, 0).unwrap()), vec![vec![0, 1], vec![2, 3]]);
    }

    #[test]
    fn removal_counts_agree() {
        let t = t1();
        let a = StrippedPartition::build(&t, 0).unwrap();
        let c = StrippedPartition::build(&t, 2).unwrap();
        let ac = a.intersect(&c).unwrap();
        assert_eq!(a.removal_count(&ac), 1);
        assert_eq!(a.removal_count_for_column(&t.columns()[2]), 1);
        let all = StrippedPartition::all_rows(4);
        assert_eq!(all.removal_count(&c), 1);
        assert_eq!(all.removal_count_for_column(&t.columns()[0]), 2);
    }
}
