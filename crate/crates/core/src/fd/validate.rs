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

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use super::{ratio, FdError};
use crate::colset::ColumnSet;
use crate::pli::StrippedPartition;
use crate::table::{Table, UNCODED};

/// Rows that agree on the left-hand side but not on the right-hand side.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ViolationCluster {
    pub lhs_value: Vec<Option<String>>,
    /// `(row, rhs value)` in row order.
    pub rows: Vec<(u32, Option<String>)>,
    pub distinct_rhs_count: usize,
    /// Most frequent right-hand value; ties go to the smallest dictionary
    /// code.
    pub majority_rhs: Option<String>,
    pub majority_count: usize,
}

impl ViolationCluster {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Rows whose right-hand value differs from the majority value.
    pub fn minority_rows(&self) -> impl Iterator<Item = u32> + '_ {
        self.rows.iter().filter(|(_, v)| *v != self.majority_rhs).map(|(r, _)| *r)
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FdValidationReport {
    pub holds: bool,
    pub error: f64,
    /// Sorted by descending size, then by first row.
    pub clusters: Vec<ViolationCluster>,
}

/// Checks `lhs -> rhs` against `threshold` and lists every violating cluster.
pub fn validate_fd(
    table: &Table,
    lhs: &ColumnSet,
    rhs: usize,
    threshold: f64,
) -> Result<FdValidationReport, FdError> {
    let rhs_column = table.column(rhs)?;
    if lhs.contains(rhs) {
        return Err(FdError::RhsInLhs(rhs));
    }
    let partition = StrippedPartition::for_columns(table, lhs)?;
    let codes = rhs_column.codes();
    let mut counts = vec![0u32; rhs_column.code_count()];
    let mut removed = 0usize;
    let mut clusters = Vec::new();

    for cluster in partition.clusters() {
        let mut distinct = 0usize;
        let mut best: Option<(u32, u32)> = None; // (count, code)
        for &row in cluster {
            let code = codes[row as usize];
            if code == UNCODED {
                distinct += 1;
                continue;
            }
            let n = &mut counts[code as usize];
            if *n == 0 {
                distinct += 1;
            }
            *n += 1;
            best = match best {
                Some((c, k)) if c > *n || (c == *n && k < code) => Some((c, k)),
                _ => Some((*n, code)),
            };
        }
        for &row in cluster {
            let code = codes[row as usize];
            if code != UNCODED {
                counts[code as usize] = 0;
            }
        }
        let majority_count = best.map_or(1, |(c, _)| c as usize);
        removed += cluster.len() - majority_count;
        if distinct < 2 {
            continue;
        }
        let first = cluster[0] as usize;
        clusters.push(ViolationCluster {
            lhs_value: lhs.iter().map(|c| table.value(first, c).map(ToString::to_string)).collect(),
            rows: cluster
                .iter()
                .map(|&r| (r, rhs_column.value(r as usize).map(ToString::to_string)))
                .collect(),
            distinct_rhs_count: distinct,
            majority_rhs: best.and_then(|(_, code)| rhs_column.decode(code).map(ToString::to_string)),
            majority_count,
        });
    }
    // Stable sort keeps first-row order among equal sizes.
    clusters.sort_by_key(|c| core::cmp::Reverse(c.rows.len()));
    let error = ratio(removed, table.row_count());
    Ok(FdValidationReport { holds: error <= threshold, error, clusters })
}
