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

//! Functional dependencies: discovery, error measure, and validation.
//!
//! The error of `X -> A` is g3: the smallest number of rows whose removal
//! makes the dependency exact, divided by the row count. A dependency is
//! reported when its error is at most the configured threshold and no
//! proper subset of its left-hand side also meets the threshold.

mod lattice;
mod validate;

use alloc::format;
use alloc::string::String;
use core::cmp::Ordering;

pub use lattice::discover_fds;
pub use validate::{validate_fd, FdValidationReport, ViolationCluster};

use crate::colset::ColumnSet;
use crate::pli::StrippedPartition;
use crate::runtime::Interrupt;
use crate::table::{DatasetError, Table};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FdError {
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("right-hand side column {0} also appears on the left-hand side")]
    RhsInLhs(usize),
    #[error("resource limit exceeded: {0}")]
    ResourceLimitExceeded(Interrupt),
    #[error("cancelled")]
    Cancelled,
}

impl From<Interrupt> for FdError {
    fn from(value: Interrupt) -> Self {
        match value {
            Interrupt::Cancelled => FdError::Cancelled,
            other => FdError::ResourceLimitExceeded(other),
        }
    }
}

/// A dependency `lhs -> rhs` with its g3 error.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Fd {
    pub lhs: ColumnSet,
    pub rhs: usize,
    pub error: f64,
}

impl Fd {
    pub fn holds_exactly(&self) -> bool {
        self.error == 0.0
    }

    /// `[lhs names] -> rhs name (error=e)`
    pub fn render(&self, table: &Table) -> String {
        let names: alloc::vec::Vec<&str> = table.column_names().collect();
        format!(
            "{} -> {} (error={})",
            self.lhs.render(&names),
            names.get(self.rhs).copied().unwrap_or("?"),
            self.error
        )
    }
}

// Identity is the (lhs, rhs) pair; the error is derived from it.
impl PartialEq for Fd {
    fn eq(&self, other: &Self) -> bool {
        self.lhs == other.lhs && self.rhs == other.rhs
    }
}

impl Eq for Fd {}

impl PartialOrd for Fd {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Fd {
    fn cmp(&self, other: &Self) -> Ordering {
        self.lhs.cmp(&other.lhs).then(self.rhs.cmp(&other.rhs))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdDiscoveryConfig {
    /// Largest left-hand side searched.
    pub max_lhs: usize,
    /// Largest g3 error accepted; 0 means exact dependencies only.
    pub error_threshold: f64,
    /// Worker count for runtimes that parallelize.
    pub thread_count: usize,
}

impl Default for FdDiscoveryConfig {
    fn default() -> Self {
        FdDiscoveryConfig { max_lhs: usize::MAX, error_threshold: 0.0, thread_count: 1 }
    }
}

impl FdDiscoveryConfig {
    pub fn validate(&self) -> Result<(), FdError> {
        if self.max_lhs == 0 {
            return Err(FdError::InvalidConfig("max_lhs must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.error_threshold) {
            return Err(FdError::InvalidConfig(format!(
                "error threshold {} outside [0, 1)",
                self.error_threshold
            )));
        }
        if self.thread_count == 0 {
            return Err(FdError::InvalidConfig("thread_count must be at least 1".into()));
        }
        Ok(())
    }
}

/// Rows to remove so that `lhs -> rhs` holds exactly.
pub fn removal_count(table: &Table, lhs: &ColumnSet, rhs: usize) -> Result<usize, FdError> {
    let rhs_column = table.column(rhs)?;
    if lhs.contains(rhs) {
        return Err(FdError::RhsInLhs(rhs));
    }
    let partition = StrippedPartition::for_columns(table, lhs)?;
    Ok(partition.removal_count_for_column(rhs_column))
}

/// g3 error of `lhs -> rhs`.
pub fn fd_error(table: &Table, lhs: &ColumnSet, rhs: usize) -> Result<f64, FdError> {
    let removed = removal_count(table, lhs, rhs)?;
    Ok(ratio(removed, table.row_count()))
}

pub(crate) fn ratio(removed: usize, rows: usize) -> f64 {
    if rows == 0 {
        0.0
    } else {
        removed as f64 / rows as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::CsvOptions;

    fn t1() -> Table {
        Table::from_csv_str("T1", "A,B,C\n1,a,x\n1,a,y\n2,b,x\n2,b,x\n", CsvOptions::default()).unwrap()
    }

    #[test]
    fn g3_on_t1() {
        let t = t1();
        assert_eq!(fd_error(&t, &ColumnSet::single(0), 2).unwrap(), 0.25);
        assert_eq!(fd_error(&t, &ColumnSet::single(0), 1).unwrap(), 0.0);
        assert_eq!(fd_error(&t, &ColumnSet::empty(), 2).unwrap(), 0.25);
        assert_eq!(fd_error(&t, &ColumnSet::empty(), 0).unwrap(), 0.5);
    }

    #[test]
    fn g3_single_row_is_zero() {
        let t = Table::from_csv_str("t", "a,b\n1,2\n", CsvOptions::default()).unwrap();
        assert_eq!(fd_error(&t, &ColumnSet::single(0), 1).unwrap(), 0.0);
    }

    #[test]
    fn g3_rejects_bad_references() {
        let t = t1();
        assert_eq!(fd_error(&t, &ColumnSet::single(0), 0), Err(FdError::RhsInLhs(0)));
        assert!(matches!(
            fd_error(&t, &ColumnSet::single(7), 0),
            Err(FdError::Dataset(DatasetError::IndexOutOfRange { index: 7, .. }))
        ));
        assert!(matches!(
            fd_error(&t, &ColumnSet::single(0), 9),
            Err(FdError::Dataset(DatasetError::IndexOutOfRange { index: 9, .. }))
        ));
    }

    #[test]
    fn config_validation() {
        assert!(FdDiscoveryConfig::default().validate().is_ok());
        let bad = FdDiscoveryConfig { error_threshold: 1.0, ..Default::default() };
        assert!(matches!(bad.validate(), Err(FdError::InvalidConfig(_))));
        let bad = FdDiscoveryConfig { max_lhs: 0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = FdDiscoveryConfig { error_threshold: f64::NAN, ..Default::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn render_line() {
        let t = t1();
        let fd = Fd { lhs: [0, 1].into_iter().collect(), rhs: 2, error: 0.25 };
        assert_eq!(fd.render(&t), "[A, B] -> C (error=0.25)");
    }
}
