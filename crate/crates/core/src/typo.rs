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

//! Typo candidates from almost-holding functional dependencies.
//!
//! A dependency that holds except for a few rows often points at data entry
//! mistakes. For every dependency with `0 < g3 <= threshold` this lists its
//! violation clusters, marks the rows that disagree with the cluster
//! majority, and scores clusters by minority share. Fixes are applied by
//! producing a new table; the input is never modified.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::fd::{discover_fds, validate_fd, Fd, FdDiscoveryConfig, FdError, ViolationCluster};
use crate::runtime::Runtime;
use crate::table::{DatasetError, Table};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TypoPipelineConfig {
    /// Largest g3 for a dependency to count as almost holding.
    pub error_threshold: f64,
    pub max_lhs: usize,
    pub min_cluster_size: usize,
    pub max_clusters_shown: usize,
    pub thread_count: usize,
}

impl Default for TypoPipelineConfig {
    fn default() -> Self {
        TypoPipelineConfig {
            error_threshold: 0.05,
            max_lhs: 3,
            min_cluster_size: 2,
            max_clusters_shown: 20,
            thread_count: 1,
        }
    }
}

impl TypoPipelineConfig {
    pub fn validate(&self) -> Result<(), FdError> {
        if !(self.error_threshold > 0.0 && self.error_threshold < 1.0) {
            return Err(FdError::InvalidConfig(format!(
                "error threshold {} outside (0, 1)",
                self.error_threshold
            )));
        }
        if self.min_cluster_size < 2 {
            return Err(FdError::InvalidConfig("min_cluster_size must be at least 2".into()));
        }
        if self.max_clusters_shown == 0 {
            return Err(FdError::InvalidConfig("max_clusters_shown must be at least 1".into()));
        }
        self.discovery().validate()
    }

    fn discovery(&self) -> FdDiscoveryConfig {
        FdDiscoveryConfig {
            max_lhs: self.max_lhs,
            error_threshold: self.error_threshold,
            thread_count: self.thread_count,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TypoCandidateCluster {
    pub cluster: ViolationCluster,
    /// Rows whose right-hand value differs from the majority.
    pub suspect_rows: Vec<u32>,
    /// `(cluster size - majority count) / cluster size`
    pub suspicion_score: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TypoFinding {
    pub fd: Fd,
    /// Violation clusters before size filtering and truncation.
    pub total_clusters: usize,
    pub clusters: Vec<TypoCandidateCluster>,
}

/// Almost-holding dependencies with their suspect clusters, by ascending
/// error. Dependencies left without a presentable cluster are dropped.
pub fn find_typo_candidates<R: Runtime>(
    table: &Table,
    config: &TypoPipelineConfig,
    runtime: &R,
) -> Result<Vec<TypoFinding>, FdError> {
    config.validate()?;
    let fds = discover_fds(table, &config.discovery(), runtime)?;
    let mut findings = Vec::new();
    for fd in fds.into_iter().filter(|f| f.error > 0.0) {
        let report = validate_fd(table, &fd.lhs, fd.rhs, config.error_threshold)?;
        let total_clusters = report.clusters.len();
        let clusters: Vec<TypoCandidateCluster> = report
            .clusters
            .into_iter()
            .filter(|c| c.len() >= config.min_cluster_size)
            .filter_map(annotate)
            .take(config.max_clusters_shown)
            .collect();
        if !clusters.is_empty() {
            findings.push(TypoFinding { fd, total_clusters, clusters });
        }
    }
    // Stable: equal errors keep lhs/rhs order from discovery.
    findings.sort_by(|a, b| a.fd.error.total_cmp(&b.fd.error));
    Ok(findings)
}

fn annotate(cluster: ViolationCluster) -> Option<TypoCandidateCluster> {
    let suspect_rows: Vec<u32> = cluster.minority_rows().collect();
    if suspect_rows.is_empty() {
        return None;
    }
    let size = cluster.len() as f64;
    let suspicion_score = (size - cluster.majority_count as f64) / size;
    Some(TypoCandidateCluster { cluster, suspect_rows, suspicion_score })
}

/// One reviewed cell. `replacement: None` keeps the current value.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FixDecision {
    pub row: usize,
    pub column: usize,
    #[cfg_attr(feature = "serde", serde(default))]
    pub replacement: Option<String>,
}

/// New table named `name` with every non-keep decision applied.
pub fn apply_fixes(table: &Table, decisions: &[FixDecision], name: &str) -> Result<Table, DatasetError> {
    let mut edits = Vec::new();
    for d in decisions {
        if d.row >= table.row_count() {
            return Err(DatasetError::RowOutOfRange { index: d.row, count: table.row_count() });
        }
        table.column(d.column)?;
        if let Some(value) = &d.replacement {
            edits.push((d.row, d.column, Some(value.clone())));
        }
    }
    table.with_cells_replaced(name, &edits)
}

/// Decisions that overwrite every suspect row of `finding` with its cluster
/// majority.
pub fn majority_fixes(finding: &TypoFinding) -> Vec<FixDecision> {
    finding
        .clusters
        .iter()
        .flat_map(|c| {
            c.suspect_rows.iter().map(move |&row| FixDecision {
                row: row as usize,
                column: finding.fd.rhs,
                replacement: c.cluster.majority_rhs.clone(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colset::ColumnSet;
    use crate::fd::fd_error;
    use crate::runtime::Sequential;
    use crate::table::CsvOptions;
    use alloc::vec;

    fn t1() -> Table {
        Table::from_csv_str("T1", "A,B,C\n1,a,x\n1,a,y\n2,b,x\n2,b,x\n", CsvOptions::default()).unwrap()
    }

    fn config(threshold: f64) -> TypoPipelineConfig {
        TypoPipelineConfig { error_threshold: threshold, max_lhs: 2, ..Default::default() }
    }

    #[test]
    fn t1_reports_the_near_constant_column() {
        let findings = find_typo_candidates(&t1(), &config(0.3), &Sequential).unwrap();
        let fds: Vec<(Vec<usize>, usize)> = findings.iter().map(|f| (f.fd.lhs.iter().collect(), f.fd.rhs)).collect();
        // [] -> C subsumes A -> C; C -> A and C -> B follow.
        assert_eq!(fds, vec![(vec![], 2), (vec![2], 0), (vec![2], 1)]);
        let c = &findings[0].clusters[0];
        assert_eq!(c.suspect_rows, vec![1]);
        assert_eq!(c.suspicion_score, 0.25);
        assert_eq!(c.cluster.majority_rhs.as_deref(), Some("x"));
    }

    #[test]
    fn lhs_cluster_of_two_scores_one_half() {
        // With C non-constant, A -> C is the minimal almost-holding FD.
        let t = Table::from_csv_str("t", "A,C\n1,x\n1,y\n2,z\n2,z\n3,w\n3,w\n", CsvOptions::default()).unwrap();
        let findings = find_typo_candidates(&t, &config(0.2), &Sequential).unwrap();
        let a_to_c = findings.iter().find(|f| f.fd.lhs == ColumnSet::single(0) && f.fd.rhs == 1).unwrap();
        assert_eq!(a_to_c.clusters.len(), 1);
        let rows: Vec<u32> = a_to_c.clusters[0].cluster.rows.iter().map(|r| r.0).collect();
        assert_eq!(rows, vec![0, 1]);
        assert_eq!(a_to_c.clusters[0].suspicion_score, 0.5);
    }

    #[test]
    fn exact_dependencies_are_not_candidates() {
        let t = Table::from_csv_str("t", "a,b\n1,x\n1,x\n2,y\n", CsvOptions::default()).unwrap();
        assert!(find_typo_candidates(&t, &config(0.5), &Sequential).unwrap().iter().all(|f| f.fd.error > 0.0));
        let t = Table::from_csv_str("t", "a,b\n1,x\n2,y\n3,z\n", CsvOptions::default()).unwrap();
        assert!(find_typo_candidates(&t, &config(0.5), &Sequential).unwrap().is_empty());
    }

    #[test]
    fn threshold_below_smallest_error() {
        assert!(find_typo_candidates(&t1(), &config(0.2), &Sequential).unwrap().is_empty());
    }

    #[test]
    fn cluster_filters() {
        let t = Table::from_csv_str("t", "k,v\na,1\na,2\nb,1\nb,1\nb,2\nc,5\nc,5\nc,5\nc,5\nc,5\n", CsvOptions::default())
            .unwrap();
        let mut cfg = config(0.25);
        cfg.max_lhs = 1;
        let f = &find_typo_candidates(&t, &cfg, &Sequential).unwrap()[0];
        assert_eq!(f.total_clusters, 2);
        assert_eq!(f.clusters.len(), 2);
        cfg.min_cluster_size = 3;
        let f = &find_typo_candidates(&t, &cfg, &Sequential).unwrap()[0];
        assert_eq!(f.clusters.len(), 1);
        cfg.min_cluster_size = 2;
        cfg.max_clusters_shown = 1;
        let f = &find_typo_candidates(&t, &cfg, &Sequential).unwrap()[0];
        assert_eq!(f.clusters.len(), 1);
        assert_eq!(f.clusters[0].cluster.len(), 3);
    }

    #[test]
    fn config_checks() {
        assert!(config(0.0).validate().is_err());
        assert!(TypoPipelineConfig { min_cluster_size: 1, ..config(0.1) }.validate().is_err());
        assert!(TypoPipelineConfig { max_clusters_shown: 0, ..config(0.1) }.validate().is_err());
    }

    #[test]
    fn fixing_drives_error_to_zero() {
        let t = t1();
        let fixed = apply_fixes(&t, &[FixDecision { row: 1, column: 2, replacement: Some("x".into()) }], "T1'").unwrap();
        assert_eq!(fd_error(&fixed, &ColumnSet::single(0), 2).unwrap(), 0.0);
        assert_eq!(fd_error(&t, &ColumnSet::single(0), 2).unwrap(), 0.25);
        assert_eq!((fixed.row_count(), fixed.column_count()), (4, 3));
    }

    #[test]
    fn majority_fixes_converge() {
        let t = t1();
        let findings = find_typo_candidates(&t, &config(0.3), &Sequential).unwrap();
        for f in &findings {
            let fixed = apply_fixes(&t, &majority_fixes(f), "fixed").unwrap();
            assert_eq!(fd_error(&fixed, &f.fd.lhs, f.fd.rhs).unwrap(), 0.0);
        }
    }

    #[test]
    fn empty_and_bad_decisions() {
        let t = t1();
        let same = apply_fixes(&t, &[], "copy").unwrap();
        assert_eq!(same.to_csv_string(), t.to_csv_string());
        assert_eq!(same.name(), "copy");
        let keep = FixDecision { row: 0, column: 0, replacement: None };
        assert_eq!(apply_fixes(&t, &[keep], "k").unwrap().to_csv_string(), t.to_csv_string());
        let bad = FixDecision { row: 9, column: 0, replacement: Some("z".into()) };
        assert!(matches!(apply_fixes(&t, &[bad], "x"), Err(DatasetError::RowOutOfRange { index: 9, .. })));
        let bad = vec![FixDecision { row: 0, column: 9, replacement: None }];
        assert!(apply_fixes(&t, &bad, "x").is_err());
    }
}
