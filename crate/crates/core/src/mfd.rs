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

//! Metric functional dependency validation.
//!
//! `X -> Y` holds under metric `d` and tolerance `delta` when, inside every
//! group of rows agreeing on `X`, every pair of `Y` values is within
//! `delta`. A point whose nearest neighbour in its group is farther than
//! `delta` is an outlier.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::colset::ColumnSet;
use crate::pli::StrippedPartition;
use crate::table::{parse_number, DatasetError, Table, ValueType};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MfdError {
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("metric {metric} needs numeric columns, column {column} is {found}")]
    TypeMismatch { column: String, found: ValueType, metric: &'static str },
    #[error("invalid query: {0}")]
    InvalidQuery(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Metric {
    /// `|a - b|` over one numeric column.
    AbsoluteDifference,
    /// Euclidean distance over one or more numeric columns.
    Euclidean,
    /// Edit distance over the raw text of one column.
    Levenshtein,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::AbsoluteDifference => "absolute_difference",
            Metric::Euclidean => "euclidean",
            Metric::Levenshtein => "levenshtein",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MfdQuery {
    pub lhs: ColumnSet,
    pub rhs: Vec<usize>,
    pub metric: Metric,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MfdPoint {
    pub row: u32,
    /// Raw right-hand values, one per right-hand column.
    pub value: Vec<String>,
    pub is_outlier: bool,
    /// Distance to the nearest other point of the cluster.
    pub nearest: f64,
    /// Distance to the farthest other point of the cluster.
    pub farthest: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MfdCluster {
    pub lhs_value: Vec<Option<String>>,
    pub points: Vec<MfdPoint>,
}

impl MfdCluster {
    pub fn outlier_count(&self) -> usize {
        self.points.iter().filter(|p| p.is_outlier).count()
    }

    /// Largest pairwise distance in the cluster.
    pub fn diameter(&self) -> f64 {
        self.points.iter().map(|p| p.farthest).fold(0.0, f64::max)
    }

    fn first_row(&self) -> u32 {
        self.points.iter().map(|p| p.row).min().unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum MfdSortKey {
    /// Clusters by diameter, points by farthest distance, both descending.
    Distance,
    /// Clusters and points by row index.
    Index,
    /// Clusters by outlier count descending, outliers first inside.
    Outliers,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MfdReport {
    pub holds: bool,
    /// Only the violating clusters.
    pub clusters: Vec<MfdCluster>,
}

impl MfdReport {
    pub fn sort_by(&mut self, key: MfdSortKey) {
        let desc = |a: f64, b: f64| b.partial_cmp(&a).unwrap_or(Ordering::Equal);
        for c in &mut self.clusters {
            match key {
                MfdSortKey::Distance => {
                    c.points.sort_by(|a, b| desc(a.farthest, b.farthest).then(a.row.cmp(&b.row)))
                }
                MfdSortKey::Index => c.points.sort_by_key(|p| p.row),
                MfdSortKey::Outliers => {
                    c.points.sort_by(|a, b| b.is_outlier.cmp(&a.is_outlier).then(a.row.cmp(&b.row)))
                }
            }
        }
        match key {
            MfdSortKey::Distance => self
                .clusters
                .sort_by(|a, b| desc(a.diameter(), b.diameter()).then(a.first_row().cmp(&b.first_row()))),
            MfdSortKey::Index => self.clusters.sort_by_key(MfdCluster::first_row),
            MfdSortKey::Outliers => self.clusters.sort_by(|a, b| {
                b.outlier_count().cmp(&a.outlier_count()).then(a.first_row().cmp(&b.first_row()))
            }),
        }
    }
}

enum Points {
    Numbers(Vec<(u32, Vec<f64>)>),
    Texts(Vec<(u32, Vec<char>)>),
}

pub fn validate_mfd(table: &Table, query: &MfdQuery) -> Result<MfdReport, MfdError> {
    check_query(table, query)?;
    let partition = StrippedPartition::for_columns(table, &query.lhs)?;
    let mut clusters = Vec::new();
    for cluster in partition.clusters() {
        let points = collect_points(table, query, cluster);
        let (nearest, farthest) = match &points {
            Points::Numbers(p) if query.metric == Metric::AbsoluteDifference => sorted_extents(p),
            Points::Numbers(p) => pairwise_extents(p, |a, b| euclidean(&a.1, &b.1)),
            Points::Texts(p) => pairwise_extents(p, |a, b| levenshtein(&a.1, &b.1) as f64),
        };
        let diameter = farthest.iter().copied().fold(0.0, f64::max);
        if farthest.len() < 2 || diameter <= query.delta {
            continue;
        }
        let rows: Vec<u32> = match &points {
            Points::Numbers(p) => p.iter().map(|x| x.0).collect(),
            Points::Texts(p) => p.iter().map(|x| x.0).collect(),
        };
        let first = cluster[0] as usize;
        clusters.push(MfdCluster {
            lhs_value: query.lhs.iter().map(|c| table.value(first, c).map(ToString::to_string)).collect(),
            points: rows
                .iter()
                .enumerate()
                .map(|(i, &row)| MfdPoint {
                    row,
                    value: query
                        .rhs
                        .iter()
                        .map(|&c| table.value(row as usize, c).unwrap_or_default().to_string())
                        .collect(),
                    is_outlier: nearest[i] > query.delta,
                    nearest: nearest[i],
                    farthest: farthest[i],
                })
                .collect(),
        });
    }
    Ok(MfdReport { holds: clusters.is_empty(), clusters })
}

fn check_query(table: &Table, query: &MfdQuery) -> Result<(), MfdError> {
    if query.delta.is_nan() || query.delta < 0.0 {
        return Err(MfdError::InvalidQuery("delta must be a non-negative number".into()));
    }
    if query.rhs.is_empty() {
        return Err(MfdError::InvalidQuery("no right-hand column".into()));
    }
    for &c in query.lhs.iter().collect::<Vec<_>>().iter().chain(&query.rhs) {
        table.column(c)?;
    }
    if let Some(&c) = query.rhs.iter().find(|&&c| query.lhs.contains(c)) {
        return Err(MfdError::InvalidQuery(alloc::format!("column {c} is on both sides")));
    }
    match query.metric {
        Metric::AbsoluteDifference | Metric::Levenshtein if query.rhs.len() != 1 => {
            return Err(MfdError::InvalidQuery(alloc::format!(
                "{} takes exactly one right-hand column",
                query.metric.name()
            )));
        }
        Metric::AbsoluteDifference | Metric::Euclidean => {
            for &c in &query.rhs {
                let column = table.column(c)?;
                let found = column.inferred_type();
                if !(found.is_numeric() || found == ValueType::Empty) {
                    return Err(MfdError::TypeMismatch {
                        column: column.name().to_string(),
                        found,
                        metric: query.metric.name(),
                    });
                }
            }
        }
        Metric::Levenshtein => {}
    }
    Ok(())
}

// Rows with a null right-hand cell have no position and are skipped.
fn collect_points(table: &Table, query: &MfdQuery, cluster: &[u32]) -> Points {
    match query.metric {
        Metric::Levenshtein => Points::Texts(
            cluster
                .iter()
                .filter_map(|&r| table.value(r as usize, query.rhs[0]).map(|v| (r, v.chars().collect())))
                .collect(),
        ),
        _ => Points::Numbers(
            cluster
                .iter()
                .filter_map(|&r| {
                    let coords: Option<Vec<f64>> = query
                        .rhs
                        .iter()
                        .map(|&c| table.value(r as usize, c).and_then(parse_number))
                        .collect();
                    coords.map(|v| (r, v))
                })
                .collect(),
        ),
    }
}

/// Nearest and farthest distances for 1-D points via sort order.
fn sorted_extents(points: &[(u32, Vec<f64>)]) -> (Vec<f64>, Vec<f64>) {
    let n = points.len();
    if n < 2 {
        return (vec![0.0; n], vec![0.0; n]);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| points[a].1[0].partial_cmp(&points[b].1[0]).unwrap_or(Ordering::Equal));
    let lo = points[order[0]].1[0];
    let hi = points[order[n - 1]].1[0];
    let mut nearest = vec![f64::INFINITY; n];
    let mut farthest = vec![0.0; n];
    for (k, &i) in order.iter().enumerate() {
        let v = points[i].1[0];
        if k > 0 {
            nearest[i] = nearest[i].min(v - points[order[k - 1]].1[0]);
        }
        if k + 1 < n {
            nearest[i] = nearest[i].min(points[order[k + 1]].1[0] - v);
        }
        farthest[i] = (v - lo).max(hi - v);
    }
    (nearest, farthest)
}

fn pairwise_extents<P>(points: &[P], distance: impl Fn(&P, &P) -> f64) -> (Vec<f64>, Vec<f64>) {
    let n = points.len();
    if n < 2 {
        return (vec![0.0; n], vec![0.0; n]);
    }
    let mut nearest = vec![f64::INFINITY; n];
    let mut farthest = vec![0.0f64; n];
    for i in 0..n {
        for j in i + 1..n {
            let d = distance(&points[i], &points[j]);
            nearest[i] = nearest[i].min(d);
            nearest[j] = nearest[j].min(d);
            farthest[i] = farthest[i].max(d);
            farthest[j] = farthest[j].max(d);
        }
    }
    (nearest, farthest)
}

pub fn absolute_difference(a: f64, b: f64) -> f64 {
    libm::fabs(a - b)
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    libm::sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
}

/// Edit distance with unit insert, delete, and substitute costs.
pub fn levenshtein(a: &[char], b: &[char]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, ca) in a.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let above = row[j + 1];
            row[j + 1] = (diag + usize::from(ca != cb)).min(above + 1).min(row[j] + 1);
            diag = above;
        }
    }
    row[b.len()]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::CsvOptions;

    fn table(text: &str) -> Table {
        Table::from_csv_str("t", text, CsvOptions::default()).unwrap()
    }

    fn query(lhs: usize, rhs: usize, metric: Metric, delta: f64) -> MfdQuery {
        MfdQuery { lhs: ColumnSet::single(lhs), rhs: vec![rhs], metric, delta }
    }

    #[test]
    fn flags_far_point() {
        let t = table("city,temp\nA,10\nA,12\nA,100\nB,5\n");
        let report = validate_mfd(&t, &query(0, 1, Metric::AbsoluteDifference, 5.0)).unwrap();
        assert!(!report.holds);
        assert_eq!(report.clusters.len(), 1);
        let pts = &report.clusters[0].points;
        let flags: Vec<(u32, bool)> = pts.iter().map(|p| (p.row, p.is_outlier)).collect();
        assert_eq!(flags, vec![(0, false), (1, false), (2, true)]);
        assert_eq!(pts[2].nearest, 88.0);
        assert_eq!(pts[2].farthest, 90.0);
        assert_eq!(pts[0].nearest, 2.0);
        assert_eq!(report.clusters[0].diameter(), 90.0);
    }

    #[test]
    fn large_delta_holds() {
        let t = table("city,temp\nA,10\nA,12\nA,100\n");
        assert!(validate_mfd(&t, &query(0, 1, Metric::AbsoluteDifference, 90.0)).unwrap().holds);
        assert!(!validate_mfd(&t, &query(0, 1, Metric::AbsoluteDifference, 89.9)).unwrap().holds);
    }

    #[test]
    fn exact_fd_holds_at_zero() {
        let t = table("k,v\na,1\na,1\nb,2\n");
        assert!(validate_mfd(&t, &query(0, 1, Metric::AbsoluteDifference, 0.0)).unwrap().holds);
    }

    #[test]
    fn euclidean_and_levenshtein() {
        let t = table("k,x,y,name\na,0,0,kitten\na,3,4,sitting\nb,1,1,x\n");
        let q = MfdQuery { lhs: ColumnSet::single(0), rhs: vec![1, 2], metric: Metric::Euclidean, delta: 4.9 };
        let r = validate_mfd(&t, &q).unwrap();
        assert!(!r.holds);
        assert_eq!(r.clusters[0].points[0].farthest, 5.0);
        assert!(validate_mfd(&t, &MfdQuery { delta: 5.0, ..q }).unwrap().holds);
        let r = validate_mfd(&t, &query(0, 3, Metric::Levenshtein, 2.0)).unwrap();
        assert_eq!(r.clusters[0].points[0].farthest, 3.0);
        assert!(validate_mfd(&t, &query(0, 3, Metric::Levenshtein, 3.0)).unwrap().holds);
    }

    #[test]
    fn type_and_shape_errors() {
        let t = table("k,v,w\na,x,1\n");
        assert!(matches!(
            validate_mfd(&t, &query(0, 1, Metric::AbsoluteDifference, 1.0)),
            Err(MfdError::TypeMismatch { .. })
        ));
        let q = MfdQuery { lhs: ColumnSet::single(0), rhs: vec![2, 2], metric: Metric::AbsoluteDifference, delta: 1.0 };
        assert!(matches!(validate_mfd(&t, &q), Err(MfdError::InvalidQuery(_))));
        assert!(matches!(
            validate_mfd(&t, &query(0, 2, Metric::AbsoluteDifference, -1.0)),
            Err(MfdError::InvalidQuery(_))
        ));
        assert!(matches!(
            validate_mfd(&t, &query(0, 7, Metric::Levenshtein, 1.0)),
            Err(MfdError::Dataset(DatasetError::IndexOutOfRange { .. }))
        ));
        assert!(matches!(validate_mfd(&t, &query(2, 2, Metric::Levenshtein, 1.0)), Err(MfdError::InvalidQuery(_))));
    }

    #[test]
    fn null_right_hand_cells_are_skipped() {
        let t = table("k,v\na,1\na,\na,1\n");
        assert!(validate_mfd(&t, &query(0, 1, Metric::AbsoluteDifference, 0.0)).unwrap().holds);
    }

    #[test]
    fn sorting() {
        let t = table("k,v\na,0\na,50\nb,0\nb,1\nb,9\nb,30\n");
        let mut r = validate_mfd(&t, &query(0, 1, Metric::AbsoluteDifference, 5.0)).unwrap();
        r.sort_by(MfdSortKey::Outliers);
        assert_eq!(r.clusters[0].outlier_count(), 2);
        assert_eq!(r.clusters[0].lhs_value, vec![Some("a".into())]);
        r.sort_by(MfdSortKey::Index);
        assert_eq!(r.clusters[0].points[0].row, 0);
        r.sort_by(MfdSortKey::Distance);
        assert_eq!(r.clusters[0].diameter(), 50.0);
        assert_eq!(r.clusters[1].points[0].row, 2);
    }

    #[test]
    fn metric_basics() {
        let k: Vec<char> = "kitten".chars().collect();
        let s: Vec<char> = "sitting".chars().collect();
        assert_eq!(levenshtein(&k, &s), 3);
        assert_eq!(levenshtein(&s, &k), 3);
        assert_eq!(levenshtein(&[], &k), 6);
        assert_eq!(levenshtein(&k, &k), 0);
        assert_eq!(euclidean(&[0.0, 0.0], &[3.0, 4.0]), 5.0);
        assert_eq!(absolute_difference(2.0, -1.0), 3.0);
    }
}
