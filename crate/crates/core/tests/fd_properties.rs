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

use proptest::prelude::*;

use profiler_core::fd::{discover_fds, fd_error, removal_count, validate_fd, FdDiscoveryConfig};
use profiler_core::table::CsvOptions;
use profiler_core::{ColumnSet, Sequential, StrippedPartition, Table};
use profiler_testkit::{self as kit, Row};

fn grid(max_width: usize, max_rows: usize, max_alphabet: u8) -> impl Strategy<Value = (Vec<Row>, usize)> {
    (1..=max_width, 1..=max_rows).prop_flat_map(move |(w, h)| {
        let cell = prop_oneof![9 => (0..max_alphabet).prop_map(|v| Some(format!("v{v}"))), 1 => Just(None)];
        (prop::collection::vec(prop::collection::vec(cell, w), h), Just(w))
    })
}

fn table(rows: &[Row], width: usize) -> Table {
    Table::from_csv_str("t", &kit::to_csv(rows, width), CsvOptions::default()).unwrap()
}

fn pairs(fds: &[profiler_core::fd::Fd]) -> Vec<(Vec<usize>, usize)> {
    fds.iter().map(|f| (f.lhs.iter().collect(), f.rhs)).collect()
}

fn subsets(width: usize) -> impl Iterator<Item = Vec<usize>> {
    (0u32..1 << width).map(move |m| (0..width).filter(|c| m & (1 << c) != 0).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exact_discovery_matches_pair_scan((rows, width) in grid(5, 30, 3), max_lhs in 1usize..=5) {
        let t = table(&rows, width);
        let cfg = FdDiscoveryConfig { max_lhs, error_threshold: 0.0, thread_count: 1 };
        let found = discover_fds(&t, &cfg, &Sequential).unwrap();
        prop_assert_eq!(pairs(&found), kit::minimal_exact_fds(&rows, width, max_lhs));
    }

    #[test]
    fn approximate_discovery_matches_grouping((rows, width) in grid(5, 30, 3), max_lhs in 1usize..=4, k in 0usize..6) {
        let n = rows.len();
        let threshold = (k.min(n - 1)) as f64 / n as f64;
        let t = table(&rows, width);
        let cfg = FdDiscoveryConfig { max_lhs, error_threshold: threshold, thread_count: 1 };
        let found = discover_fds(&t, &cfg, &Sequential).unwrap();
        prop_assert_eq!(pairs(&found), kit::minimal_approximate_fds(&rows, width, max_lhs, k.min(n - 1)));
        for fd in &found {
            let lhs: Vec<usize> = fd.lhs.iter().collect();
            prop_assert_eq!(fd.error, kit::min_removal_grouping(&rows, &lhs, fd.rhs) as f64 / n as f64);
        }
    }

    #[test]
    fn g3_matches_exhaustive_removal((rows, width) in grid(4, 10, 3)) {
        let t = table(&rows, width);
        for rhs in 0..width {
            for lhs in subsets(width).filter(|s| !s.contains(&rhs)) {
                let set: ColumnSet = lhs.iter().copied().collect();
                let oracle = kit::min_removal_exhaustive(&rows, &lhs, rhs, true);
                prop_assert_eq!(removal_count(&t, &set, rhs).unwrap(), oracle);
                prop_assert_eq!(fd_error(&t, &set, rhs).unwrap(), oracle as f64 / rows.len() as f64);
            }
        }
    }

    #[test]
    fn adding_lhs_columns_never_raises_error((rows, width) in grid(5, 40, 4)) {
        let t = table(&rows, width);
        for rhs in 0..width {
            for lhs in subsets(width).filter(|s| !s.contains(&rhs)) {
                let set: ColumnSet = lhs.iter().copied().collect();
                let base = fd_error(&t, &set, rhs).unwrap();
                for extra in (0..width).filter(|c| *c != rhs && !set.contains(*c)) {
                    prop_assert!(fd_error(&t, &set.with(extra), rhs).unwrap() <= base);
                }
            }
        }
    }

    #[test]
    fn raising_threshold_keeps_a_generalization((rows, width) in grid(5, 30, 3), k in 0usize..5) {
        let t = table(&rows, width);
        let n = rows.len() as f64;
        let low = FdDiscoveryConfig { max_lhs: width, error_threshold: (k as f64 / n).min(0.99), thread_count: 1 };
        let found = discover_fds(&t, &low, &Sequential).unwrap();
        for fd in &found {
            for bump in [0.0, 0.1, 0.3] {
                let high = FdDiscoveryConfig { error_threshold: (fd.error + bump).min(0.99), ..low };
                let wider = discover_fds(&t, &high, &Sequential).unwrap();
                prop_assert!(wider.iter().any(|g| g.rhs == fd.rhs && g.lhs.is_subset(&fd.lhs)));
            }
        }
    }

    #[test]
    fn validation_agrees_with_discovery((rows, width) in grid(5, 30, 3)) {
        let t = table(&rows, width);
        let cfg = FdDiscoveryConfig { max_lhs: width, error_threshold: 0.0, thread_count: 1 };
        let found = discover_fds(&t, &cfg, &Sequential).unwrap();
        for rhs in 0..width {
            for lhs in subsets(width).filter(|s| !s.contains(&rhs)) {
                let set: ColumnSet = lhs.iter().copied().collect();
                let report = validate_fd(&t, &set, rhs, 0.0).unwrap();
                let implied = found.iter().any(|f| f.rhs == rhs && f.lhs.is_subset(&set));
                prop_assert_eq!(report.holds, implied);
                prop_assert_eq!(report.clusters.is_empty(), report.error == 0.0);
                for c in &report.clusters {
                    prop_assert!(c.distinct_rhs_count >= 2);
                    for &(row, _) in &c.rows {
                        let lhs_value: Vec<Option<String>> = lhs.iter().map(|&col| rows[row as usize][col].clone()).collect();
                        prop_assert_eq!(&lhs_value, &c.lhs_value);
                    }
                }
            }
        }
    }

    #[test]
    fn partition_chain_matches_direct_grouping((rows, width) in grid(6, 60, 4)) {
        let t = table(&rows, width);
        for lhs in subsets(width) {
            let set: ColumnSet = lhs.iter().copied().collect();
            let p = StrippedPartition::for_columns(&t, &set).unwrap();
            let mut groups: std::collections::BTreeMap<Vec<Option<String>>, Vec<u32>> = Default::default();
            for (r, row) in rows.iter().enumerate() {
                groups.entry(lhs.iter().map(|&c| row[c].clone()).collect()).or_default().push(r as u32);
            }
            let mut expected: Vec<Vec<u32>> = groups.into_values().filter(|g| g.len() >= 2).collect();
            expected.sort();
            let got: Vec<Vec<u32>> = p.clusters().map(<[u32]>::to_vec).collect();
            prop_assert_eq!(got, expected);
            prop_assert!(p.covered_rows() <= rows.len());
        }
    }

    #[test]
    fn intersection_refines_both_sides((rows, width) in grid(4, 60, 3), a in 0usize..4, b in 0usize..4) {
        let t = table(&rows, width);
        let (a, b) = (a % width, b % width);
        let pa = StrippedPartition::build(&t, a).unwrap();
        let pb = StrippedPartition::build(&t, b).unwrap();
        let ab = pa.intersect(&pb).unwrap();
        prop_assert_eq!(&ab, &pb.intersect(&pa).unwrap());
        for cluster in ab.clusters() {
            prop_assert!(pa.clusters().any(|c| cluster.iter().all(|r| c.contains(r))));
            prop_assert!(pb.clusters().any(|c| cluster.iter().all(|r| c.contains(r))));
        }
        let mut seen = std::collections::BTreeSet::new();
        for cluster in ab.clusters() {
            prop_assert!(cluster.len() >= 2);
            for r in cluster {
                prop_assert!(seen.insert(*r));
            }
        }
    }

    #[test]
    fn dictionary_codes_are_injective((rows, width) in grid(3, 50, 5)) {
        let t = table(&rows, width);
        for c in 0..width {
            let codes = t.columns()[c].codes();
            for i in 0..rows.len() {
                for j in 0..rows.len() {
                    prop_assert_eq!(codes[i] == codes[j], rows[i][c] == rows[j][c]);
                }
            }
        }
    }

    #[test]
    fn csv_round_trip(cells in prop::collection::vec(prop::collection::vec(
        prop_oneof![Just(None), "[a-z,\" \\n]{0,6}".prop_map(Some)], 3), 1..20)) {
        let t = Table::from_records("t", vec!["a".into(), "b".into(), "c".into()], &cells, Default::default()).unwrap();
        let back = Table::from_csv_str("t", &t.to_csv_string(), CsvOptions::default()).unwrap();
        for (r, row) in cells.iter().enumerate() {
            prop_assert_eq!(&back.row(r), row);
        }
    }
}
