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

use profiler_core::fd::fd_error;
use profiler_core::stats::profile_table;
use profiler_core::table::CsvOptions;
use profiler_core::typo::{apply_fixes, find_typo_candidates, majority_fixes, TypoPipelineConfig};
use profiler_core::{ColumnSet, Sequential, Table};
use profiler_testkit::{self as kit, Row};

/// Column 0 is a group key, column 1 its clean image, column 2 binary noise.
/// Returns the corrupted table and the corrupted row indexes.
fn corrupted(groups: usize, size: usize, hits: &[usize], seed: u64) -> (Table, Vec<u32>) {
    use kit::rand::Rng;
    let mut rng = kit::rng(seed);
    let mut rows: Vec<Row> = (0..groups * size)
        .map(|r| {
            let g = r % groups;
            vec![Some(format!("k{g}")), Some(format!("city{g}")), Some(format!("n{}", rng.random_range(0..2)))]
        })
        .collect();
    let mut corrupted = Vec::new();
    for (i, &g) in hits.iter().enumerate() {
        let row = g % groups;
        rows[row][1] = Some(format!("cty{g}x{i}"));
        corrupted.push(row as u32);
    }
    corrupted.sort();
    (Table::from_csv_str("t", &kit::to_csv(&rows, 3), CsvOptions::default()).unwrap(), corrupted)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn injected_typos_are_flagged_and_fixed(groups in 5usize..10, size in 3usize..6, k in 1usize..=5, seed in any::<u64>()) {
        let hits: Vec<usize> = (0..k).collect();
        let (t, corrupted) = corrupted(groups, size, &hits, seed);
        let n = t.row_count() as f64;
        let cfg = TypoPipelineConfig { error_threshold: k as f64 / n + 1e-9, ..Default::default() };
        let findings = find_typo_candidates(&t, &cfg, &Sequential).unwrap();
        let finding = findings.iter().find(|f| f.fd.rhs == 1 && f.fd.lhs == ColumnSet::single(0));
        prop_assert!(finding.is_some());
        let finding = finding.unwrap();
        let mut suspects: Vec<u32> = finding.clusters.iter().flat_map(|c| c.suspect_rows.iter().copied()).collect();
        suspects.sort();
        prop_assert_eq!(&suspects, &corrupted);

        let fixed = apply_fixes(&t, &majority_fixes(finding), "fixed").unwrap();
        prop_assert_eq!(fd_error(&fixed, &ColumnSet::single(0), 1).unwrap(), 0.0);
        let again = find_typo_candidates(&fixed, &cfg, &Sequential).unwrap();
        prop_assert!(!again.iter().any(|f| f.fd.rhs == 1 && f.fd.lhs == ColumnSet::single(0)));
    }

    #[test]
    fn column_profile_ignores_row_order(rows in prop::collection::vec(
        prop::collection::vec(prop_oneof![Just(None), (-50i32..50).prop_map(|v| Some(v.to_string())), "[a-c]{1,2}".prop_map(Some)], 3), 1..40),
        seed in any::<u64>()) {
        use kit::rand::seq::SliceRandom;
        let mut shuffled = rows.clone();
        shuffled.shuffle(&mut kit::rng(seed));
        let names = vec!["a".to_string(), "b".to_string(), "c".to_string()];
        let a = profile_table(&Table::from_records("t", names.clone(), &rows, Default::default()).unwrap());
        let b = profile_table(&Table::from_records("t", names, &shuffled, Default::default()).unwrap());
        for (x, y) in a.iter().zip(&b) {
            prop_assert_eq!((&x.min, &x.max, x.null_count, x.distinct_count, x.inferred_type), (&y.min, &y.max, y.null_count, y.distinct_count, y.inferred_type));
            for (p, q) in [(x.mean, y.mean), (x.std_dev, y.std_dev)] {
                prop_assert_eq!(p.is_some(), q.is_some());
                if let (Some(p), Some(q)) = (p, q) { prop_assert!((p - q).abs() <= 1e-9 * (1.0 + p.abs())); }
            }
        }
    }
}
