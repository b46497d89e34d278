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

//! Per-column summary statistics.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::runtime::{Runtime, Sequential};
use crate::table::{parse_number, Column, Table, ValueType};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ColumnStats {
    pub name: String,
    pub inferred_type: ValueType,
    pub row_count: usize,
    pub null_count: usize,
    pub distinct_count: usize,
    /// Numeric order for integer and real columns, byte order otherwise.
    pub min: Option<String>,
    pub max: Option<String>,
    pub mean: Option<f64>,
    /// Population standard deviation.
    pub std_dev: Option<f64>,
}

pub fn profile_table(table: &Table) -> Vec<ColumnStats> {
    profile_table_with(table, &Sequential)
}

pub fn profile_table_with<R: Runtime>(table: &Table, runtime: &R) -> Vec<ColumnStats> {
    runtime.map(table.column_count(), |c| profile_column(&table.columns()[c]))
}

pub fn profile_column(column: &Column) -> ColumnStats {
    let ty = column.inferred_type();
    let distinct: Vec<&str> = column.distinct_values().collect();
    let (min, max) = if ty.is_numeric() {
        let by_number = |a: &&str, b: &&str| {
            let (x, y) = (parse_number(a).unwrap_or(0.0), parse_number(b).unwrap_or(0.0));
            x.partial_cmp(&y).unwrap_or(Ordering::Equal).then_with(|| a.cmp(b))
        };
        (distinct.iter().copied().min_by(by_number), distinct.iter().copied().max_by(by_number))
    } else {
        (distinct.iter().copied().min(), distinct.iter().copied().max())
    };

    let (mean, std_dev) = if ty.is_numeric() {
        // Welford's update over every non-null cell.
        let (mut n, mut mean, mut m2) = (0.0f64, 0.0f64, 0.0f64);
        for row in 0..column.len() {
            if let Some(x) = column.value(row).and_then(parse_number) {
                n += 1.0;
                let delta = x - mean;
                mean += delta / n;
                m2 += delta * (x - mean);
            }
        }
        if n > 0.0 {
            (Some(mean), Some(libm::sqrt(m2 / n)))
        } else {
            (None, None)
        }
    } else {
        (None, None)
    };

    ColumnStats {
        name: column.name().to_string(),
        inferred_type: ty,
        row_count: column.len(),
        null_count: column.null_count(),
        distinct_count: distinct.len(),
        min: min.map(|s| s.to_string()),
        max: max.map(|s| s.to_string()),
        mean,
        std_dev,
    }
}
