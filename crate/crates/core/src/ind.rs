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

//! Unary inclusion dependencies.
//!
//! Discovery merges every attribute's sorted distinct values at once. Each
//! attribute starts with all other attributes as referenced candidates; at
//! each value, attributes holding it drop every candidate that does not also
//! hold it. Values compare as raw text; nulls are ignored on both sides.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::table::{DatasetError, Table};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IndError {
    #[error("unknown table {0:?}")]
    UnknownTable(String),
    #[error("unknown column {column} in table {table:?}")]
    UnknownColumn { table: String, column: String },
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AttributeRef {
    pub table: String,
    pub column: usize,
}

impl AttributeRef {
    pub fn new(table: &str, column: usize) -> Self {
        AttributeRef { table: table.to_string(), column }
    }

    fn resolve<'t>(&self, tables: &[&'t Table]) -> Result<&'t crate::table::Column, IndError> {
        let table = tables
            .iter()
            .find(|t| t.name() == self.table)
            .ok_or_else(|| IndError::UnknownTable(self.table.clone()))?;
        table.column(self.column).map_err(|_| IndError::UnknownColumn {
            table: self.table.clone(),
            column: self.column.to_string(),
        })
    }

    /// `table.column_name`
    pub fn render(&self, tables: &[&Table]) -> String {
        match self.resolve(tables) {
            Ok(column) => format!("{}.{}", self.table, column.name()),
            Err(_) => format!("{}.{}", self.table, self.column),
        }
    }
}

/// `dependent ⊆ referenced`
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Ind {
    pub dependent: AttributeRef,
    pub referenced: AttributeRef,
}

impl Ind {
    pub fn render(&self, tables: &[&Table]) -> String {
        format!("{} ⊆ {}", self.dependent.render(tables), self.referenced.render(tables))
    }
}

/// Given one ascending, duplicate-free value stream per attribute, returns
/// every `(dependent, referenced)` index pair whose containment holds.
pub fn merge_sorted<S, I>(sources: Vec<I>) -> Vec<(usize, usize)>
where
    S: AsRef<str> + Ord,
    I: Iterator<Item = S>,
{
    let k = sources.len();
    let mut sources = sources;
    let mut heads: Vec<Option<S>> = sources.iter_mut().map(Iterator::next).collect();
    let mut candidates: Vec<Vec<bool>> = (0..k).map(|a| (0..k).map(|b| a != b).collect()).collect();
    let mut in_group = vec![false; k];
    let mut group: Vec<usize> = Vec::with_capacity(k);

    while let Some(min) = heads.iter().flatten().min() {
        group.clear();
        group.extend((0..k).filter(|&i| heads[i].as_ref() == Some(min)));
        for &i in &group {
            in_group[i] = true;
        }
        for &a in &group {
            for (b, alive) in candidates[a].iter_mut().enumerate() {
                if *alive && !in_group[b] {
                    *alive = false;
                }
            }
        }
        for &i in &group {
            in_group[i] = false;
            heads[i] = sources[i].next();
        }
    }

    let mut out = Vec::new();
    for (a, row) in candidates.iter().enumerate() {
        for (b, &alive) in row.iter().enumerate() {
            if alive {
                out.push((a, b));
            }
        }
    }
    out
}

/// Every attribute of `tables`, in table order then column order.
pub fn attributes(tables: &[&Table]) -> Vec<AttributeRef> {
    tables
        .iter()
        .flat_map(|t| (0..t.column_count()).map(move |c| AttributeRef::new(t.name(), c)))
        .collect()
}

/// Sorted distinct non-null values of one column.
pub fn sorted_distinct(table: &Table, column: usize) -> Result<Vec<&str>, DatasetError> {
    let mut values: Vec<&str> = table.column(column)?.distinct_values().collect();
    values.sort_unstable();
    Ok(values)
}

/// All unary inclusion dependencies among the columns of `tables`.
pub fn discover_unary_inds(tables: &[&Table]) -> Vec<Ind> {
    let attrs = attributes(tables);
    let sources: Vec<_> = tables
        .iter()
        .flat_map(|t| (0..t.column_count()).map(move |c| sorted_distinct(t, c).unwrap_or_default().into_iter()))
        .collect();
    let mut inds: Vec<Ind> = merge_sorted(sources)
        .into_iter()
        .map(|(a, b)| Ind { dependent: attrs[a].clone(), referenced: attrs[b].clone() })
        .collect();
    inds.sort();
    inds
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IndValidation {
    pub holds: bool,
    /// Up to the requested number of dependent values absent from the
    /// referenced column, ascending.
    pub missing: Vec<String>,
    pub missing_total: usize,
}

pub const DEFAULT_MISSING_SAMPLE: usize = 10;

pub fn validate_ind(ind: &Ind, tables: &[&Table], max_missing: usize) -> Result<IndValidation, IndError> {
    let dependent = ind.dependent.resolve(tables)?;
    let referenced = ind.referenced.resolve(tables)?;
    let present: BTreeSet<&str> = referenced.distinct_values().collect();
    let absent: BTreeSet<&str> = dependent.distinct_values().filter(|v| !present.contains(v)).collect();
    Ok(IndValidation {
        holds: absent.is_empty(),
        missing_total: absent.len(),
        missing: absent.into_iter().take(max_missing).map(ToString::to_string).collect(),
    })
}
