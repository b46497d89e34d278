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

//! Level-wise lattice search over column sets with stripped partitions.
//!
//! Level `l` holds column sets of size `l`. For a set `X` and `A` in `X`, the
//! candidate `X \ {A} -> A` is tested only while `A` is in the set's
//! right-hand-side candidates `C+(X)`, the intersection of `C+` over the
//! level below. A hit removes `A` from `C+(X)`; an exact hit also removes
//! every column outside `X`. Sets with empty `C+` are dropped. In exact
//! mode, superkeys are dropped after emitting their minimal dependencies.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::sync::atomic::{AtomicUsize, Ordering};

use super::{ratio, Fd, FdDiscoveryConfig, FdError};
use crate::colset::ColumnSet;
use crate::pli::StrippedPartition;
use crate::runtime::{Interrupt, Runtime};
use crate::table::Table;

struct Node {
    set: ColumnSet,
    partition: StrippedPartition,
    rhs_candidates: ColumnSet,
}

struct Candidate {
    set: ColumnSet,
    // Indexes into the previous level whose partitions multiply to this one.
    parents: Option<(usize, usize)>,
}

struct Outcome {
    node: Option<Node>,
    fds: Vec<Fd>,
}

/// Finds every minimal dependency with g3 error at most
/// `config.error_threshold` and at most `config.max_lhs` left-hand columns,
/// sorted by left-hand side then right-hand side.
pub fn discover_fds<R: Runtime>(
    table: &Table,
    config: &FdDiscoveryConfig,
    runtime: &R,
) -> Result<Vec<Fd>, FdError> {
    config.validate()?;
    let width = table.column_count();
    let rows = table.row_count();
    let threshold = config.error_threshold;
    let exact = threshold == 0.0;
    let top_level = config.max_lhs.saturating_add(1).min(width);
    let all_columns: ColumnSet = (0..width).collect();
    let whole = StrippedPartition::all_rows(rows);

    runtime.checkpoint(0.0, whole.heap_bytes())?;

    let mut fds: Vec<Fd> = Vec::new();
    let mut prev: Vec<Node> = Vec::new();
    let mut prev_index: BTreeMap<ColumnSet, usize> = BTreeMap::new();
    let mut candidates: Vec<Candidate> =
        (0..width).map(|c| Candidate { set: ColumnSet::single(c), parents: None }).collect();

    for level in 1..=top_level {
        if candidates.is_empty() {
            break;
        }
        let prev_bytes =
            whole.heap_bytes() + prev.iter().map(|n| n.partition.heap_bytes()).sum::<usize>();
        let total = candidates.len();
        let done = AtomicUsize::new(0);
        let level_bytes = AtomicUsize::new(0);

        let lhs_partition = |lhs: &ColumnSet| -> &StrippedPartition {
            if lhs.is_empty() {
                &whole
            } else {
                &prev[prev_index[lhs]].partition
            }
        };

        let outcomes: Vec<Result<Outcome, Interrupt>> = runtime.map(total, |i| {
            let candidate = &candidates[i];
            let set = &candidate.set;
            let partition = match candidate.parents {
                None => {
                    let column = set.last().unwrap_or(0);
                    StrippedPartition::from_column(&table.columns()[column], column)
                }
                Some((a, b)) => prev[a]
                    .partition
                    .intersect(&prev[b].partition)
                    .expect("partitions of one table share a row count"),
            };

            let mut rhs_candidates = if level == 1 {
                all_columns.clone()
            } else {
                let mut acc: Option<ColumnSet> = None;
                for b in set.iter() {
                    let below = &prev[prev_index[&set.without(b)]].rhs_candidates;
                    acc = Some(match acc {
                        None => below.clone(),
                        Some(current) => current.iter().filter(|&c| below.contains(c)).collect(),
                    });
                }
                acc.unwrap_or_default()
            };

            let mut found = Vec::new();
            for a in set.iter() {
                if !rhs_candidates.contains(a) {
                    continue;
                }
                let lhs = set.without(a);
                let removed = lhs_partition(&lhs).removal_count(&partition);
                let error = ratio(removed, rows);
                if error <= threshold {
                    found.push(Fd { lhs, rhs: a, error });
                    rhs_candidates = rhs_candidates.without(a);
                    if removed == 0 {
                        rhs_candidates = rhs_candidates.iter().filter(|&c| set.contains(c)).collect();
                    }
                }
            }

            let keep = if exact && partition.is_unique() {
                // `set` determines every column. `set -> A` is minimal when
                // no immediate subset determines `A`.
                if level <= config.max_lhs {
                    for a in (0..width).filter(|&a| !set.contains(a)) {
                        let column = &table.columns()[a];
                        let minimal = set
                            .iter()
                            .all(|b| lhs_partition(&set.without(b)).removal_count_for_column(column) > 0);
                        if minimal {
                            found.push(Fd { lhs: set.clone(), rhs: a, error: 0.0 });
                        }
                    }
                }
                false
            } else {
                !rhs_candidates.is_empty()
            };

            let bytes = level_bytes.fetch_add(partition.heap_bytes(), Ordering::Relaxed)
                + partition.heap_bytes();
            let finished = done.fetch_add(1, Ordering::Relaxed) + 1;
            let progress = ((level - 1) as f64 + finished as f64 / total as f64) / top_level as f64;
            runtime.checkpoint(progress, prev_bytes + bytes)?;

            Ok(Outcome {
                node: keep.then(|| Node { set: set.clone(), partition, rhs_candidates }),
                fds: found,
            })
        });

        let mut survivors = Vec::new();
        for outcome in outcomes {
            let outcome = outcome?;
            fds.extend(outcome.fds);
            survivors.extend(outcome.node);
        }

        prev = survivors;
        prev_index = prev.iter().enumerate().map(|(i, n)| (n.set.clone(), i)).collect();
        candidates = if level < top_level { next_level(&prev, &prev_index) } else { Vec::new() };
    }

    fds.sort();
    runtime.checkpoint(1.0, 0)?;
    Ok(fds)
}

/// Joins sets that share all but their last column, keeping a join only when
/// every subset one smaller survived. `level` must be sorted.
fn next_level(level: &[Node], index: &BTreeMap<ColumnSet, usize>) -> Vec<Candidate> {
    let mut out = Vec::new();
    let mut start = 0;
    while start < level.len() {
        let prefix = level[start].set.without(level[start].set.last().unwrap_or(0));
        let mut end = start + 1;
        while end < level.len()
            && level[end].set.without(level[end].set.last().unwrap_or(0)) == prefix
        {
            end += 1;
        }
        for i in start..end {
            for j in i + 1..end {
                let joined = level[i].set.with(level[j].set.last().unwrap_or(0));
                if joined.iter().all(|c| index.contains_key(&joined.without(c))) {
                    out.push(Candidate { set: joined, parents: Some((i, j)) });
                }
            }
        }
        start = end;
    }
    out.sort_by(|a, b| a.set.cmp(&b.set));
    out
}
