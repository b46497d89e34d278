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

//! Level-wise candidate generation with subset pruning.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use super::{is_sorted_subset, TransactionSet};

pub(super) fn mine(txns: &TransactionSet, min_count: usize) -> Vec<(Vec<u32>, usize)> {
    let mut counts = vec![0usize; txns.item_count()];
    for t in txns.transactions() {
        for &i in t {
            counts[i as usize] += 1;
        }
    }
    let mut level: Vec<(Vec<u32>, usize)> = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c >= min_count)
        .map(|(i, &c)| (vec![i as u32], c))
        .collect();
    let mut out = Vec::new();
    while !level.is_empty() {
        let candidates = join(&level);
        out.append(&mut level);
        if candidates.is_empty() {
            break;
        }
        let mut tally = vec![0usize; candidates.len()];
        for t in txns.transactions() {
            if t.len() < candidates[0].len() {
                continue;
            }
            for (c, n) in candidates.iter().zip(tally.iter_mut()) {
                if is_sorted_subset(c, t) {
                    *n += 1;
                }
            }
        }
        level = candidates
            .into_iter()
            .zip(tally)
            .filter(|(_, n)| *n >= min_count)
            .collect();
    }
    out
}

/// Joins sorted itemsets sharing all but the last item, keeping candidates
/// whose every one-smaller subset is frequent.
fn join(level: &[(Vec<u32>, usize)]) -> Vec<Vec<u32>> {
    let frequent: BTreeSet<&[u32]> = level.iter().map(|(s, _)| s.as_slice()).collect();
    let mut sorted: Vec<&Vec<u32>> = level.iter().map(|(s, _)| s).collect();
    sorted.sort();
    let mut out = Vec::new();
    for (i, a) in sorted.iter().enumerate() {
        let k = a.len();
        for b in &sorted[i + 1..] {
            if a[..k - 1] != b[..k - 1] {
                break;
            }
            let mut candidate = (*a).clone();
            candidate.push(b[k - 1]);
            let mut subset = Vec::with_capacity(k);
            let all_frequent = (0..candidate.len()).all(|skip| {
                subset.clear();
                subset.extend(candidate.iter().enumerate().filter(|(j, _)| *j != skip).map(|(_, &x)| x));
                frequent.contains(subset.as_slice())
            });
            if all_frequent {
                out.push(candidate);
            }
        }
    }
    out
}
