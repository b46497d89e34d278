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

//! Pattern growth over a prefix tree of frequency-ordered transactions.
//!
//! Items in each path are ordered by descending support, ties by item id.
//! Mining walks items from least to most frequent, emitting each with the
//! current suffix and recursing into the tree built from its prefix paths.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use super::TransactionSet;

const ROOT: usize = 0;

struct Node {
    item: u32,
    count: usize,
    parent: usize,
    children: BTreeMap<u32, usize>,
}

struct FpTree {
    nodes: Vec<Node>,
    // item -> nodes carrying it
    header: BTreeMap<u32, Vec<usize>>,
    // frequent items, most frequent first
    order: Vec<(u32, usize)>,
}

impl FpTree {
    fn build(paths: &[(Vec<u32>, usize)], min_count: usize) -> FpTree {
        let mut support: BTreeMap<u32, usize> = BTreeMap::new();
        for (items, weight) in paths {
            for &i in items {
                *support.entry(i).or_default() += weight;
            }
        }
        let mut order: Vec<(u32, usize)> = support.into_iter().filter(|&(_, c)| c >= min_count).collect();
        order.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        let rank: BTreeMap<u32, usize> = order.iter().enumerate().map(|(r, &(i, _))| (i, r)).collect();

        let mut tree = FpTree {
            nodes: vec![Node { item: u32::MAX, count: 0, parent: ROOT, children: BTreeMap::new() }],
            header: BTreeMap::new(),
            order,
        };
        let mut path: Vec<u32> = Vec::new();
        for (items, weight) in paths {
            path.clear();
            path.extend(items.iter().copied().filter(|i| rank.contains_key(i)));
            path.sort_by_key(|i| rank[i]);
            let mut at = ROOT;
            for &item in &path {
                at = match tree.nodes[at].children.get(&item) {
                    Some(&child) => child,
                    None => {
                        let id = tree.nodes.len();
                        tree.nodes.push(Node { item, count: 0, parent: at, children: BTreeMap::new() });
                        tree.nodes[at].children.insert(item, id);
                        tree.header.entry(item).or_default().push(id);
                        id
                    }
                };
                tree.nodes[at].count += weight;
            }
        }
        tree
    }

    fn prefix_paths(&self, item: u32) -> Vec<(Vec<u32>, usize)> {
        let mut out = Vec::new();
        for &node in self.header.get(&item).map(Vec::as_slice).unwrap_or(&[]) {
            let mut path = Vec::new();
            let mut at = self.nodes[node].parent;
            while at != ROOT {
                path.push(self.nodes[at].item);
                at = self.nodes[at].parent;
            }
            if !path.is_empty() {
                out.push((path, self.nodes[node].count));
            }
        }
        out
    }
}

pub(super) fn mine(txns: &TransactionSet, min_count: usize) -> Vec<(Vec<u32>, usize)> {
    let paths: Vec<(Vec<u32>, usize)> = txns.transactions().iter().map(|t| (t.clone(), 1)).collect();
    let tree = FpTree::build(&paths, min_count);
    let mut out = Vec::new();
    grow(&tree, &mut Vec::new(), min_count, &mut out);
    out
}

fn grow(tree: &FpTree, suffix: &mut Vec<u32>, min_count: usize, out: &mut Vec<(Vec<u32>, usize)>) {
    for &(item, count) in tree.order.iter().rev() {
        suffix.push(item);
        let mut itemset = suffix.clone();
        itemset.sort_unstable();
        out.push((itemset, count));
        let conditional = FpTree::build(&tree.prefix_paths(item), min_count);
        if !conditional.order.is_empty() {
            grow(&conditional, suffix, min_count, out);
        }
        suffix.pop();
    }
}
