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

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// A set of column indexes, kept sorted.
///
/// Ordering is lexicographic over the sorted index lists, so `[0] < [0, 1] <
/// [1]`. Discovery results are ordered by this.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct ColumnSet(Vec<u32>);

impl ColumnSet {
    pub fn empty() -> Self {
        ColumnSet(Vec::new())
    }

    pub fn single(column: usize) -> Self {
        ColumnSet(alloc::vec![column as u32])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, column: usize) -> bool {
        self.0.binary_search(&(column as u32)).is_ok()
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = usize> + ExactSizeIterator + '_ {
        self.0.iter().map(|&c| c as usize)
    }

    pub fn with(&self, column: usize) -> Self {
        let mut out = self.clone();
        if let Err(pos) = out.0.binary_search(&(column as u32)) {
            out.0.insert(pos, column as u32);
        }
        out
    }

    pub fn without(&self, column: usize) -> Self {
        let mut out = self.clone();
        if let Ok(pos) = out.0.binary_search(&(column as u32)) {
            out.0.remove(pos);
        }
        out
    }

    pub fn is_subset(&self, other: &ColumnSet) -> bool {
        self.0.iter().all(|c| other.0.binary_search(c).is_ok())
    }

    pub fn last(&self) -> Option<usize> {
        self.0.last().map(|&c| c as usize)
    }

    /// Renders `[a, b]` using the supplied column names.
    pub fn render(&self, names: &[&str]) -> String {
        let mut out = String::from("[");
        for (i, c) in self.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            out.push_str(names.get(c).copied().unwrap_or("?"));
        }
        out.push(']');
        out
    }
}

impl FromIterator<usize> for ColumnSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut v: Vec<u32> = iter.into_iter().map(|c| c as u32).collect();
        v.sort_unstable();
        v.dedup();
        ColumnSet(v)
    }
}

impl fmt::Display for ColumnSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str("]")
    }
}
