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

//! Stored task results and the sorted, filtered, paginated view of them.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::spec::TaskKind;

pub const DEFAULT_PAGE_SIZE: usize = 50;
pub const MAX_PAGE_SIZE: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SortValue {
    Number(f64),
    Text(String),
}

impl SortValue {
    fn compare(&self, other: &SortValue) -> Ordering {
        match (self, other) {
            (SortValue::Number(a), SortValue::Number(b)) => a.total_cmp(b),
            (SortValue::Text(a), SortValue::Text(b)) => a.cmp(b),
            (SortValue::Number(_), SortValue::Text(_)) => Ordering::Less,
            (SortValue::Text(_), SortValue::Number(_)) => Ordering::Greater,
        }
    }
}

impl From<f64> for SortValue {
    fn from(v: f64) -> Self {
        SortValue::Number(v)
    }
}

impl From<usize> for SortValue {
    fn from(v: usize) -> Self {
        SortValue::Number(v as f64)
    }
}

impl From<&str> for SortValue {
    fn from(v: &str) -> Self {
        SortValue::Text(v.to_string())
    }
}

impl From<String> for SortValue {
    fn from(v: String) -> Self {
        SortValue::Text(v)
    }
}

/// One primitive instance of a result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultItem {
    /// Line-oriented rendering; regex filters match against it.
    pub text: String,
    pub data: Value,
    #[serde(default)]
    pub keys: BTreeMap<String, SortValue>,
}

impl ResultItem {
    pub fn new(text: impl Into<String>, data: Value) -> Self {
        ResultItem { text: text.into(), data, keys: BTreeMap::new() }
    }

    pub fn key(mut self, name: &str, value: impl Into<SortValue>) -> Self {
        self.keys.insert(name.to_string(), value.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultSet {
    pub kind: TaskKind,
    /// Whole-result facts, such as whether a validated dependency holds.
    pub summary: Value,
    pub items: Vec<ResultItem>,
    /// Keys every item can be sorted by, in addition to `index`.
    pub sort_keys: Vec<String>,
}

impl ResultSet {
    pub fn new(kind: TaskKind, summary: Value, items: Vec<ResultItem>, sort_keys: &[&str]) -> Self {
        ResultSet { kind, summary, items, sort_keys: sort_keys.iter().map(|s| s.to_string()).collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PageItem {
    /// Position in the unsorted result.
    pub index: usize,
    pub text: String,
    pub data: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultPage {
    pub total_count: usize,
    pub page: usize,
    pub page_size: usize,
    pub sort: Option<String>,
    pub filter: Option<String>,
    pub summary: Value,
    pub items: Vec<PageItem>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResultQuery {
    /// A sort key, `-` prefixed for descending order.
    pub sort: Option<String>,
    pub filter: Option<String>,
    /// 1-based.
    pub page: Option<usize>,
    pub page_size: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QueryError {
    #[error("invalid filter pattern: {0}")]
    BadRegex(String),
    #[error("unknown sort key {key:?}; available: {available}")]
    UnknownSortKey { key: String, available: String },
    #[error("page and page_size must be at least 1, page_size at most {MAX_PAGE_SIZE}")]
    BadPage,
}

impl ResultSet {
    /// Indexes of the items passing `filter`, ordered by `sort`. Ties keep
    /// result order; items lacking the key go last.
    pub fn select(&self, sort: Option<&str>, filter: Option<&str>) -> Result<Vec<usize>, QueryError> {
        let regex = match filter.filter(|f| !f.is_empty()) {
            Some(f) => Some(regex::Regex::new(f).map_err(|e| QueryError::BadRegex(e.to_string()))?),
            None => None,
        };
        let mut selected: Vec<usize> = (0..self.items.len())
            .filter(|&i| regex.as_ref().is_none_or(|r| r.is_match(&self.items[i].text)))
            .collect();
        if let Some(sort) = sort.filter(|s| !s.is_empty()) {
            let (key, descending) = match sort.strip_prefix('-') {
                Some(k) => (k, true),
                None => (sort, false),
            };
            if key == "index" {
                if descending {
                    selected.reverse();
                }
            } else if self.sort_keys.iter().any(|k| k == key) {
                selected.sort_by(|&a, &b| {
                    match (self.items[a].keys.get(key), self.items[b].keys.get(key)) {
                        (Some(x), Some(y)) => {
                            let o = x.compare(y);
                            if descending {
                                o.reverse()
                            } else {
                                o
                            }
                        }
                        (Some(_), None) => Ordering::Less,
                        (None, Some(_)) => Ordering::Greater,
                        (None, None) => Ordering::Equal,
                    }
                    .then(a.cmp(&b))
                });
            } else {
                let mut available = vec!["index".to_string()];
                available.extend(self.sort_keys.iter().cloned());
                return Err(QueryError::UnknownSortKey { key: key.to_string(), available: available.join(", ") });
            }
        }
        Ok(selected)
    }

    pub fn page(&self, query: &ResultQuery) -> Result<ResultPage, QueryError> {
        let page = query.page.unwrap_or(1);
        let page_size = query.page_size.unwrap_or(DEFAULT_PAGE_SIZE);
        if page == 0 || page_size == 0 || page_size > MAX_PAGE_SIZE {
            return Err(QueryError::BadPage);
        }
        let selected = self.select(query.sort.as_deref(), query.filter.as_deref())?;
        let items = selected
            .iter()
            .skip((page - 1).saturating_mul(page_size))
            .take(page_size)
            .map(|&i| PageItem { index: i, text: self.items[i].text.clone(), data: self.items[i].data.clone() })
            .collect();
        Ok(ResultPage {
            total_count: selected.len(),
            page,
            page_size,
            sort: query.sort.clone().filter(|s| !s.is_empty()),
            filter: query.filter.clone().filter(|f| !f.is_empty()),
            summary: self.summary.clone(),
            items,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn fds() -> ResultSet {
        let items = [("[A] -> B (error=0.5)", 0.5), ("[B] -> C (error=0)", 0.0), ("[A, C] -> B (error=0.25)", 0.25)]
            .iter()
            .map(|(t, e)| ResultItem::new(*t, json!({})).key("error", *e))
            .collect();
        ResultSet::new(TaskKind::DiscoverFd, json!(null), items, &["error"])
    }

    fn texts(page: &ResultPage) -> Vec<&str> {
        page.items.iter().map(|i| i.text.as_str()).collect()
    }

    #[test]
    fn filter_sort_and_paginate() {
        let r = fds();
        let q = |sort: &str, filter: &str, page, size| ResultQuery {
            sort: Some(sort.into()),
            filter: Some(filter.into()),
            page: Some(page),
            page_size: Some(size),
        };
        let p = r.page(&q("", r"^\[A", 1, 10)).unwrap();
        assert_eq!(texts(&p), ["[A] -> B (error=0.5)", "[A, C] -> B (error=0.25)"]);
        let p = r.page(&q("error", "", 1, 10)).unwrap();
        assert_eq!(p.items.iter().map(|i| i.index).collect::<Vec<_>>(), [1, 2, 0]);
        let p = r.page(&q("-error", "", 1, 10)).unwrap();
        assert_eq!(p.items.iter().map(|i| i.index).collect::<Vec<_>>(), [0, 2, 1]);
        let p = r.page(&q("-index", "", 2, 2)).unwrap();
        assert_eq!(p.items.iter().map(|i| i.index).collect::<Vec<_>>(), [0]);
        let p = r.page(&q("error", "", 5, 2)).unwrap();
        assert!(p.items.is_empty());
        assert_eq!(p.total_count, 3);
    }

    #[test]
    fn errors() {
        let r = fds();
        let bad = ResultQuery { filter: Some("(".into()), ..Default::default() };
        assert!(matches!(r.page(&bad), Err(QueryError::BadRegex(_))));
        let bad = ResultQuery { sort: Some("lift".into()), ..Default::default() };
        assert!(matches!(r.page(&bad), Err(QueryError::UnknownSortKey { .. })));
        let bad = ResultQuery { page: Some(0), ..Default::default() };
        assert_eq!(r.page(&bad), Err(QueryError::BadPage));
    }
}
