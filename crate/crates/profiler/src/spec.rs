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

//! Task specifications as submitted over the API, and their validation into
//! typed per-kind parameters.

use profiler_core::arm::{Algorithm, Layout};
use profiler_core::fd::FdDiscoveryConfig;
use profiler_core::mfd::Metric;
use profiler_core::table::CsvOptions;
use profiler_core::typo::{FixDecision, TypoPipelineConfig};
use profiler_core::NullMode;
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const MAX_THREADS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    DiscoverFd,
    ValidateFd,
    ValidateMfd,
    DiscoverInd,
    ValidateInd,
    MineRules,
    ProfileStats,
    TypoPipeline,
    ApplyFixes,
}

impl TaskKind {
    pub const ALL: [TaskKind; 9] = [
        TaskKind::DiscoverFd,
        TaskKind::ValidateFd,
        TaskKind::ValidateMfd,
        TaskKind::DiscoverInd,
        TaskKind::ValidateInd,
        TaskKind::MineRules,
        TaskKind::ProfileStats,
        TaskKind::TypoPipeline,
        TaskKind::ApplyFixes,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TaskKind::DiscoverFd => "discover_fd",
            TaskKind::ValidateFd => "validate_fd",
            TaskKind::ValidateMfd => "validate_mfd",
            TaskKind::DiscoverInd => "discover_ind",
            TaskKind::ValidateInd => "validate_ind",
            TaskKind::MineRules => "mine_rules",
            TaskKind::ProfileStats => "profile_stats",
            TaskKind::TypoPipeline => "typo_pipeline",
            TaskKind::ApplyFixes => "apply_fixes",
        }
    }

    /// Kinds that combine several datasets.
    pub fn is_multi_dataset(self) -> bool {
        matches!(self, TaskKind::DiscoverInd | TaskKind::ValidateInd)
    }
}

/// A deliberate executor failure, for exercising isolation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fault {
    Panic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSpec {
    pub kind: TaskKind,
    pub datasets: Vec<String>,
    /// Re-parse the datasets with this separator instead of the registered one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub separator: Option<char>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub has_header: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub null_mode: Option<NullMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_budget_secs: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub memory_budget_mb: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fault: Option<Fault>,
    #[serde(default = "empty_object")]
    pub params: Value,
}

fn empty_object() -> Value {
    Value::Object(Default::default())
}

/// A column by index or by name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ColumnRef {
    Index(usize),
    Name(String),
}

impl ColumnRef {
    pub fn resolve(&self, names: &[String]) -> Result<usize, String> {
        match self {
            ColumnRef::Index(i) if *i < names.len() => Ok(*i),
            ColumnRef::Index(i) => Err(format!("column index {i} out of range ({} columns)", names.len())),
            ColumnRef::Name(n) => names
                .iter()
                .position(|c| c == n)
                .or_else(|| n.parse::<usize>().ok().filter(|&i| i < names.len()))
                .ok_or_else(|| format!("unknown column {n:?}")),
        }
    }
}

impl std::fmt::Display for ColumnRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ColumnRef::Index(i) => write!(f, "{i}"),
            ColumnRef::Name(n) => f.write_str(n),
        }
    }
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FdAlgorithm {
    #[default]
    Tane,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscoverFdParams {
    #[serde(default)]
    pub error_threshold: f64,
    #[serde(default)]
    pub max_lhs: Option<usize>,
    #[serde(default = "one")]
    pub thread_count: usize,
    #[serde(default)]
    pub algorithm: FdAlgorithm,
}

impl DiscoverFdParams {
    pub fn config(&self) -> FdDiscoveryConfig {
        FdDiscoveryConfig {
            max_lhs: self.max_lhs.unwrap_or(usize::MAX),
            error_threshold: self.error_threshold,
            thread_count: self.thread_count,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateFdParams {
    pub lhs: Vec<ColumnRef>,
    pub rhs: ColumnRef,
    #[serde(default)]
    pub error_threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateMfdParams {
    pub lhs: Vec<ColumnRef>,
    pub rhs: Vec<ColumnRef>,
    pub metric: Metric,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscoverIndParams {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttributeParam {
    pub dataset: String,
    pub column: ColumnRef,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateIndParams {
    pub dependent: AttributeParam,
    pub referenced: AttributeParam,
    #[serde(default = "default_missing")]
    pub max_missing: usize,
}

fn default_missing() -> usize {
    profiler_core::ind::DEFAULT_MISSING_SAMPLE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MineRulesParams {
    pub min_support: f64,
    pub min_confidence: f64,
    #[serde(default = "default_algorithm")]
    pub algorithm: Algorithm,
    #[serde(default = "default_layout")]
    pub layout: Layout,
}

fn default_algorithm() -> Algorithm {
    Algorithm::FpGrowth
}

fn default_layout() -> Layout {
    Layout::Tabular
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileStatsParams {
    #[serde(default = "one")]
    pub thread_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TypoPipelineParams {
    pub error_threshold: f64,
    pub max_lhs: usize,
    pub min_cluster_size: usize,
    pub max_clusters_shown: usize,
    pub thread_count: usize,
}

impl Default for TypoPipelineParams {
    fn default() -> Self {
        let c = TypoPipelineConfig::default();
        TypoPipelineParams {
            error_threshold: c.error_threshold,
            max_lhs: c.max_lhs,
            min_cluster_size: c.min_cluster_size,
            max_clusters_shown: c.max_clusters_shown,
            thread_count: c.thread_count,
        }
    }
}

impl TypoPipelineParams {
    pub fn config(&self) -> TypoPipelineConfig {
        TypoPipelineConfig {
            error_threshold: self.error_threshold,
            max_lhs: self.max_lhs,
            min_cluster_size: self.min_cluster_size,
            max_clusters_shown: self.max_clusters_shown,
            thread_count: self.thread_count,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApplyFixesParams {
    pub decisions: Vec<FixDecision>,
    #[serde(default)]
    pub name: Option<String>,
}

/// Parameters of a validated spec.
#[derive(Debug, Clone, PartialEq)]
pub enum TaskParams {
    DiscoverFd(DiscoverFdParams),
    ValidateFd(ValidateFdParams),
    ValidateMfd(ValidateMfdParams),
    DiscoverInd(DiscoverIndParams),
    ValidateInd(ValidateIndParams),
    MineRules(MineRulesParams),
    ProfileStats(ProfileStatsParams),
    TypoPipeline(TypoPipelineParams),
    ApplyFixes(ApplyFixesParams),
}

impl TaskParams {
    pub fn thread_count(&self) -> usize {
        match self {
            TaskParams::DiscoverFd(p) => p.thread_count,
            TaskParams::ProfileStats(p) => p.thread_count,
            TaskParams::TypoPipeline(p) => p.thread_count,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{0}")]
pub struct SpecError(pub String);

fn invalid<T>(msg: impl Into<String>) -> Result<T, SpecError> {
    Err(SpecError(msg.into()))
}

fn unit_interval(name: &str, v: f64, lower_open: bool, upper_open: bool) -> Result<(), SpecError> {
    let lower_ok = if lower_open { v > 0.0 } else { v >= 0.0 };
    let upper_ok = if upper_open { v < 1.0 } else { v <= 1.0 };
    if v.is_finite() && lower_ok && upper_ok {
        Ok(())
    } else {
        let (l, u) = (if lower_open { "(0" } else { "[0" }, if upper_open { "1)" } else { "1]" });
        invalid(format!("{name} must lie in {l}, {u}, got {v}"))
    }
}

fn threads(n: usize) -> Result<(), SpecError> {
    if (1..=MAX_THREADS).contains(&n) {
        Ok(())
    } else {
        invalid(format!("thread_count must lie in 1..={MAX_THREADS}, got {n}"))
    }
}

impl TaskSpec {
    pub fn new(kind: TaskKind, datasets: Vec<String>, params: Value) -> Self {
        TaskSpec {
            kind,
            datasets,
            separator: None,
            has_header: None,
            null_mode: None,
            time_budget_secs: None,
            memory_budget_mb: None,
            fault: None,
            params,
        }
    }

    /// Parse overrides on top of a dataset's registered options.
    pub fn csv_options(&self, registered: CsvOptions) -> CsvOptions {
        CsvOptions {
            separator: self.separator.unwrap_or(registered.separator),
            has_header: self.has_header.unwrap_or(registered.has_header),
            null_mode: self.null_mode.unwrap_or(registered.null_mode),
        }
    }

    /// Checks everything that does not need the datasets themselves.
    pub fn validate(&self, allow_fault_injection: bool) -> Result<TaskParams, SpecError> {
        if self.datasets.is_empty() {
            return invalid("at least one dataset is required");
        }
        if !self.kind.is_multi_dataset() && self.datasets.len() != 1 {
            return invalid(format!("{} takes exactly one dataset", self.kind.as_str()));
        }
        if let Some(t) = self.time_budget_secs {
            if !(t.is_finite() && t > 0.0) {
                return invalid("time_budget_secs must be positive");
            }
        }
        if self.memory_budget_mb == Some(0) {
            return invalid("memory_budget_mb must be positive");
        }
        if self.fault.is_some() && !allow_fault_injection {
            return invalid("fault injection is disabled on this engine");
        }
        if let Some(sep) = self.separator {
            if sep == '"' || sep.is_control() {
                return invalid(format!("invalid separator {sep:?}"));
            }
        }
        let params = self.params.clone();
        fn parse<T: serde::de::DeserializeOwned>(v: Value) -> Result<T, SpecError> {
            serde_json::from_value(v).map_err(|e| SpecError(format!("invalid params: {e}")))
        }
        let parsed = match self.kind {
            TaskKind::DiscoverFd => {
                let p: DiscoverFdParams = parse(params)?;
                p.config().validate().map_err(|e| SpecError(e.to_string()))?;
                threads(p.thread_count)?;
                TaskParams::DiscoverFd(p)
            }
            TaskKind::ValidateFd => {
                let p: ValidateFdParams = parse(params)?;
                unit_interval("error_threshold", p.error_threshold, false, true)?;
                TaskParams::ValidateFd(p)
            }
            TaskKind::ValidateMfd => {
                let p: ValidateMfdParams = parse(params)?;
                if !(p.delta.is_finite() && p.delta >= 0.0) {
                    return invalid(format!("delta must be a non-negative number, got {}", p.delta));
                }
                if p.rhs.is_empty() {
                    return invalid("rhs needs at least one column");
                }
                TaskParams::ValidateMfd(p)
            }
            TaskKind::DiscoverInd => TaskParams::DiscoverInd(parse(params)?),
            TaskKind::ValidateInd => {
                let p: ValidateIndParams = parse(params)?;
                for a in [&p.dependent, &p.referenced] {
                    if !self.datasets.contains(&a.dataset) {
                        return invalid(format!("dataset {} is not listed in datasets", a.dataset));
                    }
                }
                TaskParams::ValidateInd(p)
            }
            TaskKind::MineRules => {
                let p: MineRulesParams = parse(params)?;
                unit_interval("min_support", p.min_support, true, false)?;
                unit_interval("min_confidence", p.min_confidence, true, false)?;
                TaskParams::MineRules(p)
            }
            TaskKind::ProfileStats => {
                let p: ProfileStatsParams = parse(params)?;
                threads(p.thread_count)?;
                TaskParams::ProfileStats(p)
            }
            TaskKind::TypoPipeline => {
                let p: TypoPipelineParams = parse(params)?;
                p.config().validate().map_err(|e| SpecError(e.to_string()))?;
                threads(p.thread_count)?;
                TaskParams::TypoPipeline(p)
            }
            TaskKind::ApplyFixes => TaskParams::ApplyFixes(parse(params)?),
        };
        Ok(parsed)
    }
}

/// Resolves every column reference of `params` against the column names of
/// the task's datasets, in `datasets` order.
pub fn check_columns(params: &TaskParams, datasets: &[String], names: &[Vec<String>]) -> Result<(), SpecError> {
    let first = names.first().map(Vec::as_slice).unwrap_or(&[]);
    let resolve = |r: &ColumnRef, cols: &[String]| r.resolve(cols).map_err(SpecError);
    match params {
        TaskParams::ValidateFd(p) => {
            let rhs = resolve(&p.rhs, first)?;
            for l in &p.lhs {
                if resolve(l, first)? == rhs {
                    return invalid("rhs column also appears in lhs");
                }
            }
        }
        TaskParams::ValidateMfd(p) => {
            for c in p.lhs.iter().chain(&p.rhs) {
                resolve(c, first)?;
            }
        }
        TaskParams::ValidateInd(p) => {
            for a in [&p.dependent, &p.referenced] {
                let i = datasets.iter().position(|d| *d == a.dataset).expect("checked in validate");
                resolve(&a.column, &names[i])?;
            }
        }
        TaskParams::ApplyFixes(p) => {
            for d in &p.decisions {
                if d.column >= first.len() {
                    return invalid(format!("decision column {} out of range", d.column));
                }
            }
        }
        _ => {}
    }
    Ok(())
}
