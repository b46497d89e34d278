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

//! Engine configuration: one TOML file, overridable per key through
//! `PROFILER_*` environment variables.

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Deserialize;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    /// Root of the dataset registry and task journal.
    pub data_dir: PathBuf,
    /// Number of tasks that may run at once.
    pub workers: usize,
    /// Time budget for tasks that do not set one, in seconds.
    pub default_time_budget_secs: Option<u64>,
    /// Memory budget for tasks that do not set one, in MiB.
    pub default_memory_budget_mb: Option<u64>,
    /// Upper bound on the bytes stored under `data_dir/datasets`.
    pub max_storage_mb: Option<u64>,
    /// Directory of read-only CSV files registered at startup.
    pub builtin_dir: Option<PathBuf>,
    /// Lets task specs request an injected executor fault (for testing).
    pub allow_fault_injection: bool,
    /// Static files served at `/` by the HTTP server.
    pub static_dir: Option<PathBuf>,
    pub listen: String,
    /// IND discovery spills attributes with more distinct values than this.
    pub ind_spill_threshold: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            data_dir: PathBuf::from("profiler-data"),
            workers: 2,
            default_time_budget_secs: None,
            default_memory_budget_mb: None,
            max_storage_mb: None,
            builtin_dir: None,
            allow_fault_injection: false,
            static_dir: None,
            listen: "127.0.0.1:8080".to_string(),
            ind_spill_threshold: 1_000_000,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("invalid config file {path}: {source}")]
    Parse { path: String, source: Box<toml::de::Error> },
    #[error("invalid value {value:?} for {key}")]
    Env { key: String, value: String },
    #[error("workers must be at least 1")]
    NoWorkers,
}

impl EngineConfig {
    /// Reads `path` when given, then applies environment overrides.
    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        let mut config = match path {
            Some(p) => Self::from_file(p)?,
            None => Self::default(),
        };
        config.apply_env(|k| std::env::var(k).ok())?;
        config.check()?;
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Read { path: path.display().to_string(), source })?;
        toml::from_str(&text)
            .map_err(|source| ConfigError::Parse { path: path.display().to_string(), source: Box::new(source) })
    }

    /// Applies `PROFILER_<KEY>` overrides read through `lookup`.
    pub fn apply_env(&mut self, lookup: impl Fn(&str) -> Option<String>) -> Result<(), ConfigError> {
        fn parse<T: std::str::FromStr>(key: &str, value: String) -> Result<T, ConfigError> {
            value.trim().parse().map_err(|_| ConfigError::Env { key: key.to_string(), value })
        }
        fn optional<T: std::str::FromStr>(key: &str, value: String) -> Result<Option<T>, ConfigError> {
            if value.trim().is_empty() || value.trim() == "none" {
                Ok(None)
            } else {
                parse(key, value).map(Some)
            }
        }
        let get = |k: &str| lookup(k).map(|v| (k.to_string(), v));
        if let Some((_, v)) = get("PROFILER_DATA_DIR") {
            self.data_dir = v.into();
        }
        if let Some((k, v)) = get("PROFILER_WORKERS") {
            self.workers = parse(&k, v)?;
        }
        if let Some((k, v)) = get("PROFILER_TIME_BUDGET_SECS") {
            self.default_time_budget_secs = optional(&k, v)?;
        }
        if let Some((k, v)) = get("PROFILER_MEMORY_BUDGET_MB") {
            self.default_memory_budget_mb = optional(&k, v)?;
        }
        if let Some((k, v)) = get("PROFILER_MAX_STORAGE_MB") {
            self.max_storage_mb = optional(&k, v)?;
        }
        if let Some((_, v)) = get("PROFILER_BUILTIN_DIR") {
            self.builtin_dir = (!v.is_empty()).then(|| v.into());
        }
        if let Some((k, v)) = get("PROFILER_ALLOW_FAULT_INJECTION") {
            self.allow_fault_injection = parse(&k, v)?;
        }
        if let Some((_, v)) = get("PROFILER_STATIC_DIR") {
            self.static_dir = (!v.is_empty()).then(|| v.into());
        }
        if let Some((_, v)) = get("PROFILER_LISTEN") {
            self.listen = v;
        }
        if let Some((k, v)) = get("PROFILER_IND_SPILL_THRESHOLD") {
            self.ind_spill_threshold = parse(&k, v)?;
        }
        Ok(())
    }

    pub fn check(&self) -> Result<(), ConfigError> {
        if self.workers == 0 {
            return Err(ConfigError::NoWorkers);
        }
        Ok(())
    }

    pub fn default_time_budget(&self) -> Option<Duration> {
        self.default_time_budget_secs.map(Duration::from_secs)
    }

    pub fn default_memory_budget_bytes(&self) -> Option<usize> {
        self.default_memory_budget_mb.map(|mb| (mb as usize).saturating_mul(1 << 20))
    }

    pub fn max_storage_bytes(&self) -> Option<u64> {
        self.max_storage_mb.map(|mb| mb.saturating_mul(1 << 20))
    }
}
