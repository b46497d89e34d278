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

//! File-backed dataset registry. Every uploaded dataset and revision lives
//! in `datasets/<id>/` as `data.csv` plus `meta.json`; built-in datasets are
//! registered read-only from a separate directory at startup.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use parking_lot::{Mutex, RwLock};
use profiler_core::table::CsvOptions;
use profiler_core::typo::{apply_fixes, FixDecision};
use profiler_core::{DatasetError, NullMode, Table};
use serde::{Deserialize, Serialize};

use crate::io::parse_csv_bytes;

pub const SNIPPET_ROWS: usize = 10;
const META_FILE: &str = "meta.json";
const DATA_FILE: &str = "data.csv";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Origin {
    BuiltIn,
    Uploaded,
    RevisionOf { parent: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetEntry {
    pub id: String,
    pub name: String,
    pub origin: Origin,
    pub path: PathBuf,
    pub separator: char,
    pub has_header: bool,
    pub null_mode: NullMode,
    pub size_bytes: u64,
    pub row_count: usize,
    pub column_count: usize,
    pub column_names: Vec<String>,
    /// Rows whose cells this revision changed relative to its parent.
    #[serde(default)]
    pub modified_rows: Vec<usize>,
    pub created_at_ms: u64,
}

impl DatasetEntry {
    pub fn csv_options(&self) -> CsvOptions {
        CsvOptions { separator: self.separator, has_header: self.has_header, null_mode: self.null_mode }
    }

    pub fn parent(&self) -> Option<&str> {
        match &self.origin {
            Origin::RevisionOf { parent } => Some(parent),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Snippet {
    pub dataset_id: String,
    pub column_names: Vec<String>,
    pub rows: Vec<Vec<Option<String>>>,
    pub total_rows: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum RegistryError {
    #[error("unknown dataset {0}")]
    UnknownDataset(String),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("storage limit reached: {used} bytes used, {incoming} more requested, limit {limit}")]
    StorageFull { used: u64, incoming: u64, limit: u64 },
    #[error("dataset {0} is built in and cannot be changed")]
    Immutable(String),
    #[error("row {row} was already modified in revision {revision}")]
    StaleDecision { row: usize, revision: String },
    #[error("storage error: {0}")]
    Io(#[from] std::io::Error),
}

pub struct Registry {
    root: PathBuf,
    entries: RwLock<BTreeMap<String, DatasetEntry>>,
    tables: Mutex<HashMap<String, Arc<Table>>>,
    next_id: AtomicU64,
    max_storage: Option<u64>,
    /// Serializes writes so storage accounting and lineage checks are
    /// consistent with what gets written.
    write_lock: Mutex<()>,
}

fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis() as u64).unwrap_or(0)
}

fn id_number(id: &str) -> Option<u64> {
    id.strip_prefix("ds")?.parse().ok()
}

impl Registry {
    /// Opens (or creates) the registry under `data_dir`, reloading every
    /// persisted dataset and registering the CSV files of `builtin_dir`.
    pub fn open(data_dir: &Path, builtin_dir: Option<&Path>, max_storage: Option<u64>) -> Result<Self, RegistryError> {
        let root = data_dir.join("datasets");
        std::fs::create_dir_all(&root)?;
        let mut entries = BTreeMap::new();
        let mut max_id = 0;
        for dir in std::fs::read_dir(&root)? {
            let dir = dir?.path();
            let name = dir.file_name().and_then(|n| n.to_str()).unwrap_or_default().to_string();
            if name.starts_with('.') {
                // Leftover of an interrupted write.
                std::fs::remove_dir_all(&dir)?;
                continue;
            }
            let meta = match std::fs::read(dir.join(META_FILE)) {
                Ok(m) => m,
                Err(_) => continue,
            };
            match serde_json::from_slice::<DatasetEntry>(&meta) {
                Ok(mut entry) => {
                    entry.path = dir.join(DATA_FILE);
                    max_id = max_id.max(id_number(&entry.id).unwrap_or(0));
                    entries.insert(entry.id.clone(), entry);
                }
                Err(e) => tracing::warn!("skipping dataset {}: {e}", dir.display()),
            }
        }
        if let Some(dir) = builtin_dir {
            let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "csv"))
                .collect();
            files.sort();
            for path in files {
                let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("builtin").to_string();
                let bytes = std::fs::read(&path)?;
                let options = CsvOptions::default();
                match parse_csv_bytes(&stem, &bytes, options) {
                    Ok(table) => {
                        let entry = describe(format!("builtin-{stem}"), stem, Origin::BuiltIn, path, &table, bytes.len());
                        entries.insert(entry.id.clone(), entry);
                    }
                    Err(e) => tracing::warn!("skipping built-in dataset {}: {e}", path.display()),
                }
            }
        }
        Ok(Registry {
            root,
            entries: RwLock::new(entries),
            tables: Mutex::new(HashMap::new()),
            next_id: AtomicU64::new(max_id + 1),
            max_storage,
            write_lock: Mutex::new(()),
        })
    }

    pub fn list(&self) -> Vec<DatasetEntry> {
        self.entries.read().values().cloned().collect()
    }

    pub fn get(&self, id: &str) -> Result<DatasetEntry, RegistryError> {
        self.entries.read().get(id).cloned().ok_or_else(|| RegistryError::UnknownDataset(id.to_string()))
    }

    /// The parsed table of a dataset, named after the dataset.
    pub fn table(&self, id: &str) -> Result<Arc<Table>, RegistryError> {
        let entry = self.get(id)?;
        if let Some(t) = self.tables.lock().get(id) {
            return Ok(t.clone());
        }
        let table = Arc::new(self.parse(&entry, entry.csv_options())?);
        self.tables.lock().insert(id.to_string(), table.clone());
        Ok(table)
    }

    /// The table re-read with different parse options; not cached.
    pub fn table_with(&self, id: &str, options: CsvOptions) -> Result<Arc<Table>, RegistryError> {
        let entry = self.get(id)?;
        if options == entry.csv_options() {
            return self.table(id);
        }
        Ok(Arc::new(self.parse(&entry, options)?))
    }

    fn parse(&self, entry: &DatasetEntry, options: CsvOptions) -> Result<Table, RegistryError> {
        let bytes = std::fs::read(&entry.path)?;
        Ok(parse_csv_bytes(&entry.name, &bytes, options)?)
    }

    pub fn snippet(&self, id: &str) -> Result<Snippet, RegistryError> {
        let table = self.table(id)?;
        Ok(Snippet {
            dataset_id: id.to_string(),
            column_names: table.column_names().map(str::to_string).collect(),
            rows: (0..table.row_count().min(SNIPPET_ROWS)).map(|r| table.row(r)).collect(),
            total_rows: table.row_count(),
        })
    }

    /// Bytes stored for uploads and revisions.
    pub fn used_bytes(&self) -> u64 {
        self.entries.read().values().filter(|e| e.origin != Origin::BuiltIn).map(|e| e.size_bytes).sum()
    }

    /// Parses and stores an upload. Nothing is written when parsing fails.
    pub fn upload(&self, name: &str, bytes: &[u8], options: CsvOptions) -> Result<DatasetEntry, RegistryError> {
        let table = parse_csv_bytes(name, bytes, options)?;
        let _guard = self.write_lock.lock();
        self.store(name, Origin::Uploaded, bytes, table, Vec::new())
    }

    /// Applies reviewed fixes to `id`, storing the result as a new revision.
    pub fn apply_fixes(
        &self,
        id: &str,
        decisions: &[FixDecision],
        name: Option<&str>,
    ) -> Result<DatasetEntry, RegistryError> {
        let _guard = self.write_lock.lock();
        let parent = self.get(id)?;
        let changed: BTreeSet<usize> = decisions.iter().filter(|d| d.replacement.is_some()).map(|d| d.row).collect();
        for later in self.descendants(id) {
            if let Some(&row) = later.modified_rows.iter().find(|r| changed.contains(r)) {
                return Err(RegistryError::StaleDecision { row, revision: later.id });
            }
        }
        let base = self.table(id)?;
        let name = name.unwrap_or(&parent.name);
        let revised = apply_fixes(&base, decisions, name)?;
        let bytes = revised.to_csv_string().into_bytes();
        self.store(name, Origin::RevisionOf { parent: id.to_string() }, &bytes, revised, changed.into_iter().collect())
    }

    /// Every revision derived from `id`, directly or transitively.
    pub fn descendants(&self, id: &str) -> Vec<DatasetEntry> {
        let entries = self.entries.read();
        let mut frontier = vec![id.to_string()];
        let mut out = Vec::new();
        while let Some(current) = frontier.pop() {
            for e in entries.values().filter(|e| e.parent() == Some(current.as_str())) {
                frontier.push(e.id.clone());
                out.push(e.clone());
            }
        }
        out
    }

    pub fn delete(&self, id: &str) -> Result<(), RegistryError> {
        let _guard = self.write_lock.lock();
        let entry = self.get(id)?;
        if entry.origin == Origin::BuiltIn {
            return Err(RegistryError::Immutable(id.to_string()));
        }
        std::fs::remove_dir_all(self.root.join(id))?;
        self.entries.write().remove(id);
        self.tables.lock().remove(id);
        Ok(())
    }

    fn store(
        &self,
        name: &str,
        origin: Origin,
        bytes: &[u8],
        table: Table,
        modified_rows: Vec<usize>,
    ) -> Result<DatasetEntry, RegistryError> {
        if let Some(limit) = self.max_storage {
            let used = self.used_bytes();
            if used + bytes.len() as u64 > limit {
                return Err(RegistryError::StorageFull { used, incoming: bytes.len() as u64, limit });
            }
        }
        let id = format!("ds{:06}", self.next_id.fetch_add(1, Ordering::SeqCst));
        let dir = self.root.join(&id);
        let mut entry = describe(id.clone(), name.to_string(), origin, dir.join(DATA_FILE), &table, bytes.len());
        entry.modified_rows = modified_rows;
        // Written under a hidden name, then renamed, so a crash never leaves
        // a half-written dataset that would be picked up on restart.
        let staging = self.root.join(format!(".{id}"));
        std::fs::create_dir_all(&staging)?;
        std::fs::write(staging.join(DATA_FILE), bytes)?;
        std::fs::write(staging.join(META_FILE), serde_json::to_vec_pretty(&entry).map_err(std::io::Error::other)?)?;
        std::fs::rename(&staging, &dir)?;
        let table = Arc::new(table.with_name(name));
        self.tables.lock().insert(id.clone(), table);
        self.entries.write().insert(id, entry.clone());
        Ok(entry)
    }
}

fn describe(id: String, name: String, origin: Origin, path: PathBuf, table: &Table, size: usize) -> DatasetEntry {
    DatasetEntry {
        id,
        name,
        origin,
        path,
        separator: table.separator(),
        has_header: table.has_header(),
        null_mode: table.null_mode(),
        size_bytes: size as u64,
        row_count: table.row_count(),
        column_count: table.column_count(),
        column_names: table.column_names().map(str::to_string).collect(),
        modified_rows: Vec::new(),
        created_at_ms: now_ms(),
    }
}
