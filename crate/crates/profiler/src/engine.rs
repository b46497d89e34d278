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

//! The task engine: a bounded FIFO worker pool executing task specs against
//! the dataset registry, with per-task progress, cancellation, budgets,
//! panic isolation and a file-backed journal.

use std::collections::{BTreeMap, VecDeque};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use parking_lot::{Condvar, Mutex, RwLock};
use profiler_core::table::CsvOptions;
use profiler_core::typo::FixDecision;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::EngineConfig;
use crate::exec::{execute, ExecEnv, ExecError, Input};
use crate::registry::{DatasetEntry, Registry, RegistryError, Snippet};
use crate::results::{QueryError, ResultItem, ResultPage, ResultQuery, ResultSet};
use crate::runtime::{Budgets, PoolRuntime, TaskControl};
use crate::spec::{check_columns, Fault, SpecError, TaskKind, TaskParams, TaskSpec};

pub const RESTART_MESSAGE: &str = "engine restarted before the task finished";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskState {
    Queued,
    Running,
    Done,
    Failed,
    Cancelled,
}

impl TaskState {
    pub fn is_terminal(self) -> bool {
        matches!(self, TaskState::Done | TaskState::Failed | TaskState::Cancelled)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TaskState::Queued => "queued",
            TaskState::Running => "running",
            TaskState::Done => "done",
            TaskState::Failed => "failed",
            TaskState::Cancelled => "cancelled",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskStatus {
    pub task_id: String,
    pub kind: TaskKind,
    pub datasets: Vec<String>,
    pub state: TaskState,
    pub progress: f64,
    pub error_message: Option<String>,
    pub submitted_at_ms: u64,
    pub started_at_ms: Option<u64>,
    pub finished_at_ms: Option<u64>,
    /// Longest observed interval between two executor checkpoints.
    #[serde(default)]
    pub max_checkpoint_gap_ms: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error("invalid task: {0}")]
    Validation(String),
    #[error("unknown dataset {0}")]
    UnknownDataset(String),
    #[error("unknown task {0}")]
    UnknownTask(String),
    #[error("task {id} is {state} and has no result")]
    NotFinished { id: String, state: &'static str },
    #[error("task {id} already finished ({state})")]
    AlreadyFinished { id: String, state: &'static str },
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error(transparent)]
    Registry(RegistryError),
    #[error("storage error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<RegistryError> for EngineError {
    fn from(e: RegistryError) -> Self {
        match e {
            RegistryError::UnknownDataset(id) => EngineError::UnknownDataset(id),
            other => EngineError::Registry(other),
        }
    }
}

impl From<SpecError> for EngineError {
    fn from(e: SpecError) -> Self {
        EngineError::Validation(e.0)
    }
}

impl EngineError {
    /// Machine-readable error code.
    pub fn code(&self) -> &'static str {
        use profiler_core::DatasetError as D;
        match self {
            EngineError::Validation(_) => "validation_error",
            EngineError::UnknownDataset(_) => "unknown_dataset",
            EngineError::UnknownTask(_) => "unknown_task",
            EngineError::NotFinished { .. } => "not_finished",
            EngineError::AlreadyFinished { .. } => "already_finished",
            EngineError::Query(QueryError::BadRegex(_)) => "bad_regex",
            EngineError::Query(QueryError::UnknownSortKey { .. }) => "unknown_sort_key",
            EngineError::Query(QueryError::BadPage) => "bad_page",
            EngineError::Registry(r) => match r {
                RegistryError::UnknownDataset(_) => "unknown_dataset",
                RegistryError::StorageFull { .. } => "storage_full",
                RegistryError::Immutable(_) => "immutable_dataset",
                RegistryError::StaleDecision { .. } => "stale_decision",
                RegistryError::Io(_) => "io_error",
                RegistryError::Dataset(d) => match d {
                    D::MalformedCsv { .. } => "malformed_csv",
                    D::EmptyInput => "empty_input",
                    D::InvalidSeparator(_) => "invalid_separator",
                    D::RowOutOfRange { .. } | D::IndexOutOfRange { .. } => "out_of_range",
                    D::UnknownColumn(_) => "unknown_column",
                    D::FileNotFound(_) => "file_not_found",
                    D::SourceMismatch { .. } => "source_mismatch",
                },
            },
            EngineError::Io(_) => "io_error",
        }
    }
}

struct Task {
    spec: TaskSpec,
    params: TaskParams,
    control: Arc<TaskControl>,
    status: Mutex<TaskStatus>,
    result: Mutex<Option<Arc<ResultSet>>>,
}

/// What the journal stores per task.
#[derive(Serialize, Deserialize)]
struct JournalRecord {
    spec: TaskSpec,
    status: TaskStatus,
}

struct Inner {
    config: EngineConfig,
    registry: Registry,
    tasks: RwLock<BTreeMap<String, Arc<Task>>>,
    queue: Mutex<VecDeque<Arc<Task>>>,
    wakeup: Condvar,
    shutdown: AtomicBool,
    next_id: AtomicU64,
    tasks_dir: PathBuf,
    spill_dir: PathBuf,
}

pub struct Engine {
    inner: Arc<Inner>,
    workers: Mutex<Vec<JoinHandle<()>>>,
}

fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis() as u64).unwrap_or(0)
}

fn write_atomically(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(tmp, path)
}

impl Engine {
    /// Opens the data directory, recovers the registry and task journal, and
    /// starts `config.workers` worker threads.
    pub fn start(config: EngineConfig) -> Result<Engine, EngineError> {
        config.check().map_err(|e| EngineError::Validation(e.to_string()))?;
        let registry = Registry::open(&config.data_dir, config.builtin_dir.as_deref(), config.max_storage_bytes())?;
        let tasks_dir = config.data_dir.join("tasks");
        let spill_dir = config.data_dir.join("spill");
        std::fs::create_dir_all(&tasks_dir)?;
        std::fs::create_dir_all(&spill_dir)?;
        let (tasks, max_id) = recover_tasks(&tasks_dir, config.allow_fault_injection)?;
        let inner = Arc::new(Inner {
            registry,
            tasks: RwLock::new(tasks),
            queue: Mutex::new(VecDeque::new()),
            wakeup: Condvar::new(),
            shutdown: AtomicBool::new(false),
            next_id: AtomicU64::new(max_id + 1),
            tasks_dir,
            spill_dir,
            config,
        });
        let workers = (0..inner.config.workers)
            .map(|i| {
                let inner = inner.clone();
                std::thread::Builder::new()
                    .name(format!("profiler-task-{i}"))
                    .spawn(move || worker_loop(&inner))
                    .map_err(EngineError::Io)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Engine { inner, workers: Mutex::new(workers) })
    }

    pub fn config(&self) -> &EngineConfig {
        &self.inner.config
    }

    pub fn registry(&self) -> &Registry {
        &self.inner.registry
    }

    pub fn upload(&self, name: &str, bytes: &[u8], options: CsvOptions) -> Result<DatasetEntry, EngineError> {
        Ok(self.inner.registry.upload(name, bytes, options)?)
    }

    pub fn datasets(&self) -> Vec<DatasetEntry> {
        self.inner.registry.list()
    }

    pub fn dataset(&self, id: &str) -> Result<DatasetEntry, EngineError> {
        Ok(self.inner.registry.get(id)?)
    }

    pub fn snippet(&self, id: &str) -> Result<Snippet, EngineError> {
        Ok(self.inner.registry.snippet(id)?)
    }

    pub fn delete_dataset(&self, id: &str) -> Result<(), EngineError> {
        Ok(self.inner.registry.delete(id)?)
    }

    /// Applies fix decisions synchronously, returning the new revision.
    pub fn apply_fixes(&self, id: &str, decisions: &[FixDecision], name: Option<&str>) -> Result<DatasetEntry, EngineError> {
        Ok(self.inner.registry.apply_fixes(id, decisions, name)?)
    }

    /// Validates and queues a task.
    pub fn submit(&self, spec: TaskSpec) -> Result<TaskStatus, EngineError> {
        let params = spec.validate(self.inner.config.allow_fault_injection)?;
        let mut names = Vec::with_capacity(spec.datasets.len());
        for id in &spec.datasets {
            let entry = self.inner.registry.get(id)?;
            let options = spec.csv_options(entry.csv_options());
            if options == entry.csv_options() {
                names.push(entry.column_names);
            } else {
                let table = self.inner.registry.table_with(id, options)?;
                names.push(table.column_names().map(str::to_string).collect());
            }
        }
        check_columns(&params, &spec.datasets, &names)?;
        let id = format!("task{:06}", self.inner.next_id.fetch_add(1, Ordering::SeqCst));
        let status = TaskStatus {
            task_id: id.clone(),
            kind: spec.kind,
            datasets: spec.datasets.clone(),
            state: TaskState::Queued,
            progress: 0.0,
            error_message: None,
            submitted_at_ms: now_ms(),
            started_at_ms: None,
            finished_at_ms: None,
            max_checkpoint_gap_ms: 0.0,
        };
        let task = Arc::new(Task {
            spec,
            params,
            control: TaskControl::new(),
            status: Mutex::new(status.clone()),
            result: Mutex::new(None),
        });
        self.inner.persist(&task)?;
        self.inner.tasks.write().insert(id, task.clone());
        self.inner.queue.lock().push_back(task);
        self.inner.wakeup.notify_one();
        Ok(status)
    }

    fn task(&self, id: &str) -> Result<Arc<Task>, EngineError> {
        self.inner.tasks.read().get(id).cloned().ok_or_else(|| EngineError::UnknownTask(id.to_string()))
    }

    pub fn status(&self, id: &str) -> Result<TaskStatus, EngineError> {
        Ok(snapshot(&*self.task(id)?))
    }

    pub fn tasks(&self) -> Vec<TaskStatus> {
        self.inner.tasks.read().values().map(|t| snapshot(t)).collect()
    }

    /// Cancels a queued task at once, or asks a running one to stop at its
    /// next checkpoint.
    pub fn cancel(&self, id: &str) -> Result<TaskStatus, EngineError> {
        let task = self.task(id)?;
        {
            let mut status = task.status.lock();
            match status.state {
                TaskState::Queued => {
                    status.state = TaskState::Cancelled;
                    status.finished_at_ms = Some(now_ms());
                    task.control.cancel();
                }
                TaskState::Running => task.control.cancel(),
                done => return Err(EngineError::AlreadyFinished { id: id.to_string(), state: done.as_str() }),
            }
        }
        self.inner.persist(&task)?;
        Ok(snapshot(&task))
    }

    pub fn result(&self, id: &str) -> Result<Arc<ResultSet>, EngineError> {
        let task = self.task(id)?;
        let state = task.status.lock().state;
        if state != TaskState::Done {
            return Err(EngineError::NotFinished { id: id.to_string(), state: state.as_str() });
        }
        let mut cached = task.result.lock();
        if let Some(r) = cached.as_ref() {
            return Ok(r.clone());
        }
        let bytes = std::fs::read(self.inner.result_path(id))?;
        let result: Arc<ResultSet> = Arc::new(serde_json::from_slice(&bytes).map_err(std::io::Error::other)?);
        *cached = Some(result.clone());
        Ok(result)
    }

    pub fn result_page(&self, id: &str, query: &ResultQuery) -> Result<ResultPage, EngineError> {
        Ok(self.result(id)?.page(query)?)
    }

    /// Polls until the task reaches a terminal state or `timeout` passes.
    pub fn wait(&self, id: &str, timeout: Duration) -> Result<TaskStatus, EngineError> {
        let deadline = Instant::now() + timeout;
        loop {
            let status = self.status(id)?;
            if status.state.is_terminal() || Instant::now() >= deadline {
                return Ok(status);
            }
            std::thread::sleep(Duration::from_millis(5));
        }
    }

    /// Stops the workers, cancelling running tasks. Idempotent.
    pub fn shutdown(&self) {
        self.inner.shutdown.store(true, Ordering::SeqCst);
        for task in self.inner.tasks.read().values() {
            if task.status.lock().state == TaskState::Running {
                task.control.cancel();
            }
        }
        self.inner.wakeup.notify_all();
        for handle in self.workers.lock().drain(..) {
            let _ = handle.join();
        }
    }
}

impl Drop for Engine {
    fn drop(&mut self) {
        self.shutdown();
    }
}

fn snapshot(task: &Task) -> TaskStatus {
    let mut status = task.status.lock().clone();
    if status.state != TaskState::Done {
        status.progress = task.control.progress();
    }
    status.max_checkpoint_gap_ms = task.control.max_checkpoint_gap().as_secs_f64() * 1e3;
    status
}

fn recover_tasks(dir: &Path, allow_fault: bool) -> Result<(BTreeMap<String, Arc<Task>>, u64), EngineError> {
    let mut tasks = BTreeMap::new();
    let mut max_id = 0;
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        let is_record = path.extension().is_some_and(|e| e == "json")
            && !path.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.ends_with(".result.json"));
        if !is_record {
            continue;
        }
        let record: JournalRecord = match std::fs::read(&path).ok().and_then(|b| serde_json::from_slice(&b).ok()) {
            Some(r) => r,
            None => {
                tracing::warn!("skipping unreadable task record {}", path.display());
                continue;
            }
        };
        let Ok(params) = record.spec.validate(allow_fault || record.spec.fault.is_some()) else {
            continue;
        };
        let mut status = record.status;
        max_id = max_id.max(status.task_id.strip_prefix("task").and_then(|n| n.parse().ok()).unwrap_or(0));
        let interrupted = !status.state.is_terminal();
        if interrupted {
            status.state = TaskState::Failed;
            status.error_message = Some(RESTART_MESSAGE.to_string());
            status.finished_at_ms = Some(now_ms());
        }
        let control = TaskControl::new();
        control.report(status.progress);
        let task = Arc::new(Task { spec: record.spec, params, control, status: Mutex::new(status), result: Mutex::new(None) });
        if interrupted {
            let bytes = serde_json::to_vec_pretty(&JournalRecord { spec: task.spec.clone(), status: task.status.lock().clone() })
                .map_err(std::io::Error::other)?;
            write_atomically(&path, &bytes)?;
        }
        let id = task.status.lock().task_id.clone();
        tasks.insert(id, task);
    }
    Ok((tasks, max_id))
}

impl Inner {
    fn record_path(&self, id: &str) -> PathBuf {
        self.tasks_dir.join(format!("{id}.json"))
    }

    fn result_path(&self, id: &str) -> PathBuf {
        self.tasks_dir.join(format!("{id}.result.json"))
    }

    fn persist(&self, task: &Task) -> std::io::Result<()> {
        let status = snapshot(task);
        let bytes = serde_json::to_vec_pretty(&JournalRecord { spec: task.spec.clone(), status: status.clone() })
            .map_err(std::io::Error::other)?;
        write_atomically(&self.record_path(&status.task_id), &bytes)
    }

    fn next_task(&self) -> Option<Arc<Task>> {
        let mut queue = self.queue.lock();
        loop {
            if self.shutdown.load(Ordering::SeqCst) {
                return None;
            }
            if let Some(task) = queue.pop_front() {
                return Some(task);
            }
            self.wakeup.wait(&mut queue);
        }
    }

    fn budgets(&self, spec: &TaskSpec) -> Budgets {
        Budgets {
            time: spec.time_budget_secs.map(Duration::from_secs_f64).or(self.config.default_time_budget()),
            memory_bytes: spec
                .memory_budget_mb
                .map(|mb| (mb as usize).saturating_mul(1 << 20))
                .or(self.config.default_memory_budget_bytes()),
        }
    }

    fn run(&self, task: &Task) -> Result<ResultSet, ExecError> {
        if task.spec.fault == Some(Fault::Panic) {
            panic!("injected executor fault");
        }
        if let TaskParams::ApplyFixes(p) = &task.params {
            let entry = self
                .registry
                .apply_fixes(&task.spec.datasets[0], &p.decisions, p.name.as_deref())
                .map_err(|e| ExecError::Failed(e.to_string()))?;
            let data = serde_json::to_value(&entry).unwrap_or_default();
            let summary = json!({"dataset_id": entry.id, "parent": task.spec.datasets[0]});
            let item = ResultItem::new(format!("{} ({} rows)", entry.id, entry.row_count), data);
            return Ok(ResultSet::new(TaskKind::ApplyFixes, summary, vec![item], &[]));
        }
        let mut inputs = Vec::with_capacity(task.spec.datasets.len());
        for id in &task.spec.datasets {
            let entry = self.registry.get(id).map_err(|e| ExecError::Failed(e.to_string()))?;
            let table = self
                .registry
                .table_with(id, task.spec.csv_options(entry.csv_options()))
                .map_err(|e| ExecError::Failed(e.to_string()))?;
            inputs.push(Input { id: id.clone(), table });
        }
        let rt = PoolRuntime::new(task.params.thread_count(), task.control.clone(), self.budgets(&task.spec))?;
        let env = ExecEnv { spill_dir: Some(self.spill_dir.clone()), spill_threshold: self.config.ind_spill_threshold };
        execute(&task.params, &inputs, &rt, &env)
    }
}

fn panic_message(payload: &(dyn std::any::Any + Send)) -> String {
    payload
        .downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| payload.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "unknown panic".to_string())
}

fn worker_loop(inner: &Inner) {
    while let Some(task) = inner.next_task() {
        {
            let mut status = task.status.lock();
            if status.state != TaskState::Queued {
                continue;
            }
            status.state = TaskState::Running;
            status.started_at_ms = Some(now_ms());
        }
        if let Err(e) = inner.persist(&task) {
            tracing::warn!("cannot persist task state: {e}");
        }
        let outcome = match catch_unwind(AssertUnwindSafe(|| inner.run(&task))) {
            Ok(r) => r,
            Err(payload) => Err(ExecError::Failed(format!("executor crashed: {}", panic_message(&*payload)))),
        };
        let outcome = outcome.and_then(|result| {
            let id = task.status.lock().task_id.clone();
            let bytes = serde_json::to_vec(&result).map_err(|e| ExecError::Failed(e.to_string()))?;
            write_atomically(&inner.result_path(&id), &bytes).map_err(|e| ExecError::Failed(e.to_string()))?;
            Ok(result)
        });
        {
            let mut status = task.status.lock();
            status.finished_at_ms = Some(now_ms());
            match outcome {
                Ok(result) => {
                    task.control.report(1.0);
                    status.progress = 1.0;
                    status.state = TaskState::Done;
                    *task.result.lock() = Some(Arc::new(result));
                }
                Err(ExecError::Cancelled) => status.state = TaskState::Cancelled,
                Err(e) => {
                    status.state = TaskState::Failed;
                    status.error_message = Some(e.to_string());
                }
            }
        }
        if let Err(e) = inner.persist(&task) {
            tracing::warn!("cannot persist task state: {e}");
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::results::ResultQuery;
    use serde_json::json;

    const T1: &str = "A,B,C\n1,a,x\n1,a,y\n2,b,x\n2,b,x\n";

    fn engine(dir: &Path, workers: usize) -> Engine {
        let config = EngineConfig {
            data_dir: dir.to_path_buf(),
            workers,
            allow_fault_injection: true,
            ..EngineConfig::default()
        };
        Engine::start(config).unwrap()
    }

    fn spec(kind: TaskKind, ds: &str, params: serde_json::Value) -> TaskSpec {
        TaskSpec::new(kind, vec![ds.to_string()], params)
    }

    #[test]
    fn discovery_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let e = engine(dir.path(), 2);
        let ds = e.upload("t1", T1.as_bytes(), CsvOptions::default()).unwrap();
        let s = e.submit(spec(TaskKind::DiscoverFd, &ds.id, json!({"error_threshold": 0.25}))).unwrap();
        assert_eq!(s.state, TaskState::Queued);
        assert_eq!(s.progress, 0.0);
        let done = e.wait(&s.task_id, Duration::from_secs(10)).unwrap();
        assert_eq!(done.state, TaskState::Done);
        assert_eq!(done.progress, 1.0);
        assert_eq!(e.status(&s.task_id).unwrap().state, TaskState::Done);
        let page = e
            .result_page(&s.task_id, &ResultQuery { sort: Some("-error".into()), ..Default::default() })
            .unwrap();
        assert_eq!(page.items[0].text, "[] -> C (error=0.25)");
        assert!(matches!(e.cancel(&s.task_id), Err(EngineError::AlreadyFinished { .. })));
    }

    #[test]
    fn submission_errors() {
        let dir = tempfile::tempdir().unwrap();
        let e = engine(dir.path(), 1);
        let ds = e.upload("t1", T1.as_bytes(), CsvOptions::default()).unwrap();
        let err = e.submit(spec(TaskKind::DiscoverFd, &ds.id, json!({"error_threshold": 1.5}))).unwrap_err();
        assert_eq!(err.code(), "validation_error");
        let err = e.submit(spec(TaskKind::DiscoverFd, "ds999999", json!({}))).unwrap_err();
        assert_eq!(err.code(), "unknown_dataset");
        let err = e.submit(spec(TaskKind::ValidateFd, &ds.id, json!({"lhs": ["Z"], "rhs": "C"}))).unwrap_err();
        assert_eq!(err.code(), "validation_error");
        e.delete_dataset(&ds.id).unwrap();
        let err = e.submit(spec(TaskKind::DiscoverFd, &ds.id, json!({}))).unwrap_err();
        assert_eq!(err.code(), "unknown_dataset");
        assert_eq!(e.status("task999").unwrap_err().code(), "unknown_task");
    }

    #[test]
    fn panics_are_isolated() {
        let dir = tempfile::tempdir().unwrap();
        let e = engine(dir.path(), 2);
        let ds = e.upload("t1", T1.as_bytes(), CsvOptions::default()).unwrap();
        let mut bad = spec(TaskKind::DiscoverFd, &ds.id, json!({}));
        bad.fault = Some(Fault::Panic);
        let bad = e.submit(bad).unwrap();
        let good = e.submit(spec(TaskKind::ProfileStats, &ds.id, json!({}))).unwrap();
        let bad = e.wait(&bad.task_id, Duration::from_secs(10)).unwrap();
        assert_eq!(bad.state, TaskState::Failed);
        assert!(bad.error_message.unwrap().contains("injected executor fault"));
        assert_eq!(e.wait(&good.task_id, Duration::from_secs(10)).unwrap().state, TaskState::Done);
        assert_eq!(e.result_page(&bad.task_id, &ResultQuery::default()).unwrap_err().code(), "not_finished");
    }

    #[test]
    fn queued_tasks_cancel_immediately_and_fifo_holds() {
        let dir = tempfile::tempdir().unwrap();
        let e = engine(dir.path(), 1);
        let ds = e.upload("t1", T1.as_bytes(), CsvOptions::default()).unwrap();
        let ids: Vec<String> =
            (0..4).map(|_| e.submit(spec(TaskKind::ProfileStats, &ds.id, json!({}))).unwrap().task_id).collect();
        let last = e.cancel(&ids[3]);
        if let Ok(s) = last {
            assert!(matches!(s.state, TaskState::Cancelled | TaskState::Running | TaskState::Done));
        }
        let starts: Vec<u64> = ids[..3]
            .iter()
            .map(|id| e.wait(id, Duration::from_secs(10)).unwrap().started_at_ms.unwrap())
            .collect();
        assert!(starts.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn restart_recovers_registry_and_fails_in_flight_tasks() {
        let dir = tempfile::tempdir().unwrap();
        let (done_id, ds_id) = {
            let e = engine(dir.path(), 1);
            let ds = e.upload("t1", T1.as_bytes(), CsvOptions::default()).unwrap();
            let s = e.submit(spec(TaskKind::ProfileStats, &ds.id, json!({}))).unwrap();
            e.wait(&s.task_id, Duration::from_secs(10)).unwrap();
            (s.task_id, ds.id)
        };
        // Forge an in-flight record as a crash would leave it.
        let record = json!({
            "spec": {"kind": "profile_stats", "datasets": [ds_id]},
            "status": {"task_id": "task000042", "kind": "profile_stats", "datasets": [ds_id], "state": "running",
                       "progress": 0.5, "error_message": null, "submitted_at_ms": 0, "started_at_ms": 1,
                       "finished_at_ms": null}
        });
        std::fs::write(dir.path().join("tasks/task000042.json"), record.to_string()).unwrap();
        let e = engine(dir.path(), 1);
        let s = e.status("task000042").unwrap();
        assert_eq!(s.state, TaskState::Failed);
        assert_eq!(s.error_message.as_deref(), Some(RESTART_MESSAGE));
        assert_eq!(e.result_page(&done_id, &ResultQuery::default()).unwrap().total_count, 3);
        assert_eq!(e.dataset(&ds_id).unwrap().row_count, 4);
        let next = e.submit(spec(TaskKind::ProfileStats, &ds_id, json!({}))).unwrap();
        assert_eq!(next.task_id, "task000043");
    }

    #[test]
    fn fixes_as_a_task() {
        let dir = tempfile::tempdir().unwrap();
        let e = engine(dir.path(), 1);
        let ds = e.upload("t1", T1.as_bytes(), CsvOptions::default()).unwrap();
        let s = e
            .submit(spec(TaskKind::ApplyFixes, &ds.id, json!({"decisions": [{"row": 1, "column": 2, "replacement": "x"}]})))
            .unwrap();
        assert_eq!(e.wait(&s.task_id, Duration::from_secs(10)).unwrap().state, TaskState::Done);
        let rev = e.result(&s.task_id).unwrap().summary["dataset_id"].as_str().unwrap().to_string();
        assert_eq!(e.dataset(&rev).unwrap().parent(), Some(ds.id.as_str()));
    }
}
