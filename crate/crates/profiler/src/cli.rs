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

//! Non-interactive command line: one subcommand per primitive, plus
//! `serve` for the HTTP API.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use profiler_core::arm::{Algorithm, Layout};
use profiler_core::mfd::{validate_mfd, Metric, MfdSortKey};
use profiler_core::table::CsvOptions;
use profiler_core::NullMode;
use serde_json::{json, Value};

use crate::config::EngineConfig;
use crate::engine::Engine;
use crate::exec::{execute, mfd_cluster_text, mfd_query, render_mfd_screen, ExecEnv, ExecError, Input};
use crate::io::read_table;
use crate::results::{QueryError, ResultSet};
use crate::runtime::PoolRuntime;
use crate::spec::{ColumnRef, TaskKind, TaskSpec, ValidateMfdParams};

#[derive(Debug, Parser)]
#[command(name = "profiler", version, about = "Discover and validate data dependencies in CSV files")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Discover minimal functional dependencies (exact or approximate).
    DiscoverFd {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum, default_value_t = FdAlgo::Tane)]
        algo: FdAlgo,
        /// Largest g3 error accepted, in [0, 1).
        #[arg(long = "error", default_value_t = 0.0)]
        error: f64,
        #[arg(long)]
        max_lhs: Option<usize>,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        #[command(flatten)]
        view: ViewArgs,
    },
    /// Check one functional dependency and list its violating clusters.
    ValidateFd {
        #[command(flatten)]
        input: InputArgs,
        /// Comma-separated left-hand columns (names or indexes).
        #[arg(long, value_delimiter = ',')]
        lhs: Vec<String>,
        #[arg(long)]
        rhs: String,
        #[arg(long = "error", default_value_t = 0.0)]
        error: f64,
        #[command(flatten)]
        view: ViewArgs,
    },
    /// Check a metric functional dependency and print its cluster screen.
    ValidateMfd {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_delimiter = ',')]
        lhs: Vec<String>,
        #[arg(long, value_delimiter = ',', required = true)]
        rhs: Vec<String>,
        #[arg(long, value_enum, default_value_t = MetricArg::AbsoluteDifference)]
        metric: MetricArg,
        #[arg(long)]
        delta: f64,
        /// distance, index or outliers.
        #[arg(long, allow_hyphen_values = true)]
        sort_by: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        filter: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Discover unary inclusion dependencies across one or more files.
    DiscoverInd {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        view: ViewArgs,
    },
    /// Check `TABLE.COLUMN ⊆ TABLE.COLUMN`; tables are named by file stem.
    ValidateInd {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        dependent: String,
        #[arg(long)]
        referenced: String,
        #[arg(long, default_value_t = profiler_core::ind::DEFAULT_MISSING_SAMPLE)]
        max_missing: usize,
        #[command(flatten)]
        view: ViewArgs,
    },
    /// Mine frequent itemsets and association rules.
    MineRules {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum, default_value_t = RuleAlgo::Fpgrowth)]
        algo: RuleAlgo,
        #[arg(long)]
        min_support: f64,
        #[arg(long)]
        min_confidence: f64,
        #[arg(long, value_enum, default_value_t = LayoutArg::Tabular)]
        layout: LayoutArg,
        #[command(flatten)]
        view: ViewArgs,
    },
    /// Per-column statistics.
    ProfileStats {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        #[command(flatten)]
        view: ViewArgs,
    },
    /// Run the HTTP API and task engine.
    Serve {
        /// TOML configuration file; `PROFILER_*` variables override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        listen: Option<String>,
    },
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// CSV file; repeat for multi-table primitives.
    #[arg(long = "dataset", required = true)]
    pub datasets: Vec<PathBuf>,
    #[arg(long, default_value_t = ',')]
    pub separator: char,
    /// Whether the first record holds column names.
    #[arg(long, action = ArgAction::Set, num_args = 0..=1, default_value_t = true, default_missing_value = "true")]
    pub has_header: bool,
    #[arg(long, value_enum, default_value_t = NullArg::Equal)]
    pub null_mode: NullArg,
}

#[derive(Debug, Args)]
pub struct ViewArgs {
    /// Result sort key; prefix with `-` for descending order.
    #[arg(long, allow_hyphen_values = true)]
    pub sort_by: Option<String>,
    /// Keep only results whose text rendering matches this regex.
    #[arg(long, allow_hyphen_values = true)]
    pub filter: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FdAlgo {
    Tane,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RuleAlgo {
    Apriori,
    Fpgrowth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LayoutArg {
    Singular,
    Tabular,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    AbsoluteDifference,
    Euclidean,
    Levenshtein,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NullArg {
    Equal,
    Distinct,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Dataset(#[from] profiler_core::DatasetError),
    #[error(transparent)]
    Exec(#[from] ExecError),
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Engine(String),
}

impl InputArgs {
    fn options(&self) -> CsvOptions {
        CsvOptions {
            separator: self.separator,
            has_header: self.has_header,
            null_mode: match self.null_mode {
                NullArg::Equal => NullMode::NullEqual,
                NullArg::Distinct => NullMode::NullDistinct,
            },
        }
    }

    fn load(&self) -> Result<Vec<Input>, CliError> {
        let options = self.options();
        self.datasets
            .iter()
            .map(|path| {
                let table = read_table(path, options)?;
                Ok(Input { id: table.name().to_string(), table: Arc::new(table) })
            })
            .collect()
    }
}

fn column_ref(s: &str) -> ColumnRef {
    ColumnRef::Name(s.trim().to_string())
}

/// Splits `TABLE.COLUMN` using the known table names, so that both parts
/// may contain dots.
fn attribute(arg: &str, inputs: &[Input]) -> Result<Value, CliError> {
    inputs
        .iter()
        .filter_map(|i| arg.strip_prefix(i.id.as_str()).and_then(|r| r.strip_prefix('.')).map(|col| (i, col)))
        .max_by_key(|(i, _)| i.id.len())
        .map(|(i, col)| json!({"dataset": i.id, "column": col}))
        .ok_or_else(|| CliError::Usage(format!("{arg:?} does not name TABLE.COLUMN of a loaded dataset")))
}

/// Parses `args` (including the program name) and runs the command,
/// writing results to `out`.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            write!(out, "{e}")?;
            return Ok(());
        }
        Err(e) => return Err(CliError::Usage(e.to_string())),
    };
    run_command(cli.command, out)
}

fn run_command(command: Command, out: &mut dyn Write) -> Result<(), CliError> {
    let (kind, input, params, threads, view) = match command {
        Command::Serve { config, listen } => return serve(config.as_deref(), listen),
        Command::ValidateMfd { input, lhs, rhs, metric, delta, sort_by, filter, format } => {
            return validate_mfd_cmd(&input, lhs, rhs, metric, delta, sort_by, filter, format, out)
        }
        Command::DiscoverFd { input, algo: FdAlgo::Tane, error, max_lhs, threads, view } => (
            TaskKind::DiscoverFd,
            input,
            json!({"error_threshold": error, "max_lhs": max_lhs, "thread_count": threads}),
            threads,
            view,
        ),
        Command::ValidateFd { input, lhs, rhs, error, view } => {
            (TaskKind::ValidateFd, input, json!({"lhs": lhs, "rhs": rhs, "error_threshold": error}), 1, view)
        }
        Command::DiscoverInd { input, view } => (TaskKind::DiscoverInd, input, json!({}), 1, view),
        Command::ValidateInd { input, dependent, referenced, max_missing, view } => {
            let inputs = input.load()?;
            let params = json!({
                "dependent": attribute(&dependent, &inputs)?,
                "referenced": attribute(&referenced, &inputs)?,
                "max_missing": max_missing,
            });
            return run_task(TaskKind::ValidateInd, inputs, params, 1, &view, out);
        }
        Command::MineRules { input, algo, min_support, min_confidence, layout, view } => {
            let algorithm = match algo {
                RuleAlgo::Apriori => Algorithm::Apriori,
                RuleAlgo::Fpgrowth => Algorithm::FpGrowth,
            };
            let layout = match layout {
                LayoutArg::Singular => Layout::Singular,
                LayoutArg::Tabular => Layout::Tabular,
            };
            let params = json!({"min_support": min_support, "min_confidence": min_confidence,
                                "algorithm": algorithm, "layout": layout});
            (TaskKind::MineRules, input, params, 1, view)
        }
        Command::ProfileStats { input, threads, view } => {
            (TaskKind::ProfileStats, input, json!({"thread_count": threads}), threads, view)
        }
    };
    let inputs = input.load()?;
    run_task(kind, inputs, params, threads, &view, out)
}

fn run_task(
    kind: TaskKind,
    inputs: Vec<Input>,
    params: Value,
    threads: usize,
    view: &ViewArgs,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    if !kind.is_multi_dataset() && inputs.len() != 1 {
        return Err(CliError::Usage(format!("{} takes exactly one --dataset", kind.as_str())));
    }
    let spec = TaskSpec::new(kind, inputs.iter().map(|i| i.id.clone()).collect(), params);
    let params = spec.validate(false).map_err(|e| CliError::Usage(e.0))?;
    let rt = PoolRuntime::unbounded(threads)?;
    let result = execute(&params, &inputs, &rt, &ExecEnv::default())?;
    let selected = result.select(view.sort_by.as_deref(), view.filter.as_deref())?;
    match view.format {
        Format::Json => {
            let items: Vec<&Value> = selected.iter().map(|&i| &result.items[i].data).collect();
            writeln!(out, "{}", serde_json::to_string_pretty(&json!({"summary": result.summary, "items": items})).unwrap_or_default())?;
        }
        Format::Text => write_text(&result, &selected, &inputs, out)?,
    }
    Ok(())
}

fn write_text(result: &ResultSet, selected: &[usize], inputs: &[Input], out: &mut dyn Write) -> Result<(), CliError> {
    let s = &result.summary;
    match result.kind {
        TaskKind::ValidateFd => writeln!(
            out,
            "{}: {} (error={})",
            s["fd"].as_str().unwrap_or_default(),
            if s["holds"] == json!(true) { "holds" } else { "violated" },
            s["error"]
        )?,
        TaskKind::ValidateInd => writeln!(
            out,
            "{}: {} ({} missing values)",
            s["ind"].as_str().unwrap_or_default(),
            if s["holds"] == json!(true) { "holds" } else { "violated" },
            s["missing_total"]
        )?,
        TaskKind::ProfileStats => return write_stats_table(result, selected, &inputs[0], out),
        _ => {}
    }
    for &i in selected {
        writeln!(out, "{}", result.items[i].text)?;
    }
    Ok(())
}

fn write_stats_table(result: &ResultSet, selected: &[usize], input: &Input, out: &mut dyn Write) -> Result<(), CliError> {
    let header = ["column", "type", "rows", "nulls", "distinct", "min", "max", "mean", "std_dev"];
    let field = |v: &Value| match v {
        Value::Null => "-".to_string(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    };
    let mut rows: Vec<Vec<String>> = vec![header.iter().map(|h| h.to_string()).collect()];
    for &i in selected {
        let d = &result.items[i].data;
        rows.push(
            ["name", "inferred_type", "row_count", "null_count", "distinct_count", "min", "max", "mean", "std_dev"]
                .iter()
                .map(|k| field(&d[*k]))
                .collect(),
        );
    }
    let widths: Vec<usize> =
        (0..header.len()).map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0)).collect();
    writeln!(out, "{} ({} rows)", input.table.name(), input.table.row_count())?;
    for r in rows {
        let line: Vec<String> = r.iter().zip(&widths).map(|(v, w)| format!("{v:<w$}")).collect();
        writeln!(out, "{}", line.join("  ").trim_end())?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn validate_mfd_cmd(
    input: &InputArgs,
    lhs: Vec<String>,
    rhs: Vec<String>,
    metric: MetricArg,
    delta: f64,
    sort_by: Option<String>,
    filter: Option<String>,
    format: Format,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let inputs = input.load()?;
    if inputs.len() != 1 {
        return Err(CliError::Usage("validate-mfd takes exactly one --dataset".into()));
    }
    let table = &inputs[0].table;
    let params = ValidateMfdParams {
        lhs: lhs.iter().filter(|s| !s.is_empty()).map(|s| column_ref(s)).collect(),
        rhs: rhs.iter().map(|s| column_ref(s)).collect(),
        metric: match metric {
            MetricArg::AbsoluteDifference => Metric::AbsoluteDifference,
            MetricArg::Euclidean => Metric::Euclidean,
            MetricArg::Levenshtein => Metric::Levenshtein,
        },
        delta,
    };
    let query = mfd_query(table, &params)?;
    let mut report = validate_mfd(table, &query).map_err(|e| ExecError::Failed(e.to_string()))?;
    let key = match sort_by.as_deref().map(|s| s.trim_start_matches('-')) {
        None | Some("distance") => MfdSortKey::Distance,
        Some("index") => MfdSortKey::Index,
        Some("outliers") => MfdSortKey::Outliers,
        Some(other) => {
            return Err(QueryError::UnknownSortKey { key: other.to_string(), available: "distance, index, outliers".into() }.into())
        }
    };
    report.sort_by(key);
    if let Some(pattern) = filter.filter(|f| !f.is_empty()) {
        let re = regex::Regex::new(&pattern).map_err(|e| QueryError::BadRegex(e.to_string()))?;
        report.clusters.retain(|c| re.is_match(&mfd_cluster_text(c)));
    }
    match format {
        Format::Text => write!(out, "{}", render_mfd_screen(&report, table, &query))?,
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&report).unwrap_or_default())?,
    }
    Ok(())
}

fn serve(config: Option<&Path>, listen: Option<String>) -> Result<(), CliError> {
    let mut config = EngineConfig::load(config).map_err(|e| CliError::Engine(e.to_string()))?;
    if let Some(l) = listen {
        config.listen = l;
    }
    let listen = config.listen.clone();
    let engine = Arc::new(Engine::start(config).map_err(|e| CliError::Engine(e.to_string()))?);
    let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    rt.block_on(crate::http::serve(engine.clone(), &listen))?;
    engine.shutdown();
    Ok(())
}
