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

//! Task executors: run one primitive over loaded tables and turn its output
//! into a [`ResultSet`]. Shared by the engine and the CLI.

use std::path::PathBuf;
use std::sync::Arc;

use profiler_core::arm::{derive_rules, mine_frequent_itemsets, ArmError, TransactionSet};
use profiler_core::fd::{discover_fds, validate_fd, Fd, FdError, ViolationCluster};
use profiler_core::ind::{validate_ind, AttributeRef, Ind, IndError};
use profiler_core::mfd::{validate_mfd, MfdCluster, MfdError, MfdQuery, MfdReport};
use profiler_core::runtime::Interrupt;
use profiler_core::stats::{profile_table_with, ColumnStats};
use profiler_core::typo::{find_typo_candidates, majority_fixes, TypoFinding};
use profiler_core::{ColumnSet, DatasetError, Table};
use serde_json::{json, Value};

use crate::results::{ResultItem, ResultSet};
use crate::runtime::PoolRuntime;
use crate::spec::{
    ColumnRef, DiscoverFdParams, MineRulesParams, TaskKind, TaskParams, TypoPipelineParams, ValidateFdParams,
    ValidateIndParams, ValidateMfdParams,
};

/// A loaded dataset. The table is named for display; `id` is the registry key.
#[derive(Debug, Clone)]
pub struct Input {
    pub id: String,
    pub table: Arc<Table>,
}

#[derive(Debug, Clone, Default)]
pub struct ExecEnv {
    /// Where IND discovery may spill large value lists; `None` keeps
    /// everything in memory.
    pub spill_dir: Option<PathBuf>,
    pub spill_threshold: usize,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExecError {
    #[error("cancelled")]
    Cancelled,
    #[error("resource limit exceeded: {0}")]
    ResourceLimitExceeded(Interrupt),
    #[error("{0}")]
    Failed(String),
}

impl From<Interrupt> for ExecError {
    fn from(i: Interrupt) -> Self {
        match i {
            Interrupt::Cancelled => ExecError::Cancelled,
            other => ExecError::ResourceLimitExceeded(other),
        }
    }
}

impl From<FdError> for ExecError {
    fn from(e: FdError) -> Self {
        match e {
            FdError::Cancelled => ExecError::Cancelled,
            FdError::ResourceLimitExceeded(i) => i.into(),
            other => ExecError::Failed(other.to_string()),
        }
    }
}

macro_rules! failed_from {
    ($($t:ty),*) => {$(
        impl From<$t> for ExecError {
            fn from(e: $t) -> Self {
                ExecError::Failed(e.to_string())
            }
        }
    )*};
}
failed_from!(DatasetError, MfdError, IndError, ArmError, std::io::Error);

fn resolve(table: &Table, r: &ColumnRef) -> Result<usize, ExecError> {
    let names: Vec<String> = table.column_names().map(str::to_string).collect();
    r.resolve(&names).map_err(ExecError::Failed)
}

fn column_set(table: &Table, refs: &[ColumnRef]) -> Result<ColumnSet, ExecError> {
    refs.iter().map(|r| resolve(table, r)).collect::<Result<Vec<_>, _>>().map(|v| v.into_iter().collect())
}

fn names(table: &Table, cols: impl IntoIterator<Item = usize>) -> Vec<String> {
    cols.into_iter().map(|c| table.columns()[c].name().to_string()).collect()
}

fn cell(v: &Option<String>) -> &str {
    v.as_deref().unwrap_or("NULL")
}

fn render_values(values: &[Option<String>]) -> String {
    format!("[{}]", values.iter().map(cell).collect::<Vec<_>>().join(", "))
}

pub fn fd_json(fd: &Fd, table: &Table) -> Value {
    json!({
        "lhs": names(table, fd.lhs.iter()),
        "rhs": table.columns()[fd.rhs].name(),
        "lhs_indices": fd.lhs.iter().collect::<Vec<_>>(),
        "rhs_index": fd.rhs,
        "error": fd.error,
    })
}

/// Runs `params` over `inputs`. Dataset edits are not executors; they are
/// handled by the registry.
pub fn execute(params: &TaskParams, inputs: &[Input], rt: &PoolRuntime, env: &ExecEnv) -> Result<ResultSet, ExecError> {
    rt.check()?;
    let first = &inputs.first().ok_or_else(|| ExecError::Failed("no dataset".into()))?.table;
    let result = match params {
        TaskParams::DiscoverFd(p) => discover_fd(first, p, rt)?,
        TaskParams::ValidateFd(p) => validate_fd_task(first, p)?,
        TaskParams::ValidateMfd(p) => validate_mfd_task(first, p)?,
        TaskParams::DiscoverInd(_) => discover_ind(inputs, env)?,
        TaskParams::ValidateInd(p) => validate_ind_task(inputs, p)?,
        TaskParams::MineRules(p) => mine_rules(first, p, rt)?,
        TaskParams::ProfileStats(_) => profile_stats(first, rt),
        TaskParams::TypoPipeline(p) => typo_pipeline(first, p, rt)?,
        TaskParams::ApplyFixes(_) => return Err(ExecError::Failed("dataset edits are applied by the registry".into())),
    };
    rt.check()?;
    Ok(result)
}

pub fn fd_item(fd: &Fd, table: &Table) -> ResultItem {
    let names: Vec<&str> = table.column_names().collect();
    ResultItem::new(fd.render(table), fd_json(fd, table))
        .key("error", fd.error)
        .key("lhs", fd.lhs.render(&names))
        .key("rhs", names[fd.rhs])
        .key("lhs_size", fd.lhs.len())
}

fn discover_fd(table: &Table, p: &DiscoverFdParams, rt: &PoolRuntime) -> Result<ResultSet, ExecError> {
    let fds = discover_fds(table, &p.config(), rt)?;
    let items = fds.iter().map(|fd| fd_item(fd, table)).collect();
    let summary = json!({"fd_count": fds.len(), "error_threshold": p.error_threshold, "max_lhs": p.max_lhs});
    Ok(ResultSet::new(TaskKind::DiscoverFd, summary, items, &["error", "lhs", "rhs", "lhs_size"]))
}

pub fn violation_text(c: &ViolationCluster) -> String {
    let rows: Vec<String> = c.rows.iter().map(|(r, v)| format!("r{r}:{}", cell(v))).collect();
    format!(
        "{} -> {{{}}} majority={} ({}/{})",
        render_values(&c.lhs_value),
        rows.join(", "),
        cell(&c.majority_rhs),
        c.majority_count,
        c.len()
    )
}

fn validate_fd_task(table: &Table, p: &ValidateFdParams) -> Result<ResultSet, ExecError> {
    let lhs = column_set(table, &p.lhs)?;
    let rhs = resolve(table, &p.rhs)?;
    let report = validate_fd(table, &lhs, rhs, p.error_threshold)?;
    let column_names: Vec<&str> = table.column_names().collect();
    let fd_text = format!("{} -> {}", lhs.render(&column_names), column_names[rhs]);
    let items = report
        .clusters
        .iter()
        .map(|c| {
            let mut data = serde_json::to_value(c).unwrap_or(Value::Null);
            data["size"] = json!(c.len());
            ResultItem::new(violation_text(c), data)
                .key("size", c.len())
                .key("distinct_rhs", c.distinct_rhs_count)
                .key("first_row", c.rows.first().map_or(0, |r| r.0 as usize))
        })
        .collect();
    let summary = json!({
        "fd": fd_text,
        "holds": report.holds,
        "error": report.error,
        "error_threshold": p.error_threshold,
        "cluster_count": report.clusters.len(),
    });
    Ok(ResultSet::new(TaskKind::ValidateFd, summary, items, &["size", "distinct_rhs", "first_row"]))
}

/// Resolves an MFD query against `table`.
pub fn mfd_query(table: &Table, p: &ValidateMfdParams) -> Result<MfdQuery, ExecError> {
    Ok(MfdQuery {
        lhs: column_set(table, &p.lhs)?,
        rhs: p.rhs.iter().map(|r| resolve(table, r)).collect::<Result<_, _>>()?,
        metric: p.metric,
        delta: p.delta,
    })
}

pub fn mfd_cluster_text(c: &MfdCluster) -> String {
    format!("{} diameter={} outliers={}/{}", render_values(&c.lhs_value), c.diameter(), c.outlier_count(), c.points.len())
}

/// The cluster screen: one block per violating cluster, one line per point,
/// outliers marked with a leading `x`.
pub fn render_mfd_screen(report: &MfdReport, table: &Table, query: &MfdQuery) -> String {
    let lhs_names = names(table, query.lhs.iter()).join(", ");
    let rhs_names = names(table, query.rhs.iter().copied()).join(", ");
    let mut out = format!(
        "MFD [{lhs_names}] -> [{rhs_names}] metric={} delta={}: {}\n",
        query.metric.name(),
        query.delta,
        if report.holds { "holds" } else { "violated" }
    );
    for c in &report.clusters {
        out.push_str(&format!("\n{}\n", mfd_cluster_text(c)));
        for p in &c.points {
            out.push_str(&format!(
                "{} row {:>6}  [{}]  nearest={} farthest={}\n",
                if p.is_outlier { "x" } else { " " },
                p.row,
                p.value.join(", "),
                p.nearest,
                p.farthest
            ));
        }
    }
    out
}

fn validate_mfd_task(table: &Table, p: &ValidateMfdParams) -> Result<ResultSet, ExecError> {
    let query = mfd_query(table, p)?;
    let report = validate_mfd(table, &query)?;
    let items = report
        .clusters
        .iter()
        .map(|c| {
            let mut data = serde_json::to_value(c).unwrap_or(Value::Null);
            data["diameter"] = json!(c.diameter());
            data["outlier_count"] = json!(c.outlier_count());
            ResultItem::new(mfd_cluster_text(c), data)
                .key("distance", c.diameter())
                .key("outliers", c.outlier_count())
                .key("size", c.points.len())
                .key("first_row", c.points.iter().map(|p| p.row as usize).min().unwrap_or(0))
        })
        .collect();
    let summary = json!({
        "holds": report.holds,
        "lhs": names(table, query.lhs.iter()),
        "rhs": names(table, query.rhs.iter().copied()),
        "metric": query.metric,
        "delta": query.delta,
        "cluster_count": report.clusters.len(),
    });
    Ok(ResultSet::new(TaskKind::ValidateMfd, summary, items, &["distance", "outliers", "size", "first_row"]))
}

/// Tables renamed so that every input has a distinct name: the dataset name
/// when unique among the inputs, else `name#id`.
fn distinct_tables(inputs: &[Input]) -> Vec<Table> {
    inputs
        .iter()
        .map(|i| {
            let clash = inputs.iter().filter(|o| o.table.name() == i.table.name()).count() > 1;
            let name = if clash { format!("{}#{}", i.table.name(), i.id) } else { i.table.name().to_string() };
            (*i.table).clone().with_name(&name)
        })
        .collect()
}

fn attribute_json(a: &AttributeRef, tables: &[&Table], inputs: &[Input]) -> Value {
    let i = tables.iter().position(|t| t.name() == a.table).unwrap_or(0);
    json!({
        "dataset": inputs[i].id,
        "table": a.table,
        "column": a.column,
        "column_name": tables[i].columns()[a.column].name(),
    })
}

fn discover_ind(inputs: &[Input], env: &ExecEnv) -> Result<ResultSet, ExecError> {
    let owned = distinct_tables(inputs);
    let tables: Vec<&Table> = owned.iter().collect();
    let inds: Vec<Ind> = match &env.spill_dir {
        Some(dir) => {
            let scratch = tempfile::tempdir_in(dir)?;
            crate::io::discover_inds_spilling(&tables, env.spill_threshold, scratch.path())?
        }
        None => profiler_core::ind::discover_unary_inds(&tables),
    };
    let items = inds
        .iter()
        .map(|ind| {
            ResultItem::new(
                ind.render(&tables),
                json!({
                    "dependent": attribute_json(&ind.dependent, &tables, inputs),
                    "referenced": attribute_json(&ind.referenced, &tables, inputs),
                }),
            )
            .key("dependent", ind.dependent.render(&tables))
            .key("referenced", ind.referenced.render(&tables))
        })
        .collect();
    Ok(ResultSet::new(TaskKind::DiscoverInd, json!({"ind_count": inds.len()}), items, &["dependent", "referenced"]))
}

fn validate_ind_task(inputs: &[Input], p: &ValidateIndParams) -> Result<ResultSet, ExecError> {
    let owned = distinct_tables(inputs);
    let tables: Vec<&Table> = owned.iter().collect();
    let attribute = |a: &crate::spec::AttributeParam| -> Result<AttributeRef, ExecError> {
        let i = inputs
            .iter()
            .position(|d| d.id == a.dataset)
            .ok_or_else(|| ExecError::Failed(format!("dataset {} not loaded", a.dataset)))?;
        Ok(AttributeRef::new(tables[i].name(), resolve(tables[i], &a.column)?))
    };
    let ind = Ind { dependent: attribute(&p.dependent)?, referenced: attribute(&p.referenced)? };
    let v = validate_ind(&ind, &tables, p.max_missing)?;
    let items = v.missing.iter().map(|m| ResultItem::new(m.clone(), json!({"value": m})).key("value", m.as_str())).collect();
    let summary = json!({
        "ind": ind.render(&tables),
        "holds": v.holds,
        "missing_total": v.missing_total,
        "dependent": attribute_json(&ind.dependent, &tables, inputs),
        "referenced": attribute_json(&ind.referenced, &tables, inputs),
    });
    Ok(ResultSet::new(TaskKind::ValidateInd, summary, items, &["value"]))
}

fn mine_rules(table: &Table, p: &MineRulesParams, rt: &PoolRuntime) -> Result<ResultSet, ExecError> {
    let txns = TransactionSet::from_table(table, p.layout)?;
    rt.check()?;
    let itemsets = mine_frequent_itemsets(&txns, p.min_support, p.algorithm)?;
    rt.check()?;
    let rules = derive_rules(&itemsets, p.min_confidence)?;
    let item_names = |ids: &[u32]| ids.iter().map(|&i| txns.item_name(i).to_string()).collect::<Vec<_>>();
    let mut items: Vec<ResultItem> = rules
        .iter()
        .map(|r| {
            ResultItem::new(
                r.render(&txns),
                json!({
                    "type": "rule",
                    "antecedent": item_names(&r.antecedent),
                    "consequent": item_names(&r.consequent),
                    "support": r.support,
                    "confidence": r.confidence,
                }),
            )
            .key("support", r.support)
            .key("confidence", r.confidence)
            .key("size", r.antecedent.len() + r.consequent.len())
        })
        .collect();
    items.extend(itemsets.iter().map(|s| {
        ResultItem::new(
            s.render(&txns),
            json!({"type": "itemset", "items": item_names(&s.items), "count": s.count, "support": s.support}),
        )
        .key("support", s.support)
        .key("size", s.items.len())
        .key("count", s.count)
    }));
    let summary = json!({
        "transactions": txns.len(),
        "itemset_count": itemsets.len(),
        "rule_count": rules.len(),
        "min_support": p.min_support,
        "min_confidence": p.min_confidence,
        "algorithm": p.algorithm,
    });
    Ok(ResultSet::new(TaskKind::MineRules, summary, items, &["support", "confidence", "size", "count"]))
}

pub fn stats_text(s: &ColumnStats) -> String {
    let opt = |v: &Option<String>| v.clone().unwrap_or_else(|| "-".into());
    let num = |v: Option<f64>| v.map_or_else(|| "-".into(), |x| x.to_string());
    format!(
        "{}: type={} rows={} nulls={} distinct={} min={} max={} mean={} std_dev={}",
        s.name,
        s.inferred_type.as_str(),
        s.row_count,
        s.null_count,
        s.distinct_count,
        opt(&s.min),
        opt(&s.max),
        num(s.mean),
        num(s.std_dev)
    )
}

fn profile_stats(table: &Table, rt: &PoolRuntime) -> ResultSet {
    let stats = profile_table_with(table, rt);
    let items = stats
        .iter()
        .map(|s| {
            let mut item = ResultItem::new(stats_text(s), serde_json::to_value(s).unwrap_or(Value::Null))
                .key("name", s.name.as_str())
                .key("type", s.inferred_type.as_str())
                .key("nulls", s.null_count)
                .key("distinct", s.distinct_count);
            if let Some(m) = s.mean {
                item = item.key("mean", m);
            }
            if let Some(d) = s.std_dev {
                item = item.key("std_dev", d);
            }
            item
        })
        .collect();
    let summary = json!({"row_count": table.row_count(), "column_count": table.column_count()});
    ResultSet::new(TaskKind::ProfileStats, summary, items, &["name", "type", "nulls", "distinct", "mean", "std_dev"])
}

fn typo_pipeline(table: &Table, p: &TypoPipelineParams, rt: &PoolRuntime) -> Result<ResultSet, ExecError> {
    let findings: Vec<TypoFinding> = find_typo_candidates(table, &p.config(), rt)?;
    let mut items = Vec::new();
    for f in &findings {
        let fd_text = f.fd.render(table);
        let fixes = majority_fixes(f);
        for c in &f.clusters {
            let suspects: Vec<String> = c.suspect_rows.iter().map(|r| format!("r{r}")).collect();
            let text = format!(
                "{fd_text} | {} suspects [{}] score={}",
                violation_text(&c.cluster),
                suspects.join(", "),
                c.suspicion_score
            );
            let cluster_fixes: Vec<_> = fixes.iter().filter(|d| c.suspect_rows.contains(&(d.row as u32))).collect();
            let data = json!({
                "fd": fd_json(&f.fd, table),
                "fd_text": fd_text,
                "total_clusters": f.total_clusters,
                "cluster": c.cluster,
                "suspect_rows": c.suspect_rows,
                "suspicion_score": c.suspicion_score,
                "majority_fixes": cluster_fixes,
            });
            items.push(
                ResultItem::new(text, data)
                    .key("error", f.fd.error)
                    .key("score", c.suspicion_score)
                    .key("size", c.cluster.len()),
            );
        }
    }
    let summary = json!({"fd_count": findings.len(), "error_threshold": p.error_threshold});
    Ok(ResultSet::new(TaskKind::TypoPipeline, summary, items, &["error", "score", "size"]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec::TaskSpec;
    use profiler_core::table::CsvOptions;

    const T1: &str = "A,B,C\n1,a,x\n1,a,y\n2,b,x\n2,b,x\n";

    fn run(kind: TaskKind, params: Value, tables: &[(&str, &str)]) -> Result<ResultSet, ExecError> {
        let inputs: Vec<Input> = tables
            .iter()
            .map(|(id, csv)| Input {
                id: id.to_string(),
                table: Arc::new(Table::from_csv_str(id, csv, CsvOptions::default()).unwrap()),
            })
            .collect();
        let spec = TaskSpec::new(kind, inputs.iter().map(|i| i.id.clone()).collect(), params);
        let params = spec.validate(false).map_err(|e| ExecError::Failed(e.0))?;
        execute(&params, &inputs, &PoolRuntime::unbounded(2).unwrap(), &ExecEnv::default())
    }

    fn texts(r: &ResultSet) -> Vec<&str> {
        r.items.iter().map(|i| i.text.as_str()).collect()
    }

    #[test]
    fn fd_discovery_renders_lines() {
        let r = run(TaskKind::DiscoverFd, json!({}), &[("t1", T1)]).unwrap();
        assert_eq!(texts(&r), ["[A] -> B (error=0)", "[B] -> A (error=0)"]);
        assert_eq!(r.items[0].data["lhs"], json!(["A"]));
    }

    #[test]
    fn fd_validation_lists_clusters() {
        let r = run(TaskKind::ValidateFd, json!({"lhs": ["A"], "rhs": "C"}), &[("t1", T1)]).unwrap();
        assert_eq!(r.summary["holds"], json!(false));
        assert_eq!(r.summary["error"], json!(0.25));
        assert_eq!(texts(&r), ["[1] -> {r0:x, r1:y} majority=x (1/2)"]);
    }

    #[test]
    fn mfd_screen_marks_outliers() {
        let csv = "g,v\na,1\na,2\na,9\nb,5\n";
        let table = Table::from_csv_str("m", csv, CsvOptions::default()).unwrap();
        let p = ValidateMfdParams {
            lhs: vec![ColumnRef::Name("g".into())],
            rhs: vec![ColumnRef::Name("v".into())],
            metric: profiler_core::mfd::Metric::AbsoluteDifference,
            delta: 2.0,
        };
        let query = mfd_query(&table, &p).unwrap();
        let screen = render_mfd_screen(&validate_mfd(&table, &query).unwrap(), &table, &query);
        assert!(screen.contains("violated"));
        assert!(screen.lines().any(|l| l.starts_with("x row      2")));
        assert!(screen.lines().any(|l| l.starts_with("  row      0")));
    }

    #[test]
    fn ind_uses_dataset_names() {
        let r = run(TaskKind::DiscoverInd, json!({}), &[("orders", "cust\n1\n2\n"), ("customers", "id\n1\n2\n3\n")]).unwrap();
        assert_eq!(texts(&r), ["orders.cust ⊆ customers.id"]);
        let r = run(
            TaskKind::ValidateInd,
            json!({"dependent": {"dataset": "customers", "column": "id"}, "referenced": {"dataset": "orders", "column": 0}}),
            &[("orders", "cust\n1\n2\n"), ("customers", "id\n1\n2\n3\n")],
        )
        .unwrap();
        assert_eq!(r.summary["holds"], json!(false));
        assert_eq!(texts(&r), ["3"]);
    }

    #[test]
    fn classic_basket_rules() {
        let csv = "i1,i2,i3,i4\nbread,milk,,\nbread,diaper,beer,eggs\nmilk,diaper,beer,cola\nbread,milk,diaper,beer\nbread,milk,diaper,cola\n";
        let r = run(TaskKind::MineRules, json!({"min_support": 0.6, "min_confidence": 0.75}), &[("b", csv)]).unwrap();
        assert_eq!(r.summary["itemset_count"], json!(8));
        assert!(texts(&r).contains(&"{diaper} -> {beer} (sup=0.6, conf=0.75)"));
    }

    #[test]
    fn typo_items_carry_fixes() {
        let csv = "k,city\n1,Berlin\n1,Berlin\n1,Berlni\n2,Paris\n2,Paris\n2,Paris\n3,Rome\n3,Rome\n3,Rome\n3,Rome\n";
        let r = run(TaskKind::TypoPipeline, json!({"error_threshold": 0.2}), &[("c", csv)]).unwrap();
        let item = r.items.iter().find(|i| i.text.starts_with("[k] -> city")).unwrap();
        assert_eq!(item.data["suspect_rows"], json!([2]));
        assert_eq!(item.data["majority_fixes"], json!([{"row": 2, "column": 1, "replacement": "Berlin"}]));
    }

    #[test]
    fn stats_and_cancellation() {
        let r = run(TaskKind::ProfileStats, json!({}), &[("t1", T1)]).unwrap();
        assert_eq!(r.items[0].text, "A: type=integer rows=4 nulls=0 distinct=2 min=1 max=2 mean=1.5 std_dev=0.5");
        let rt = PoolRuntime::unbounded(1).unwrap();
        rt.control().cancel();
        let input = Input { id: "t".into(), table: Arc::new(Table::from_csv_str("t", T1, CsvOptions::default()).unwrap()) };
        let p = TaskParams::DiscoverFd(DiscoverFdParams {
            error_threshold: 0.0,
            max_lhs: None,
            thread_count: 1,
            algorithm: Default::default(),
        });
        assert_eq!(execute(&p, &[input], &rt, &ExecEnv::default()).unwrap_err(), ExecError::Cancelled);
    }
}
