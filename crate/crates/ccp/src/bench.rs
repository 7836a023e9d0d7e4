//! Batch runs over a directory of instances, one worker process per solve.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use anyhow::{bail, Context};
use ccp_core::engine::{Branching, Clock, Cuts, Hooks, NodeSelect, Propagation};
use ccp_core::{solve_with, CcpInstance, SolveReport, SolveStatus, SolverConfig};
use serde::{Deserialize, Serialize};

pub const TIME_SHIFT: f64 = 1.0;
pub const NODE_SHIFT: f64 = 100.0;

/// `(prod (x_k + s))^(1/n) - s`, through logarithms. Empty input gives 0.
pub fn shifted_geometric_mean(values: &[f64], shift: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mean_log = values.iter().map(|v| (v + shift).ln()).sum::<f64>() / values.len() as f64;
    mean_log.exp() - shift
}

pub struct WallClock(pub Instant);

impl Clock for WallClock {
    fn elapsed_secs(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}

/// Parses labels such as `classic`, `dom`, `dom+approx`, `dom+exact+mixing+dfs`.
pub fn parse_config(label: &str) -> anyhow::Result<SolverConfig> {
    let mut cfg = SolverConfig {
        branching: Branching::Classic,
        propagation: Propagation::Off,
        ..SolverConfig::default()
    };
    for part in label.split('+').map(str::trim) {
        match part {
            "classic" => cfg.branching = Branching::Classic,
            "dom" | "dominance" => cfg.branching = Branching::Dominance,
            "approx" => cfg.propagation = Propagation::Approx,
            "exact" => cfg.propagation = Propagation::Exact,
            "mix" | "mixing" => cfg.cuts = Cuts::Mixing,
            "dfs" => cfg.node_select = NodeSelect::Dfs,
            "pseudocost" => cfg.branch_rule = ccp_core::engine::BranchRule::Pseudocost,
            other => bail!("unknown config token {other:?} in {label:?}"),
        }
    }
    Ok(cfg)
}

pub fn status_label(s: SolveStatus) -> &'static str {
    match s {
        SolveStatus::Optimal => "optimal",
        SolveStatus::Infeasible => "infeasible",
        SolveStatus::Unbounded => "unbounded",
        SolveStatus::TimeLimit => "time-limit",
        SolveStatus::NodeLimit => "node-limit",
        SolveStatus::GapLimit => "gap-limit",
    }
}

/// Floats as JSON numbers, with `"inf"`, `"-inf"` and `"nan"` for the rest.
mod float {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("bad float {other:?}"))),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub instance: String,
    pub config: String,
    pub status: String,
    #[serde(with = "float")]
    pub time: f64,
    pub nodes: usize,
    /// Average fixings per node.
    #[serde(with = "float")]
    pub fixings: f64,
    /// Nodes pruned by bound, infeasibility or overlap.
    pub prunings: usize,
    #[serde(with = "float")]
    pub prop_time: f64,
    #[serde(with = "float")]
    pub gap: f64,
    #[serde(with = "float")]
    pub objective: f64,
}

impl BenchRow {
    pub fn from_report(instance: &str, config: &str, r: &SolveReport) -> Self {
        BenchRow {
            instance: instance.to_string(),
            config: config.to_string(),
            status: status_label(r.status).to_string(),
            time: r.wall_time,
            nodes: r.nodes_explored,
            fixings: r.fixings_per_node,
            prunings: r.pruned.bound + r.pruned.infeasible + r.pruned.overlap,
            prop_time: r.propagation_time,
            gap: r.gap(),
            objective: r.primal_bound,
        }
    }

    fn failed(instance: &str, config: &str) -> Self {
        BenchRow {
            instance: instance.to_string(),
            config: config.to_string(),
            status: "error".into(),
            time: f64::NAN,
            nodes: 0,
            fixings: f64::NAN,
            prunings: 0,
            prop_time: f64::NAN,
            gap: f64::NAN,
            objective: f64::NAN,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Limits {
    pub time: Option<f64>,
    pub nodes: Option<usize>,
}

/// Solves in this process with a wall clock attached.
pub fn run_config(inst: &CcpInstance, label: &str, limits: Limits) -> anyhow::Result<BenchRow> {
    let mut cfg = parse_config(label)?;
    cfg.time_limit = limits.time;
    cfg.node_limit = limits.nodes;
    let clock = WallClock(Instant::now());
    let hooks = Hooks {
        clock: Some(&clock),
        trace: None,
    };
    let report = solve_with(inst, &cfg, hooks)?;
    Ok(BenchRow::from_report(inst.name(), label, &report))
}

/// Instance files (`*.json`) of a directory in name order.
pub fn instance_files(dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    Ok(files)
}

fn run_worker(exe: &Path, file: &Path, label: &str, limits: Limits) -> anyhow::Result<BenchRow> {
    let mut cmd = Command::new(exe);
    cmd.arg("worker").arg(file).arg("--config").arg(label);
    if let Some(t) = limits.time {
        cmd.arg("--time-limit").arg(t.to_string());
    }
    if let Some(n) = limits.nodes {
        cmd.arg("--node-limit").arg(n.to_string());
    }
    let out = cmd.output().with_context(|| format!("spawning {}", exe.display()))?;
    if !out.status.success() {
        bail!("worker failed: {}", String::from_utf8_lossy(&out.stderr));
    }
    Ok(serde_json::from_slice(&out.stdout)?)
}

/// Runs every instance under every config in `jobs` parallel workers.
/// Failed runs become rows with status `error`.
pub fn run_bench(exe: &Path, dir: &Path, configs: &[String], limits: Limits, jobs: usize) -> anyhow::Result<Vec<BenchRow>> {
    let files = instance_files(dir)?;
    let tasks: Vec<(usize, &Path, &str)> = files
        .iter()
        .flat_map(|f| configs.iter().map(move |c| (f.as_path(), c.as_str())))
        .enumerate()
        .map(|(k, (f, c))| (k, f, c))
        .collect();
    let next = AtomicUsize::new(0);
    let results = Mutex::new(Vec::with_capacity(tasks.len()));
    std::thread::scope(|s| {
        for _ in 0..jobs.max(1) {
            s.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::SeqCst);
                let Some(&(idx, file, label)) = tasks.get(k) else { break };
                let name = file.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                let row = run_worker(exe, file, label, limits).unwrap_or_else(|e| {
                    eprintln!("{}: {label}: {e:#}", file.display());
                    BenchRow::failed(&name, label)
                });
                results.lock().expect("no poisoned workers").push((idx, row));
            });
        }
    });
    let mut rows = results.into_inner().expect("no poisoned workers");
    rows.sort_by_key(|r| r.0);
    Ok(rows.into_iter().map(|r| r.1).collect())
}

/// Shifted geometric means of time and nodes per config, over rows that did not fail.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub config: String,
    pub instances: usize,
    pub solved: usize,
    pub time: f64,
    pub nodes: f64,
}

pub fn summarize(rows: &[BenchRow], configs: &[String]) -> Vec<Summary> {
    configs
        .iter()
        .map(|c| {
            let mine: Vec<&BenchRow> = rows.iter().filter(|r| &r.config == c && r.status != "error").collect();
            let times: Vec<f64> = mine.iter().map(|r| r.time).collect();
            let nodes: Vec<f64> = mine.iter().map(|r| r.nodes as f64).collect();
            Summary {
                config: c.clone(),
                instances: mine.len(),
                solved: mine.iter().filter(|r| r.status == "optimal" || r.status == "infeasible").count(),
                time: shifted_geometric_mean(&times, TIME_SHIFT),
                nodes: shifted_geometric_mean(&nodes, NODE_SHIFT),
            }
        })
        .collect()
}

/// Per-run rows followed by one `sgm` row per config.
pub fn write_csv(path: &Path, rows: &[BenchRow], summary: &[Summary]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["instance", "config", "status", "time", "nodes", "fixings", "prunings", "prop_time", "gap", "objective"])?;
    for r in rows {
        w.write_record([
            r.instance.clone(),
            r.config.clone(),
            r.status.clone(),
            format!("{:.4}", r.time),
            r.nodes.to_string(),
            format!("{:.3}", r.fixings),
            r.prunings.to_string(),
            format!("{:.4}", r.prop_time),
            format!("{:.6}", r.gap),
            format!("{}", r.objective),
        ])?;
    }
    for s in summary {
        w.write_record([
            "sgm".to_string(),
            s.config.clone(),
            format!("{}/{}", s.solved, s.instances),
            format!("{:.4}", s.time),
            format!("{:.2}", s.nodes),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sgm_values() {
        assert_eq!(shifted_geometric_mean(&[0.0], 1.0), 0.0);
        assert!((shifted_geometric_mean(&[1.0, 9.0], 1.0) - (20f64.sqrt() - 1.0)).abs() < 1e-12);
        assert!((shifted_geometric_mean(&[5.0, 5.0, 5.0], 100.0) - 5.0).abs() < 1e-9);
    }

    #[test]
    fn rows_round_trip_with_infinities() {
        let mut row = BenchRow::failed("a", "dom");
        row.gap = f64::INFINITY;
        row.objective = 3.5;
        let back: BenchRow = serde_json::from_str(&serde_json::to_string(&row).unwrap()).unwrap();
        assert_eq!(back.gap, f64::INFINITY);
        assert_eq!(back.objective, 3.5);
        assert!(back.time.is_nan());
    }

    #[test]
    fn config_labels() {
        let c = parse_config("dom+approx").unwrap();
        assert_eq!((c.branching, c.propagation, c.cuts), (Branching::Dominance, Propagation::Approx, Cuts::Off));
        let c = parse_config("classic").unwrap();
        assert_eq!((c.branching, c.propagation), (Branching::Classic, Propagation::Off));
        assert!(parse_config("dom+fast").is_err());
    }
}
