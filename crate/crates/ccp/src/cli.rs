//! Command-line front end. `run` returns the process exit code.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, Context};
use ccp_core::engine::{Branching, BranchRule, Cuts, Hooks, NodeSelect, Propagation, Prepared};
use ccp_core::oracle::{brute_force_optimum, OracleOutcome};
use ccp_core::preprocess::transitive_reduction;
use ccp_core::{solve_with, Rational, SolveStatus, SolverConfig};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench::{self, Limits, WallClock};
use crate::gen::{self, CclsParams, CcmppParams, CcrpParams, Family, GenSpec};
use crate::io::{load_instance, save_instance, InputError};
use crate::report::{dominance_dump, TextTrace};

pub const EXIT_OPTIMAL: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_LIMIT: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_UNBOUNDED: i32 = 4;
pub const EXIT_INPUT: i32 = 10;

#[derive(Parser, Debug)]
#[command(name = "ccp", version, about = "Branch-and-cut for chance-constrained programs")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Solve an instance file.
    Solve(SolveArgs),
    /// Generate a benchmark instance.
    Gen(GenArgs),
    /// Solve by enumerating violated-scenario sets (small instances only).
    Oracle { file: PathBuf },
    /// Run configurations over every instance in a directory.
    Bench(BenchArgs),
    /// Solve one instance with one config label and print a JSON row.
    #[command(hide = true)]
    Worker {
        file: PathBuf,
        #[arg(long)]
        config: String,
        #[arg(long)]
        time_limit: Option<f64>,
        #[arg(long)]
        node_limit: Option<usize>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum BranchingArg {
    Classic,
    Dominance,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum PropagationArg {
    Off,
    Approx,
    Exact,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum CutsArg {
    Off,
    Mixing,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum NodeSelectArg {
    BestBound,
    Dfs,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum BranchRuleArg {
    MostInfeasible,
    Pseudocost,
}

#[derive(Args, Debug)]
struct SolveArgs {
    file: PathBuf,
    #[arg(long, value_enum, default_value = "dominance")]
    branching: BranchingArg,
    #[arg(long, value_enum, default_value = "approx")]
    propagation: PropagationArg,
    #[arg(long, value_enum, default_value = "off")]
    cuts: CutsArg,
    #[arg(long, value_enum, default_value = "best-bound")]
    node_select: NodeSelectArg,
    #[arg(long, value_enum, default_value = "most-infeasible")]
    branch_rule: BranchRuleArg,
    /// Seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long)]
    node_limit: Option<usize>,
    /// Replay one of the three small search trees (overrides the search options).
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    replay_figure: Option<u8>,
    /// Node and propagation trace output.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write the reduced dominance edges and percentages.
    #[arg(long)]
    dump_dominance: Option<PathBuf>,
    /// Write the LP of node `--dump-node` (default root) in MPS layout.
    #[arg(long)]
    dump_lp: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    dump_node: usize,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum FamilyArg {
    Ccrp,
    Ccmpp,
    Ccls,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(value_enum)]
    family: FamilyArg,
    #[arg(long)]
    n: usize,
    /// Risk level as NUM/DEN.
    #[arg(long)]
    eps: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// ccrp: number of resources.
    #[arg(long)]
    resources: Option<usize>,
    /// ccrp: number of services (chance rows).
    #[arg(long)]
    services: Option<usize>,
    /// ccmpp, ccls: number of periods.
    #[arg(long)]
    periods: Option<usize>,
    /// ccmpp: largest nuclear share of capacity.
    #[arg(long)]
    nuclear_share: Option<f64>,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args, Debug)]
struct BenchArgs {
    dir: PathBuf,
    /// Comma-separated labels, e.g. classic,dom,dom+approx.
    #[arg(long, value_delimiter = ',')]
    configs: Vec<String>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long)]
    node_limit: Option<usize>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

/// An error with its exit code.
struct Failure(i32, anyhow::Error);

fn input(e: impl Into<anyhow::Error>) -> Failure {
    Failure(EXIT_INPUT, e.into())
}

fn other(e: impl Into<anyhow::Error>) -> Failure {
    Failure(EXIT_FAILURE, e.into())
}

pub fn run(args: impl IntoIterator<Item = OsString>, out: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OPTIMAL };
            let _ = e.print();
            return code;
        }
    };
    let res = match cli.command {
        Cmd::Solve(a) => cmd_solve(a, out),
        Cmd::Gen(a) => cmd_gen(a, out),
        Cmd::Oracle { file } => cmd_oracle(&file, out),
        Cmd::Bench(a) => cmd_bench(a, out),
        Cmd::Worker {
            file,
            config,
            time_limit,
            node_limit,
        } => cmd_worker(&file, &config, time_limit, node_limit, out),
    };
    match res {
        Ok(code) => code,
        Err(Failure(code, e)) => {
            eprintln!("error: {e:#}");
            code
        }
    }
}

fn load(path: &Path) -> Result<ccp_core::CcpInstance, Failure> {
    load_instance(path).map_err(|e: InputError| input(e))
}

fn exit_code(s: SolveStatus) -> i32 {
    match s {
        SolveStatus::Optimal => EXIT_OPTIMAL,
        SolveStatus::Infeasible => EXIT_INFEASIBLE,
        SolveStatus::Unbounded => EXIT_UNBOUNDED,
        SolveStatus::TimeLimit | SolveStatus::NodeLimit | SolveStatus::GapLimit => EXIT_LIMIT,
    }
}

fn solver_config(a: &SolveArgs, inst: &ccp_core::CcpInstance) -> Result<SolverConfig, Failure> {
    let mut cfg = match a.replay_figure {
        Some(fig) => {
            let opt = match brute_force_optimum(inst).map_err(input)? {
                OracleOutcome::Optimal(c) => c,
                other => return Err(input(anyhow!("replay needs a known optimum, oracle found {other:?}"))),
            };
            SolverConfig::replay_figure(fig, opt).expect("figure in 1..=3")
        }
        None => SolverConfig {
            branching: match a.branching {
                BranchingArg::Classic => Branching::Classic,
                BranchingArg::Dominance => Branching::Dominance,
            },
            propagation: match a.propagation {
                PropagationArg::Off => Propagation::Off,
                PropagationArg::Approx => Propagation::Approx,
                PropagationArg::Exact => Propagation::Exact,
            },
            cuts: match a.cuts {
                CutsArg::Off => Cuts::Off,
                CutsArg::Mixing => Cuts::Mixing,
            },
            node_select: match a.node_select {
                NodeSelectArg::BestBound => NodeSelect::BestBound,
                NodeSelectArg::Dfs => NodeSelect::Dfs,
            },
            branch_rule: match a.branch_rule {
                BranchRuleArg::MostInfeasible => BranchRule::MostInfeasible,
                BranchRuleArg::Pseudocost => BranchRule::Pseudocost,
            },
            ..SolverConfig::default()
        },
    };
    cfg.time_limit = a.time_limit;
    cfg.node_limit = a.node_limit;
    cfg.validate().map_err(input)?;
    Ok(cfg)
}

fn cmd_solve(a: SolveArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let inst = load(&a.file)?;
    let cfg = solver_config(&a, &inst)?;
    if let Some(path) = &a.dump_dominance {
        let prep = Prepared::new(&inst);
        let g = transitive_reduction(prep.graph);
        std::fs::write(path, dominance_dump(&g)).with_context(|| format!("writing {}", path.display())).map_err(other)?;
    }
    let trace_file = match &a.trace {
        Some(p) => Some(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display())).map_err(other)?,
        )),
        None => None,
    };
    let mut trace = TextTrace::new(trace_file, a.dump_lp.as_ref().map(|_| a.dump_node));
    let clock = WallClock(Instant::now());
    let report = {
        let hooks = Hooks {
            clock: Some(&clock),
            trace: Some(&mut trace),
        };
        solve_with(&inst, &cfg, hooks).map_err(other)?
    };
    let lp_text = trace.finish().context("writing trace").map_err(other)?;
    if let Some(path) = &a.dump_lp {
        match lp_text {
            Some(text) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())).map_err(other)?,
            None => eprintln!("warning: node {} was not solved, no LP written", a.dump_node),
        }
    }
    let w = |out: &mut dyn Write, s: String| writeln!(out, "{s}").map_err(other);
    w(out, format!("instance     {}", inst.name()))?;
    w(out, format!("status       {}", bench::status_label(report.status)))?;
    w(out, format!("objective    {}", report.primal_bound))?;
    w(out, format!("dual bound   {}", report.dual_bound))?;
    w(out, format!("gap          {}", report.gap()))?;
    if let Some(rb) = report.root_bound {
        w(out, format!("root bound   {rb}"))?;
    }
    w(out, format!("nodes        {}", report.nodes_explored))?;
    w(
        out,
        format!(
            "pruned       bound {} infeasible {} overlap {}",
            report.pruned.bound, report.pruned.infeasible, report.pruned.overlap
        ),
    )?;
    w(out, format!("fixings/node {:.3}", report.fixings_per_node))?;
    w(out, format!("cuts         {}", report.cuts_added))?;
    w(out, format!("lp iters     {}", report.lp_iterations))?;
    w(out, format!("time         {:.3}", report.wall_time))?;
    if let Some(inc) = &report.incumbent {
        w(out, format!("x            {:?}", inc.x))?;
        let support: Vec<usize> = (0..inc.z.len()).filter(|&i| inc.z[i]).collect();
        w(out, format!("violated     {support:?}"))?;
    }
    Ok(exit_code(report.status))
}

fn parse_eps(s: &str) -> anyhow::Result<Rational> {
    let (n, d) = s.split_once('/').ok_or_else(|| anyhow!("risk level {s:?} is not NUM/DEN"))?;
    Ok(Rational::new(n.trim().parse()?, d.trim().parse()?)?)
}

fn cmd_gen(a: GenArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let unused = |flag: &str, set: bool| -> Result<(), Failure> {
        if set {
            Err(input(anyhow!("--{flag} does not apply to {:?}", a.family)))
        } else {
            Ok(())
        }
    };
    let family = match a.family {
        FamilyArg::Ccrp => {
            unused("periods", a.periods.is_some())?;
            unused("nuclear-share", a.nuclear_share.is_some())?;
            let d = CcrpParams::default();
            Family::Ccrp(CcrpParams {
                resources: a.resources.unwrap_or(d.resources),
                services: a.services.unwrap_or(d.services),
            })
        }
        FamilyArg::Ccmpp => {
            unused("resources", a.resources.is_some())?;
            unused("services", a.services.is_some())?;
            let d = CcmppParams::default();
            Family::Ccmpp(CcmppParams {
                periods: a.periods.unwrap_or(d.periods),
                nuclear_share: a.nuclear_share.unwrap_or(d.nuclear_share),
                ..d
            })
        }
        FamilyArg::Ccls => {
            unused("resources", a.resources.is_some())?;
            unused("services", a.services.is_some())?;
            unused("nuclear-share", a.nuclear_share.is_some())?;
            Family::Ccls(CclsParams {
                periods: a.periods.unwrap_or(CclsParams::default().periods),
            })
        }
    };
    let spec = GenSpec {
        family,
        n: a.n,
        epsilon: parse_eps(&a.eps).map_err(input)?,
        seed: a.seed,
    };
    let inst = gen::generate(&spec).map_err(input)?;
    save_instance(&inst, &a.output)
        .with_context(|| format!("writing {}", a.output.display()))
        .map_err(other)?;
    writeln!(
        out,
        "wrote {} (d {} m {} n {})",
        a.output.display(),
        inst.num_vars(),
        inst.num_rows(),
        inst.num_scenarios()
    )
    .map_err(other)?;
    Ok(EXIT_OPTIMAL)
}

fn cmd_oracle(file: &Path, out: &mut dyn Write) -> Result<i32, Failure> {
    let inst = load(file)?;
    let res = brute_force_optimum(&inst).map_err(input)?;
    match res {
        OracleOutcome::Optimal(c) => {
            let support: Vec<usize> = (0..c.z.len()).filter(|&i| c.z[i]).collect();
            writeln!(out, "objective {}", c.objective).map_err(other)?;
            writeln!(out, "x {:?}", c.x).map_err(other)?;
            writeln!(out, "violated {support:?}").map_err(other)?;
            Ok(EXIT_OPTIMAL)
        }
        OracleOutcome::Infeasible => {
            writeln!(out, "infeasible").map_err(other)?;
            Ok(EXIT_INFEASIBLE)
        }
        OracleOutcome::Unbounded => {
            writeln!(out, "unbounded").map_err(other)?;
            Ok(EXIT_UNBOUNDED)
        }
    }
}

fn cmd_bench(a: BenchArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    if a.configs.is_empty() {
        return Err(input(anyhow!("--configs is empty")));
    }
    for c in &a.configs {
        bench::parse_config(c).map_err(input)?;
    }
    let exe = std::env::current_exe().context("locating the worker executable").map_err(other)?;
    let limits = Limits {
        time: a.time_limit,
        nodes: a.node_limit,
    };
    let rows = bench::run_bench(&exe, &a.dir, &a.configs, limits, a.jobs).map_err(input)?;
    let summary = bench::summarize(&rows, &a.configs);
    bench::write_csv(&a.out, &rows, &summary).map_err(other)?;
    for s in &summary {
        writeln!(
            out,
            "{:<24} solved {}/{}  sgm time {:.3}  sgm nodes {:.1}",
            s.config, s.solved, s.instances, s.time, s.nodes
        )
        .map_err(other)?;
    }
    Ok(EXIT_OPTIMAL)
}

fn cmd_worker(file: &Path, config: &str, time: Option<f64>, nodes: Option<usize>, out: &mut dyn Write) -> Result<i32, Failure> {
    let inst = load(file)?;
    let mut row = bench::run_config(&inst, config, Limits { time, nodes }).map_err(other)?;
    if let Some(stem) = file.file_stem() {
        row.instance = stem.to_string_lossy().into_owned();
    }
    serde_json::to_writer(&mut *out, &row).map_err(other)?;
    writeln!(out).map_err(other)?;
    Ok(EXIT_OPTIMAL)
}
