//! Branch-and-cut search.

mod config;
mod formulation;
mod heuristic;

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

pub use config::{BranchRule, Branching, ConfigError, Cuts, Formulation, NodeSelect, Propagation, SolverConfig};
pub use formulation::{build_model, knapsack_row, v_lower, Layout, Prepared};
pub use heuristic::Rounding;

use crate::cuts::{separate_mixing, CutPool, MixingCut};
use crate::lp::{LpError, LpModel, LpResult, LpSolver, LpStatus};
use crate::model::{CandidateSolution, CcpInstance, Fixing, NodeState};
use crate::propagate::{exact_fixings, propagate_approx, PropagationMode, ReductionResult};
use crate::tol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    TimeLimit,
    NodeLimit,
    GapLimit,
}

/// What happened to a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeAction {
    Branched,
    PrunedBound,
    PrunedInfeasible,
    PrunedOverlap,
    IntegerFeasible,
}

impl NodeAction {
    pub fn label(self) -> &'static str {
        match self {
            NodeAction::Branched => "branched",
            NodeAction::PrunedBound => "pruned-bound",
            NodeAction::PrunedInfeasible => "pruned-infeasible",
            NodeAction::PrunedOverlap => "pruned-overlap",
            NodeAction::IntegerFeasible => "integer-feasible",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeRecord {
    pub id: usize,
    pub parent: Option<usize>,
    pub depth: usize,
    /// Branching decision that created the node: (scenario, to one).
    pub branch: Option<(usize, bool)>,
    pub zeros: usize,
    pub ones: usize,
    pub lp_status: Option<LpStatus>,
    pub lp_objective: Option<f64>,
    pub action: NodeAction,
    /// Scenario branched on when the action is `Branched`.
    pub branched_on: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagationRecord {
    pub node: usize,
    pub result: ReductionResult,
}

/// Source of elapsed wall time for time limits and reports.
pub trait Clock {
    fn elapsed_secs(&self) -> f64;
}

/// Receives node and propagation records as the search runs.
pub trait TraceSink {
    fn node(&mut self, _record: &NodeRecord) {}
    fn propagation(&mut self, _record: &PropagationRecord) {}
    /// The LP about to be solved at `node` (called again after each cut round).
    fn node_lp(&mut self, _node: usize, _lp: &LpModel) {}
    /// A mixing cut entering the global pool.
    fn cut(&mut self, _cut: &MixingCut) {}
}

#[derive(Default)]
pub struct Hooks<'a> {
    pub clock: Option<&'a dyn Clock>,
    pub trace: Option<&'a mut dyn TraceSink>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PruneCounts {
    pub bound: usize,
    pub infeasible: usize,
    pub overlap: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub primal_bound: f64,
    pub dual_bound: f64,
    pub incumbent: Option<CandidateSolution>,
    pub nodes_explored: usize,
    /// Average number of indicators fixed per node beyond the branching decisions
    /// (dominance branching and propagation, not reduced-cost fixing).
    pub fixings_per_node: f64,
    pub pruned: PruneCounts,
    pub reduced_cost_fixings: usize,
    pub cuts_added: usize,
    pub lp_iterations: usize,
    pub root_bound: Option<f64>,
    pub wall_time: f64,
    pub propagation_time: f64,
}

impl SolveReport {
    /// Relative gap `(ub - lb) / min(|ub|, |lb|)`, infinite unless both have the same sign.
    pub fn gap(&self) -> f64 {
        relative_gap(self.primal_bound, self.dual_bound)
    }
}

pub fn relative_gap(ub: f64, lb: f64) -> f64 {
    if ub == lb {
        return 0.0;
    }
    if lb * ub > 0.0 && lb.is_finite() && ub.is_finite() {
        (ub - lb) / ub.abs().min(lb.abs())
    } else {
        f64::INFINITY
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolveError {
    #[error("invalid configuration: {0}")]
    Config(#[from] ConfigError),
    #[error("LP failure at node {node}: {source}")]
    Lp { node: usize, source: LpError },
    #[error("LP iteration limit at node {0}")]
    IterationLimit(usize),
}

/// Solves with the default hooks (no clock, no trace).
pub fn solve(inst: &CcpInstance, cfg: &SolverConfig) -> Result<SolveReport, SolveError> {
    solve_with(inst, cfg, Hooks::default())
}

pub fn solve_with(inst: &CcpInstance, cfg: &SolverConfig, hooks: Hooks<'_>) -> Result<SolveReport, SolveError> {
    cfg.validate()?;
    let mut search = Search::new(inst, cfg, hooks);
    search.run()
}

struct Queued {
    bound: f64,
    id: usize,
    node: NodeState,
}

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Queued {}
impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Queued {
    // max-heap: smaller bound first, then smaller id
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .partial_cmp(&self.bound)
            .unwrap_or(Ordering::Equal)
            .then(other.id.cmp(&self.id))
    }
}

enum Open {
    Stack(Vec<NodeState>),
    Heap(BinaryHeap<Queued>),
}

impl Open {
    fn push(&mut self, node: NodeState) {
        match self {
            Open::Stack(s) => s.push(node),
            Open::Heap(h) => h.push(Queued {
                bound: node.dual_bound,
                id: node.id,
                node,
            }),
        }
    }
    fn pop(&mut self) -> Option<NodeState> {
        match self {
            Open::Stack(s) => s.pop(),
            Open::Heap(h) => h.pop().map(|q| q.node),
        }
    }
    fn min_bound(&self) -> Option<f64> {
        match self {
            Open::Stack(s) => s.iter().map(|n| n.dual_bound).reduce(f64::min),
            Open::Heap(h) => h.peek().map(|q| q.bound),
        }
    }
    fn is_empty(&self) -> bool {
        match self {
            Open::Stack(s) => s.is_empty(),
            Open::Heap(h) => h.is_empty(),
        }
    }
}

#[derive(Default, Clone)]
struct Pseudocosts {
    down: Vec<(f64, usize)>,
    up: Vec<(f64, usize)>,
}

impl Pseudocosts {
    fn new(n: usize) -> Self {
        Pseudocosts {
            down: vec![(0.0, 0); n],
            up: vec![(0.0, 0); n],
        }
    }
    fn record(&mut self, var: usize, up: bool, gain: f64) {
        let e = if up { &mut self.up[var] } else { &mut self.down[var] };
        e.0 += gain.max(0.0);
        e.1 += 1;
    }
    fn average(list: &[(f64, usize)]) -> f64 {
        let (s, c) = list
            .iter()
            .filter(|e| e.1 > 0)
            .fold((0.0, 0usize), |a, e| (a.0 + e.0 / e.1 as f64, a.1 + 1));
        if c == 0 {
            1.0
        } else {
            s / c as f64
        }
    }
    fn score(&self, var: usize, frac: f64, avg_down: f64, avg_up: f64) -> f64 {
        let d = self.down[var];
        let u = self.up[var];
        let pd = if d.1 > 0 { d.0 / d.1 as f64 } else { avg_down };
        let pu = if u.1 > 0 { u.0 / u.1 as f64 } else { avg_up };
        (pd * frac).max(1e-6) * (pu * (1.0 - frac)).max(1e-6)
    }
}

/// Most fractional free indicator; ties go to the lowest index.
pub fn most_infeasible(z: &[f64], fixing: &[Fixing]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &v) in z.iter().enumerate() {
        if fixing[i] != Fixing::Free || v <= tol::INT || v >= 1.0 - tol::INT {
            continue;
        }
        let dist = (v - 0.5).abs();
        match best {
            Some((_, bd)) if dist >= bd - 1e-9 => {}
            _ => best = Some((i, dist)),
        }
    }
    best.map(|b| b.0)
}

struct Search<'a, 'h> {
    inst: &'a CcpInstance,
    cfg: &'a SolverConfig,
    hooks: Hooks<'h>,
    prep: Prepared,
    lp: LpModel,
    layout: Layout,
    base_lower: Vec<f64>,
    solver: LpSolver,
    pool: CutPool,
    rounding: Rounding,
    pseudo: Pseudocosts,
    incumbent: Option<CandidateSolution>,
    next_id: usize,
    nodes: usize,
    fixings_total: usize,
    pruned: PruneCounts,
    rc_fixings: usize,
    cuts_added: usize,
    lp_iterations: usize,
    root_bound: Option<f64>,
    prop_time: f64,
    unbounded: bool,
}

struct NodeOutcome {
    action: NodeAction,
    lp: Option<(LpStatus, f64)>,
    branched_on: Option<usize>,
    children: Option<(NodeState, NodeState)>,
}

impl NodeOutcome {
    fn leaf(action: NodeAction, lp: Option<(LpStatus, f64)>) -> Self {
        NodeOutcome {
            action,
            lp,
            branched_on: None,
            children: None,
        }
    }
}

impl<'a, 'h> Search<'a, 'h> {
    fn new(inst: &'a CcpInstance, cfg: &'a SolverConfig, hooks: Hooks<'h>) -> Self {
        let prep = Prepared::new(inst);
        let (lp, layout) = build_model(inst, &prep, cfg.formulation);
        let base_lower = v_lower(&prep, cfg.formulation);
        let incumbent = cfg
            .initial_incumbent
            .clone()
            .filter(|c| inst.check_feasible(c).is_feasible());
        Search {
            inst,
            cfg,
            hooks,
            prep,
            lp,
            layout,
            base_lower,
            solver: LpSolver::new(),
            pool: CutPool::new(),
            rounding: Rounding::new(inst),
            pseudo: Pseudocosts::new(inst.num_scenarios()),
            incumbent,
            next_id: 1,
            nodes: 0,
            fixings_total: 0,
            pruned: PruneCounts::default(),
            rc_fixings: 0,
            cuts_added: 0,
            lp_iterations: 0,
            root_bound: None,
            prop_time: 0.0,
            unbounded: false,
        }
    }

    fn elapsed(&self) -> f64 {
        self.hooks.clock.map(|c| c.elapsed_secs()).unwrap_or(0.0)
    }

    fn incumbent_value(&self) -> f64 {
        self.incumbent.as_ref().map(|c| c.objective).unwrap_or(f64::INFINITY)
    }

    fn prunable(&self, bound: f64) -> bool {
        bound >= self.incumbent_value() - tol::PRUNE
    }

    fn offer(&mut self, cand: CandidateSolution) {
        if cand.objective < self.incumbent_value() - tol::PRUNE
            && self.inst.check_feasible(&cand).is_feasible()
        {
            self.incumbent = Some(cand);
        }
    }

    fn run(&mut self) -> Result<SolveReport, SolveError> {
        let (n, m) = (self.inst.num_scenarios(), self.inst.num_rows());
        let mut root = NodeState::root(n, m);
        root.local_lower = self.base_lower.clone();
        let mut open = match self.cfg.node_select {
            NodeSelect::Dfs => Open::Stack(Vec::new()),
            NodeSelect::BestBound => Open::Heap(BinaryHeap::new()),
        };
        open.push(root);
        let mut status = None;
        while let Some(node) = open.pop() {
            if let Some(limit) = self.cfg.node_limit {
                if self.nodes >= limit {
                    open.push(node);
                    status = Some(SolveStatus::NodeLimit);
                    break;
                }
            }
            if let Some(limit) = self.cfg.time_limit {
                if self.hooks.clock.is_some() && self.elapsed() >= limit {
                    open.push(node);
                    status = Some(SolveStatus::TimeLimit);
                    break;
                }
            }
            self.nodes += 1;
            let record_base = (node.id, node.parent, node.depth, node.branch.map(|b| (b.0, b.1)));
            let (outcome, fixing_counts) = self.process(node)?;
            if let Some(t) = self.hooks.trace.as_deref_mut() {
                t.node(&NodeRecord {
                    id: record_base.0,
                    parent: record_base.1,
                    depth: record_base.2,
                    branch: record_base.3,
                    zeros: fixing_counts.0,
                    ones: fixing_counts.1,
                    lp_status: outcome.lp.map(|l| l.0),
                    lp_objective: outcome.lp.map(|l| l.1),
                    action: outcome.action,
                    branched_on: outcome.branched_on,
                });
            }
            match outcome.action {
                NodeAction::PrunedBound => self.pruned.bound += 1,
                NodeAction::PrunedInfeasible => self.pruned.infeasible += 1,
                NodeAction::PrunedOverlap => self.pruned.overlap += 1,
                _ => {}
            }
            if self.unbounded {
                status = Some(SolveStatus::Unbounded);
                break;
            }
            if let Some((left, right)) = outcome.children {
                // the zero child is explored first in depth-first order
                open.push(right);
                open.push(left);
            }
            if self.cfg.gap_limit > 0.0 && self.incumbent.is_some() {
                let lb = open.min_bound().unwrap_or(self.incumbent_value());
                if relative_gap(self.incumbent_value(), lb) <= self.cfg.gap_limit {
                    status = Some(if open.is_empty() {
                        SolveStatus::Optimal
                    } else {
                        SolveStatus::GapLimit
                    });
                    break;
                }
            }
        }
        let primal = self.incumbent_value();
        let (status, dual) = match status {
            Some(SolveStatus::Unbounded) => (SolveStatus::Unbounded, f64::NEG_INFINITY),
            Some(s) => {
                let lb = open.min_bound().unwrap_or(primal).min(primal);
                if open.is_empty() && s != SolveStatus::GapLimit {
                    (self.final_status(), primal)
                } else {
                    (s, lb)
                }
            }
            None => (self.final_status(), primal),
        };
        Ok(SolveReport {
            status,
            primal_bound: primal,
            dual_bound: dual,
            incumbent: self.incumbent.clone(),
            nodes_explored: self.nodes,
            fixings_per_node: if self.nodes == 0 {
                0.0
            } else {
                self.fixings_total as f64 / self.nodes as f64
            },
            pruned: self.pruned,
            reduced_cost_fixings: self.rc_fixings,
            cuts_added: self.cuts_added,
            lp_iterations: self.lp_iterations,
            root_bound: self.root_bound,
            wall_time: self.elapsed(),
            propagation_time: self.prop_time,
        })
    }

    fn final_status(&self) -> SolveStatus {
        if self.incumbent.is_some() {
            SolveStatus::Optimal
        } else {
            SolveStatus::Infeasible
        }
    }

    fn propagate(&mut self, node: &NodeState) -> Option<ReductionResult> {
        let start = self.elapsed();
        let res = match self.cfg.propagation {
            config::Propagation::Off => return None,
            config::Propagation::Approx => propagate_approx(self.inst, &self.prep.bar, &node.fixing),
            config::Propagation::Exact => exact_fixings(self.inst, &self.prep.bar, &node.fixing),
        };
        self.prop_time += self.elapsed() - start;
        if let Some(t) = self.hooks.trace.as_deref_mut() {
            t.propagation(&PropagationRecord {
                node: node.id,
                result: res.clone(),
            });
        }
        Some(res)
    }

    fn solve_lp(&mut self, node: &NodeState) -> Result<LpResult, SolveError> {
        let l = self.layout;
        for i in 0..l.n {
            let (lo, hi) = match node.fixing[i] {
                Fixing::Free => (0.0, 1.0),
                Fixing::Zero => (0.0, 0.0),
                Fixing::One => (1.0, 1.0),
            };
            self.lp.change_bounds(l.z(i), lo, hi).expect("column exists");
        }
        for k in 0..l.m {
            let lo = node.local_lower[k].max(self.base_lower[k]);
            self.lp
                .change_bounds(l.v(k), lo, f64::INFINITY)
                .expect("column exists");
        }
        if let Some(t) = self.hooks.trace.as_deref_mut() {
            t.node_lp(node.id, &self.lp);
        }
        let res = self
            .solver
            .solve(&self.lp, None)
            .map_err(|source| SolveError::Lp { node: node.id, source })?;
        self.lp_iterations += res.iterations;
        if res.status == LpStatus::IterationLimit {
            return Err(SolveError::IterationLimit(node.id));
        }
        Ok(res)
    }

    fn counts(node: &NodeState) -> (usize, usize) {
        (node.zeros().count(), node.ones().count())
    }

    fn process(&mut self, mut node: NodeState) -> Result<(NodeOutcome, (usize, usize)), SolveError> {
        if node.conflict {
            return Ok((NodeOutcome::leaf(NodeAction::PrunedInfeasible, None), Self::counts(&node)));
        }
        if self.prunable(node.dual_bound) {
            return Ok((NodeOutcome::leaf(NodeAction::PrunedBound, None), Self::counts(&node)));
        }
        let is_root = node.parent.is_none();
        let inherited = node.dual_bound;
        let mut counted_fixings = false;
        let mut res;
        loop {
            if let Some(red) = self.propagate(&node) {
                if red.pruned {
                    return Ok((NodeOutcome::leaf(NodeAction::PrunedOverlap, None), Self::counts(&node)));
                }
                for &i in &red.to_zero {
                    node.fixing[i] = Fixing::Zero;
                }
                for &i in &red.to_one {
                    node.fixing[i] = Fixing::One;
                }
                if self.cfg.tighten_bounds {
                    for (lo, b) in node.local_lower.iter_mut().zip(&red.bounds) {
                        if *b > *lo {
                            *lo = *b;
                        }
                    }
                }
            }
            if !counted_fixings {
                self.fixings_total += node.derived_fixings();
                counted_fixings = true;
            }
            res = self.solve_lp(&node)?;
            match res.status {
                LpStatus::Infeasible => {
                    return Ok((
                        NodeOutcome::leaf(NodeAction::PrunedInfeasible, Some((res.status, f64::NAN))),
                        Self::counts(&node),
                    ));
                }
                LpStatus::Unbounded => {
                    self.unbounded = true;
                    return Ok((
                        NodeOutcome::leaf(NodeAction::PrunedInfeasible, Some((res.status, f64::NEG_INFINITY))),
                        Self::counts(&node),
                    ));
                }
                _ => {}
            }
            if self.prunable(res.objective) {
                return Ok((
                    NodeOutcome::leaf(NodeAction::PrunedBound, Some((res.status, res.objective))),
                    Self::counts(&node),
                ));
            }
            if self.cfg.cuts == config::Cuts::Mixing {
                let rounds = if is_root {
                    self.cfg.root_cut_rounds
                } else {
                    self.cfg.node_cut_rounds
                };
                for _ in 0..rounds {
                    if !self.add_cuts(&res) {
                        break;
                    }
                    res = self.solve_lp(&node)?;
                    if res.status != LpStatus::Optimal {
                        return Ok((
                            NodeOutcome::leaf(NodeAction::PrunedInfeasible, Some((res.status, f64::NAN))),
                            Self::counts(&node),
                        ));
                    }
                    if self.prunable(res.objective) {
                        return Ok((
                            NodeOutcome::leaf(NodeAction::PrunedBound, Some((res.status, res.objective))),
                            Self::counts(&node),
                        ));
                    }
                }
            }
            if self.cfg.reduced_cost_fixing && self.incumbent.is_some() {
                let fixed = self.reduced_cost_fix(&mut node, &res);
                self.rc_fixings += fixed;
                if fixed > 0 && self.cfg.propagation != config::Propagation::Off {
                    continue;
                }
            }
            break;
        }
        if is_root {
            self.root_bound = Some(res.objective);
        }
        if let Some((var, up, frac)) = node.branch {
            let gain = res.objective - inherited;
            let dist = if up { 1.0 - frac } else { frac };
            if dist > tol::INT && inherited.is_finite() {
                self.pseudo.record(var, up, gain / dist);
            }
        }
        node.dual_bound = node.dual_bound.max(res.objective);
        let lp_info = Some((res.status, res.objective));
        let l = self.layout;
        let z: Vec<f64> = (0..l.n).map(|i| res.primal[l.z(i)]).collect();
        if self.cfg.heuristic_frequency > 0 && (self.nodes - 1) % self.cfg.heuristic_frequency == 0 {
            if let Some(c) = self.rounding.run(self.inst, &z, &node.fixing, self.cfg.rng_seed) {
                self.offer(c);
            }
            if self.prunable(res.objective) {
                return Ok((NodeOutcome::leaf(NodeAction::PrunedBound, lp_info), Self::counts(&node)));
            }
        }
        let integral = z.iter().all(|&v| v <= tol::INT || v >= 1.0 - tol::INT);
        if integral {
            let x: Vec<f64> = (0..l.d).map(|j| res.primal[l.x(j)]).collect();
            let zb: Vec<bool> = z.iter().map(|&v| v > 0.5).collect();
            let cand = CandidateSolution {
                v: (0..l.m).map(|k| res.primal[l.v(k)]).collect(),
                objective: self.inst.objective(&x),
                x,
                z: zb,
            };
            if self.inst.check_feasible(&cand).is_feasible() {
                self.offer(cand);
                return Ok((NodeOutcome::leaf(NodeAction::IntegerFeasible, lp_info), Self::counts(&node)));
            }
            // rounding noise in the budget row: split on a free violated scenario
            let pick = (0..l.n).find(|&i| node.fixing[i] == Fixing::Free && z[i] > 0.5);
            return Ok(match pick {
                Some(j) => {
                    let counts = Self::counts(&node);
                    let children = self.children(&node, j, z[j]);
                    (
                        NodeOutcome {
                            action: NodeAction::Branched,
                            lp: lp_info,
                            branched_on: Some(j),
                            children: Some(children),
                        },
                        counts,
                    )
                }
                None => (NodeOutcome::leaf(NodeAction::PrunedInfeasible, lp_info), Self::counts(&node)),
            });
        }
        let j = match self.cfg.branch_rule {
            BranchRule::MostInfeasible => most_infeasible(&z, &node.fixing),
            BranchRule::Pseudocost => self.pseudocost_pick(&z, &node.fixing),
        };
        let j = match j {
            Some(j) => j,
            // fractional values only on fixed indicators cannot happen with exact bounds
            None => {
                return Ok((NodeOutcome::leaf(NodeAction::PrunedInfeasible, lp_info), Self::counts(&node)));
            }
        };
        let counts = Self::counts(&node);
        let children = self.children(&node, j, z[j]);
        Ok((
            NodeOutcome {
                action: NodeAction::Branched,
                lp: lp_info,
                branched_on: Some(j),
                children: Some(children),
            },
            counts,
        ))
    }

    fn pseudocost_pick(&self, z: &[f64], fixing: &[Fixing]) -> Option<usize> {
        let avg_down = Pseudocosts::average(&self.pseudo.down);
        let avg_up = Pseudocosts::average(&self.pseudo.up);
        let mut best: Option<(usize, f64, f64)> = None;
        for (i, &v) in z.iter().enumerate() {
            if fixing[i] != Fixing::Free || v <= tol::INT || v >= 1.0 - tol::INT {
                continue;
            }
            let s = self.pseudo.score(i, v, avg_down, avg_up);
            let dist = (v - 0.5).abs();
            let better = match best {
                None => true,
                Some((_, bs, bd)) => s > bs * (1.0 + 1e-9) || (s >= bs * (1.0 - 1e-9) && dist < bd - 1e-9),
            };
            if better {
                best = Some((i, s, dist));
            }
        }
        best.map(|b| b.0)
    }

    fn add_cuts(&mut self, res: &LpResult) -> bool {
        let l = self.layout;
        let v: Vec<f64> = (0..l.m).map(|k| res.primal[l.v(k)]).collect();
        let z: Vec<f64> = (0..l.n).map(|i| res.primal[l.z(i)]).collect();
        let cap = self.cfg.max_cuts_per_round.unwrap_or(2 * l.m.max(1));
        let cuts = separate_mixing(&self.prep.bar, &self.prep.quantiles.lower, &v, &z, cap);
        let mut added = false;
        for cut in cuts {
            if self.pool.insert(&cut) {
                if let Some(t) = self.hooks.trace.as_deref_mut() {
                    t.cut(&cut);
                }
                let row = cut.to_lp_row(l.v(cut.row), |i| l.z(i));
                self.lp.add_row(row).expect("columns exist");
                self.cuts_added += 1;
                added = true;
            }
        }
        added
    }

    fn reduced_cost_fix(&mut self, node: &mut NodeState, res: &LpResult) -> usize {
        let inc = self.incumbent_value();
        let l = self.layout;
        let mut fixed = 0;
        for i in 0..l.n {
            if node.fixing[i] != Fixing::Free {
                continue;
            }
            let c = l.z(i);
            let (val, d) = (res.primal[c], res.reduced_costs[c]);
            if val <= tol::INT && d > 0.0 && res.objective + d >= inc - tol::PRUNE {
                node.fixing[i] = Fixing::Zero;
                fixed += 1;
            } else if val >= 1.0 - tol::INT && d < 0.0 && res.objective - d >= inc - tol::PRUNE {
                node.fixing[i] = Fixing::One;
                fixed += 1;
            }
        }
        fixed
    }

    fn children(&mut self, node: &NodeState, j: usize, value: f64) -> (NodeState, NodeState) {
        let pair = make_children(node, j, value, &self.prep.graph, self.cfg.branching, self.next_id);
        self.next_id += 2;
        pair
    }
}

/// Zero and one children of `node` when branching on scenario `j` with LP value `value`.
/// Contradicting fixings mark a child with `conflict`.
pub fn make_children(
    node: &NodeState,
    j: usize,
    value: f64,
    graph: &crate::preprocess::DominanceGraph,
    branching: Branching,
    next_id: usize,
) -> (NodeState, NodeState) {
    let build = |up: bool, id: usize| {
        let mut c = node.clone();
        c.id = id;
        c.parent = Some(node.id);
        c.depth = node.depth + 1;
        c.basis_hint = None;
        c.branch = Some((j, up, value));
        let (set, to): (Vec<usize>, Fixing) = match (branching, up) {
            (Branching::Classic, true) => (vec![j], Fixing::One),
            (Branching::Classic, false) => (vec![j], Fixing::Zero),
            (Branching::Dominance, true) => (graph.above(j).to_vec(), Fixing::One),
            (Branching::Dominance, false) => (graph.below(j).to_vec(), Fixing::Zero),
        };
        if up {
            c.branched_one.push(j);
        } else {
            c.branched_zero.push(j);
        }
        for i in set {
            if c.fix(i, to).is_err() {
                c.conflict = true;
            }
        }
        c
    };
    (build(false, next_id), build(true, next_id + 1))
}

/// Propagation mode label for traces.
pub fn mode_label(mode: PropagationMode) -> &'static str {
    match mode {
        PropagationMode::Approx => "approx",
        PropagationMode::Exact => "exact",
    }
}
