//! Node pruning and indicator fixing that removes overlap between subtrees.
//!
//! At a node with indicators fixed to zero (`N0`) and one (`N1`), the set of
//! completions that respect the budget and the rule "`z_i = 1` only if `v` does
//! not cover scenario `i`" may be empty (prune), or force further fixings.
//! The approximate procedure is a cheap fixpoint iteration; the exact one solves
//! small covering problems.

use alloc::vec;
use alloc::vec::Vec;

use crate::lp::{LpModel, LpRow, LpSolver, LpStatus};
use crate::model::{indices_with, CcpInstance, Fixing, Sense};
use crate::preprocess::ScenarioMatrix;
use crate::rational::Rational;
use crate::tol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PropagationMode {
    Approx,
    Exact,
}

/// One pass of the approximate fixpoint loop.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproxRound {
    pub bounds: Vec<f64>,
    pub to_zero: Vec<usize>,
    pub to_one: Vec<usize>,
}

/// Why a node was found empty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PruneCause {
    /// One-fixed scenarios already exceed the risk budget.
    Budget,
    /// A one-fixed scenario is covered by the implied bounds.
    Covered,
    /// The covering problem has no selection within budget.
    Empty,
    /// Some scenario can be neither zero nor one.
    Conflict,
}

impl PruneCause {
    pub fn label(self) -> &'static str {
        match self {
            PruneCause::Budget => "budget",
            PruneCause::Covered => "covered",
            PruneCause::Empty => "empty",
            PruneCause::Conflict => "conflict",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReductionResult {
    pub mode: PropagationMode,
    pub pruned: bool,
    pub cause: Option<PruneCause>,
    /// Free indicators that can be fixed to zero.
    pub to_zero: Vec<usize>,
    /// Free indicators that can be fixed to one.
    pub to_one: Vec<usize>,
    /// Valid lower bounds on `v` at the node.
    pub bounds: Vec<f64>,
    pub iterations: usize,
    pub rounds: Vec<ApproxRound>,
    /// Exact mode only: covering problems that hit their node budget.
    pub unknown: usize,
}

impl ReductionResult {
    fn pruned(mode: PropagationMode, cause: PruneCause, m: usize, iterations: usize, rounds: Vec<ApproxRound>) -> Self {
        ReductionResult {
            mode,
            pruned: true,
            cause: Some(cause),
            to_zero: Vec::new(),
            to_one: Vec::new(),
            bounds: vec![0.0; m],
            iterations,
            rounds,
            unknown: 0,
        }
    }

    pub fn num_fixings(&self) -> usize {
        self.to_zero.len() + self.to_one.len()
    }
}

fn budget(inst: &CcpInstance, fixing: &[Fixing]) -> Rational {
    let used: Rational = indices_with(fixing, Fixing::One).map(|i| inst.probs()[i]).sum();
    inst.epsilon() - used
}

/// Lower bound on `v_k` from the free scenarios: the first value in decreasing
/// order whose cumulative probability exceeds `budget` (zero if none does).
fn free_quantile(inst: &CcpInstance, bar: &ScenarioMatrix, free: &[usize], budget: Rational) -> Vec<f64> {
    let m = bar.num_rows();
    let mut out = vec![0.0; m];
    let mut idx = free.to_vec();
    for (k, o) in out.iter_mut().enumerate() {
        idx.sort_by(|&a, &b| {
            bar.get(b, k)
                .partial_cmp(&bar.get(a, k))
                .unwrap_or(core::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        let mut acc = Rational::ZERO;
        for &i in &idx {
            acc += inst.probs()[i];
            if acc > budget {
                *o = bar.get(i, k);
                break;
            }
        }
    }
    out
}

/// Approximate overlap propagation on the strengthened scenarios `bar`.
pub fn propagate_approx(inst: &CcpInstance, bar: &ScenarioMatrix, fixing: &[Fixing]) -> ReductionResult {
    let m = bar.num_rows();
    let mut fix = fixing.to_vec();
    let mut rounds = Vec::new();
    let mut to_zero = Vec::new();
    let mut to_one = Vec::new();
    let mut iterations = 0;
    loop {
        iterations += 1;
        let left = budget(inst, &fix);
        if left.is_negative() {
            return ReductionResult::pruned(PropagationMode::Approx, PruneCause::Budget, m, iterations, rounds);
        }
        let free: Vec<usize> = indices_with(&fix, Fixing::Free).collect();
        let ones: Vec<usize> = indices_with(&fix, Fixing::One).collect();
        let mut bounds = bar.max_over(indices_with(&fix, Fixing::Zero));
        for (b, q) in bounds.iter_mut().zip(free_quantile(inst, bar, &free, left)) {
            if q > *b {
                *b = q;
            }
        }
        let covered = |i: usize| bar.row(i).iter().zip(&bounds).all(|(a, b)| tol::leq(*a, *b));
        if ones.iter().any(|&j| covered(j)) {
            return ReductionResult::pruned(PropagationMode::Approx, PruneCause::Covered, m, iterations, rounds);
        }
        // rows where each one-fixed scenario is still uncovered
        let open_rows: Vec<Vec<usize>> = ones
            .iter()
            .map(|&j| (0..m).filter(|&k| tol::lt(bounds[k], bar.get(j, k))).collect())
            .collect();
        let mut round_one = Vec::new();
        for &i in &free {
            let forced = ones.iter().zip(&open_rows).any(|(&j, rows)| {
                rows.iter().all(|&k| tol::leq(bar.get(j, k), bar.get(i, k)))
            });
            if forced {
                round_one.push(i);
            }
        }
        let after: Rational = left - round_one.iter().map(|&i| inst.probs()[i]).sum::<Rational>();
        let mut round_zero = Vec::new();
        for &i in &free {
            let is_one = round_one.binary_search(&i).is_ok();
            let cannot_be_one = inst.probs()[i] > after || covered(i);
            if is_one {
                if covered(i) {
                    return ReductionResult::pruned(PropagationMode::Approx, PruneCause::Covered, m, iterations, rounds);
                }
            } else if cannot_be_one {
                round_zero.push(i);
            }
        }
        rounds.push(ApproxRound {
            bounds: bounds.clone(),
            to_zero: round_zero.clone(),
            to_one: round_one.clone(),
        });
        if round_zero.is_empty() && round_one.is_empty() {
            to_zero.sort_unstable();
            to_one.sort_unstable();
            return ReductionResult {
                mode: PropagationMode::Approx,
                pruned: false,
                cause: None,
                to_zero,
                to_one,
                bounds,
                iterations,
                rounds,
                unknown: 0,
            };
        }
        for &i in &round_one {
            fix[i] = Fixing::One;
        }
        for &i in &round_zero {
            fix[i] = Fixing::Zero;
        }
        to_one.extend(round_one);
        to_zero.extend(round_zero);
    }
}

/// Answer of an exact emptiness test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Certainty {
    Nonempty,
    Empty,
    /// The covering search ran out of nodes.
    Unknown,
}

/// Outcome of the covering problem `min sum p_i z_i` over row selections.
#[derive(Debug, Clone, PartialEq)]
pub enum CoverOutcome {
    /// Some one-fixed scenario has no uncovered row left: no completion exists.
    NoSelection,
    /// Minimum probability mass and one row choice per one-fixed scenario.
    Optimal { mass: Rational, rows: Vec<usize> },
    /// Decision mode found a selection within budget.
    WithinBudget { mass: Rational, rows: Vec<usize> },
    /// Decision mode proved every selection exceeds the budget.
    AboveBudget,
    Unknown,
}

/// Node limit of each covering search.
pub const COVER_NODE_LIMIT: usize = 10_000;

struct Cover<'a> {
    inst: &'a CcpInstance,
    bar: &'a ScenarioMatrix,
    ones: Vec<usize>,
    free: Vec<usize>,
    // candidate rows per one-fixed scenario
    rows: Vec<Vec<usize>>,
}

impl<'a> Cover<'a> {
    fn new(inst: &'a CcpInstance, bar: &'a ScenarioMatrix, fixing: &[Fixing]) -> Option<Self> {
        let base = bar.max_over(indices_with(fixing, Fixing::Zero));
        let ones: Vec<usize> = indices_with(fixing, Fixing::One).collect();
        let free: Vec<usize> = indices_with(fixing, Fixing::Free).collect();
        let m = bar.num_rows();
        let mut rows = Vec::with_capacity(ones.len());
        for &j in &ones {
            let r: Vec<usize> = (0..m).filter(|&k| tol::lt(base[k], bar.get(j, k))).collect();
            if r.is_empty() {
                return None;
            }
            rows.push(r);
        }
        Some(Cover {
            inst,
            bar,
            ones,
            free,
            rows,
        })
    }

    /// Free scenarios forced to one when `j` keeps row `k` uncovered.
    fn hits(&self, j: usize, k: usize) -> impl Iterator<Item = usize> + '_ {
        let level = self.bar.get(j, k);
        self.free
            .iter()
            .copied()
            .filter(move |&i| tol::leq(level, self.bar.get(i, k)))
    }

    fn mass(&self, choice: &[usize]) -> Rational {
        let mut hit = vec![false; self.bar.num_scenarios()];
        for (jj, &k) in choice.iter().enumerate() {
            for i in self.hits(self.ones[jj], k) {
                hit[i] = true;
            }
        }
        self.free
            .iter()
            .filter(|&&i| hit[i])
            .map(|&i| self.inst.probs()[i])
            .sum()
    }

    /// Branch and bound over the LP relaxation. With `limit = Some(b)` the
    /// search stops at the first selection of mass at most `b`.
    fn solve(&self, limit: Option<Rational>) -> CoverOutcome {
        if self.ones.is_empty() {
            return CoverOutcome::Optimal {
                mass: Rational::ZERO,
                rows: Vec::new(),
            };
        }
        let mut lp = LpModel::new();
        let mut w: Vec<Vec<usize>> = Vec::new();
        for r in &self.rows {
            w.push(r.iter().map(|_| lp.add_var(0.0, 1.0, 0.0)).collect());
        }
        let mut zvar = vec![usize::MAX; self.bar.num_scenarios()];
        for &i in &self.free {
            zvar[i] = lp.add_var(0.0, 1.0, self.inst.probs()[i].to_f64());
        }
        for (jj, &j) in self.ones.iter().enumerate() {
            let coeffs = w[jj].iter().map(|&c| (c, 1.0)).collect();
            lp.add_row(LpRow {
                coeffs,
                sense: Sense::Eq,
                rhs: 1.0,
            })
            .expect("columns exist");
            for &i in &self.free {
                let mut coeffs: Vec<(usize, f64)> = self.rows[jj]
                    .iter()
                    .zip(&w[jj])
                    .filter(|(&k, _)| tol::leq(self.bar.get(j, k), self.bar.get(i, k)))
                    .map(|(_, &c)| (c, 1.0))
                    .collect();
                if coeffs.is_empty() {
                    continue;
                }
                coeffs.push((zvar[i], -1.0));
                lp.add_row(LpRow {
                    coeffs,
                    sense: Sense::Le,
                    rhs: 0.0,
                })
                .expect("columns exist");
            }
        }
        let flat: Vec<(usize, usize, usize)> = w
            .iter()
            .enumerate()
            .flat_map(|(jj, cols)| cols.iter().enumerate().map(move |(kk, &c)| (jj, kk, c)))
            .collect();
        let mut solver = LpSolver::new();
        let mut best: Option<(Rational, Vec<usize>)> = None;
        // each stack entry: list of (column, value) fixings
        let mut stack: Vec<Vec<(usize, f64)>> = vec![Vec::new()];
        let mut nodes = 0usize;
        while let Some(fixes) = stack.pop() {
            nodes += 1;
            if nodes > COVER_NODE_LIMIT {
                return CoverOutcome::Unknown;
            }
            for &(_, _, c) in &flat {
                lp.change_bounds(c, 0.0, 1.0).expect("column exists");
            }
            for &(c, v) in &fixes {
                lp.change_bounds(c, v, v).expect("column exists");
            }
            let res = match solver.solve(&lp, None) {
                Ok(r) => r,
                Err(_) => return CoverOutcome::Unknown,
            };
            match res.status {
                LpStatus::Optimal => {}
                LpStatus::Infeasible => continue,
                _ => return CoverOutcome::Unknown,
            }
            if let Some(b) = limit {
                if res.objective > b.to_f64() + 1e-9 {
                    continue;
                }
            }
            if let Some((bm, _)) = &best {
                if res.objective >= bm.to_f64() - 1e-12 {
                    continue;
                }
            }
            // most fractional selection variable
            let mut pick = None;
            let mut dist = 1.0;
            for &(_, _, c) in &flat {
                let v = res.primal[c];
                let f = (v - 0.5).abs();
                if v > tol::INT && v < 1.0 - tol::INT && f < dist {
                    dist = f;
                    pick = Some(c);
                }
            }
            match pick {
                None => {
                    let choice: Vec<usize> = (0..self.ones.len())
                        .map(|jj| {
                            let kk = w[jj]
                                .iter()
                                .position(|&c| res.primal[c] > 0.5)
                                .unwrap_or(0);
                            self.rows[jj][kk]
                        })
                        .collect();
                    let mass = self.mass(&choice);
                    if let Some(b) = limit {
                        if mass <= b {
                            return CoverOutcome::WithinBudget { mass, rows: choice };
                        }
                    }
                    if best.as_ref().map(|(bm, _)| mass < *bm).unwrap_or(true) {
                        best = Some((mass, choice));
                    }
                }
                Some(c) => {
                    let mut down = fixes.clone();
                    down.push((c, 0.0));
                    stack.push(down);
                    let mut up = fixes;
                    up.push((c, 1.0));
                    stack.push(up);
                }
            }
        }
        match best {
            Some((mass, rows)) if limit.is_none() => CoverOutcome::Optimal { mass, rows },
            _ if limit.is_some() => CoverOutcome::AboveBudget,
            // every selection is feasible in the relaxation, so this is unreachable
            _ => CoverOutcome::Unknown,
        }
    }
}

/// Minimum probability mass of free scenarios that must be violated to keep
/// every one-fixed scenario uncovered.
pub fn cover_minimum(inst: &CcpInstance, bar: &ScenarioMatrix, fixing: &[Fixing]) -> CoverOutcome {
    match Cover::new(inst, bar, fixing) {
        None => CoverOutcome::NoSelection,
        Some(c) => c.solve(None),
    }
}

/// Exact emptiness test of the node set.
pub fn exact_nonempty(inst: &CcpInstance, bar: &ScenarioMatrix, fixing: &[Fixing]) -> Certainty {
    let left = budget(inst, fixing);
    if left.is_negative() {
        return Certainty::Empty;
    }
    let cover = match Cover::new(inst, bar, fixing) {
        None => return Certainty::Empty,
        Some(c) => c,
    };
    match cover.solve(Some(left)) {
        CoverOutcome::WithinBudget { .. } => Certainty::Nonempty,
        CoverOutcome::Optimal { mass, .. } => {
            if mass <= left {
                Certainty::Nonempty
            } else {
                Certainty::Empty
            }
        }
        CoverOutcome::NoSelection | CoverOutcome::AboveBudget => Certainty::Empty,
        CoverOutcome::Unknown => Certainty::Unknown,
    }
}

/// Exact pruning and the maximal fixing sets.
pub fn exact_fixings(inst: &CcpInstance, bar: &ScenarioMatrix, fixing: &[Fixing]) -> ReductionResult {
    let m = bar.num_rows();
    let mut unknown = 0;
    match exact_nonempty(inst, bar, fixing) {
        Certainty::Empty => return ReductionResult::pruned(PropagationMode::Exact, PruneCause::Empty, m, 1, Vec::new()),
        Certainty::Unknown => unknown += 1,
        Certainty::Nonempty => {}
    }
    let free: Vec<usize> = indices_with(fixing, Fixing::Free).collect();
    let mut trial = fixing.to_vec();
    let mut to_zero = Vec::new();
    let mut to_one = Vec::new();
    for &i in &free {
        trial[i] = Fixing::One;
        match exact_nonempty(inst, bar, &trial) {
            Certainty::Empty => to_zero.push(i),
            Certainty::Unknown => unknown += 1,
            Certainty::Nonempty => {}
        }
        trial[i] = Fixing::Zero;
        match exact_nonempty(inst, bar, &trial) {
            Certainty::Empty => to_one.push(i),
            Certainty::Unknown => unknown += 1,
            Certainty::Nonempty => {}
        }
        trial[i] = Fixing::Free;
    }
    if to_zero.iter().any(|i| to_one.contains(i)) {
        return ReductionResult::pruned(PropagationMode::Exact, PruneCause::Conflict, m, 1, Vec::new());
    }
    ReductionResult {
        mode: PropagationMode::Exact,
        pruned: false,
        cause: None,
        to_zero,
        to_one,
        bounds: bar.max_over(indices_with(fixing, Fixing::Zero)),
        iterations: 1,
        rounds: Vec::new(),
        unknown,
    }
}

/// Error for brute-force routines on too many free indicators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("{free} free indicators exceed the enumeration limit of {limit}")]
pub struct SizeLimit {
    pub free: usize,
    pub limit: usize,
}

/// Enumeration limit for brute-force routines.
pub const ENUMERATION_LIMIT: usize = 20;

/// Brute-force emptiness test on raw scenarios: tries every completion of the
/// free indicators.
pub fn oracle_nonempty(inst: &CcpInstance, fixing: &[Fixing]) -> Result<bool, SizeLimit> {
    let free: Vec<usize> = indices_with(fixing, Fixing::Free).collect();
    if free.len() > ENUMERATION_LIMIT {
        return Err(SizeLimit {
            free: free.len(),
            limit: ENUMERATION_LIMIT,
        });
    }
    let n = inst.num_scenarios();
    let m = inst.num_rows();
    let eps = inst.epsilon();
    let mut z = vec![false; n];
    for (i, f) in fixing.iter().enumerate() {
        z[i] = *f == Fixing::One;
    }
    for mask in 0u64..(1u64 << free.len()) {
        for (b, &i) in free.iter().enumerate() {
            z[i] = mask >> b & 1 == 1;
        }
        let used: Rational = (0..n).filter(|&i| z[i]).map(|i| inst.probs()[i]).sum();
        if used > eps {
            continue;
        }
        let mut cover = vec![0.0f64; m];
        for i in (0..n).filter(|&i| !z[i]) {
            for (c, &x) in cover.iter_mut().zip(inst.scenario(i)) {
                if x > *c {
                    *c = x;
                }
            }
        }
        let ok = (0..n).filter(|&i| z[i]).all(|i| {
            inst.scenario(i)
                .iter()
                .zip(&cover)
                .any(|(&x, &c)| tol::lt(c, x))
        });
        if ok {
            return Ok(true);
        }
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::example1;
    use crate::model::NodeState;
    use crate::preprocess::{quantile_bounds, strengthened_matrix};

    fn setup() -> (CcpInstance, ScenarioMatrix) {
        let inst = example1();
        let qb = quantile_bounds(&inst);
        let bar = strengthened_matrix(&inst, &qb);
        (inst, bar)
    }

    fn node(zeros: &[usize], ones: &[usize]) -> Vec<Fixing> {
        NodeState::with_fixings(7, 3, zeros, ones).unwrap().fixing
    }

    #[test]
    fn approx_trace_matches_hand_computation() {
        let (inst, bar) = setup();
        let res = propagate_approx(&inst, &bar, &node(&[3], &[4]));
        assert!(!res.pruned);
        assert_eq!(res.rounds[0].bounds, vec![5.0, 2.0, 6.0]);
        assert_eq!(res.rounds[0].to_one, vec![5, 6]);
        assert_eq!(res.rounds[1].bounds, vec![5.0, 2.0, 10.0]);
        assert_eq!(res.rounds[1].to_zero, vec![1, 2]);
        assert_eq!(res.to_zero, vec![1, 2]);
        assert_eq!(res.to_one, vec![5, 6]);
        assert_eq!(res.iterations, 3);
    }

    #[test]
    fn approx_prunes_over_budget() {
        let (inst, bar) = setup();
        let res = propagate_approx(&inst, &bar, &node(&[], &[0, 1, 2, 3, 4]));
        assert!(res.pruned);
        assert!(res.to_zero.is_empty() && res.to_one.is_empty());
    }

    #[test]
    fn exact_first_cover_value() {
        let (inst, bar) = setup();
        match cover_minimum(&inst, &bar, &node(&[3], &[4])) {
            CoverOutcome::Optimal { mass, rows } => {
                assert_eq!(mass, Rational::new(2, 7).unwrap());
                assert_eq!(rows, vec![0]);
            }
            other => panic!("unexpected {:?}", other),
        }
    }

    #[test]
    fn exact_fixings_match_approx_here() {
        let (inst, bar) = setup();
        let res = exact_fixings(&inst, &bar, &node(&[3], &[4]));
        assert!(!res.pruned);
        assert_eq!(res.to_zero, vec![1, 2]);
        assert_eq!(res.to_one, vec![5, 6]);
    }

    #[test]
    fn oracle_agrees_on_small_cases() {
        let (inst, bar) = setup();
        for (zeros, ones) in [(&[3usize][..], &[4usize][..]), (&[], &[0, 1, 2, 3, 4]), (&[0], &[1])] {
            let fx = node(zeros, ones);
            let o = oracle_nonempty(&inst, &fx).unwrap();
            let e = exact_nonempty(&inst, &bar, &fx);
            assert_eq!(e == Certainty::Nonempty, o, "{:?} {:?}", zeros, ones);
        }
    }
}
