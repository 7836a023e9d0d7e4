//! Reference answers by enumeration, for testing the search on small instances.

use alloc::vec;
use alloc::vec::Vec;

use crate::engine::{build_model, Formulation, Prepared};
use crate::lp::{LpModel, LpRow, LpSolver, LpStatus};
use crate::model::{CandidateSolution, CcpInstance, Sense};
use crate::preprocess::DominanceGraph;
use crate::propagate::{SizeLimit, ENUMERATION_LIMIT};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq)]
pub enum OracleOutcome {
    Infeasible,
    Unbounded,
    Optimal(CandidateSolution),
}

impl OracleOutcome {
    pub fn objective(&self) -> Option<f64> {
        match self {
            OracleOutcome::Optimal(c) => Some(c.objective),
            _ => None,
        }
    }
}

/// Solves the chance-constrained program by trying every budget-feasible set of
/// violated scenarios and solving the remaining LP over `x`.
pub fn brute_force_optimum(inst: &CcpInstance) -> Result<OracleOutcome, SizeLimit> {
    let n = inst.num_scenarios();
    if n > ENUMERATION_LIMIT {
        return Err(SizeLimit {
            free: n,
            limit: ENUMERATION_LIMIT,
        });
    }
    let (d, m) = (inst.num_vars(), inst.num_rows());
    // min c x  s.t.  T x - v = 0, x in X, v >= cover
    let mut lp = LpModel::new();
    for j in 0..d {
        lp.add_var(inst.lower()[j], inst.upper()[j], inst.cost()[j]);
    }
    for _ in 0..m {
        lp.add_var(0.0, f64::INFINITY, 0.0);
    }
    for k in 0..m {
        let mut coeffs: Vec<(usize, f64)> = inst.tech_row(k).iter().copied().enumerate().collect();
        coeffs.push((d + k, -1.0));
        lp.add_row(LpRow {
            coeffs,
            sense: Sense::Eq,
            rhs: 0.0,
        })
        .expect("columns exist");
    }
    for c in inst.constraints() {
        lp.add_row(LpRow {
            coeffs: c.coeffs.iter().copied().enumerate().collect(),
            sense: c.sense,
            rhs: c.rhs,
        })
        .expect("columns exist");
    }
    let mut solver = LpSolver::new();
    let mut best: Option<CandidateSolution> = None;
    let mut z = vec![false; n];
    let mut used = Rational::ZERO;
    // Gray code walk: consecutive subsets differ in one scenario
    for step in 0u64..(1u64 << n) {
        if step > 0 {
            let bit = step.trailing_zeros() as usize;
            z[bit] = !z[bit];
            if z[bit] {
                used += inst.probs()[bit];
            } else {
                used -= inst.probs()[bit];
            }
        }
        if used > inst.epsilon() {
            continue;
        }
        let mut cover = vec![0.0f64; m];
        for i in (0..n).filter(|&i| !z[i]) {
            for (c, &x) in cover.iter_mut().zip(inst.scenario(i)) {
                *c = c.max(x);
            }
        }
        for (k, &c) in cover.iter().enumerate() {
            lp.change_bounds(d + k, c, f64::INFINITY).expect("column exists");
        }
        let res = match solver.solve(&lp, None) {
            Ok(r) => r,
            Err(_) => {
                solver.reset();
                match solver.solve(&lp, None) {
                    Ok(r) => r,
                    Err(_) => continue,
                }
            }
        };
        match res.status {
            LpStatus::Optimal => {
                if best.as_ref().map(|b| res.objective < b.objective - 1e-9).unwrap_or(true) {
                    let x = res.primal[..d].to_vec();
                    best = Some(CandidateSolution::from_x(inst, x, z.clone()));
                }
            }
            LpStatus::Unbounded => return Ok(OracleOutcome::Unbounded),
            _ => {}
        }
    }
    Ok(match best {
        Some(c) => OracleOutcome::Optimal(c),
        None => OracleOutcome::Infeasible,
    })
}

/// LP relaxation optimum without and with the rows `z_i <= z_j` for every
/// dominance pair `(i, j)` of `graph`. A raw-scenario graph is paired with the
/// raw big-M rows and a strengthened graph with the strengthened rows.
pub fn lp_equivalence_probe(inst: &CcpInstance, graph: &DominanceGraph) -> (Option<f64>, Option<f64>) {
    let prep = Prepared::new(inst);
    let formulation = if graph.is_strengthened() {
        Formulation::Strengthened
    } else {
        Formulation::Raw
    };
    let (mut lp, layout) = build_model(inst, &prep, formulation);
    let value = |lp: &LpModel| {
        let r = crate::lp::solve(lp, None).ok()?;
        (r.status == LpStatus::Optimal).then_some(r.objective)
    };
    let plain = value(&lp);
    for &(i, j) in graph.pairs() {
        lp.add_row(LpRow {
            coeffs: vec![(layout.z(i), 1.0), (layout.z(j), -1.0)],
            sense: Sense::Le,
            rhs: 0.0,
        })
        .expect("columns exist");
    }
    (plain, value(&lp))
}
