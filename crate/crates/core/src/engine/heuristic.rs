//! Rounding heuristic: violate the scenarios with the largest LP indicator
//! values while the budget allows, then re-solve over `x` alone.

use alloc::vec;
use alloc::vec::Vec;

use crate::lp::{LpModel, LpRow, LpSolver, LpStatus};
use crate::model::{CandidateSolution, CcpInstance, Fixing, Sense};
use crate::rational::Rational;

pub struct Rounding {
    lp: LpModel,
    solver: LpSolver,
    d: usize,
}

fn mix(seed: u64, i: usize) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ (i as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl Rounding {
    pub fn new(inst: &CcpInstance) -> Self {
        let (d, m) = (inst.num_vars(), inst.num_rows());
        let mut lp = LpModel::new();
        for j in 0..d {
            lp.add_var(inst.lower()[j], inst.upper()[j], inst.cost()[j]);
        }
        for _ in 0..m {
            lp.add_var(0.0, f64::INFINITY, 0.0);
        }
        for k in 0..m {
            let mut coeffs: Vec<(usize, f64)> = inst
                .tech_row(k)
                .iter()
                .enumerate()
                .filter(|(_, a)| **a != 0.0)
                .map(|(j, a)| (j, *a))
                .collect();
            coeffs.push((d + k, -1.0));
            lp.add_row(LpRow {
                coeffs,
                sense: Sense::Eq,
                rhs: 0.0,
            })
            .expect("columns exist");
        }
        for c in inst.constraints() {
            let coeffs = c
                .coeffs
                .iter()
                .enumerate()
                .filter(|(_, a)| **a != 0.0)
                .map(|(j, a)| (j, *a))
                .collect();
            lp.add_row(LpRow {
                coeffs,
                sense: c.sense,
                rhs: c.rhs,
            })
            .expect("columns exist");
        }
        Rounding {
            lp,
            solver: LpSolver::new(),
            d,
        }
    }

    /// Best point with `v` covering every scenario kept at zero by the rounding.
    pub fn run(&mut self, inst: &CcpInstance, z_lp: &[f64], fixing: &[Fixing], seed: u64) -> Option<CandidateSolution> {
        let n = inst.num_scenarios();
        let mut order: Vec<usize> = (0..n).filter(|&i| fixing[i] != Fixing::Zero).collect();
        order.sort_by(|&a, &b| {
            let fa = fixing[a] == Fixing::One;
            let fb = fixing[b] == Fixing::One;
            fb.cmp(&fa)
                .then(z_lp[b].partial_cmp(&z_lp[a]).unwrap_or(core::cmp::Ordering::Equal))
                .then(mix(seed, a).cmp(&mix(seed, b)))
                .then(a.cmp(&b))
        });
        let mut z = vec![false; n];
        let mut used = Rational::ZERO;
        for &i in &order {
            let next = used + inst.probs()[i];
            if next <= inst.epsilon() {
                z[i] = true;
                used = next;
            }
        }
        self.complete(inst, &z)
    }

    /// Solves for `x` with `v` at least the covered scenarios of `z`.
    pub fn complete(&mut self, inst: &CcpInstance, z: &[bool]) -> Option<CandidateSolution> {
        let m = inst.num_rows();
        let mut need = vec![0.0f64; m];
        for i in (0..inst.num_scenarios()).filter(|&i| !z[i]) {
            for (o, &x) in need.iter_mut().zip(inst.scenario(i)) {
                *o = o.max(x);
            }
        }
        for (k, &lo) in need.iter().enumerate() {
            self.lp.change_bounds(self.d + k, lo, f64::INFINITY).ok()?;
        }
        let res = self.solver.solve(&self.lp, None).ok()?;
        if res.status != LpStatus::Optimal {
            return None;
        }
        let x = res.primal[..self.d].to_vec();
        let mut cand = CandidateSolution::from_x(inst, x, vec![false; inst.num_scenarios()]);
        for i in 0..inst.num_scenarios() {
            cand.z[i] = inst
                .scenario(i)
                .iter()
                .zip(&cand.v)
                .any(|(&xi, &v)| v < xi - crate::tol::FEAS);
        }
        if inst.check_feasible(&cand).is_feasible() {
            Some(cand)
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::example1;

    #[test]
    fn rounding_finds_the_optimum_of_the_example() {
        let inst = example1();
        let mut h = Rounding::new(&inst);
        let z_lp = [0.9, 0.8, 0.1, 0.0, 0.0, 0.6, 0.7];
        let cand = h.run(&inst, &z_lp, &[Fixing::Free; 7], 0).unwrap();
        assert_eq!(cand.objective, 59.0);
        assert_eq!(cand.z, vec![true, true, false, false, false, true, true]);
    }
}
