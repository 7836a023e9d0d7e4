//! Mixing inequalities for the rows `v_k >= xi^i_k (1 - z_i)`.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::lp::LpRow;
use crate::model::{CcpInstance, Sense};
use crate::preprocess::ScenarioMatrix;
use crate::propagate::{SizeLimit, ENUMERATION_LIMIT};
use crate::rational::Rational;
use crate::tol;

/// Minimum violation for a cut to be reported.
pub const MIN_VIOLATION: f64 = 1e-6;

/// `v_row + sum coefs[j] * z[sequence[j]] >= rhs`
#[derive(Debug, Clone, PartialEq)]
pub struct MixingCut {
    pub row: usize,
    pub sequence: Vec<usize>,
    pub coefs: Vec<f64>,
    pub rhs: f64,
    pub violation: f64,
}

impl MixingCut {
    /// The cut as an LP row given the column of `v_row` and of each `z_i`.
    pub fn to_lp_row(&self, v_col: usize, z_col: impl Fn(usize) -> usize) -> LpRow {
        let mut coeffs = Vec::with_capacity(self.sequence.len() + 1);
        coeffs.push((v_col, 1.0));
        for (&i, &c) in self.sequence.iter().zip(&self.coefs) {
            coeffs.push((z_col(i), c));
        }
        LpRow {
            coeffs,
            sense: Sense::Ge,
            rhs: self.rhs,
        }
    }

    pub fn lhs(&self, v: f64, z: &[f64]) -> f64 {
        v + self
            .sequence
            .iter()
            .zip(&self.coefs)
            .map(|(&i, &c)| c * z[i])
            .sum::<f64>()
    }
}

/// Most violated mixing cut of each row at the point `(v, z)`, at most
/// `max_cuts` in total, sorted by decreasing violation.
///
/// `bar` holds the strengthened scenarios and `lower` the quantile bounds.
pub fn separate_mixing(bar: &ScenarioMatrix, lower: &[f64], v: &[f64], z: &[f64], max_cuts: usize) -> Vec<MixingCut> {
    let n = bar.num_scenarios();
    let mut cuts = Vec::new();
    for (k, &lb) in lower.iter().enumerate() {
        let mut cand: Vec<usize> = (0..n).filter(|&i| tol::lt(lb, bar.get(i, k))).collect();
        if cand.len() < 2 {
            continue;
        }
        cand.sort_by(|&a, &b| {
            bar.get(b, k)
                .partial_cmp(&bar.get(a, k))
                .unwrap_or(core::cmp::Ordering::Equal)
                .then(z[a].partial_cmp(&z[b]).unwrap_or(core::cmp::Ordering::Equal))
                .then(a.cmp(&b))
        });
        let mut seq = Vec::new();
        seq.push(cand[0]);
        let mut last_z = z[cand[0]];
        let mut last_val = bar.get(cand[0], k);
        for &i in &cand[1..] {
            let val = bar.get(i, k);
            if tol::leq(last_val, val) {
                // same value group as the last included scenario
                continue;
            }
            if z[i] < last_z - 1e-9 {
                seq.push(i);
                last_z = z[i];
                last_val = val;
            }
        }
        if seq.len() < 2 {
            continue;
        }
        let coefs: Vec<f64> = (0..seq.len())
            .map(|j| {
                let next = if j + 1 < seq.len() { bar.get(seq[j + 1], k) } else { lb };
                bar.get(seq[j], k) - next
            })
            .collect();
        let cut = MixingCut {
            row: k,
            rhs: bar.get(seq[0], k),
            sequence: seq,
            coefs,
            violation: 0.0,
        };
        let violation = cut.rhs - cut.lhs(v[k], z);
        if violation > MIN_VIOLATION {
            cuts.push(MixingCut { violation, ..cut });
        }
    }
    cuts.sort_by(|a, b| {
        b.violation
            .partial_cmp(&a.violation)
            .unwrap_or(core::cmp::Ordering::Equal)
            .then(a.row.cmp(&b.row))
    });
    cuts.truncate(max_cuts);
    cuts
}

/// Cuts already added, keyed by row and scenario sequence.
#[derive(Debug, Clone, Default)]
pub struct CutPool {
    seen: BTreeSet<(usize, Vec<usize>)>,
}

impl CutPool {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns true when the cut was not in the pool yet.
    pub fn insert(&mut self, cut: &MixingCut) -> bool {
        self.seen.insert((cut.row, cut.sequence.clone()))
    }

    pub fn len(&self) -> usize {
        self.seen.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seen.is_empty()
    }
}

/// Checks a cut against every budget-feasible indicator vector, taking the
/// smallest admissible `v` (componentwise max of the covered raw scenarios).
pub fn validate_cut(inst: &CcpInstance, cut: &MixingCut) -> Result<bool, SizeLimit> {
    let n = inst.num_scenarios();
    if n > ENUMERATION_LIMIT {
        return Err(SizeLimit {
            free: n,
            limit: ENUMERATION_LIMIT,
        });
    }
    let k = cut.row;
    let eps = inst.epsilon();
    let mut z = alloc::vec![0.0; n];
    for mask in 0u64..(1u64 << n) {
        let used: Rational = (0..n)
            .filter(|&i| mask >> i & 1 == 1)
            .map(|i| inst.probs()[i])
            .sum();
        if used > eps {
            continue;
        }
        let mut vk = 0.0f64;
        for (i, zi) in z.iter_mut().enumerate() {
            let one = mask >> i & 1 == 1;
            *zi = if one { 1.0 } else { 0.0 };
            if !one {
                vk = vk.max(inst.scenario(i)[k]);
            }
        }
        if cut.lhs(vk, &z) < cut.rhs - 1e-9 {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::example1;
    use crate::preprocess::{quantile_bounds, strengthened_matrix};

    #[test]
    fn cut_from_fractional_point_is_valid() {
        let inst = example1();
        let qb = quantile_bounds(&inst);
        let bar = strengthened_matrix(&inst, &qb);
        // v at the quantile bound, scenarios spread evenly
        let z = [0.5, 0.6, 0.2, 0.1, 0.3, 0.4, 0.9];
        let cuts = separate_mixing(&bar, &qb.lower, &qb.lower, &z, 6);
        assert!(!cuts.is_empty());
        for c in &cuts {
            assert!(c.sequence.len() >= 2);
            assert!(c.violation > MIN_VIOLATION);
            assert_eq!(validate_cut(&inst, c), Ok(true));
        }
        // row 0: sequence starts at the largest value (scenario 6, value 12)
        let c0 = cuts.iter().find(|c| c.row == 0).unwrap();
        assert_eq!(c0.sequence[0], 6);
        assert_eq!(c0.rhs, 12.0);
    }

    #[test]
    fn integral_feasible_point_has_no_cut() {
        let inst = example1();
        let qb = quantile_bounds(&inst);
        let bar = strengthened_matrix(&inst, &qb);
        let z = [1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0];
        assert!(separate_mixing(&bar, &qb.lower, &[6.0, 2.0, 7.0], &z, 6).is_empty());
    }

    #[test]
    fn invalid_cut_detected() {
        let inst = example1();
        let bad = MixingCut {
            row: 2,
            sequence: alloc::vec![0],
            coefs: alloc::vec![1.0],
            rhs: 12.0,
            violation: 0.0,
        };
        assert_eq!(validate_cut(&inst, &bad), Ok(false));
    }
}
