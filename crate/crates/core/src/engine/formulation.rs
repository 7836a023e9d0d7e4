//! The mixed-integer model as an LP over `(x, v, z)`.

use alloc::vec::Vec;

use super::config::Formulation;
use crate::lp::{LpModel, LpRow};
use crate::model::{CcpInstance, Sense};
use crate::preprocess::{
    build_dominance_graph, quantile_bounds, strengthen_coefficients, strengthened_matrix, BigMEntry,
    DominanceGraph, QuantileBounds, ScenarioMatrix, StrengthenedModel,
};
use crate::rational::Rational;

/// Preprocessing results shared by the whole search.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub quantiles: QuantileBounds,
    /// Strengthened scenarios `max(xi, xi0)`.
    pub bar: ScenarioMatrix,
    pub coefficients: StrengthenedModel,
    /// Dominance over the strengthened scenarios.
    pub graph: DominanceGraph,
}

impl Prepared {
    pub fn new(inst: &CcpInstance) -> Self {
        let quantiles = quantile_bounds(inst);
        let bar = strengthened_matrix(inst, &quantiles);
        let coefficients = strengthen_coefficients(inst, &quantiles);
        let graph = build_dominance_graph(inst, &quantiles, true);
        Prepared {
            quantiles,
            bar,
            coefficients,
            graph,
        }
    }
}

/// Column and row positions in the node LP.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub d: usize,
    pub m: usize,
    pub n: usize,
    pub knapsack_row: usize,
    pub base_rows: usize,
}

impl Layout {
    pub fn x(&self, j: usize) -> usize {
        j
    }
    pub fn v(&self, k: usize) -> usize {
        self.d + k
    }
    pub fn z(&self, i: usize) -> usize {
        self.d + self.m + i
    }
}

fn lcm_of_denominators(values: impl Iterator<Item = Rational>) -> Option<i128> {
    let mut l: i128 = 1;
    for r in values {
        let d = r.denom();
        let (mut a, mut b) = (l, d);
        while b != 0 {
            (a, b) = (b, a % b);
        }
        l = (l / a).checked_mul(d)?;
        if l > 1 << 40 {
            return None;
        }
    }
    Some(l)
}

/// Knapsack row coefficients, scaled to integers when denominators allow.
pub fn knapsack_row(inst: &CcpInstance, layout: &Layout) -> LpRow {
    let scale = lcm_of_denominators(inst.probs().iter().copied().chain([inst.epsilon()]));
    let value = |r: Rational| match scale {
        Some(l) => (r.numer() * (l / r.denom())) as f64,
        None => r.to_f64(),
    };
    LpRow {
        coeffs: (0..inst.num_scenarios())
            .filter(|&i| !inst.probs()[i].is_zero())
            .map(|i| (layout.z(i), value(inst.probs()[i])))
            .collect(),
        sense: Sense::Le,
        rhs: value(inst.epsilon()),
    }
}

/// Base lower bound on each `v_k`.
pub fn v_lower(prep: &Prepared, formulation: Formulation) -> Vec<f64> {
    match formulation {
        Formulation::Raw => alloc::vec![0.0; prep.quantiles.lower.len()],
        Formulation::Strengthened => prep.quantiles.lower.clone(),
    }
}

/// Builds the LP relaxation `min c x` over `T x = v`, `x in X`, the big-M rows and the knapsack row.
pub fn build_model(inst: &CcpInstance, prep: &Prepared, formulation: Formulation) -> (LpModel, Layout) {
    let (d, m, n) = (inst.num_vars(), inst.num_rows(), inst.num_scenarios());
    let mut lp = LpModel::new();
    for j in 0..d {
        lp.add_var(inst.lower()[j], inst.upper()[j], inst.cost()[j]);
    }
    for lo in v_lower(prep, formulation) {
        lp.add_var(lo, f64::INFINITY, 0.0);
    }
    for _ in 0..n {
        lp.add_var(0.0, 1.0, 0.0);
    }
    let mut layout = Layout {
        d,
        m,
        n,
        knapsack_row: 0,
        base_rows: 0,
    };
    for k in 0..m {
        let mut coeffs: Vec<(usize, f64)> = inst
            .tech_row(k)
            .iter()
            .enumerate()
            .filter(|(_, a)| **a != 0.0)
            .map(|(j, a)| (layout.x(j), *a))
            .collect();
        coeffs.push((layout.v(k), -1.0));
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
            .map(|(j, a)| (layout.x(j), *a))
            .collect();
        lp.add_row(LpRow {
            coeffs,
            sense: c.sense,
            rhs: c.rhs,
        })
        .expect("columns exist");
    }
    for i in 0..n {
        for k in 0..m {
            let (coef, rhs) = match formulation {
                Formulation::Raw => {
                    let xi = inst.scenario(i)[k];
                    if xi <= 0.0 {
                        continue;
                    }
                    (xi, xi)
                }
                Formulation::Strengthened => match prep.coefficients.entry(i, k) {
                    BigMEntry::Dropped => continue,
                    BigMEntry::Active { z_coef, rhs } => (z_coef, rhs),
                },
            };
            lp.add_row(LpRow {
                coeffs: alloc::vec![(layout.v(k), 1.0), (layout.z(i), coef)],
                sense: Sense::Ge,
                rhs,
            })
            .expect("columns exist");
        }
    }
    layout.knapsack_row = lp.num_rows();
    lp.add_row(knapsack_row(inst, &layout)).expect("columns exist");
    layout.base_rows = lp.num_rows();
    (lp, layout)
}
