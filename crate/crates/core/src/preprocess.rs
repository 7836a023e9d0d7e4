//! Quantile bounds, strengthened scenarios and the scenario dominance graph.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt::Write;

use crate::model::CcpInstance;
use crate::rational::Rational;
use crate::tol;

/// Per-row quantile information.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileBounds {
    /// Valid lower bound on `v_k` implied by the knapsack budget.
    pub lower: Vec<f64>,
    /// One-based position in the sorted order where the budget is first exceeded.
    pub position: Vec<usize>,
    /// Scenario order by decreasing value in each row (ties by index).
    pub order: Vec<Vec<usize>>,
}

/// Sorts scenarios of row `k` by decreasing value, ties by increasing index.
pub fn row_order(inst: &CcpInstance, k: usize, subset: impl Iterator<Item = usize>) -> Vec<usize> {
    let mut idx: Vec<usize> = subset.collect();
    idx.sort_by(|&a, &b| {
        let (va, vb) = (inst.scenario(a)[k], inst.scenario(b)[k]);
        vb.partial_cmp(&va).unwrap_or(Ordering::Equal).then(a.cmp(&b))
    });
    idx
}

/// Computes `xi0_k`: the value at the first position of the decreasing order of
/// row `k` whose cumulative probability exceeds `eps`.
pub fn quantile_bounds(inst: &CcpInstance) -> QuantileBounds {
    let m = inst.num_rows();
    let n = inst.num_scenarios();
    let eps = inst.epsilon();
    let mut lower = vec![0.0; m];
    let mut position = vec![0; m];
    let mut order = Vec::with_capacity(m);
    for k in 0..m {
        let ord = row_order(inst, k, 0..n);
        let mut acc = Rational::ZERO;
        for (s, &i) in ord.iter().enumerate() {
            acc += inst.probs()[i];
            if acc > eps {
                lower[k] = inst.scenario(i)[k];
                position[k] = s + 1;
                break;
            }
        }
        order.push(ord);
    }
    QuantileBounds {
        lower,
        position,
        order,
    }
}

/// Dense `n x m` scenario table.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioMatrix {
    n: usize,
    m: usize,
    data: Vec<f64>,
}

impl ScenarioMatrix {
    pub fn from_instance(inst: &CcpInstance) -> Self {
        let (n, m) = (inst.num_scenarios(), inst.num_rows());
        let mut data = Vec::with_capacity(n * m);
        for i in 0..n {
            data.extend_from_slice(inst.scenario(i));
        }
        ScenarioMatrix { n, m, data }
    }

    pub fn num_scenarios(&self) -> usize {
        self.n
    }

    pub fn num_rows(&self) -> usize {
        self.m
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.m..(i + 1) * self.m]
    }

    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.data[i * self.m + k]
    }

    /// Componentwise `<=` with the shared tolerance.
    pub fn dominated(&self, i: usize, j: usize) -> bool {
        self.row(i).iter().zip(self.row(j)).all(|(a, b)| tol::leq(*a, *b))
    }

    /// Componentwise equality up to tolerance.
    pub fn same(&self, i: usize, j: usize) -> bool {
        self.dominated(i, j) && self.dominated(j, i)
    }

    /// Componentwise maximum over `set` (zeros when empty).
    pub fn max_over(&self, set: impl Iterator<Item = usize>) -> Vec<f64> {
        let mut out = vec![0.0; self.m];
        for i in set {
            for (o, v) in out.iter_mut().zip(self.row(i)) {
                if *v > *o {
                    *o = *v;
                }
            }
        }
        out
    }
}

/// `max(xi^i, xi0)` for every scenario.
pub fn strengthened_matrix(inst: &CcpInstance, qb: &QuantileBounds) -> ScenarioMatrix {
    let mut mat = ScenarioMatrix::from_instance(inst);
    let m = mat.m;
    for (c, v) in mat.data.iter_mut().enumerate() {
        let lb = qb.lower[c % m];
        if *v < lb {
            *v = lb;
        }
    }
    mat
}

/// Coefficients of the row `v_k + coef * z_i >= rhs` for one (scenario, row) pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BigMEntry {
    /// Implied by `v_k >= xi0_k`.
    Dropped,
    Active { z_coef: f64, rhs: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrengthenedModel {
    n: usize,
    m: usize,
    entries: Vec<BigMEntry>,
    /// Global lower bound on `v`.
    pub lower: Vec<f64>,
}

impl StrengthenedModel {
    pub fn entry(&self, i: usize, k: usize) -> BigMEntry {
        self.entries[i * self.m + k]
    }

    pub fn num_active(&self) -> usize {
        self.entries
            .iter()
            .filter(|e| matches!(e, BigMEntry::Active { .. }))
            .count()
    }

    pub fn num_scenarios(&self) -> usize {
        self.n
    }
}

/// `v_k >= xi^i_k - (xi^i_k - xi0_k) z_i` when `xi^i_k > xi0_k`, dropped otherwise.
pub fn strengthen_coefficients(inst: &CcpInstance, qb: &QuantileBounds) -> StrengthenedModel {
    let (n, m) = (inst.num_scenarios(), inst.num_rows());
    let mut entries = Vec::with_capacity(n * m);
    for i in 0..n {
        for k in 0..m {
            let xi = inst.scenario(i)[k];
            let lb = qb.lower[k];
            entries.push(if xi <= lb {
                BigMEntry::Dropped
            } else {
                BigMEntry::Active {
                    z_coef: xi - lb,
                    rhs: xi,
                }
            });
        }
    }
    StrengthenedModel {
        n,
        m,
        entries,
        lower: qb.lower.clone(),
    }
}

/// Scenario dominance relation over either raw or strengthened scenarios.
#[derive(Debug, Clone, PartialEq)]
pub struct DominanceGraph {
    matrix: ScenarioMatrix,
    strengthened: bool,
    pairs: BTreeSet<(usize, usize)>,
    reduced: Option<BTreeSet<(usize, usize)>>,
    below: Vec<Vec<usize>>,
    above: Vec<Vec<usize>>,
}

/// Counts used in reports: dominance pairs, reduced edges and the pair maximum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DominanceStats {
    pub pairs: usize,
    pub reduced: usize,
    pub max_pairs: usize,
}

impl DominanceStats {
    pub fn pair_percent(&self) -> f64 {
        percent(self.pairs, self.max_pairs)
    }

    pub fn reduced_percent(&self) -> f64 {
        percent(self.reduced, self.max_pairs)
    }
}

fn percent(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        100.0 * a as f64 / b as f64
    }
}

/// Builds the dominance pairs `(i, j)` with `i != j` and scenario `i <= j` componentwise.
/// With `strengthened = true` the comparison uses `max(xi, xi0)`.
pub fn build_dominance_graph(inst: &CcpInstance, qb: &QuantileBounds, strengthened: bool) -> DominanceGraph {
    let matrix = if strengthened {
        strengthened_matrix(inst, qb)
    } else {
        ScenarioMatrix::from_instance(inst)
    };
    DominanceGraph::from_matrix(matrix, strengthened)
}

impl DominanceGraph {
    pub fn from_matrix(matrix: ScenarioMatrix, strengthened: bool) -> Self {
        let n = matrix.n;
        let mut pairs = BTreeSet::new();
        let mut below: Vec<Vec<usize>> = (0..n).map(|j| vec![j]).collect();
        let mut above: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
        for i in 0..n {
            for j in 0..n {
                if i != j && matrix.dominated(i, j) {
                    pairs.insert((i, j));
                    below[j].push(i);
                    above[i].push(j);
                }
            }
        }
        for v in below.iter_mut().chain(above.iter_mut()) {
            v.sort_unstable();
        }
        DominanceGraph {
            matrix,
            strengthened,
            pairs,
            reduced: None,
            below,
            above,
        }
    }

    pub fn matrix(&self) -> &ScenarioMatrix {
        &self.matrix
    }

    pub fn is_strengthened(&self) -> bool {
        self.strengthened
    }

    pub fn pairs(&self) -> &BTreeSet<(usize, usize)> {
        &self.pairs
    }

    pub fn reduced(&self) -> Option<&BTreeSet<(usize, usize)>> {
        self.reduced.as_ref()
    }

    /// Scenarios dominated by `j`, including `j`.
    pub fn below(&self, j: usize) -> &[usize] {
        &self.below[j]
    }

    /// Scenarios dominating `i`, including `i`.
    pub fn above(&self, i: usize) -> &[usize] {
        &self.above[i]
    }

    /// Strict order used for the reduction: proper dominance, or equal
    /// scenarios ordered by index.
    pub fn precedes(&self, i: usize, j: usize) -> bool {
        if i == j || !self.pairs.contains(&(i, j)) {
            return false;
        }
        !self.pairs.contains(&(j, i)) || i < j
    }

    /// Size of the strict order (each pair of equal scenarios counted once).
    pub fn stats(&self) -> DominanceStats {
        let n = self.matrix.n;
        let strict = self.pairs.iter().filter(|&&(i, j)| self.precedes(i, j)).count();
        DominanceStats {
            pairs: strict,
            reduced: self.reduced.as_ref().map(|r| r.len()).unwrap_or(0),
            max_pairs: n * n.saturating_sub(1) / 2,
        }
    }

    /// `i -> j` lines for every reduced edge (or every pair before reduction).
    pub fn edge_list(&self) -> String {
        let mut out = String::new();
        for (i, j) in self.reduced.as_ref().unwrap_or(&self.pairs) {
            let _ = writeln!(out, "{} -> {}", i, j);
        }
        out
    }
}

/// Keeps the covering relations of the strict order: `(i, j)` stays when no
/// `s` sits strictly between `i` and `j`.
pub fn transitive_reduction(mut g: DominanceGraph) -> DominanceGraph {
    let n = g.matrix.n;
    let words = n.div_ceil(64).max(1);
    let mut succ = vec![0u64; n * words];
    let mut pred = vec![0u64; n * words];
    let strict: Vec<(usize, usize)> = g
        .pairs
        .iter()
        .copied()
        .filter(|&(i, j)| g.precedes(i, j))
        .collect();
    for &(i, j) in &strict {
        succ[i * words + j / 64] |= 1 << (j % 64);
        pred[j * words + i / 64] |= 1 << (i % 64);
    }
    let reduced = strict
        .into_iter()
        .filter(|&(i, j)| {
            let a = &succ[i * words..(i + 1) * words];
            let b = &pred[j * words..(j + 1) * words];
            a.iter().zip(b).all(|(x, y)| x & y == 0)
        })
        .collect();
    g.reduced = Some(reduced);
    g
}
