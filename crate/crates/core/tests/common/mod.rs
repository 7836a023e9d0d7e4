//! Test-side reference code: random small instances and exact brute-force
//! answers computed with arbitrary-precision rationals.

#![allow(dead_code)]

use ccp_core::model::LinearConstraint;
use ccp_core::{CcpInstance, Fixing, InstanceData, Rational, Sense};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Q = BigRational;

pub fn q(v: f64) -> Q {
    BigRational::from_float(v).expect("finite")
}

pub fn qr(r: Rational) -> Q {
    BigRational::new(BigInt::from(r.numer()), BigInt::from(r.denom()))
}

pub fn zero() -> Q {
    BigRational::from_integer(BigInt::from(0))
}

/// Size caps of a random instance.
#[derive(Debug, Clone, Copy)]
pub struct Shape {
    pub max_d: usize,
    pub max_m: usize,
    pub max_n: usize,
}

pub const SMALL: Shape = Shape {
    max_d: 4,
    max_m: 4,
    max_n: 12,
};

/// Random instance with integer data. Costs are positive and `x >= 0`, so the
/// problem is bounded; finite upper bounds or a budget row may make it infeasible.
pub fn random_instance(seed: u64, shape: Shape) -> CcpInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = rng.gen_range(1..=shape.max_d);
    let m = rng.gen_range(1..=shape.max_m);
    let n = rng.gen_range(2..=shape.max_n);
    let cost: Vec<f64> = (0..d).map(|_| rng.gen_range(1..=9) as f64).collect();
    let tech: Vec<Vec<f64>> = (0..m)
        .map(|_| {
            let mut row: Vec<f64> = (0..d).map(|_| rng.gen_range(0..=3) as f64).collect();
            if row.iter().all(|&a| a == 0.0) {
                let j = rng.gen_range(0..d);
                row[j] = 1.0;
            }
            row
        })
        .collect();
    let top = if rng.gen_bool(0.5) { 4 } else { 20 };
    let scenarios: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..m).map(|_| rng.gen_range(0..=top) as f64).collect())
        .collect();
    let probs: Vec<Rational> = if rng.gen_bool(0.5) {
        vec![Rational::new(1, n as i128).unwrap(); n]
    } else {
        let w: Vec<i128> = (0..n).map(|_| rng.gen_range(1..=4)).collect();
        let total: i128 = w.iter().sum();
        w.iter().map(|&a| Rational::new(a, total).unwrap()).collect()
    };
    let den: i128 = if rng.gen_bool(0.5) { n as i128 } else { 10 };
    let epsilon = Rational::new(rng.gen_range(1..den), den).unwrap();
    let upper = if rng.gen_bool(0.25) {
        (0..d).map(|_| rng.gen_range(3..=12) as f64).collect()
    } else {
        vec![f64::INFINITY; d]
    };
    let mut constraints = Vec::new();
    if rng.gen_bool(0.3) {
        constraints.push(LinearConstraint {
            coeffs: (0..d).map(|_| rng.gen_range(0..=2) as f64).collect(),
            sense: Sense::Le,
            rhs: rng.gen_range(10..=40) as f64,
        });
    }
    if rng.gen_bool(0.2) {
        constraints.push(LinearConstraint {
            coeffs: vec![1.0; d],
            sense: Sense::Ge,
            rhs: rng.gen_range(0..=5) as f64,
        });
    }
    CcpInstance::new(InstanceData {
        name: format!("rand-{seed}"),
        cost,
        tech,
        constraints,
        lower: vec![0.0; d],
        upper,
        scenarios,
        probs,
        epsilon,
        metadata: Default::default(),
    })
    .expect("valid random instance")
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpAnswer {
    Infeasible,
    Unbounded,
    Optimal(Q),
}

/// `min c x` subject to `rows` and `x >= 0`, by a dense two-phase tableau
/// simplex with Bland's rule in exact arithmetic.
pub fn rational_lp(c: &[Q], rows: &[(Vec<Q>, Sense, Q)]) -> LpAnswer {
    let nx = c.len();
    // normalise to rhs >= 0, then add slacks and artificials
    let mut norm: Vec<(Vec<Q>, Sense, Q)> = Vec::new();
    for (a, s, b) in rows {
        if *b < zero() {
            let flip = match s {
                Sense::Le => Sense::Ge,
                Sense::Ge => Sense::Le,
                Sense::Eq => Sense::Eq,
            };
            norm.push((a.iter().map(|v| -v.clone()).collect(), flip, -b.clone()));
        } else {
            norm.push((a.clone(), *s, b.clone()));
        }
    }
    let r = norm.len();
    let nslack = norm.iter().filter(|(_, s, _)| *s != Sense::Eq).count();
    let nart = norm.iter().filter(|(_, s, _)| *s != Sense::Le).count();
    let cols = nx + nslack + nart;
    let mut t: Vec<Vec<Q>> = vec![vec![zero(); cols + 1]; r];
    let mut basis = vec![0usize; r];
    let (mut si, mut ai) = (nx, nx + nslack);
    let one = BigRational::from_integer(BigInt::from(1));
    for (i, (a, s, b)) in norm.iter().enumerate() {
        t[i][..nx].clone_from_slice(a);
        t[i][cols] = b.clone();
        match s {
            Sense::Le => {
                t[i][si] = one.clone();
                basis[i] = si;
                si += 1;
            }
            Sense::Ge => {
                t[i][si] = -one.clone();
                si += 1;
                t[i][ai] = one.clone();
                basis[i] = ai;
                ai += 1;
            }
            Sense::Eq => {
                t[i][ai] = one.clone();
                basis[i] = ai;
                ai += 1;
            }
        }
    }
    let mut phase1 = vec![zero(); cols];
    for v in phase1.iter_mut().skip(nx + nslack) {
        *v = one.clone();
    }
    if !tableau_min(&mut t, &mut basis, &phase1, cols) {
        unreachable!("phase one is bounded");
    }
    let infeas: Q = basis
        .iter()
        .enumerate()
        .map(|(i, &b)| phase1[b].clone() * t[i][cols].clone())
        .sum();
    if infeas > zero() {
        return LpAnswer::Infeasible;
    }
    // drive remaining artificials out of the basis (or drop redundant rows)
    let mut i = 0;
    while i < t.len() {
        if basis[i] >= nx + nslack {
            match (0..nx + nslack).find(|&j| t[i][j] != zero()) {
                Some(j) => pivot(&mut t, &mut basis, i, j),
                None => {
                    t.remove(i);
                    basis.remove(i);
                    continue;
                }
            }
        }
        i += 1;
    }
    for row in t.iter_mut() {
        row.drain(nx + nslack..cols);
    }
    let cols = nx + nslack;
    let mut cost = vec![zero(); cols];
    cost[..nx].clone_from_slice(c);
    if !tableau_min(&mut t, &mut basis, &cost, cols) {
        return LpAnswer::Unbounded;
    }
    LpAnswer::Optimal(
        basis
            .iter()
            .enumerate()
            .map(|(i, &b)| cost[b].clone() * t[i][cols].clone())
            .sum(),
    )
}

fn pivot(t: &mut [Vec<Q>], basis: &mut [usize], r: usize, c: usize) {
    let p = t[r][c].clone();
    for v in t[r].iter_mut() {
        *v /= p.clone();
    }
    let prow = t[r].clone();
    for (i, row) in t.iter_mut().enumerate() {
        if i != r && row[c] != zero() {
            let f = row[c].clone();
            for (v, pv) in row.iter_mut().zip(&prow) {
                *v -= f.clone() * pv.clone();
            }
        }
    }
    basis[r] = c;
}

/// Returns false when unbounded.
fn tableau_min(t: &mut [Vec<Q>], basis: &mut [usize], cost: &[Q], cols: usize) -> bool {
    loop {
        let enter = (0..cols).find(|&j| {
            let rc = cost[j].clone()
                - basis
                    .iter()
                    .enumerate()
                    .map(|(i, &b)| cost[b].clone() * t[i][j].clone())
                    .sum::<Q>();
            rc < zero()
        });
        let Some(j) = enter else { return true };
        let mut best: Option<(Q, usize)> = None;
        for i in 0..t.len() {
            if t[i][j] > zero() {
                let ratio = t[i][cols].clone() / t[i][j].clone();
                let better = match &best {
                    None => true,
                    Some((r, bi)) => ratio < *r || (ratio == *r && basis[i] < basis[*bi]),
                };
                if better {
                    best = Some((ratio, i));
                }
            }
        }
        match best {
            None => return false,
            Some((_, i)) => pivot(t, basis, i, j),
        }
    }
}

/// Deterministic rows of the instance as exact `(coeffs, sense, rhs)` over `x`.
fn polyhedron_rows(inst: &CcpInstance) -> Vec<(Vec<Q>, Sense, Q)> {
    let d = inst.num_vars();
    let mut rows = Vec::new();
    for c in inst.constraints() {
        rows.push((c.coeffs.iter().map(|&a| q(a)).collect(), c.sense, q(c.rhs)));
    }
    for j in 0..d {
        let mut e = vec![zero(); d];
        e[j] = q(1.0);
        if inst.upper()[j].is_finite() {
            rows.push((e.clone(), Sense::Le, q(inst.upper()[j])));
        }
        if inst.lower()[j] > 0.0 {
            rows.push((e, Sense::Ge, q(inst.lower()[j])));
        }
    }
    rows
}

/// Exact optimum of the chance-constrained program by enumerating every
/// budget-feasible violated set. Assumes `x >= 0` is part of the bounds.
pub fn brute_force(inst: &CcpInstance) -> LpAnswer {
    let (m, n) = (inst.num_rows(), inst.num_scenarios());
    assert!(inst.lower().iter().all(|&l| l >= 0.0));
    let eps = qr(inst.epsilon());
    let probs: Vec<Q> = inst.probs().iter().map(|&p| qr(p)).collect();
    let c: Vec<Q> = inst.cost().iter().map(|&a| q(a)).collect();
    let base = polyhedron_rows(inst);
    let mut best = LpAnswer::Infeasible;
    let mut seen = std::collections::HashSet::new();
    for mask in 0u32..(1 << n) {
        let used: Q = (0..n).filter(|&i| mask >> i & 1 == 1).map(|i| probs[i].clone()).sum();
        if used > eps {
            continue;
        }
        // a larger violated set never needs a larger cover
        let maximal = (0..n)
            .filter(|&i| mask >> i & 1 == 0)
            .all(|i| used.clone() + probs[i].clone() > eps);
        if !maximal {
            continue;
        }
        let cover: Vec<f64> = (0..m)
            .map(|k| {
                (0..n)
                    .filter(|&i| mask >> i & 1 == 0)
                    .map(|i| inst.scenario(i)[k])
                    .fold(0.0f64, f64::max)
            })
            .collect();
        if !seen.insert(cover.iter().map(|v| v.to_bits()).collect::<Vec<u64>>()) {
            continue;
        }
        let mut rows = base.clone();
        for (k, &cv) in cover.iter().enumerate() {
            rows.push((inst.tech_row(k).iter().map(|&a| q(a)).collect(), Sense::Ge, q(cv)));
        }
        match rational_lp(&c, &rows) {
            LpAnswer::Unbounded => return LpAnswer::Unbounded,
            LpAnswer::Infeasible => {}
            LpAnswer::Optimal(v) => {
                let better = match &best {
                    LpAnswer::Optimal(b) => v < *b,
                    _ => true,
                };
                if better {
                    best = LpAnswer::Optimal(v);
                }
            }
        }
    }
    best
}

pub fn to_f64(v: &Q) -> f64 {
    let num: f64 = v.numer().to_string().parse().unwrap();
    let den: f64 = v.denom().to_string().parse().unwrap();
    num / den
}

/// Whether some completion of the free indicators keeps every violated
/// scenario uncovered by the componentwise max of the covered ones and fits the budget.
pub fn node_nonempty(inst: &CcpInstance, fixing: &[Fixing]) -> bool {
    let n = inst.num_scenarios();
    let eps = qr(inst.epsilon());
    let probs: Vec<Q> = inst.probs().iter().map(|&p| qr(p)).collect();
    let free: Vec<usize> = (0..n).filter(|&i| fixing[i] == Fixing::Free).collect();
    for mask in 0u32..(1 << free.len()) {
        let mut z: Vec<bool> = fixing.iter().map(|f| *f == Fixing::One).collect();
        for (b, &i) in free.iter().enumerate() {
            z[i] = mask >> b & 1 == 1;
        }
        let used: Q = (0..n).filter(|&i| z[i]).map(|i| probs[i].clone()).sum();
        if used > eps {
            continue;
        }
        let cover: Vec<f64> = (0..inst.num_rows())
            .map(|k| {
                (0..n)
                    .filter(|&i| !z[i])
                    .map(|i| inst.scenario(i)[k])
                    .fold(0.0, f64::max)
            })
            .collect();
        let ok = (0..n)
            .filter(|&i| z[i])
            .all(|i| inst.scenario(i).iter().zip(&cover).any(|(x, c)| c < x));
        if ok {
            return true;
        }
    }
    false
}

/// Random consistent fixing with roughly a third of the indicators fixed.
pub fn random_fixing(rng: &mut impl Rng, n: usize) -> Vec<Fixing> {
    (0..n)
        .map(|_| match rng.gen_range(0..6) {
            0 => Fixing::Zero,
            1 => Fixing::One,
            _ => Fixing::Free,
        })
        .collect()
}

/// First value in decreasing order of row `k` (ties by index) whose
/// cumulative probability exceeds the risk level.
pub fn quantile(inst: &CcpInstance, k: usize) -> f64 {
    let n = inst.num_scenarios();
    let eps = qr(inst.epsilon());
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| {
        inst.scenario(b)[k]
            .partial_cmp(&inst.scenario(a)[k])
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut acc = zero();
    for i in idx {
        acc += qr(inst.probs()[i]);
        if acc > eps {
            return inst.scenario(i)[k];
        }
    }
    unreachable!("probabilities sum to one and eps < 1")
}
