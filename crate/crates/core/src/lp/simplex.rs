//! Bounded revised simplex with an explicit dense basis inverse.
//!
//! Each row `i` gets a slack column `s_i` equal to the row activity, so the
//! system reads `A x - s = 0` and the row sense becomes bounds on `s_i`.
//! A cold start uses the all-slack basis. Phase 1 minimizes the sum of bound
//! violations of basic columns (first-breakpoint ratio test), phase 2 is the
//! textbook primal method with Dantzig pricing. Warm starts that are dual
//! feasible go through the dual simplex.

use alloc::vec;
use alloc::vec::Vec;

use super::{Basis, LpError, LpModel, LpResult, LpStatus, VarStatus};
use crate::model::Sense;

const PRIMAL_TOL: f64 = 1e-9;
const DUAL_TOL: f64 = 1e-7;
const PIVOT_TOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 64;
const NO_POS: usize = usize::MAX;

#[inline]
fn ptol(bound: f64) -> f64 {
    PRIMAL_TOL * (1.0 + bound.abs())
}

fn default_status(lo: f64, hi: f64) -> VarStatus {
    if lo.is_finite() {
        VarStatus::AtLower
    } else if hi.is_finite() {
        VarStatus::AtUpper
    } else {
        VarStatus::Free
    }
}

enum Outcome {
    Optimal,
    Infeasible,
    Unbounded,
    IterLimit,
    Numerical,
}

struct Work {
    m: usize,
    ns: usize,
    cols: Vec<Vec<(usize, f64)>>,
    cost: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    x: Vec<f64>,
    basic: Vec<usize>,
    pos: Vec<usize>,
    status: Vec<VarStatus>,
    binv: Vec<f64>,
    since_refactor: usize,
    iterations: usize,
    limit: usize,
}

/// Reusable solver. Keeps the last basis and factorization so that a
/// following solve on the same model after bound changes starts warm.
#[derive(Default)]
pub struct LpSolver {
    cached: Option<(usize, u64, Work)>,
}

impl LpSolver {
    pub fn new() -> Self {
        LpSolver { cached: None }
    }

    /// Forgets the cached basis.
    pub fn reset(&mut self) {
        self.cached = None;
    }

    pub fn solve(&mut self, model: &LpModel, warm: Option<&Basis>) -> Result<LpResult, LpError> {
        let ident = model.identity();
        let mut work = match self.cached.take() {
            Some((id, ver, mut w)) if warm.is_none() && id == ident.0 && ver == ident.1 => {
                w.load_bounds(model);
                w.iterations = 0;
                w.reset_nonbasic();
                w.compute_xb();
                w
            }
            Some((id, _, w)) if warm.is_none() && id == ident.0 => {
                let token = w.token();
                let mut fresh = Work::build(model);
                if !fresh.install(&token) {
                    fresh.slack_basis();
                }
                fresh
            }
            _ => {
                let mut fresh = Work::build(model);
                let ok = warm.map(|b| fresh.install(b)).unwrap_or(false);
                if !ok {
                    fresh.slack_basis();
                }
                fresh
            }
        };
        let mut status = work.run();
        if matches!(status, Outcome::Numerical | Outcome::IterLimit) {
            let used = work.iterations;
            work = Work::build(model);
            work.slack_basis();
            work.iterations = 0;
            status = work.run();
            work.iterations += used;
        }
        let status = match status {
            Outcome::Optimal => LpStatus::Optimal,
            Outcome::Infeasible => LpStatus::Infeasible,
            Outcome::Unbounded => LpStatus::Unbounded,
            Outcome::IterLimit => LpStatus::IterationLimit,
            Outcome::Numerical => {
                self.cached = None;
                return Err(LpError::Numerical);
            }
        };
        let result = work.result(status);
        self.cached = Some((ident.0, ident.1, work));
        Ok(result)
    }
}

impl Work {
    fn build(model: &LpModel) -> Work {
        let ns = model.num_vars();
        let m = model.num_rows();
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); ns];
        for (i, row) in model.rows().iter().enumerate() {
            for &(j, a) in &row.coeffs {
                if a != 0.0 {
                    cols[j].push((i, a));
                }
            }
        }
        let nc = ns + m;
        let mut cost = vec![0.0; nc];
        cost[..ns].copy_from_slice(model.objective());
        let mut w = Work {
            m,
            ns,
            cols,
            cost,
            lo: vec![0.0; nc],
            hi: vec![0.0; nc],
            x: vec![0.0; nc],
            basic: Vec::new(),
            pos: vec![NO_POS; nc],
            status: vec![VarStatus::AtLower; nc],
            binv: Vec::new(),
            since_refactor: 0,
            iterations: 0,
            limit: 50 * (ns + m).max(1),
        };
        w.load_bounds(model);
        w
    }

    fn load_bounds(&mut self, model: &LpModel) {
        let ns = self.ns;
        self.lo[..ns].copy_from_slice(model.lower());
        self.hi[..ns].copy_from_slice(model.upper());
        for (i, row) in model.rows().iter().enumerate() {
            let (l, h) = match row.sense {
                Sense::Le => (f64::NEG_INFINITY, row.rhs),
                Sense::Ge => (row.rhs, f64::INFINITY),
                Sense::Eq => (row.rhs, row.rhs),
            };
            self.lo[ns + i] = l;
            self.hi[ns + i] = h;
        }
    }

    fn token(&self) -> Basis {
        Basis {
            num_structural: self.ns,
            status: self.status.clone(),
        }
    }

    fn slack_basis(&mut self) {
        let nc = self.ns + self.m;
        self.basic = (self.ns..nc).collect();
        self.pos = vec![NO_POS; nc];
        for (p, &j) in self.basic.iter().enumerate() {
            self.pos[j] = p;
        }
        for j in 0..nc {
            self.status[j] = if j >= self.ns {
                VarStatus::Basic
            } else {
                default_status(self.lo[j], self.hi[j])
            };
        }
        self.reset_nonbasic();
        // B = -I
        self.binv = vec![0.0; self.m * self.m];
        for p in 0..self.m {
            self.binv[p * self.m + p] = -1.0;
        }
        self.since_refactor = 0;
        self.compute_xb();
    }

    /// Installs a basis token; rows missing from it get basic slacks.
    fn install(&mut self, token: &Basis) -> bool {
        if token.num_structural != self.ns {
            return false;
        }
        let nc = self.ns + self.m;
        let mut status = vec![VarStatus::AtLower; nc];
        let mut basic = Vec::with_capacity(self.m);
        for j in 0..nc {
            let from_token = if j < self.ns {
                token.status.get(j).copied()
            } else {
                token.status.get(token.num_structural + (j - self.ns)).copied()
            };
            let s = match from_token {
                Some(s) => s,
                None => VarStatus::Basic,
            };
            if s == VarStatus::Basic {
                basic.push(j);
            }
            status[j] = s;
        }
        if basic.len() > self.m {
            // too many basics (rows were removed): demote the last ones
            while basic.len() > self.m {
                let j = basic.pop().expect("nonempty");
                status[j] = default_status(self.lo[j], self.hi[j]);
            }
        }
        if basic.len() < self.m {
            for j in (self.ns..nc).rev() {
                if basic.len() == self.m {
                    break;
                }
                if status[j] != VarStatus::Basic {
                    status[j] = VarStatus::Basic;
                    basic.push(j);
                }
            }
            basic.sort_unstable();
        }
        self.status = status;
        self.basic = basic;
        self.pos = vec![NO_POS; nc];
        for (p, &j) in self.basic.iter().enumerate() {
            self.pos[j] = p;
        }
        self.reset_nonbasic();
        if !self.refactor() {
            return false;
        }
        self.compute_xb();
        true
    }

    /// Puts nonbasic columns at the bound named by their status.
    fn reset_nonbasic(&mut self) {
        for j in 0..self.ns + self.m {
            let (lo, hi) = (self.lo[j], self.hi[j]);
            match self.status[j] {
                VarStatus::Basic => {}
                VarStatus::AtLower if lo.is_finite() => self.x[j] = lo,
                VarStatus::AtUpper if hi.is_finite() => self.x[j] = hi,
                VarStatus::Free if !lo.is_finite() && !hi.is_finite() => {
                    if !self.x[j].is_finite() {
                        self.x[j] = 0.0;
                    }
                }
                _ => {
                    let s = default_status(lo, hi);
                    self.status[j] = s;
                    self.x[j] = match s {
                        VarStatus::AtLower => lo,
                        VarStatus::AtUpper => hi,
                        _ => 0.0,
                    };
                }
            }
        }
    }

    #[inline]
    fn col_dot(&self, j: usize, v: &[f64]) -> f64 {
        if j < self.ns {
            self.cols[j].iter().map(|&(r, a)| v[r] * a).sum()
        } else {
            -v[j - self.ns]
        }
    }

    /// `B^{-1} a_j`
    fn ftran(&self, j: usize) -> Vec<f64> {
        let m = self.m;
        let mut out = vec![0.0; m];
        if j < self.ns {
            for &(r, a) in &self.cols[j] {
                for (p, o) in out.iter_mut().enumerate() {
                    *o += self.binv[p * m + r] * a;
                }
            }
        } else {
            let r = j - self.ns;
            for (p, o) in out.iter_mut().enumerate() {
                *o = -self.binv[p * m + r];
            }
        }
        out
    }

    /// `c_B^T B^{-1}`
    fn btran(&self, cb: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for (p, &c) in cb.iter().enumerate() {
            if c != 0.0 {
                let row = &self.binv[p * m..(p + 1) * m];
                for (yr, b) in y.iter_mut().zip(row) {
                    *yr += c * b;
                }
            }
        }
        y
    }

    /// Recomputes `B^{-1}` by Gauss-Jordan elimination with partial pivoting.
    fn refactor(&mut self) -> bool {
        let m = self.m;
        let mut b = vec![0.0; m * m];
        for (p, &j) in self.basic.iter().enumerate() {
            if j < self.ns {
                for &(r, a) in &self.cols[j] {
                    b[r * m + p] = a;
                }
            } else {
                b[(j - self.ns) * m + p] = -1.0;
            }
        }
        let mut inv = vec![0.0; m * m];
        for p in 0..m {
            inv[p * m + p] = 1.0;
        }
        for c in 0..m {
            let mut piv = c;
            let mut best = b[c * m + c].abs();
            for r in c + 1..m {
                let v = b[r * m + c].abs();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best < 1e-11 {
                return false;
            }
            if piv != c {
                for k in 0..m {
                    b.swap(c * m + k, piv * m + k);
                    inv.swap(c * m + k, piv * m + k);
                }
            }
            let d = b[c * m + c];
            for k in 0..m {
                b[c * m + k] /= d;
                inv[c * m + k] /= d;
            }
            for r in 0..m {
                if r == c {
                    continue;
                }
                let f = b[r * m + c];
                if f != 0.0 {
                    for k in 0..m {
                        b[r * m + k] -= f * b[c * m + k];
                        inv[r * m + k] -= f * inv[c * m + k];
                    }
                }
            }
        }
        // inv = B^{-1}; row p of B^{-1} belongs to basis position p
        self.binv = inv;
        self.since_refactor = 0;
        true
    }

    fn compute_xb(&mut self) {
        let m = self.m;
        let mut rhs = vec![0.0; m];
        for j in 0..self.ns + self.m {
            if self.status[j] == VarStatus::Basic {
                continue;
            }
            let xj = self.x[j];
            if xj == 0.0 {
                continue;
            }
            if j < self.ns {
                for &(r, a) in &self.cols[j] {
                    rhs[r] -= a * xj;
                }
            } else {
                rhs[j - self.ns] += xj;
            }
        }
        for p in 0..m {
            let row = &self.binv[p * m..(p + 1) * m];
            let v: f64 = row.iter().zip(&rhs).map(|(a, b)| a * b).sum();
            let j = self.basic[p];
            self.x[j] = v;
        }
    }

    fn pivot(&mut self, r: usize, q: usize, alpha: &[f64]) {
        let m = self.m;
        let ar = alpha[r];
        for k in 0..m {
            self.binv[r * m + k] /= ar;
        }
        for p in 0..m {
            if p == r || alpha[p] == 0.0 {
                continue;
            }
            let f = alpha[p];
            for k in 0..m {
                self.binv[p * m + k] -= f * self.binv[r * m + k];
            }
        }
        let leaving = self.basic[r];
        self.pos[leaving] = NO_POS;
        self.basic[r] = q;
        self.pos[q] = r;
        self.status[q] = VarStatus::Basic;
        self.since_refactor += 1;
    }

    fn maybe_refactor(&mut self) -> bool {
        if self.since_refactor >= REFACTOR_EVERY {
            if !self.refactor() {
                return false;
            }
            self.compute_xb();
        }
        true
    }

    fn infeasibility(&self, j: usize) -> f64 {
        let v = self.x[j];
        if v < self.lo[j] - ptol(self.lo[j]) {
            self.lo[j] - v
        } else if v > self.hi[j] + ptol(self.hi[j]) {
            v - self.hi[j]
        } else {
            0.0
        }
    }

    fn primal_feasible(&self) -> bool {
        self.basic.iter().all(|&j| self.infeasibility(j) == 0.0)
    }

    fn reduced_costs(&self, y: &[f64]) -> Vec<f64> {
        (0..self.ns + self.m)
            .map(|j| {
                if self.status[j] == VarStatus::Basic {
                    0.0
                } else {
                    self.cost[j] - self.col_dot(j, y)
                }
            })
            .collect()
    }

    fn phase2_duals(&self) -> Vec<f64> {
        let cb: Vec<f64> = self.basic.iter().map(|&j| self.cost[j]).collect();
        self.btran(&cb)
    }

    fn dual_feasible(&self, d: &[f64]) -> bool {
        (0..self.ns + self.m).all(|j| {
            if self.lo[j] == self.hi[j] {
                return true;
            }
            match self.status[j] {
                VarStatus::Basic => true,
                VarStatus::AtLower => d[j] >= -DUAL_TOL,
                VarStatus::AtUpper => d[j] <= DUAL_TOL,
                VarStatus::Free => d[j].abs() <= DUAL_TOL,
            }
        })
    }

    fn run(&mut self) -> Outcome {
        if !self.primal_feasible() {
            let d = self.reduced_costs(&self.phase2_duals());
            if self.dual_feasible(&d) {
                match self.dual() {
                    Outcome::Optimal => {}
                    Outcome::Infeasible => {
                        // confirm with phase 1 before declaring infeasibility
                    }
                    other => return other,
                }
            }
            if !self.primal_feasible() {
                match self.primal(true) {
                    Outcome::Optimal => {}
                    other => return other,
                }
            }
        }
        for _ in 0..3 {
            match self.primal(false) {
                Outcome::Optimal => {}
                other => return other,
            }
            if !self.refactor() {
                return Outcome::Numerical;
            }
            self.compute_xb();
            if self.primal_feasible() {
                return Outcome::Optimal;
            }
            match self.primal(true) {
                Outcome::Optimal => {}
                other => return other,
            }
        }
        Outcome::Numerical
    }

    /// Primal simplex. In phase 1 the objective is the sum of bound violations.
    fn primal(&mut self, phase1: bool) -> Outcome {
        let nc = self.ns + self.m;
        let mut bland = false;
        let mut stalled = 0usize;
        let stall_limit = 2 * (nc + self.m);
        let mut last_obj = f64::INFINITY;
        loop {
            if self.iterations >= self.limit {
                return Outcome::IterLimit;
            }
            if !self.maybe_refactor() {
                return Outcome::Numerical;
            }
            let cb: Vec<f64> = if phase1 {
                self.basic
                    .iter()
                    .map(|&j| {
                        let v = self.x[j];
                        if v < self.lo[j] - ptol(self.lo[j]) {
                            -1.0
                        } else if v > self.hi[j] + ptol(self.hi[j]) {
                            1.0
                        } else {
                            0.0
                        }
                    })
                    .collect()
            } else {
                self.basic.iter().map(|&j| self.cost[j]).collect()
            };
            if phase1 && cb.iter().all(|c| *c == 0.0) {
                return Outcome::Optimal;
            }
            let obj: f64 = if phase1 {
                self.basic.iter().map(|&j| self.infeasibility(j)).sum()
            } else {
                (0..nc).map(|j| self.cost[j] * self.x[j]).sum()
            };
            if obj < last_obj - 1e-12 * (1.0 + obj.abs()) {
                last_obj = obj;
                stalled = 0;
                bland = false;
            } else {
                stalled += 1;
                if stalled > stall_limit {
                    bland = true;
                }
            }
            let y = self.btran(&cb);
            // pricing
            let mut q = NO_POS;
            let mut qdir = 0.0;
            let mut best = 0.0;
            for j in 0..nc {
                let st = self.status[j];
                if st == VarStatus::Basic || self.lo[j] == self.hi[j] {
                    continue;
                }
                let cj = if phase1 { 0.0 } else { self.cost[j] };
                let dj = cj - self.col_dot(j, &y);
                let dir = match st {
                    VarStatus::AtLower if dj < -DUAL_TOL => 1.0,
                    VarStatus::AtUpper if dj > DUAL_TOL => -1.0,
                    VarStatus::Free if dj.abs() > DUAL_TOL => {
                        if dj < 0.0 {
                            1.0
                        } else {
                            -1.0
                        }
                    }
                    _ => continue,
                };
                if bland {
                    q = j;
                    qdir = dir;
                    break;
                }
                if dj.abs() > best {
                    best = dj.abs();
                    q = j;
                    qdir = dir;
                }
            }
            if q == NO_POS {
                return if phase1 {
                    Outcome::Infeasible
                } else {
                    Outcome::Optimal
                };
            }
            let alpha = self.ftran(q);
            // ratio test
            let range = self.hi[q] - self.lo[q];
            let mut step = if range.is_finite() { range } else { f64::INFINITY };
            let mut leave = NO_POS;
            let mut leave_status = VarStatus::AtLower;
            let mut leave_alpha = 0.0f64;
            for p in 0..self.m {
                let a = alpha[p];
                if a.abs() < PIVOT_TOL {
                    continue;
                }
                let rate = -qdir * a;
                let j = self.basic[p];
                let (xv, lo, hi) = (self.x[j], self.lo[j], self.hi[j]);
                let (t, st) = if rate < 0.0 {
                    if phase1 && xv > hi + ptol(hi) {
                        ((xv - hi) / -rate, VarStatus::AtUpper)
                    } else if lo.is_finite() && xv >= lo - ptol(lo) {
                        ((xv - lo).max(0.0) / -rate, VarStatus::AtLower)
                    } else {
                        continue;
                    }
                } else if phase1 && xv < lo - ptol(lo) {
                    ((lo - xv) / rate, VarStatus::AtLower)
                } else if hi.is_finite() && xv <= hi + ptol(hi) {
                    ((hi - xv).max(0.0) / rate, VarStatus::AtUpper)
                } else {
                    continue;
                };
                let better = if leave == NO_POS {
                    t <= step
                } else if bland {
                    t < step - 1e-12 || (t <= step + 1e-12 && j < self.basic[leave])
                } else {
                    t < step - 1e-12 || (t <= step + 1e-12 && a.abs() > leave_alpha.abs())
                };
                if better {
                    step = t;
                    leave = p;
                    leave_status = st;
                    leave_alpha = a;
                }
            }
            if !step.is_finite() {
                return if phase1 {
                    Outcome::Numerical
                } else {
                    Outcome::Unbounded
                };
            }
            self.iterations += 1;
            // move
            for p in 0..self.m {
                let a = alpha[p];
                if a != 0.0 {
                    let j = self.basic[p];
                    self.x[j] -= qdir * a * step;
                }
            }
            if leave == NO_POS {
                // bound flip
                if qdir > 0.0 {
                    self.x[q] = self.hi[q];
                    self.status[q] = VarStatus::AtUpper;
                } else {
                    self.x[q] = self.lo[q];
                    self.status[q] = VarStatus::AtLower;
                }
                continue;
            }
            self.x[q] += qdir * step;
            let lv = self.basic[leave];
            self.x[lv] = if leave_status == VarStatus::AtLower {
                self.lo[lv]
            } else {
                self.hi[lv]
            };
            self.status[lv] = leave_status;
            self.pivot(leave, q, &alpha);
        }
    }

    /// Dual simplex from a dual feasible basis.
    fn dual(&mut self) -> Outcome {
        let nc = self.ns + self.m;
        loop {
            if self.iterations >= self.limit {
                return Outcome::IterLimit;
            }
            if !self.maybe_refactor() {
                return Outcome::Numerical;
            }
            // leaving row: largest bound violation
            let mut r = NO_POS;
            let mut worst = 0.0;
            for p in 0..self.m {
                let inf = self.infeasibility(self.basic[p]);
                if inf > worst {
                    worst = inf;
                    r = p;
                }
            }
            if r == NO_POS {
                return Outcome::Optimal;
            }
            let lv = self.basic[r];
            let below = self.x[lv] < self.lo[lv];
            let y = self.phase2_duals();
            let rho: Vec<f64> = self.binv[r * self.m..(r + 1) * self.m].to_vec();
            // Harris two-pass ratio test
            let mut cands: Vec<(usize, f64, f64)> = Vec::new();
            let mut bound = f64::INFINITY;
            for j in 0..nc {
                let st = self.status[j];
                if st == VarStatus::Basic || self.lo[j] == self.hi[j] {
                    continue;
                }
                let a = self.col_dot(j, &rho);
                if a.abs() < PIVOT_TOL {
                    continue;
                }
                let dj = self.cost[j] - self.col_dot(j, &y);
                let eligible = match st {
                    VarStatus::AtLower => (below && a < 0.0) || (!below && a > 0.0),
                    VarStatus::AtUpper => (below && a > 0.0) || (!below && a < 0.0),
                    VarStatus::Free => true,
                    VarStatus::Basic => false,
                };
                if !eligible {
                    continue;
                }
                let slack = match st {
                    VarStatus::AtLower => dj.max(0.0),
                    VarStatus::AtUpper => (-dj).max(0.0),
                    _ => dj.abs(),
                };
                let ratio = (slack + DUAL_TOL) / a.abs();
                if ratio < bound {
                    bound = ratio;
                }
                cands.push((j, slack / a.abs(), a));
            }
            if cands.is_empty() {
                return Outcome::Infeasible;
            }
            let mut q = NO_POS;
            let mut qa = 0.0f64;
            for &(j, ratio, a) in &cands {
                if ratio <= bound && a.abs() > qa.abs() {
                    q = j;
                    qa = a;
                }
            }
            if q == NO_POS {
                return Outcome::Numerical;
            }
            let alpha = self.ftran(q);
            if alpha[r].abs() < PIVOT_TOL {
                // factorization drifted; refresh and retry
                if !self.refactor() {
                    return Outcome::Numerical;
                }
                self.compute_xb();
                self.since_refactor = REFACTOR_EVERY;
                continue;
            }
            let target = if below { self.lo[lv] } else { self.hi[lv] };
            let t = (self.x[lv] - target) / alpha[r];
            self.iterations += 1;
            for p in 0..self.m {
                let a = alpha[p];
                if a != 0.0 {
                    let j = self.basic[p];
                    self.x[j] -= t * a;
                }
            }
            self.x[q] += t;
            self.x[lv] = target;
            self.status[lv] = if below {
                VarStatus::AtLower
            } else {
                VarStatus::AtUpper
            };
            self.pivot(r, q, &alpha);
        }
    }

    fn result(&self, status: LpStatus) -> LpResult {
        let y = self.phase2_duals();
        let d = self.reduced_costs(&y);
        let objective = (0..self.ns).map(|j| self.cost[j] * self.x[j]).sum();
        LpResult {
            status,
            objective,
            primal: self.x[..self.ns].to_vec(),
            activity: self.x[self.ns..].to_vec(),
            duals: y,
            reduced_costs: d[..self.ns].to_vec(),
            basis: self.token(),
            iterations: self.iterations,
        }
    }
}
