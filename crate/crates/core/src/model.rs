//! Chance-constrained program instances, candidate solutions and node state.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::lp::Basis;
use crate::rational::Rational;
use crate::tol;

/// Direction of a linear constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl Sense {
    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        }
    }

    /// Whether `lhs (sense) rhs` holds up to `tol`.
    pub fn holds(self, lhs: f64, rhs: f64, tol: f64) -> bool {
        match self {
            Sense::Le => lhs <= rhs + tol,
            Sense::Ge => lhs >= rhs - tol,
            Sense::Eq => (lhs - rhs).abs() <= tol,
        }
    }
}

/// One deterministic row `coeffs . x (sense) rhs` of the polyhedron X.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraint {
    pub coeffs: Vec<f64>,
    pub sense: Sense,
    pub rhs: f64,
}

/// Raw instance data before validation.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct InstanceData {
    pub name: String,
    pub cost: Vec<f64>,
    /// Technology matrix, one `Vec` per row (m rows of length d).
    pub tech: Vec<Vec<f64>>,
    pub constraints: Vec<LinearConstraint>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Scenario right-hand sides, one `Vec` of length m per scenario.
    pub scenarios: Vec<Vec<f64>>,
    pub probs: Vec<Rational>,
    pub epsilon: Rational,
    pub metadata: BTreeMap<String, Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ValidationError {
    #[error("{what}: expected length {expected}, found {found}")]
    Dimension {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("instance has no scenarios")]
    NoScenarios,
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("scenario {scenario} row {row} is negative ({value})")]
    NegativeScenario { scenario: usize, row: usize, value: f64 },
    #[error("probability of scenario {0} is negative")]
    NegativeProbability(usize),
    #[error("probabilities sum to {0}, expected 1")]
    ProbabilitySum(Rational),
    #[error("risk level {0} outside (0, 1)")]
    Epsilon(Rational),
    #[error("variable {0} has lower bound above upper bound")]
    Bounds(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("dimension mismatch: expected {expected}, found {found}")]
pub struct DimensionError {
    pub expected: usize,
    pub found: usize,
}

/// A validated instance of `min c x` s.t. `P(T x >= xi) >= 1 - eps`, `x in X`.
#[derive(Debug, Clone, PartialEq)]
pub struct CcpInstance {
    name: String,
    d: usize,
    m: usize,
    n: usize,
    cost: Vec<f64>,
    tech: Vec<f64>,
    constraints: Vec<LinearConstraint>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    scenarios: Vec<f64>,
    probs: Vec<Rational>,
    epsilon: Rational,
    metadata: BTreeMap<String, Vec<f64>>,
}

fn check_len(what: &'static str, expected: usize, found: usize) -> Result<(), ValidationError> {
    if expected != found {
        return Err(ValidationError::Dimension {
            what,
            expected,
            found,
        });
    }
    Ok(())
}

impl CcpInstance {
    pub fn new(data: InstanceData) -> Result<Self, ValidationError> {
        let d = data.cost.len();
        let m = data.tech.len();
        let n = data.scenarios.len();
        if n == 0 {
            return Err(ValidationError::NoScenarios);
        }
        if data.cost.iter().any(|c| !c.is_finite()) {
            return Err(ValidationError::NonFinite("cost"));
        }
        let mut tech = Vec::with_capacity(m * d);
        for row in &data.tech {
            check_len("technology row", d, row.len())?;
            if row.iter().any(|t| !t.is_finite()) {
                return Err(ValidationError::NonFinite("technology matrix"));
            }
            tech.extend_from_slice(row);
        }
        for c in &data.constraints {
            check_len("constraint row", d, c.coeffs.len())?;
            if c.coeffs.iter().any(|t| !t.is_finite()) || !c.rhs.is_finite() {
                return Err(ValidationError::NonFinite("constraint"));
            }
        }
        check_len("lower bounds", d, data.lower.len())?;
        check_len("upper bounds", d, data.upper.len())?;
        for j in 0..d {
            let (lo, hi) = (data.lower[j], data.upper[j]);
            if lo.is_nan() || hi.is_nan() || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                return Err(ValidationError::NonFinite("bounds"));
            }
            if lo > hi {
                return Err(ValidationError::Bounds(j));
            }
        }
        let mut scenarios = Vec::with_capacity(n * m);
        for (i, s) in data.scenarios.iter().enumerate() {
            check_len("scenario", m, s.len())?;
            for (k, &v) in s.iter().enumerate() {
                if !v.is_finite() {
                    return Err(ValidationError::NonFinite("scenario"));
                }
                if v < 0.0 {
                    return Err(ValidationError::NegativeScenario {
                        scenario: i,
                        row: k,
                        value: v,
                    });
                }
            }
            scenarios.extend_from_slice(s);
        }
        check_len("probabilities", n, data.probs.len())?;
        if let Some(i) = data.probs.iter().position(|p| p.is_negative()) {
            return Err(ValidationError::NegativeProbability(i));
        }
        let total: Rational = data.probs.iter().sum();
        if total != Rational::ONE {
            return Err(ValidationError::ProbabilitySum(total));
        }
        if data.epsilon <= Rational::ZERO || data.epsilon >= Rational::ONE {
            return Err(ValidationError::Epsilon(data.epsilon));
        }
        Ok(CcpInstance {
            name: data.name,
            d,
            m,
            n,
            cost: data.cost,
            tech,
            constraints: data.constraints,
            lower: data.lower,
            upper: data.upper,
            scenarios,
            probs: data.probs,
            epsilon: data.epsilon,
            metadata: data.metadata,
        })
    }

    /// Back to the raw data form (for serialization).
    pub fn to_data(&self) -> InstanceData {
        InstanceData {
            name: self.name.clone(),
            cost: self.cost.clone(),
            tech: (0..self.m).map(|k| self.tech_row(k).to_vec()).collect(),
            constraints: self.constraints.clone(),
            lower: self.lower.clone(),
            upper: self.upper.clone(),
            scenarios: (0..self.n).map(|i| self.scenario(i).to_vec()).collect(),
            probs: self.probs.clone(),
            epsilon: self.epsilon,
            metadata: self.metadata.clone(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    /// Number of decision variables.
    pub fn num_vars(&self) -> usize {
        self.d
    }
    /// Number of chance rows.
    pub fn num_rows(&self) -> usize {
        self.m
    }
    /// Number of scenarios.
    pub fn num_scenarios(&self) -> usize {
        self.n
    }
    pub fn cost(&self) -> &[f64] {
        &self.cost
    }
    pub fn tech_row(&self, k: usize) -> &[f64] {
        &self.tech[k * self.d..(k + 1) * self.d]
    }
    pub fn constraints(&self) -> &[LinearConstraint] {
        &self.constraints
    }
    pub fn lower(&self) -> &[f64] {
        &self.lower
    }
    pub fn upper(&self) -> &[f64] {
        &self.upper
    }
    pub fn scenario(&self, i: usize) -> &[f64] {
        &self.scenarios[i * self.m..(i + 1) * self.m]
    }
    pub fn probs(&self) -> &[Rational] {
        &self.probs
    }
    pub fn epsilon(&self) -> Rational {
        self.epsilon
    }
    pub fn metadata(&self) -> &BTreeMap<String, Vec<f64>> {
        &self.metadata
    }

    /// `T x` for a decision vector `x`.
    pub fn tech_product(&self, x: &[f64]) -> Vec<f64> {
        (0..self.m)
            .map(|k| self.tech_row(k).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Total probability of scenarios `i` where `v < xi^i` in some row.
    pub fn chance_violation(&self, v: &[f64]) -> Result<Rational, DimensionError> {
        if v.len() != self.m {
            return Err(DimensionError {
                expected: self.m,
                found: v.len(),
            });
        }
        Ok((0..self.n)
            .filter(|&i| {
                self.scenario(i)
                    .iter()
                    .zip(v)
                    .any(|(&xi, &vk)| vk < xi - tol::FEAS)
            })
            .map(|i| self.probs[i])
            .sum())
    }

    /// Checks every constraint of the mixed-integer model at a candidate.
    pub fn check_feasible(&self, cand: &CandidateSolution) -> Feasibility {
        let mut violations = Vec::new();
        if cand.x.len() != self.d || cand.v.len() != self.m || cand.z.len() != self.n {
            violations.push(Violation::Dimension);
            return Feasibility { violations };
        }
        let t = tol::FEAS;
        for j in 0..self.d {
            if cand.x[j] < self.lower[j] - t || cand.x[j] > self.upper[j] + t {
                violations.push(Violation::Bound { var: j });
            }
        }
        for (r, c) in self.constraints.iter().enumerate() {
            let act: f64 = c.coeffs.iter().zip(&cand.x).map(|(a, b)| a * b).sum();
            if !c.sense.holds(act, c.rhs, t) {
                violations.push(Violation::Constraint {
                    index: r,
                    activity: act,
                });
            }
        }
        let tx = self.tech_product(&cand.x);
        for k in 0..self.m {
            if (tx[k] - cand.v[k]).abs() > t {
                violations.push(Violation::Link { row: k });
            }
            if cand.v[k] < -t {
                violations.push(Violation::Negative { row: k });
            }
        }
        for i in 0..self.n {
            if cand.z[i] {
                continue;
            }
            for (k, &xi) in self.scenario(i).iter().enumerate() {
                if cand.v[k] < xi - t {
                    violations.push(Violation::Scenario { scenario: i, row: k });
                }
            }
        }
        let used: Rational = (0..self.n)
            .filter(|&i| cand.z[i])
            .map(|i| self.probs[i])
            .sum();
        if used > self.epsilon {
            violations.push(Violation::Budget { used });
        }
        Feasibility { violations }
    }

    /// Objective value `c x`.
    pub fn objective(&self, x: &[f64]) -> f64 {
        self.cost.iter().zip(x).map(|(a, b)| a * b).sum()
    }
}

/// A point `(x, v, z)` of the mixed-integer model.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSolution {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub z: Vec<bool>,
    pub objective: f64,
}

impl CandidateSolution {
    /// Builds a candidate from `x` and the violated-scenario indicator `z`, with `v = T x`.
    pub fn from_x(inst: &CcpInstance, x: Vec<f64>, z: Vec<bool>) -> Self {
        let v = inst.tech_product(&x);
        let objective = inst.objective(&x);
        CandidateSolution { x, v, z, objective }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Dimension,
    Bound { var: usize },
    Constraint { index: usize, activity: f64 },
    Link { row: usize },
    Negative { row: usize },
    Scenario { scenario: usize, row: usize },
    Budget { used: Rational },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Feasibility {
    pub violations: Vec<Violation>,
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Fixing state of one scenario indicator at a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Fixing {
    Free,
    Zero,
    One,
}

/// Returned when a fixing contradicts an existing one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("scenario {0} is already fixed to the opposite value")]
pub struct FixingConflict(pub usize);

/// One node of the search tree.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeState {
    pub id: usize,
    pub parent: Option<usize>,
    pub depth: usize,
    /// Indices branched to zero on the path from the root.
    pub branched_zero: Vec<usize>,
    /// Indices branched to one on the path from the root.
    pub branched_one: Vec<usize>,
    /// Current fixing of every indicator (branching plus propagation).
    pub fixing: Vec<Fixing>,
    /// Local lower bounds on `v`.
    pub local_lower: Vec<f64>,
    /// Lower bound on the objective over this node.
    pub dual_bound: f64,
    pub basis_hint: Option<Basis>,
    /// Set when branching produced contradicting fixings.
    pub conflict: bool,
    /// Branching decision that created this node: (variable, to_one, LP value in parent).
    pub branch: Option<(usize, bool, f64)>,
}

impl NodeState {
    pub fn root(n: usize, m: usize) -> Self {
        NodeState {
            id: 0,
            parent: None,
            depth: 0,
            branched_zero: Vec::new(),
            branched_one: Vec::new(),
            fixing: vec![Fixing::Free; n],
            local_lower: vec![0.0; m],
            dual_bound: f64::NEG_INFINITY,
            basis_hint: None,
            conflict: false,
            branch: None,
        }
    }

    /// Builds a node directly from fixed sets (used by tests and tools).
    pub fn with_fixings(n: usize, m: usize, zeros: &[usize], ones: &[usize]) -> Result<Self, FixingConflict> {
        let mut node = NodeState::root(n, m);
        for &i in zeros {
            node.fix(i, Fixing::Zero)?;
        }
        for &i in ones {
            node.fix(i, Fixing::One)?;
        }
        Ok(node)
    }

    pub fn fix(&mut self, i: usize, to: Fixing) -> Result<bool, FixingConflict> {
        let cur = self.fixing[i];
        if cur == to {
            return Ok(false);
        }
        if cur != Fixing::Free {
            return Err(FixingConflict(i));
        }
        self.fixing[i] = to;
        Ok(true)
    }

    pub fn zeros(&self) -> impl Iterator<Item = usize> + '_ {
        indices_with(&self.fixing, Fixing::Zero)
    }
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        indices_with(&self.fixing, Fixing::One)
    }
    pub fn free(&self) -> impl Iterator<Item = usize> + '_ {
        indices_with(&self.fixing, Fixing::Free)
    }

    /// Number of fixings not coming from branching decisions.
    pub fn derived_fixings(&self) -> usize {
        let fixed = self.fixing.iter().filter(|f| **f != Fixing::Free).count();
        fixed.saturating_sub(self.branched_zero.len() + self.branched_one.len())
    }
}

pub(crate) fn indices_with(fixing: &[Fixing], what: Fixing) -> impl Iterator<Item = usize> + '_ {
    fixing
        .iter()
        .enumerate()
        .filter(move |(_, f)| **f == what)
        .map(|(i, _)| i)
}
