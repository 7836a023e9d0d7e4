//! Linear programming: an editable model and a bounded revised simplex solver.
//!
//! Rows are `coeffs . x (sense) rhs`; every variable has a (possibly infinite)
//! lower and upper bound. The model records bound changes and row additions in
//! an edit log so callers can take a checkpoint and revert to it later.

mod simplex;

use alloc::vec::Vec;
use core::sync::atomic::{AtomicUsize, Ordering};

pub use simplex::LpSolver;

use crate::model::Sense;

#[derive(Debug, Clone, PartialEq)]
pub struct LpRow {
    /// Sparse coefficients `(column, value)`.
    pub coeffs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Edit {
    Bounds { var: usize, lower: f64, upper: f64 },
    Row,
}

/// Position in the edit log returned by [`LpModel::checkpoint`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Mark(usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum LpError {
    #[error("checkpoint does not belong to the current edit history")]
    InvalidMark,
    #[error("column index {0} out of range")]
    BadColumn(usize),
    #[error("simplex failed numerically")]
    Numerical,
}

static NEXT_MODEL_ID: AtomicUsize = AtomicUsize::new(1);

/// An LP `min obj . x` over rows and column bounds.
#[derive(Debug, Clone)]
pub struct LpModel {
    obj: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    rows: Vec<LpRow>,
    log: Vec<Edit>,
    id: usize,
    // bumped whenever the constraint matrix changes
    version: u64,
}

impl PartialEq for LpModel {
    /// Bitwise comparison of objective, bounds and rows (the edit log is ignored).
    fn eq(&self, other: &Self) -> bool {
        fn bits(a: &[f64], b: &[f64]) -> bool {
            a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
        }
        bits(&self.obj, &other.obj)
            && bits(&self.lower, &other.lower)
            && bits(&self.upper, &other.upper)
            && self.rows.len() == other.rows.len()
            && self.rows.iter().zip(&other.rows).all(|(r, s)| {
                r.sense == s.sense
                    && r.rhs.to_bits() == s.rhs.to_bits()
                    && r.coeffs.len() == s.coeffs.len()
                    && r.coeffs
                        .iter()
                        .zip(&s.coeffs)
                        .all(|(a, b)| a.0 == b.0 && a.1.to_bits() == b.1.to_bits())
            })
    }
}

impl Default for LpModel {
    fn default() -> Self {
        Self::new()
    }
}

impl LpModel {
    pub fn new() -> Self {
        LpModel {
            obj: Vec::new(),
            lower: Vec::new(),
            upper: Vec::new(),
            rows: Vec::new(),
            log: Vec::new(),
            id: NEXT_MODEL_ID.fetch_add(1, Ordering::Relaxed),
            version: 0,
        }
    }

    /// Adds a column and returns its index. Not recorded in the edit log.
    pub fn add_var(&mut self, lower: f64, upper: f64, obj: f64) -> usize {
        self.obj.push(obj);
        self.lower.push(lower);
        self.upper.push(upper);
        self.version += 1;
        self.obj.len() - 1
    }

    pub fn num_vars(&self) -> usize {
        self.obj.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.obj
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn rows(&self) -> &[LpRow] {
        &self.rows
    }

    pub fn add_row(&mut self, row: LpRow) -> Result<usize, LpError> {
        if let Some(&(j, _)) = row.coeffs.iter().find(|(j, _)| *j >= self.obj.len()) {
            return Err(LpError::BadColumn(j));
        }
        self.rows.push(row);
        self.log.push(Edit::Row);
        self.version += 1;
        Ok(self.rows.len() - 1)
    }

    pub fn change_bounds(&mut self, var: usize, lower: f64, upper: f64) -> Result<(), LpError> {
        if var >= self.obj.len() {
            return Err(LpError::BadColumn(var));
        }
        let (ol, ou) = (self.lower[var], self.upper[var]);
        if ol.to_bits() == lower.to_bits() && ou.to_bits() == upper.to_bits() {
            return Ok(());
        }
        self.log.push(Edit::Bounds {
            var,
            lower: ol,
            upper: ou,
        });
        self.lower[var] = lower;
        self.upper[var] = upper;
        Ok(())
    }

    pub fn checkpoint(&self) -> Mark {
        Mark(self.log.len())
    }

    /// Undoes every edit made after `mark`.
    pub fn revert(&mut self, mark: Mark) -> Result<(), LpError> {
        if mark.0 > self.log.len() {
            return Err(LpError::InvalidMark);
        }
        while self.log.len() > mark.0 {
            match self.log.pop().expect("log is longer than mark") {
                Edit::Bounds { var, lower, upper } => {
                    self.lower[var] = lower;
                    self.upper[var] = upper;
                }
                Edit::Row => {
                    self.rows.pop();
                    self.version += 1;
                }
            }
        }
        Ok(())
    }

    pub(crate) fn identity(&self) -> (usize, u64) {
        (self.id, self.version)
    }
}

/// Status of a column in a simplex basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarStatus {
    Basic,
    AtLower,
    AtUpper,
    Free,
}

/// Opaque warm-start token: status of every structural and slack column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Basis {
    pub(crate) num_structural: usize,
    pub(crate) status: Vec<VarStatus>,
}

impl Basis {
    pub fn num_structural(&self) -> usize {
        self.num_structural
    }

    pub fn num_rows(&self) -> usize {
        self.status.len() - self.num_structural
    }

    pub fn status(&self) -> &[VarStatus] {
        &self.status
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpResult {
    pub status: LpStatus,
    pub objective: f64,
    /// Values of the structural columns.
    pub primal: Vec<f64>,
    /// Row activities `coeffs . x`.
    pub activity: Vec<f64>,
    /// Row duals; nonnegative on binding `>=` rows, nonpositive on binding `<=` rows.
    pub duals: Vec<f64>,
    /// `obj_j - duals . A_j` for every structural column.
    pub reduced_costs: Vec<f64>,
    pub basis: Basis,
    pub iterations: usize,
}

/// One-shot solve with a fresh solver.
pub fn solve(model: &LpModel, warm: Option<&Basis>) -> Result<LpResult, LpError> {
    LpSolver::new().solve(model, warm)
}
