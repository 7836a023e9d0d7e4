//! Branch-and-cut for chance-constrained programs with a random right-hand side.
//!
//! The crate is `no_std` and only needs `alloc`. Instance files, generators and
//! the command line live in the `ccp` companion crate.

#![no_std]

extern crate alloc;

pub mod cuts;
pub mod engine;
pub mod fixtures;
pub mod lp;
pub mod model;
pub mod oracle;
pub mod preprocess;
pub mod propagate;
pub mod rational;

pub use engine::{solve, solve_with, SolveReport, SolveStatus, SolverConfig};
pub use model::{CandidateSolution, CcpInstance, Fixing, InstanceData, NodeState, Sense};
pub use rational::Rational;

/// Numerical tolerances shared by all modules.
pub mod tol {
    /// Feasibility tolerance for constraint checks and strict scenario comparisons.
    pub const FEAS: f64 = 1e-6;
    /// Reduced-cost tolerance.
    pub const OPT: f64 = 1e-7;
    /// Integrality tolerance.
    pub const INT: f64 = 1e-6;
    /// Bound pruning slack: a node is pruned when its bound is at least `incumbent - PRUNE`.
    pub const PRUNE: f64 = 1e-9;

    /// `a <= b` up to `FEAS`.
    #[inline]
    pub fn leq(a: f64, b: f64) -> bool {
        a <= b + FEAS
    }

    /// `a < b` by more than `FEAS`; the exact complement of `leq(b, a)`.
    #[inline]
    pub fn lt(a: f64, b: f64) -> bool {
        a < b - FEAS
    }
}
