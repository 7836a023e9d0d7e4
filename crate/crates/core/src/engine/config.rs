use crate::model::CandidateSolution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branching {
    /// One indicator per branch.
    Classic,
    /// Fix every scenario dominated by (zero side) or dominating (one side) the branching scenario.
    Dominance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Propagation {
    Off,
    Approx,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cuts {
    Off,
    Mixing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeSelect {
    BestBound,
    /// Depth first, zero child before one child.
    Dfs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BranchRule {
    MostInfeasible,
    Pseudocost,
}

/// Which big-M rows the node LPs use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Formulation {
    /// `v_k + xi^i_k z_i >= xi^i_k`, `v >= 0`.
    Raw,
    /// Coefficients tightened with the quantile bounds, redundant rows dropped.
    Strengthened,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub branching: Branching,
    pub propagation: Propagation,
    pub cuts: Cuts,
    pub node_select: NodeSelect,
    pub branch_rule: BranchRule,
    pub formulation: Formulation,
    /// Seconds; needs a clock in the hooks.
    pub time_limit: Option<f64>,
    pub node_limit: Option<usize>,
    /// Stop once the relative gap drops to this value (0 = prove optimality).
    pub gap_limit: f64,
    /// Breaks ties in the rounding heuristic.
    pub rng_seed: u64,
    pub reduced_cost_fixing: bool,
    /// Run the rounding heuristic every this many nodes (0 = never).
    pub heuristic_frequency: usize,
    /// Use the propagation bounds on `v` as local LP bounds.
    pub tighten_bounds: bool,
    pub root_cut_rounds: usize,
    pub node_cut_rounds: usize,
    /// Defaults to twice the number of chance rows.
    pub max_cuts_per_round: Option<usize>,
    pub initial_incumbent: Option<CandidateSolution>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            branching: Branching::Dominance,
            propagation: Propagation::Approx,
            cuts: Cuts::Off,
            node_select: NodeSelect::BestBound,
            branch_rule: BranchRule::MostInfeasible,
            formulation: Formulation::Strengthened,
            time_limit: None,
            node_limit: None,
            gap_limit: 0.0,
            rng_seed: 0,
            reduced_cost_fixing: true,
            heuristic_frequency: 1,
            tighten_bounds: true,
            root_cut_rounds: 10,
            node_cut_rounds: 2,
            max_cuts_per_round: None,
            initial_incumbent: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("time limit must be positive and finite")]
    TimeLimit,
    #[error("node limit must be positive")]
    NodeLimit,
    #[error("gap limit must be nonnegative and finite")]
    GapLimit,
    #[error("cut limit must be positive")]
    CutLimit,
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if let Some(t) = self.time_limit {
            if !(t > 0.0 && t.is_finite()) {
                return Err(ConfigError::TimeLimit);
            }
        }
        if self.node_limit == Some(0) {
            return Err(ConfigError::NodeLimit);
        }
        if !(self.gap_limit >= 0.0 && self.gap_limit.is_finite()) {
            return Err(ConfigError::GapLimit);
        }
        if self.max_cuts_per_round == Some(0) {
            return Err(ConfigError::CutLimit);
        }
        Ok(())
    }

    /// Settings that reproduce the small hand-drawn search trees: raw big-M
    /// rows, depth first with the zero child first, most-infeasible branching,
    /// no cuts, no heuristic, no reduced-cost fixing, and a known optimal
    /// solution supplied up front.
    pub fn replay(branching: Branching, propagation: Propagation, incumbent: CandidateSolution) -> Self {
        SolverConfig {
            branching,
            propagation,
            cuts: Cuts::Off,
            node_select: NodeSelect::Dfs,
            branch_rule: BranchRule::MostInfeasible,
            formulation: Formulation::Raw,
            reduced_cost_fixing: false,
            heuristic_frequency: 0,
            tighten_bounds: true,
            initial_incumbent: Some(incumbent),
            ..SolverConfig::default()
        }
    }

    /// Presets of the three replay trees: 1 classic, 2 dominance, 3 dominance with approximate fixing.
    pub fn replay_figure(figure: u8, incumbent: CandidateSolution) -> Option<Self> {
        let (b, p) = match figure {
            1 => (Branching::Classic, Propagation::Off),
            2 => (Branching::Dominance, Propagation::Off),
            3 => (Branching::Dominance, Propagation::Approx),
            _ => return None,
        };
        Some(Self::replay(b, p, incumbent))
    }
}
