//! k-Center selection: farthest-first greedy, a feasibility solver for the
//! k-Center problem with an outlier budget, and the robust binary search
//! that combines them.

mod feasibility;
mod greedy;
mod robust;

pub use feasibility::{
    feasible, feasible_with_stats, Feasibility, FeasibilityOptions, FeasibilityProblem,
    SearchStats, Witness,
};
pub use greedy::{greedy_solution, k_center_greedy};
pub use robust::{
    robust_k_center, robust_k_center_traced, Probe, ProbeOutcome, RobustOptions, RobustTrace,
};

use std::time::Duration;

/// Default wall-clock limit for a single feasibility probe.
pub const DEFAULT_TIME_LIMIT: Duration = Duration::from_secs(30);

/// Selected centers (fixed seeds included), the points left uncovered, and
/// the covering radius achieved for everything else.
#[derive(Debug, Clone, PartialEq)]
pub struct KCenterSolution {
    pub centers: Vec<usize>,
    pub outliers: Vec<usize>,
    pub radius: f64,
    /// True only when the robust search ran to completion.
    pub optimal: bool,
}

impl KCenterSolution {
    /// Centers that are not in `s0`.
    pub fn new_centers(&self, s0: &[usize]) -> Vec<usize> {
        self.centers
            .iter()
            .copied()
            .filter(|c| !s0.contains(c))
            .collect()
    }
}
