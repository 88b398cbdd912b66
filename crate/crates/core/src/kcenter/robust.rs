use std::time::{Duration, Instant};

use super::feasibility::{
    feasible_with_stats, Feasibility, FeasibilityOptions, FeasibilityProblem, Witness,
};
use super::greedy::greedy_solution;
use super::{KCenterSolution, DEFAULT_TIME_LIMIT};
use crate::error::Result;
use crate::geometry::DistanceOracle;

#[derive(Debug, Clone, Copy)]
pub struct RobustOptions {
    /// Wall-clock limit for each feasibility probe.
    pub time_limit: Duration,
}

impl Default for RobustOptions {
    fn default() -> Self {
        Self {
            time_limit: DEFAULT_TIME_LIMIT,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeOutcome {
    Feasible,
    Infeasible,
    TimedOut,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Probe {
    pub delta: f64,
    pub outcome: ProbeOutcome,
    pub elapsed: Duration,
    /// Branch-and-bound nodes visited.
    pub nodes: u64,
}

/// What the binary search did.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RobustTrace {
    /// Radius of the farthest-first solution used as the initial upper bound.
    pub greedy_radius: f64,
    pub probes: Vec<Probe>,
    /// Set when the initial lower bound `greedy_radius / 2` had to be
    /// dropped because the outlier budget allowed a smaller radius.
    pub lower_bound_reset: bool,
}

/// Robust k-Center: greedy initialization, then binary search on the radius
/// with exact feasibility probes, snapping both ends to realized pairwise
/// distances.
///
/// Any probe that hits the time limit ends the search and the greedy
/// solution is returned with `optimal = false`.
pub fn robust_k_center(
    oracle: &mut DistanceOracle<'_>,
    s0: &[usize],
    budget: usize,
    max_outliers: usize,
    options: &RobustOptions,
) -> Result<KCenterSolution> {
    robust_k_center_traced(oracle, s0, budget, max_outliers, options).map(|(s, _)| s)
}

pub fn robust_k_center_traced(
    oracle: &mut DistanceOracle<'_>,
    s0: &[usize],
    budget: usize,
    max_outliers: usize,
    options: &RobustOptions,
) -> Result<(KCenterSolution, RobustTrace)> {
    let greedy = greedy_solution(oracle, s0, budget)?;
    let mut trace = RobustTrace {
        greedy_radius: greedy.radius,
        ..Default::default()
    };
    if greedy.radius == 0.0 {
        return Ok((
            KCenterSolution {
                optimal: true,
                ..greedy
            },
            trace,
        ));
    }

    let probe = |delta: f64, hint: &[usize], trace: &mut RobustTrace| -> Result<Feasibility> {
        let problem = FeasibilityProblem {
            budget,
            fixed: s0.to_vec(),
            delta,
            max_outliers,
        };
        let opts = FeasibilityOptions {
            time_limit: options.time_limit,
            hint: hint.to_vec(),
        };
        let started = Instant::now();
        let (outcome, stats) = feasible_with_stats(oracle, &problem, &opts)?;
        trace.probes.push(Probe {
            delta,
            elapsed: started.elapsed(),
            nodes: stats.nodes,
            outcome: match outcome {
                Feasibility::Feasible(_) => ProbeOutcome::Feasible,
                Feasibility::Infeasible => ProbeOutcome::Infeasible,
                Feasibility::TimedOut => ProbeOutcome::TimedOut,
            },
        });
        Ok(outcome)
    };

    let greedy_hint = greedy.new_centers(s0);
    let mut ub = greedy.radius;
    let mut best: Option<Witness> = None;
    let mut lb = greedy.radius / 2.0;

    if max_outliers > 0 {
        // Half the greedy radius bounds the optimum only when every point
        // must be covered; check whether outliers allow going below it.
        let below = oracle.largest_distance_at_most(lb);
        let below = if below == lb {
            oracle.largest_distance_at_most(f64::from_bits(lb.to_bits() - 1))
        } else {
            below
        };
        match probe(below, &greedy_hint, &mut trace)? {
            Feasibility::Feasible(w) => {
                ub = below;
                lb = 0.0;
                best = Some(w);
                trace.lower_bound_reset = true;
            }
            Feasibility::Infeasible => {}
            Feasibility::TimedOut => return Ok((greedy, trace)),
        }
    }

    while lb < ub {
        let mid = (lb + ub) / 2.0;
        let hint = best
            .as_ref()
            .map(|w| {
                w.centers
                    .iter()
                    .copied()
                    .filter(|c| !s0.contains(c))
                    .collect()
            })
            .unwrap_or_else(|| greedy_hint.clone());
        match probe(mid, &hint, &mut trace)? {
            Feasibility::Feasible(w) => {
                ub = oracle.largest_distance_at_most(mid);
                best = Some(w);
            }
            Feasibility::Infeasible => {
                lb = oracle
                    .smallest_distance_at_least(mid)
                    .expect("the upper bound is a realized distance above the midpoint");
            }
            Feasibility::TimedOut => return Ok((greedy, trace)),
        }
    }

    let solution = match best {
        Some(w) => {
            let outliers = w
                .outliers
                .iter()
                .copied()
                .filter(|&i| {
                    let c = w.assignment[i];
                    oracle.dist(i, c) > ub
                })
                .collect();
            KCenterSolution {
                centers: w.centers,
                outliers,
                radius: ub,
                optimal: true,
            }
        }
        None => KCenterSolution {
            optimal: true,
            ..greedy
        },
    };
    Ok((solution, trace))
}
