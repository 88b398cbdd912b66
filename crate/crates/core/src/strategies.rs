//! Acquisition functions: which unlabeled points to query next.
//!
//! All indices are pool indices. Every strategy returns exactly `b` distinct
//! unlabeled points and is deterministic for fixed inputs and seed.

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use ndarray::ArrayView2;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::DistanceOracle;
use crate::harness::PoolState;
use crate::kcenter::{k_center_greedy, robust_k_center, RobustOptions, DEFAULT_TIME_LIMIT};
use crate::learner::entropy;
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StrategyId {
    Random,
    Entropy,
    Oracle,
    KMedoids,
    CoresetGreedy,
    CoresetRobust,
}

impl StrategyId {
    pub const ALL: [StrategyId; 6] = [
        StrategyId::Random,
        StrategyId::Entropy,
        StrategyId::Oracle,
        StrategyId::KMedoids,
        StrategyId::CoresetGreedy,
        StrategyId::CoresetRobust,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StrategyId::Random => "random",
            StrategyId::Entropy => "entropy",
            StrategyId::Oracle => "oracle",
            StrategyId::KMedoids => "kmedoids",
            StrategyId::CoresetGreedy => "coreset-greedy",
            StrategyId::CoresetRobust => "coreset-robust",
        }
    }

    /// Whether the strategy reads model probabilities.
    pub fn needs_probabilities(self) -> bool {
        self == StrategyId::Entropy
    }

    /// Whether the strategy reads true-label losses.
    pub fn needs_losses(self) -> bool {
        self == StrategyId::Oracle
    }

    /// Whether the strategy reads pairwise distances.
    pub fn needs_distances(self) -> bool {
        matches!(
            self,
            StrategyId::KMedoids | StrategyId::CoresetGreedy | StrategyId::CoresetRobust
        )
    }
}

impl fmt::Display for StrategyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StrategyId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StrategyId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "unknown strategy `{s}` (expected one of {})",
                    StrategyId::ALL.map(StrategyId::name).join(", ")
                ))
            })
    }
}

/// Inputs a strategy may need beyond the pool itself.
#[derive(Debug, Clone, Copy)]
pub struct StrategyInputs<'a> {
    /// `pool × C` class probabilities.
    pub probabilities: Option<ArrayView2<'a, f64>>,
    /// True-label loss of every pool point.
    pub losses: Option<&'a [f64]>,
    /// Distances over the pool.
    pub oracle: Option<&'a DistanceOracle<'a>>,
    /// Outlier budget for the robust core-set.
    pub max_outliers: usize,
    pub time_limit: Duration,
}

impl Default for StrategyInputs<'_> {
    fn default() -> Self {
        Self {
            probabilities: None,
            losses: None,
            oracle: None,
            max_outliers: 0,
            time_limit: DEFAULT_TIME_LIMIT,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct AcquisitionRequest<'a> {
    pub pool: &'a PoolState,
    pub budget: usize,
    pub seed: u64,
    pub strategy: StrategyId,
    pub inputs: StrategyInputs<'a>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Selection {
    pub indices: Vec<usize>,
    /// Cover radius of labeled plus selected points (core-set strategies).
    pub radius: Option<f64>,
    /// Whether the robust search finished (core-set strategies).
    pub optimal: Option<bool>,
    /// Set when weighted sampling had to draw uniformly because the
    /// remaining weights were all zero.
    pub uniform_fallback: bool,
}

impl Selection {
    fn plain(indices: Vec<usize>) -> Self {
        Self {
            indices,
            ..Self::default()
        }
    }
}

/// Runs the requested strategy.
pub fn acquire(request: &AcquisitionRequest<'_>) -> Result<Selection> {
    let AcquisitionRequest {
        pool,
        budget,
        seed,
        strategy,
        inputs,
    } = *request;
    let missing = |input| Error::MissingStrategyInput {
        strategy: strategy.name(),
        input,
    };
    match strategy {
        StrategyId::Random => select_random(pool, budget, seed).map(Selection::plain),
        StrategyId::Entropy => {
            let p = inputs
                .probabilities
                .ok_or_else(|| missing("class probabilities"))?;
            select_uncertainty(p, pool, budget).map(Selection::plain)
        }
        StrategyId::Oracle => {
            let l = inputs.losses.ok_or_else(|| missing("true-label losses"))?;
            let (indices, uniform_fallback) = select_oracle_uncertainty(l, pool, budget, seed)?;
            Ok(Selection {
                indices,
                uniform_fallback,
                ..Selection::default()
            })
        }
        StrategyId::KMedoids => {
            let o = inputs.oracle.ok_or_else(|| missing("pairwise distances"))?;
            select_kmedoids(o, pool, budget, seed).map(Selection::plain)
        }
        StrategyId::CoresetGreedy | StrategyId::CoresetRobust => {
            let o = inputs.oracle.ok_or_else(|| missing("pairwise distances"))?;
            let mode = if strategy == StrategyId::CoresetGreedy {
                CoresetMode::Greedy
            } else {
                CoresetMode::Robust {
                    max_outliers: inputs.max_outliers,
                    time_limit: inputs.time_limit,
                }
            };
            let mut oracle = o.clone();
            let c = select_coreset(&mut oracle, pool, budget, mode)?;
            Ok(Selection {
                indices: c.indices,
                radius: Some(c.radius),
                optimal: Some(c.optimal),
                uniform_fallback: false,
            })
        }
    }
}

fn check_budget(pool: &PoolState, budget: usize) -> Result<()> {
    let available = pool.unlabeled_count();
    if budget > available {
        return Err(Error::BudgetExceedsPool { budget, available });
    }
    Ok(())
}

fn check_rows(strategy: &'static str, rows: usize, pool: &PoolState) -> Result<()> {
    if rows != pool.len() {
        return Err(Error::InvalidArgument(format!(
            "{strategy}: {rows} rows for a pool of {} points",
            pool.len()
        )));
    }
    Ok(())
}

/// `b` unlabeled points uniformly without replacement, in draw order.
pub fn select_random(pool: &PoolState, budget: usize, seed: u64) -> Result<Vec<usize>> {
    check_budget(pool, budget)?;
    let unlabeled = pool.unlabeled();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(sample(&mut rng, unlabeled.len(), budget)
        .into_iter()
        .map(|k| unlabeled[k])
        .collect())
}

/// The `b` unlabeled points of highest predictive entropy, smallest index on
/// ties.
pub fn select_uncertainty(
    probabilities: ArrayView2<'_, f64>,
    pool: &PoolState,
    budget: usize,
) -> Result<Vec<usize>> {
    check_budget(pool, budget)?;
    check_rows("entropy", probabilities.nrows(), pool)?;
    let mut scored: Vec<(f64, usize)> = pool
        .unlabeled()
        .into_iter()
        .map(|i| {
            let row = probabilities.row(i);
            let h = match row.as_slice() {
                Some(s) => entropy(s),
                None => entropy(&row.to_vec()),
            };
            (h, i)
        })
        .collect();
    if let Some(&(h, i)) = scored.iter().find(|(h, _)| !h.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "non-finite entropy {h} for point {i}"
        )));
    }
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    Ok(scored.into_iter().take(budget).map(|(_, i)| i).collect())
}

/// `b` sequential draws without replacement, each drawing an unlabeled point
/// with probability proportional to its loss among those not yet drawn.
///
/// When every remaining loss is zero the rest of the draws are uniform and
/// the returned flag is set.
pub fn select_oracle_uncertainty(
    losses: &[f64],
    pool: &PoolState,
    budget: usize,
    seed: u64,
) -> Result<(Vec<usize>, bool)> {
    check_budget(pool, budget)?;
    check_rows("oracle", losses.len(), pool)?;
    let unlabeled = pool.unlabeled();
    let mut weights: Vec<f64> = unlabeled.iter().map(|&i| losses[i]).collect();
    if let Some((k, &w)) = weights
        .iter()
        .enumerate()
        .find(|(_, w)| !w.is_finite() || **w < 0.0)
    {
        return Err(Error::InvalidArgument(format!(
            "loss {w} of point {} is not a finite nonnegative weight",
            unlabeled[k]
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = Vec::with_capacity(budget);
    let mut dist = WeightedIndex::new(&weights).ok();
    while picked.len() < budget {
        let Some(d) = dist.as_mut() else { break };
        let k = d.sample(&mut rng);
        picked.push(k);
        weights[k] = 0.0;
        if d.update_weights(&[(k, &0.0)]).is_err() {
            dist = None;
        }
    }
    let fallback = picked.len() < budget;
    if fallback {
        let mut rest: Vec<usize> = (0..unlabeled.len())
            .filter(|k| !picked.contains(k))
            .collect();
        while picked.len() < budget {
            let k = rest.swap_remove(rng.random_range(0..rest.len()));
            picked.push(k);
        }
    }
    Ok((picked.into_iter().map(|k| unlabeled[k]).collect(), fallback))
}

/// Nearest and second-nearest medoid slot and distance for each point.
#[derive(Debug, Clone, Copy)]
struct Assign {
    nearest: usize,
    d1: f64,
    d2: f64,
}

fn assign(
    dist: &(dyn Fn(usize, usize) -> f64 + Sync),
    u: usize,
    medoids: &[usize],
    exec: par::Exec,
) -> Vec<Assign> {
    par::map_range(exec, u, |o| {
        let mut a = Assign {
            nearest: usize::MAX,
            d1: f64::INFINITY,
            d2: f64::INFINITY,
        };
        for (slot, &m) in medoids.iter().enumerate() {
            let d = dist(o, m);
            if d < a.d1 {
                a.d2 = a.d1;
                a.d1 = d;
                a.nearest = slot;
            } else if d < a.d2 {
                a.d2 = d;
            }
        }
        a
    })
}

/// Maximum number of improving swap passes.
pub const KMEDOIDS_MAX_SWAP_PASSES: usize = 10;

/// PAM k-medoids over the unlabeled points with `k = b`: greedy BUILD (exact
/// ties broken by the seed), then up to [`KMEDOIDS_MAX_SWAP_PASSES`] passes
/// that each apply the single best improving medoid swap. Returns the medoids
/// in increasing index order.
pub fn select_kmedoids(
    oracle: &DistanceOracle<'_>,
    pool: &PoolState,
    budget: usize,
    seed: u64,
) -> Result<Vec<usize>> {
    check_budget(pool, budget)?;
    check_rows("kmedoids", oracle.len(), pool)?;
    let points = pool.unlabeled();
    let u = points.len();
    if budget == u {
        return Ok(points);
    }
    if budget == 0 {
        return Ok(Vec::new());
    }
    let local = |a: usize, b: usize| oracle.dist(points[a], points[b]);
    let medoids = kmedoids_local(&local, u, budget, seed, oracle.exec());
    let mut out: Vec<usize> = medoids.into_iter().map(|k| points[k]).collect();
    out.sort_unstable();
    Ok(out)
}

/// Sum of distances from every point to its nearest medoid.
pub fn kmedoids_cost(dist: &dyn Fn(usize, usize) -> f64, u: usize, medoids: &[usize]) -> f64 {
    (0..u)
        .map(|o| {
            medoids
                .iter()
                .map(|&m| dist(o, m))
                .fold(f64::INFINITY, f64::min)
        })
        .sum()
}

fn pick_tied(scores: &[(f64, usize)], rng: &mut ChaCha8Rng) -> usize {
    let best = scores.iter().map(|s| s.0).fold(f64::NEG_INFINITY, f64::max);
    let tied: Vec<usize> = scores.iter().filter(|s| s.0 == best).map(|s| s.1).collect();
    tied[rng.random_range(0..tied.len())]
}

fn kmedoids_local(
    dist: &(dyn Fn(usize, usize) -> f64 + Sync),
    u: usize,
    k: usize,
    seed: u64,
    exec: par::Exec,
) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut is_medoid = vec![false; u];
    let mut nearest = vec![f64::INFINITY; u];

    // BUILD: start from the point with the smallest total distance, then add
    // the point giving the largest cost reduction.
    let scores = par::map_range(exec, u, |i| (-(0..u).map(|j| dist(i, j)).sum::<f64>(), i));
    let first = pick_tied(&scores, &mut rng);
    let mut medoids = vec![first];
    is_medoid[first] = true;
    for (j, d) in nearest.iter_mut().enumerate() {
        *d = dist(j, first);
    }
    while medoids.len() < k {
        let scores: Vec<(f64, usize)> = par::map_range(exec, u, |i| {
            if is_medoid[i] {
                return (f64::NEG_INFINITY, i);
            }
            let gain = (0..u)
                .map(|j| (nearest[j] - dist(i, j)).max(0.0))
                .sum::<f64>();
            (gain, i)
        });
        let next = pick_tied(&scores, &mut rng);
        medoids.push(next);
        is_medoid[next] = true;
        for (j, d) in nearest.iter_mut().enumerate() {
            *d = d.min(dist(j, next));
        }
    }

    // SWAP: for a candidate h replacing the medoid in slot i, point o moves
    // to min(d(o,h), its current nearest) unless i was its nearest, in which
    // case it moves to min(d(o,h), its second nearest).
    for _ in 0..KMEDOIDS_MAX_SWAP_PASSES {
        let a = assign(dist, u, &medoids, exec);
        let best_per_h: Vec<(f64, usize, usize)> = par::map_range(exec, u, |h| {
            if is_medoid[h] {
                return (0.0, usize::MAX, h);
            }
            let mut shared = 0.0;
            let mut slot_delta = vec![0.0f64; medoids.len()];
            for (o, ao) in a.iter().enumerate() {
                let doh = dist(o, h);
                let keep = (doh - ao.d1).min(0.0);
                shared += keep;
                slot_delta[ao.nearest] += doh.min(ao.d2) - ao.d1 - keep;
            }
            let mut best = (0.0, usize::MAX, h);
            for (slot, &extra) in slot_delta.iter().enumerate() {
                let delta = shared + extra;
                if delta < best.0 {
                    best = (delta, slot, h);
                }
            }
            best
        });
        let mut best = (0.0, usize::MAX, usize::MAX);
        for cand in best_per_h {
            if cand.1 != usize::MAX && cand.0 < best.0 {
                best = cand;
            }
        }
        // Ignore improvements that are pure rounding noise.
        let total: f64 = a.iter().map(|x| x.d1).sum();
        if best.1 == usize::MAX || best.0 >= -1e-12 * total.max(1.0) {
            break;
        }
        let (_, slot, h) = best;
        is_medoid[medoids[slot]] = false;
        is_medoid[h] = true;
        medoids[slot] = h;
    }
    medoids
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoresetMode {
    Greedy,
    Robust {
        max_outliers: usize,
        time_limit: Duration,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoresetSelection {
    /// New points only, never the labeled seed.
    pub indices: Vec<usize>,
    /// Cover radius of labeled plus new points (ignoring outliers in robust
    /// mode).
    pub radius: f64,
    pub optimal: bool,
}

/// k-Center selection seeded with the labeled set.
pub fn select_coreset(
    oracle: &mut DistanceOracle<'_>,
    pool: &PoolState,
    budget: usize,
    mode: CoresetMode,
) -> Result<CoresetSelection> {
    check_budget(pool, budget)?;
    check_rows("coreset", oracle.len(), pool)?;
    let s0 = pool.labeled();
    match mode {
        CoresetMode::Greedy => {
            let indices = k_center_greedy(oracle, s0, budget)?;
            Ok(CoresetSelection {
                indices,
                radius: oracle.current_radius(),
                optimal: false,
            })
        }
        CoresetMode::Robust {
            max_outliers,
            time_limit,
        } => {
            let s = robust_k_center(
                oracle,
                s0,
                budget,
                max_outliers,
                &RobustOptions { time_limit },
            )?;
            Ok(CoresetSelection {
                indices: s.new_centers(s0),
                radius: s.radius,
                optimal: s.optimal,
            })
        }
    }
}
