//! The multi-round pool-based simulation.
//!
//! Each seed draws an initial labeled pool uniformly at random, then for
//! every round fits the learner on the labeled points, records metrics on
//! the held-out split, and queries `b` more labels with the configured
//! strategy.

use std::io::Write;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::seq::index::sample;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::dataset::load_dataset;
use super::pool::PoolState;
use super::synthetic::{generate_synthetic, SyntheticSpec};
use crate::error::{Error, Result};
use crate::geometry::{DistanceOracle, FeatureSet, OracleConfig};
use crate::kcenter::DEFAULT_TIME_LIMIT;
use crate::learner::{Hyperparams, LossKind, SoftmaxModel};
use crate::par::{self, Exec};
use crate::strategies::{acquire, AcquisitionRequest, Selection, StrategyId, StrategyInputs};
use crate::theory::coreset_loss;

/// Default outlier fraction of the unlabeled pool.
pub const DEFAULT_XI_FRAC: f64 = 1e-4;
/// Fraction of the dataset (taken from the end of file order) held out for
/// evaluation.
pub const DEFAULT_HOLDOUT_FRAC: f64 = 0.2;

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    File(PathBuf),
    Synthetic(SyntheticSpec),
}

/// Feature space used for distances by the geometric strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Embedding {
    /// The input features as given.
    #[default]
    Raw,
    /// Logits of the model fitted in the current round.
    Logits,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub data: DataSource,
    pub strategy: StrategyId,
    /// Initial labeled pool size `m`.
    pub initial: usize,
    /// Labels acquired per round `b`.
    pub budget: usize,
    pub rounds: usize,
    pub seeds: Vec<u64>,
    /// The robust core-set may leave `floor(xi_frac · |unlabeled|)` points
    /// uncovered.
    pub xi_frac: f64,
    pub hyperparams: Hyperparams,
    pub time_limit: Duration,
    pub holdout_frac: f64,
    pub embedding: Embedding,
    /// Record wall-clock time per round. Off by default so that output is
    /// reproducible byte for byte.
    pub record_timing: bool,
    pub exec: Exec,
}

impl ExperimentConfig {
    pub fn new(data: DataSource, strategy: StrategyId) -> Self {
        Self {
            data,
            strategy,
            initial: 100,
            budget: 100,
            rounds: 5,
            seeds: vec![0, 1, 2, 3, 4],
            xi_frac: DEFAULT_XI_FRAC,
            hyperparams: Hyperparams::default(),
            time_limit: DEFAULT_TIME_LIMIT,
            holdout_frac: DEFAULT_HOLDOUT_FRAC,
            embedding: Embedding::Raw,
            record_timing: false,
            exec: Exec::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.initial == 0 {
            return bad("initial pool size must be at least 1".into());
        }
        if self.budget == 0 {
            return bad("budget must be at least 1".into());
        }
        if self.rounds == 0 {
            return bad("rounds must be at least 1".into());
        }
        if self.seeds.is_empty() {
            return bad("seed list is empty".into());
        }
        let mut seeds = self.seeds.clone();
        seeds.sort_unstable();
        if seeds.windows(2).any(|w| w[0] == w[1]) {
            return bad("seed list has duplicates".into());
        }
        if !(0.0..1.0).contains(&self.xi_frac) {
            return bad(format!(
                "xi fraction must be in [0, 1), got {}",
                self.xi_frac
            ));
        }
        if !(self.holdout_frac > 0.0 && self.holdout_frac < 1.0) {
            return bad(format!(
                "holdout fraction must be in (0, 1), got {}",
                self.holdout_frac
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub seed: u64,
    pub round: usize,
    pub labeled: usize,
    pub accuracy: f64,
    /// Cover radius of the labeled set over the pool.
    pub cover_radius: f64,
    /// Core-set loss of the labeled set (l2 loss on probabilities).
    pub coreset_loss: f64,
    /// Mean l2 loss on the labeled set.
    pub train_loss: f64,
    pub wall_ms: u64,
}

/// Facts about a run that are not part of the results table.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SeedNotes {
    pub seed: u64,
    /// Round at which the pool ran out, if it did.
    pub early_stop: Option<usize>,
    /// Rounds where the robust search timed out and fell back to greedy.
    pub robust_fallbacks: Vec<usize>,
    /// Rounds where oracle sampling fell back to uniform draws.
    pub uniform_fallbacks: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearningCurve {
    pub strategy: StrategyId,
    /// Sorted by `(seed, round)`.
    pub rows: Vec<CurveRow>,
    pub notes: Vec<SeedNotes>,
}

pub const CSV_HEADER: &str =
    "seed,round,labeled,accuracy,cover_radius,coreset_loss,train_loss,wall_ms";

impl LearningCurve {
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(CSV_HEADER.split(','))?;
        for r in &self.rows {
            w.write_record([
                r.seed.to_string(),
                r.round.to_string(),
                r.labeled.to_string(),
                r.accuracy.to_string(),
                r.cover_radius.to_string(),
                r.coreset_loss.to_string(),
                r.train_loss.to_string(),
                r.wall_ms.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)
            .expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("csv output is ascii")
    }

    /// Parses a results table written by [`LearningCurve::write_csv`].
    pub fn read_csv(bytes: &[u8], strategy: StrategyId) -> Result<Self> {
        let mut r = csv::Reader::from_reader(bytes);
        let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
        if header.join(",") != CSV_HEADER {
            return Err(Error::Format(format!(
                "results header must be `{CSV_HEADER}`, found `{}`",
                header.join(",")
            )));
        }
        let mut rows = Vec::new();
        for (k, rec) in r.records().enumerate() {
            let rec = rec?;
            let field = |i: usize| -> &str { rec.get(i).unwrap_or("").trim() };
            let err = |i: usize| {
                Error::Format(format!(
                    "row {k}: bad value `{}` in column {}",
                    field(i),
                    header[i]
                ))
            };
            rows.push(CurveRow {
                seed: field(0).parse().map_err(|_| err(0))?,
                round: field(1).parse().map_err(|_| err(1))?,
                labeled: field(2).parse().map_err(|_| err(2))?,
                accuracy: field(3).parse().map_err(|_| err(3))?,
                cover_radius: field(4).parse().map_err(|_| err(4))?,
                coreset_loss: field(5).parse().map_err(|_| err(5))?,
                train_loss: field(6).parse().map_err(|_| err(6))?,
                wall_ms: field(7).parse().map_err(|_| err(7))?,
            });
        }
        Ok(Self {
            strategy,
            rows,
            notes: Vec::new(),
        })
    }

    /// Rows of one round across seeds.
    pub fn round_rows(&self, round: usize) -> impl Iterator<Item = &CurveRow> {
        self.rows.iter().filter(move |r| r.round == round)
    }
}

/// Pool and held-out split: the last `holdout_frac` of file order is held out.
pub fn split_holdout(features: &FeatureSet, holdout_frac: f64) -> Result<(FeatureSet, FeatureSet)> {
    let n = features.len();
    let test = ((n as f64) * holdout_frac).floor() as usize;
    if test == 0 || test >= n {
        return Err(Error::InvalidArgument(format!(
            "a holdout fraction of {holdout_frac} leaves no pool or no test points out of {n}"
        )));
    }
    let pool: Vec<usize> = (0..n - test).collect();
    let held: Vec<usize> = (n - test..n).collect();
    Ok((features.subset(&pool)?, features.subset(&held)?))
}

pub fn load_source(source: &DataSource) -> Result<FeatureSet> {
    match source {
        DataSource::File(path) => load_dataset(path),
        DataSource::Synthetic(spec) => generate_synthetic(spec),
    }
}

/// Loads the configured data and runs every seed.
pub fn run_experiment(config: &ExperimentConfig) -> Result<LearningCurve> {
    let features = load_source(&config.data)?;
    run_on(&features, config)
}

/// Runs every seed of `config` on an already loaded dataset.
pub fn run_on(features: &FeatureSet, config: &ExperimentConfig) -> Result<LearningCurve> {
    config.validate()?;
    features.require_labels()?;
    let (pool, test) = split_holdout(features, config.holdout_frac)?;
    if config.initial > pool.len() {
        return Err(Error::BudgetExceedsPool {
            budget: config.initial,
            available: pool.len(),
        });
    }
    let oracle_config = OracleConfig {
        exec: config.exec,
        ..OracleConfig::default()
    };
    // Cover radius is always measured in the input space.
    let oracle = DistanceOracle::new(&pool, oracle_config);

    let results = par::map_range(config.exec, config.seeds.len(), |k| {
        run_seed(&pool, &test, &oracle, config, config.seeds[k])
    });
    let mut rows = Vec::new();
    let mut notes = Vec::new();
    for r in results {
        let (seed_rows, seed_notes) = r?;
        rows.extend(seed_rows);
        notes.push(seed_notes);
    }
    rows.sort_by_key(|r| (r.seed, r.round));
    notes.sort_by_key(|n| n.seed);
    Ok(LearningCurve {
        strategy: config.strategy,
        rows,
        notes,
    })
}

fn run_seed(
    pool_features: &FeatureSet,
    test: &FeatureSet,
    oracle: &DistanceOracle<'_>,
    config: &ExperimentConfig,
    seed: u64,
) -> Result<(Vec<CurveRow>, SeedNotes)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let initial = sample(&mut rng, pool_features.len(), config.initial).into_vec();
    let mut pool = PoolState::new(pool_features.len(), &initial)?;
    let hp = Hyperparams {
        seed,
        ..config.hyperparams
    };
    let mut rows = Vec::with_capacity(config.rounds + 1);
    let mut notes = SeedNotes {
        seed,
        ..SeedNotes::default()
    };

    for round in 0..=config.rounds {
        let started = Instant::now();
        let model = SoftmaxModel::fit(pool_features, pool.labeled(), hp)?;
        let accuracy = model.accuracy(test)?;
        let losses = model.point_losses(pool_features, LossKind::L2)?;
        let cover_radius = oracle.cover_radius(pool.labeled())?;
        let coreset = coreset_loss(&losses.values, pool.labeled())?;
        let train_loss = pool
            .labeled()
            .iter()
            .map(|&i| losses.values[i])
            .sum::<f64>()
            / pool.labeled().len() as f64;
        let mut row = CurveRow {
            seed,
            round,
            labeled: pool.labeled().len(),
            accuracy,
            cover_radius,
            coreset_loss: coreset,
            train_loss,
            wall_ms: 0,
        };
        let strategy_seed = rng.next_u64();
        if round == config.rounds {
            if config.record_timing {
                row.wall_ms = started.elapsed().as_millis() as u64;
            }
            rows.push(row);
            break;
        }
        if config.budget > pool.unlabeled_count() {
            notes.early_stop = Some(round);
            if config.record_timing {
                row.wall_ms = started.elapsed().as_millis() as u64;
            }
            rows.push(row);
            break;
        }

        let step = RoundStep {
            strategy: config.strategy,
            budget: config.budget,
            seed: strategy_seed,
            xi_frac: config.xi_frac,
            time_limit: config.time_limit,
            embedding: config.embedding,
        };
        let selection = acquire_round(pool_features, oracle, &pool, Some(&model), &step)?;
        let strategy = config.strategy;
        if selection.optimal == Some(false) && strategy == StrategyId::CoresetRobust {
            notes.robust_fallbacks.push(round);
        }
        if selection.uniform_fallback {
            notes.uniform_fallbacks.push(round);
        }
        pool.label(&selection.indices)?;
        if config.record_timing {
            row.wall_ms = started.elapsed().as_millis() as u64;
        }
        rows.push(row);
    }
    Ok((rows, notes))
}

/// One acquisition with everything a strategy may need derived from `model`.
#[derive(Debug, Clone, Copy)]
pub struct RoundStep {
    pub strategy: StrategyId,
    pub budget: usize,
    pub seed: u64,
    pub xi_frac: f64,
    pub time_limit: Duration,
    pub embedding: Embedding,
}

impl RoundStep {
    /// Whether the step reads anything from a fitted model.
    pub fn needs_model(&self) -> bool {
        self.strategy.needs_probabilities()
            || self.strategy.needs_losses()
            || (self.strategy.needs_distances() && self.embedding == Embedding::Logits)
    }
}

/// Runs one acquisition on the pool. `oracle` must be built over
/// `pool_features`; it is used for raw-space distances. `model` may be
/// omitted when [`RoundStep::needs_model`] is false.
pub fn acquire_round(
    pool_features: &FeatureSet,
    oracle: &DistanceOracle<'_>,
    pool: &PoolState,
    model: Option<&SoftmaxModel>,
    step: &RoundStep,
) -> Result<Selection> {
    let strategy = step.strategy;
    let model = match model {
        Some(m) => m,
        None if step.needs_model() => {
            return Err(Error::MissingStrategyInput {
                strategy: strategy.name(),
                input: "a fitted model",
            })
        }
        None => return acquire_without_model(oracle, pool, step),
    };
    let max_outliers = (step.xi_frac * pool.unlabeled_count() as f64).floor() as usize;
    let probabilities = strategy
        .needs_probabilities()
        .then(|| model.predict_proba(pool_features))
        .transpose()?;
    let ce = strategy
        .needs_losses()
        .then(|| model.point_losses(pool_features, LossKind::CrossEntropy))
        .transpose()?;
    let embedded = (strategy.needs_distances() && step.embedding == Embedding::Logits)
        .then(|| model.logit_embedding(pool_features))
        .transpose()?;
    let embedded_oracle = embedded.as_ref().map(|f| {
        DistanceOracle::new(
            f,
            OracleConfig {
                exec: oracle.exec(),
                ..OracleConfig::default()
            },
        )
    });
    acquire(&AcquisitionRequest {
        pool,
        budget: step.budget,
        seed: step.seed,
        strategy,
        inputs: StrategyInputs {
            probabilities: probabilities.as_ref().map(|p| p.view()),
            losses: ce.as_ref().map(|l| l.values.as_slice()),
            oracle: Some(embedded_oracle.as_ref().unwrap_or(oracle)),
            max_outliers,
            time_limit: step.time_limit,
        },
    })
}

fn acquire_without_model(
    oracle: &DistanceOracle<'_>,
    pool: &PoolState,
    step: &RoundStep,
) -> Result<Selection> {
    acquire(&AcquisitionRequest {
        pool,
        budget: step.budget,
        seed: step.seed,
        strategy: step.strategy,
        inputs: StrategyInputs {
            oracle: Some(oracle),
            max_outliers: (step.xi_frac * pool.unlabeled_count() as f64).floor() as usize,
            time_limit: step.time_limit,
            ..StrategyInputs::default()
        },
    })
}
