//! Everything needed to run active-learning simulations: datasets, the pool
//! bookkeeping, the round loop and plot output.

pub mod dataset;
pub mod experiment;
pub mod plot;
pub mod pool;
pub mod synthetic;

pub use dataset::{load_dataset, save_dataset, DatasetFormat};
pub use experiment::{
    acquire_round, run_experiment, run_on, split_holdout, CurveRow, DataSource, Embedding,
    ExperimentConfig, LearningCurve, RoundStep, SeedNotes,
};
pub use plot::{gnuplot_table, summarize, svg_chart, CurvePoint, CurveSummary};
pub use pool::{PoolState, RoundRecord};
pub use synthetic::{generate_synthetic, generate_synthetic_with_means, Synthetic, SyntheticSpec};
