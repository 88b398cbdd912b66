//! Core-set selection for batch active learning.
//!
//! Labeling queries are chosen so that the labeled set covers the pool with
//! the smallest possible radius (the k-Center objective). The crate provides
//!
//! * [`geometry`]: features, l2 distances, incremental nearest-center distances;
//! * [`kcenter`]: farthest-first greedy, exact feasibility with an outlier
//!   budget, and the robust radius search built on both;
//! * [`learner`]: a softmax-regression reference learner;
//! * [`strategies`]: core-set and baseline acquisition functions;
//! * [`theory`]: the covering-radius bound on the core-set loss and the
//!   Lipschitz constants it depends on;
//! * [`harness`]: dataset I/O, synthetic data, the multi-round experiment
//!   driver and plot output.
//!
//! Data-parallel loops run on rayon when the `parallel` feature is enabled
//! (the default); [`Exec`] selects the path at run time.

#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod geometry;
pub mod harness;
pub mod kcenter;
pub mod learner;
mod par;
pub mod strategies;
pub mod theory;

pub use error::{Error, Result};
pub use geometry::{DistanceOracle, FeatureSet, OracleConfig};
pub use kcenter::KCenterSolution;
pub use par::Exec;
