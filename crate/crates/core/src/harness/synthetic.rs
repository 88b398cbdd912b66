use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::geometry::FeatureSet;

/// Isotropic Gaussian mixture with one component per class.
///
/// Class means are drawn from `N(0, I_d)`; each point is its class mean plus
/// `spread · N(0, I_d)` noise. Rows are shuffled so that file order carries
/// no class information.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub num_classes: usize,
    pub per_class: usize,
    pub dim: usize,
    pub spread: f64,
    pub seed: u64,
}

/// Generated points together with the class means they were drawn around.
#[derive(Debug, Clone)]
pub struct Synthetic {
    pub features: FeatureSet,
    pub means: Vec<Vec<f64>>,
}

pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<FeatureSet> {
    generate_synthetic_with_means(spec).map(|s| s.features)
}

pub fn generate_synthetic_with_means(spec: &SyntheticSpec) -> Result<Synthetic> {
    if spec.num_classes == 0 || spec.per_class == 0 || spec.dim == 0 {
        return Err(Error::InvalidArgument(
            "class count, per-class count and dimension must be positive".into(),
        ));
    }
    if !(spec.spread >= 0.0 && spec.spread.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "spread must be finite and nonnegative, got {}",
            spec.spread
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let means: Vec<Vec<f64>> = (0..spec.num_classes)
        .map(|_| (0..spec.dim).map(|_| rng.sample(StandardNormal)).collect())
        .collect();
    let n = spec.num_classes * spec.per_class;
    let mut rows: Vec<(Vec<f32>, u32)> = Vec::with_capacity(n);
    for (c, mean) in means.iter().enumerate() {
        for _ in 0..spec.per_class {
            let row = mean
                .iter()
                .map(|&m| {
                    let z: f64 = rng.sample(StandardNormal);
                    (m + spec.spread * z) as f32
                })
                .collect();
            rows.push((row, c as u32));
        }
    }
    rows.shuffle(&mut rng);
    let labels = rows.iter().map(|(_, y)| *y).collect();
    let points = rows.into_iter().flat_map(|(r, _)| r).collect();
    let features = FeatureSet::new(points, spec.dim, Some(labels), spec.num_classes)?;
    Ok(Synthetic { features, means })
}
