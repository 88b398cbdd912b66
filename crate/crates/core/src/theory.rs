//! Closed-form pieces of the covering-radius bound on the core-set loss.
//!
//! With a labeled set `s` that is a `δ` cover of the pool, zero training loss
//! on `s`, a `λ^l`-Lipschitz loss bounded by `L` and `λ^η`-Lipschitz class
//! regression functions, the core-set loss is at most
//!
//! ```text
//! δ (λ^l + λ^η L C) + √(L² ln(1/γ) / (2n))
//! ```
//!
//! with probability at least `1 − γ`.

use rand::seq::index::sample;
use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::DistanceOracle;

/// Supremum of [`softmax_jacobian_frobenius`] over the simplex for every
/// `C ≥ 2`, attained at `(1/2, 1/2, 0, …)`. With `s₂ = Σ p²` and `s₃ = Σ p³`
/// the squared norm is `s₂ − 2 s₃ + s₂²`, and `s₃ ≥ s₂²` bounds it by
/// `s₂ − s₂² ≤ 1/4`.
pub const SOFTMAX_JACOBIAN_SUP: f64 = 0.5;

/// Tolerance on `Σ p = 1` for probability inputs.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// Frobenius norm of the softmax Jacobian `diag(p) − p pᵀ` at `p`.
pub fn softmax_jacobian_frobenius(p: &[f64]) -> Result<f64> {
    if p.iter().any(|&v| !v.is_finite() || v < 0.0) {
        return Err(Error::InvalidArgument(
            "probabilities must be finite and nonnegative".into(),
        ));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::NotNormalized { sum });
    }
    let sq: f64 = p.iter().map(|v| v * v).sum();
    let mut total = 0.0;
    for &f in p {
        // Off-diagonal entries of row i: f_i² Σ_{j≠i} f_j².
        total += f * f * (sq - f * f);
        total += f * f * (1.0 - f) * (1.0 - f);
    }
    Ok(total.max(0.0).sqrt())
}

/// `√(C−1)/C`, the value of [`softmax_jacobian_frobenius`] at the uniform
/// distribution, used as the softmax Lipschitz constant.
///
/// This is the true maximum over the simplex only for `C = 2`. For larger
/// `C` the norm exceeds it away from the uniform point and reaches
/// [`SOFTMAX_JACOBIAN_SUP`] on two-point distributions.
pub fn softmax_lipschitz_max(num_classes: usize) -> Result<f64> {
    if num_classes < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 classes, got {num_classes}"
        )));
    }
    let c = num_classes as f64;
    Ok((c - 1.0).sqrt() / c)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipschitzSpec {
    /// Largest per-neuron sum of absolute incoming weights.
    pub alpha: f64,
    pub conv_layers: u32,
    pub fc_layers: u32,
    pub num_classes: usize,
}

/// Lipschitz constant `(√(C−1)/C) · α^(n_c + n_fc)` of a CNN with ReLU
/// activations followed by a softmax, with respect to the l2 norm of the
/// class probabilities.
pub fn cnn_lipschitz_constant(spec: &LipschitzSpec) -> Result<f64> {
    if !spec.alpha.is_finite() || spec.alpha < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "alpha must be finite and nonnegative, got {}",
            spec.alpha
        )));
    }
    let depth = spec.conv_layers as i32 + spec.fc_layers as i32;
    Ok(softmax_lipschitz_max(spec.num_classes)? * spec.alpha.powi(depth))
}

/// Largest sum of absolute incoming weights over all neurons of all layers.
///
/// Each layer is given row-major as `(weights, inputs)`: a neuron's incoming
/// weights form one row of length `inputs`.
pub fn alpha_from_weights(layers: &[(&[f64], usize)]) -> Result<f64> {
    if layers.is_empty() {
        return Err(Error::InvalidArgument("no layers given".into()));
    }
    let mut alpha = 0.0f64;
    for (k, &(w, inputs)) in layers.iter().enumerate() {
        if inputs == 0 || w.len() % inputs != 0 {
            return Err(Error::InvalidArgument(format!(
                "layer {k}: {} weights do not form rows of {inputs} inputs",
                w.len()
            )));
        }
        for row in w.chunks(inputs) {
            alpha = alpha.max(row.iter().map(|v| v.abs()).sum());
        }
    }
    Ok(alpha)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundInputs {
    pub delta: f64,
    pub lambda_l: f64,
    pub lambda_eta: f64,
    pub loss_bound: f64,
    pub num_classes: usize,
    pub n: usize,
    pub gamma: f64,
}

/// The bound split into its covering and sampling terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bound {
    /// `δ (λ^l + λ^η L C)`.
    pub cover_term: f64,
    /// `√(L² ln(1/γ) / (2n))`.
    pub hoeffding_term: f64,
}

impl Bound {
    pub fn total(&self) -> f64 {
        self.cover_term + self.hoeffding_term
    }
}

pub fn covering_bound(inputs: &BoundInputs) -> Result<Bound> {
    let BoundInputs {
        delta,
        lambda_l,
        lambda_eta,
        loss_bound,
        num_classes,
        n,
        gamma,
    } = *inputs;
    if gamma.is_nan() || gamma <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "gamma must be positive, got {gamma}"
        )));
    }
    if gamma > 1.0 {
        return Err(Error::InvalidArgument(format!(
            "gamma must be at most 1, got {gamma}"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    for (name, v) in [
        ("delta", delta),
        ("lambda_l", lambda_l),
        ("lambda_eta", lambda_eta),
        ("loss_bound", loss_bound),
    ] {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "{name} must be finite and nonnegative, got {v}"
            )));
        }
    }
    let c = num_classes as f64;
    Ok(Bound {
        cover_term: delta * (lambda_l + lambda_eta * loss_bound * c),
        hoeffding_term: (loss_bound * loss_bound * (1.0 / gamma).ln() / (2.0 * n as f64)).sqrt(),
    })
}

/// `|mean over all points − mean over s|`.
pub fn coreset_loss(losses: &[f64], s: &[usize]) -> Result<f64> {
    if s.is_empty() {
        return Err(Error::EmptyLabeledSet);
    }
    if let Some(&bad) = s.iter().find(|&&i| i >= losses.len()) {
        return Err(Error::IndexOutOfRange {
            index: bad,
            len: losses.len(),
        });
    }
    let all = losses.iter().sum::<f64>() / losses.len() as f64;
    let sub = s.iter().map(|&i| losses[i]).sum::<f64>() / s.len() as f64;
    Ok((all - sub).abs())
}

/// Empirical lower estimate of the loss Lipschitz constant: the largest
/// `|l_i − l_j| / ‖x_i − x_j‖` over up to `pairs` random same-label pairs at
/// positive distance. Returns 0 when no such pair is drawn.
pub fn estimate_loss_lipschitz<R: Rng>(
    oracle: &DistanceOracle<'_>,
    losses: &[f64],
    pairs: usize,
    rng: &mut R,
) -> Result<f64> {
    let features = oracle.features();
    let labels = features.require_labels()?;
    let n = features.len();
    if losses.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: losses.len(),
        });
    }
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); features.num_classes()];
    for (i, &y) in labels.iter().enumerate() {
        by_class[y as usize].push(i);
    }
    let usable: Vec<&Vec<usize>> = by_class.iter().filter(|c| c.len() >= 2).collect();
    if usable.is_empty() {
        return Ok(0.0);
    }
    let mut best = 0.0f64;
    for _ in 0..pairs {
        let class = usable[rng.random_range(0..usable.len())];
        let pick = sample(rng, class.len(), 2);
        let (i, j) = (class[pick.index(0)], class[pick.index(1)]);
        let d = oracle.dist(i, j);
        if d > 0.0 {
            best = best.max((losses[i] - losses[j]).abs() / d);
        }
    }
    Ok(best)
}

/// Lipschitz constant of the class regression functions of a two-component
/// isotropic Gaussian mixture with equal priors, means `μ0`, `μ1` and common
/// standard deviation `σ`: `‖μ1 − μ0‖ / (4σ²)`.
pub fn two_gaussian_regression_lipschitz(mu0: &[f64], mu1: &[f64], sigma: f64) -> Result<f64> {
    if mu0.len() != mu1.len() {
        return Err(Error::DimensionMismatch {
            expected: mu0.len(),
            got: mu1.len(),
        });
    }
    if sigma.is_nan() || sigma <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    let gap = mu0
        .iter()
        .zip(mu1)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    Ok(gap / (4.0 * sigma * sigma))
}
