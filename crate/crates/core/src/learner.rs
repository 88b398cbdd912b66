//! Multinomial softmax regression trained by full-batch gradient descent.
//!
//! This is the reference learner of the simulation harness: it supplies class
//! probabilities for the uncertainty baselines, per-point losses for the
//! core-set diagnostics, and test accuracy for the learning curves.

use std::f64::consts::SQRT_2;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{Error, Result};
use crate::geometry::FeatureSet;

/// Upper bound on the l2-on-probabilities loss: two probability vectors are
/// at most `√2` apart.
pub const L2_LOSS_BOUND: f64 = SQRT_2;

/// Probabilities are clamped to this before taking logs.
pub const PROB_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperparams {
    pub learning_rate: f64,
    pub epochs: usize,
    /// Coefficient `λ` of the `λ/2 · ‖W‖²` penalty (the bias is not penalized).
    pub l2_penalty: f64,
    /// Kept for reproducibility records. Training starts from zero weights and
    /// is deterministic, so the seed does not influence the result.
    pub seed: u64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            epochs: 500,
            l2_penalty: 1e-4,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LossKind {
    /// `−ln p_y`, with `p_y` clamped below at [`PROB_FLOOR`].
    CrossEntropy,
    /// `‖softmax(x) − onehot(y)‖₂`.
    L2,
}

/// Per-point losses of one kind.
#[derive(Debug, Clone, PartialEq)]
pub struct LossVector {
    pub values: Vec<f64>,
    pub kind: LossKind,
}

impl LossVector {
    /// The largest attainable value, when finite.
    pub fn bound(&self) -> Option<f64> {
        match self.kind {
            LossKind::L2 => Some(L2_LOSS_BOUND),
            LossKind::CrossEntropy => None,
        }
    }

    pub fn mean(&self) -> f64 {
        if self.values.is_empty() {
            return 0.0;
        }
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// In-place softmax of one row of logits, with max subtraction.
pub fn softmax_in_place(row: &mut [f64]) {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in row.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in row.iter_mut() {
        *v /= sum;
    }
}

fn softmax_rows(z: &mut Array2<f64>) {
    for mut row in z.axis_iter_mut(Axis(0)) {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row /= sum;
    }
}

/// Shannon entropy (natural log) of a probability row; `0 ln 0 = 0`.
pub fn entropy(p: &[f64]) -> f64 {
    -p.iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| v * v.ln())
        .sum::<f64>()
}

/// Index of the largest entry, smallest index on ties.
pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (k, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = k;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq)]
pub struct SoftmaxModel {
    weights: Array2<f64>,
    bias: Array1<f64>,
    hyperparams: Hyperparams,
}

impl SoftmaxModel {
    /// The untrained model: all probabilities `1/C`.
    pub fn zeros(num_classes: usize, dim: usize, hyperparams: Hyperparams) -> Self {
        Self {
            weights: Array2::zeros((num_classes, dim)),
            bias: Array1::zeros(num_classes),
            hyperparams,
        }
    }

    pub fn from_parts(
        weights: Array2<f64>,
        bias: Array1<f64>,
        hyperparams: Hyperparams,
    ) -> Result<Self> {
        if weights.nrows() != bias.len() {
            return Err(Error::DimensionMismatch {
                expected: weights.nrows(),
                got: bias.len(),
            });
        }
        if weights.iter().chain(bias.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite model parameter".into()));
        }
        Ok(Self {
            weights,
            bias,
            hyperparams,
        })
    }

    /// Fits on the labeled rows `indices` of `features`.
    pub fn fit(features: &FeatureSet, indices: &[usize], hyperparams: Hyperparams) -> Result<Self> {
        Self::fit_traced(features, indices, hyperparams).map(|(m, _)| m)
    }

    /// Like [`SoftmaxModel::fit`], also returning the training objective before
    /// every epoch and after the last one.
    pub fn fit_traced(
        features: &FeatureSet,
        indices: &[usize],
        hyperparams: Hyperparams,
    ) -> Result<(Self, Vec<f64>)> {
        let labels = features.require_labels()?;
        if indices.is_empty() {
            return Err(Error::EmptyLabeledSet);
        }
        if !hyperparams.learning_rate.is_finite() || hyperparams.learning_rate < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "learning rate must be finite and nonnegative, got {}",
                hyperparams.learning_rate
            )));
        }
        if !hyperparams.l2_penalty.is_finite() || hyperparams.l2_penalty < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "l2 penalty must be finite and nonnegative, got {}",
                hyperparams.l2_penalty
            )));
        }
        let x = design_matrix(features, indices)?;
        let y: Vec<u32> = indices.iter().map(|&i| labels[i]).collect();
        let objective =
            Objective::new(x.view(), &y, features.num_classes(), hyperparams.l2_penalty)?;

        let mut model = Self::zeros(features.num_classes(), features.dim(), hyperparams);
        let mut history = Vec::with_capacity(hyperparams.epochs + 1);
        for _ in 0..hyperparams.epochs {
            let (value, gw, gb) = objective.value_and_gradient(&model.weights, &model.bias);
            history.push(value);
            model.weights.scaled_add(-hyperparams.learning_rate, &gw);
            model.bias.scaled_add(-hyperparams.learning_rate, &gb);
        }
        history.push(objective.value(&model.weights, &model.bias));
        Ok((model, history))
    }

    pub fn weights(&self) -> ArrayView2<'_, f64> {
        self.weights.view()
    }

    pub fn bias(&self) -> ArrayView1<'_, f64> {
        self.bias.view()
    }

    pub fn hyperparams(&self) -> &Hyperparams {
        &self.hyperparams
    }

    pub fn num_classes(&self) -> usize {
        self.weights.nrows()
    }

    pub fn dim(&self) -> usize {
        self.weights.ncols()
    }

    fn check_dim(&self, features: &FeatureSet) -> Result<()> {
        if features.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: features.dim(),
            });
        }
        Ok(())
    }

    /// `n × C` logits `x Wᵀ + b`.
    pub fn logits(&self, features: &FeatureSet) -> Result<Array2<f64>> {
        self.check_dim(features)?;
        let x = full_matrix(features);
        Ok(x.dot(&self.weights.t()) + &self.bias)
    }

    /// `n × C` class probabilities; rows sum to one.
    pub fn predict_proba(&self, features: &FeatureSet) -> Result<Array2<f64>> {
        let mut z = self.logits(features)?;
        softmax_rows(&mut z);
        Ok(z)
    }

    /// Predicted class per row, smallest class index on ties.
    pub fn predict(&self, features: &FeatureSet) -> Result<Vec<u32>> {
        let p = self.predict_proba(features)?;
        Ok(p.axis_iter(Axis(0))
            .map(|row| {
                let mut best = 0;
                for (k, &v) in row.iter().enumerate() {
                    if v > row[best] {
                        best = k;
                    }
                }
                best as u32
            })
            .collect())
    }

    pub fn point_losses(&self, features: &FeatureSet, kind: LossKind) -> Result<LossVector> {
        let labels = features.require_labels()?;
        let p = self.predict_proba(features)?;
        Ok(losses_from_proba(p.view(), labels, kind))
    }

    /// Fraction of rows whose predicted class equals the label.
    pub fn accuracy(&self, features: &FeatureSet) -> Result<f64> {
        let labels = features.require_labels()?;
        let pred = self.predict(features)?;
        if pred.is_empty() {
            return Ok(0.0);
        }
        let hits = pred.iter().zip(labels).filter(|(a, b)| a == b).count();
        Ok(hits as f64 / pred.len() as f64)
    }

    /// The logits as a `C`-dimensional embedding, keeping labels.
    pub fn logit_embedding(&self, features: &FeatureSet) -> Result<FeatureSet> {
        let z = self.logits(features)?;
        let points = z.iter().map(|&v| v as f32).collect();
        FeatureSet::new(
            points,
            self.num_classes(),
            features.labels().map(<[u32]>::to_vec),
            features.num_classes(),
        )
    }
}

/// Per-row losses for a probability matrix.
pub fn losses_from_proba(p: ArrayView2<'_, f64>, labels: &[u32], kind: LossKind) -> LossVector {
    let values = p
        .axis_iter(Axis(0))
        .zip(labels)
        .map(|(row, &y)| {
            let y = y as usize;
            match kind {
                LossKind::CrossEntropy => -row[y].max(PROB_FLOOR).ln(),
                LossKind::L2 => row
                    .iter()
                    .enumerate()
                    .map(|(k, &v)| {
                        let t = if k == y { v - 1.0 } else { v };
                        t * t
                    })
                    .sum::<f64>()
                    .sqrt(),
            }
        })
        .collect();
    LossVector { values, kind }
}

/// Classes in `0..num_classes` without any labeled example among `indices`.
pub fn absent_classes(labels: &[u32], indices: &[usize], num_classes: usize) -> Vec<u32> {
    let mut seen = vec![false; num_classes];
    for &i in indices {
        seen[labels[i] as usize] = true;
    }
    (0..num_classes as u32)
        .filter(|&c| !seen[c as usize])
        .collect()
}

fn full_matrix(features: &FeatureSet) -> Array2<f64> {
    Array2::from_shape_fn((features.len(), features.dim()), |(i, k)| {
        features.row(i)[k] as f64
    })
}

fn design_matrix(features: &FeatureSet, indices: &[usize]) -> Result<Array2<f64>> {
    if let Some(&bad) = indices.iter().find(|&&i| i >= features.len()) {
        return Err(Error::IndexOutOfRange {
            index: bad,
            len: features.len(),
        });
    }
    Ok(Array2::from_shape_fn(
        (indices.len(), features.dim()),
        |(r, k)| features.row(indices[r])[k] as f64,
    ))
}

/// The training objective: mean cross-entropy plus `λ/2 · ‖W‖²`.
#[derive(Debug, Clone)]
pub struct Objective<'a> {
    x: ArrayView2<'a, f64>,
    onehot: Array2<f64>,
    l2_penalty: f64,
}

impl<'a> Objective<'a> {
    pub fn new(
        x: ArrayView2<'a, f64>,
        labels: &[u32],
        num_classes: usize,
        l2_penalty: f64,
    ) -> Result<Self> {
        if x.nrows() == 0 {
            return Err(Error::EmptyLabeledSet);
        }
        if labels.len() != x.nrows() {
            return Err(Error::DimensionMismatch {
                expected: x.nrows(),
                got: labels.len(),
            });
        }
        let mut onehot = Array2::zeros((x.nrows(), num_classes));
        for (i, &y) in labels.iter().enumerate() {
            if y as usize >= num_classes {
                return Err(Error::InvalidArgument(format!(
                    "label {y} is not below the class count {num_classes}"
                )));
            }
            onehot[[i, y as usize]] = 1.0;
        }
        Ok(Self {
            x,
            onehot,
            l2_penalty,
        })
    }

    fn logits(&self, w: &Array2<f64>, b: &Array1<f64>) -> Array2<f64> {
        self.x.dot(&w.t()) + b
    }

    fn penalty(&self, w: &Array2<f64>) -> f64 {
        0.5 * self.l2_penalty * w.iter().map(|v| v * v).sum::<f64>()
    }

    /// Objective value, computed with a log-sum-exp so no clamping is needed.
    pub fn value(&self, w: &Array2<f64>, b: &Array1<f64>) -> f64 {
        let z = self.logits(w, b);
        let m = self.x.nrows() as f64;
        let mut total = 0.0;
        for (row, target) in z.axis_iter(Axis(0)).zip(self.onehot.axis_iter(Axis(0))) {
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lse = max + row.iter().map(|&v| (v - max).exp()).sum::<f64>().ln();
            let zy: f64 = row.iter().zip(target).map(|(a, t)| a * t).sum();
            total += lse - zy;
        }
        total / m + self.penalty(w)
    }

    /// Gradient with respect to `(W, b)`.
    pub fn gradient(&self, w: &Array2<f64>, b: &Array1<f64>) -> (Array2<f64>, Array1<f64>) {
        let (_, gw, gb) = self.value_and_gradient(w, b);
        (gw, gb)
    }

    pub fn value_and_gradient(
        &self,
        w: &Array2<f64>,
        b: &Array1<f64>,
    ) -> (f64, Array2<f64>, Array1<f64>) {
        let value = self.value(w, b);
        let mut p = self.logits(w, b);
        softmax_rows(&mut p);
        let m = self.x.nrows() as f64;
        let residual = (p - &self.onehot) / m;
        let gw = residual.t().dot(&self.x) + &(w * self.l2_penalty);
        let gb = residual.sum_axis(Axis(0));
        (value, gw, gb)
    }
}
