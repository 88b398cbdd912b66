#![allow(dead_code)]

use coreset_core::learner::Objective;
use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Worst relative error between the analytic gradient and central
/// differences, over the weight and bias blocks of one random instance.
pub fn gradient_check(seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = rng.random_range(3..12);
    let d = rng.random_range(1..6);
    let c = rng.random_range(2..6);
    let x = Array2::from_shape_fn((m, d), |_| rng.sample::<f64, _>(StandardNormal));
    let labels: Vec<u32> = (0..m).map(|_| rng.random_range(0..c) as u32).collect();
    let lambda = rng.random_range(0.0..0.1);
    let w = Array2::from_shape_fn((c, d), |_| 0.5 * rng.sample::<f64, _>(StandardNormal));
    let b = Array1::from_shape_fn(c, |_| 0.5 * rng.sample::<f64, _>(StandardNormal));
    let objective = Objective::new(x.view(), &labels, c, lambda).unwrap();
    let (gw, gb) = objective.gradient(&w, &b);

    let h = 1e-5;
    let mut fd_w = Array2::zeros((c, d));
    for i in 0..c {
        for j in 0..d {
            let mut plus = w.clone();
            plus[[i, j]] += h;
            let mut minus = w.clone();
            minus[[i, j]] -= h;
            fd_w[[i, j]] = (objective.value(&plus, &b) - objective.value(&minus, &b)) / (2.0 * h);
        }
    }
    let mut fd_b = Array1::zeros(c);
    for i in 0..c {
        let mut plus = b.clone();
        plus[i] += h;
        let mut minus = b.clone();
        minus[i] -= h;
        fd_b[i] = (objective.value(&w, &plus) - objective.value(&w, &minus)) / (2.0 * h);
    }
    let rel = |a: &[f64], f: &[f64]| {
        let diff = a
            .iter()
            .zip(f)
            .map(|(x, y)| (x - y).powi(2))
            .sum::<f64>()
            .sqrt();
        let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nf = f.iter().map(|x| x * x).sum::<f64>().sqrt();
        diff / na.max(nf).max(1e-8)
    };
    rel(gw.as_slice().unwrap(), fd_w.as_slice().unwrap())
        .max(rel(gb.as_slice().unwrap(), fd_b.as_slice().unwrap()))
}

/// Random probability vector of length `c`, uniform on the simplex.
pub fn random_simplex<R: Rng>(rng: &mut R, c: usize) -> Vec<f64> {
    let e: Vec<f64> = (0..c).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

pub fn dist(a: &[f32], b: &[f32]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x as f64 - y as f64).powi(2))
        .sum::<f64>()
        .sqrt()
}
