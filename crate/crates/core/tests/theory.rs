mod common;

use coreset_core::theory::{
    coreset_loss, covering_bound, softmax_jacobian_frobenius, softmax_lipschitz_max, BoundInputs,
    SOFTMAX_JACOBIAN_SUP,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Frobenius norm of `diag(p) − p pᵀ` built entry by entry.
fn jacobian_norm(p: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..p.len() {
        for j in 0..p.len() {
            let e = if i == j {
                p[i] - p[i] * p[j]
            } else {
                -p[i] * p[j]
            };
            s += e * e;
        }
    }
    s.sqrt()
}

fn bound_reference(b: &BoundInputs) -> f64 {
    let cover = b.delta * b.lambda_l + b.delta * b.lambda_eta * b.loss_bound * b.num_classes as f64;
    let tail = b.loss_bound * ((1.0 / b.gamma).ln() / (2.0 * b.n as f64)).sqrt();
    cover + tail
}

#[test]
fn jacobian_matches_explicit_matrix() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for c in 2..8 {
        for _ in 0..200 {
            let p = common::random_simplex(&mut rng, c);
            let got = softmax_jacobian_frobenius(&p).unwrap();
            assert!((got - jacobian_norm(&p)).abs() < 1e-12);
        }
    }
}

#[test]
fn random_search_never_beats_the_supremum() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for c in [2, 3, 4, 6, 10] {
        let mut best = 0.0f64;
        for _ in 0..5000 {
            best =
                best.max(softmax_jacobian_frobenius(&common::random_simplex(&mut rng, c)).unwrap());
        }
        assert!(best <= SOFTMAX_JACOBIAN_SUP + 1e-12, "C={c}: {best}");
        let uniform = vec![1.0 / c as f64; c];
        let max = softmax_lipschitz_max(c).unwrap();
        assert!((softmax_jacobian_frobenius(&uniform).unwrap() - max).abs() < 1e-12);
    }
}

#[test]
fn closed_form_is_exceeded_off_uniform_for_three_or_more_classes() {
    assert!(
        softmax_jacobian_frobenius(&[0.5, 0.5]).unwrap()
            <= softmax_lipschitz_max(2).unwrap() + 1e-15
    );
    for c in [3, 5, 10] {
        let mut p = vec![0.0; c];
        p[0] = 0.5;
        p[1] = 0.5;
        assert!(softmax_jacobian_frobenius(&p).unwrap() > softmax_lipschitz_max(c).unwrap());
    }
}

#[test]
fn coreset_loss_matches_direct_means() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..50 {
        let n = rng.random_range(1..40);
        let losses: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let k = rng.random_range(1..=n);
        let s: Vec<usize> = (0..k).map(|_| rng.random_range(0..n)).collect();
        let mut all = 0.0;
        for &l in &losses {
            all += l;
        }
        let mut sub = 0.0;
        for &i in &s {
            sub += losses[i];
        }
        let expected = (all / n as f64 - sub / k as f64).abs();
        assert!((coreset_loss(&losses, &s).unwrap() - expected).abs() < 1e-12);
    }
}

#[test]
fn zero_loss_on_labeled_set_gives_pool_mean() {
    let losses = [0.0, 0.4, 0.0, 0.8, 0.3];
    let mean = losses.iter().sum::<f64>() / 5.0;
    assert!((coreset_loss(&losses, &[0, 2]).unwrap() - mean).abs() < 1e-15);
}

fn inputs() -> impl Strategy<Value = BoundInputs> {
    (
        0.0..10.0f64,
        0.0..5.0f64,
        0.0..5.0f64,
        0.0..3.0f64,
        1usize..20,
        1usize..100_000,
        1e-6..1.0f64,
    )
        .prop_map(
            |(delta, lambda_l, lambda_eta, loss_bound, num_classes, n, gamma)| BoundInputs {
                delta,
                lambda_l,
                lambda_eta,
                loss_bound,
                num_classes,
                n,
                gamma,
            },
        )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn bound_matches_reference(b in inputs()) {
        let got = covering_bound(&b).unwrap().total();
        let want = bound_reference(&b);
        prop_assert!((got - want).abs() <= 1e-12 * want.max(1.0));
    }

    #[test]
    fn bound_is_monotone(b in inputs(), bump in 0.0..2.0f64, k in 1usize..5) {
        let base = covering_bound(&b).unwrap().total();
        let up = |v: BoundInputs| covering_bound(&v).unwrap().total();
        let bigger = [
            BoundInputs { delta: b.delta + bump, ..b },
            BoundInputs { lambda_l: b.lambda_l + bump, ..b },
            BoundInputs { lambda_eta: b.lambda_eta + bump, ..b },
            BoundInputs { loss_bound: b.loss_bound + bump, ..b },
            BoundInputs { num_classes: b.num_classes + k, ..b },
        ];
        for v in bigger {
            prop_assert!(up(v) >= base);
        }
        let smaller = [
            BoundInputs { n: b.n * (k + 1), ..b },
            BoundInputs { gamma: (b.gamma * 1.5).min(1.0), ..b },
        ];
        for v in smaller {
            prop_assert!(up(v) <= base);
        }
    }

    #[test]
    fn jacobian_never_exceeds_supremum(seed in any::<u64>(), c in 2usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = common::random_simplex(&mut rng, c);
        let j = softmax_jacobian_frobenius(&p).unwrap();
        prop_assert!(j <= SOFTMAX_JACOBIAN_SUP + 1e-12);
        prop_assert!((j - jacobian_norm(&p)).abs() < 1e-12);
    }
}
