#![allow(clippy::needless_range_loop)]

use coreset_core::harness::dataset::{decode_binary, encode_binary, read_csv, write_csv};
use coreset_core::harness::{
    generate_synthetic, generate_synthetic_with_means, load_dataset, run_on, save_dataset,
    summarize, CurveRow, DataSource, ExperimentConfig, LearningCurve, SyntheticSpec,
};
use coreset_core::learner::Hyperparams;
use coreset_core::strategies::StrategyId;
use coreset_core::{Error, FeatureSet};
use proptest::prelude::*;

fn spec(seed: u64) -> SyntheticSpec {
    SyntheticSpec {
        num_classes: 4,
        per_class: 40,
        dim: 5,
        spread: 0.8,
        seed,
    }
}

fn small_config(strategy: StrategyId) -> ExperimentConfig {
    ExperimentConfig {
        initial: 8,
        budget: 6,
        rounds: 4,
        seeds: vec![0, 1, 2],
        hyperparams: Hyperparams {
            epochs: 60,
            ..Hyperparams::default()
        },
        ..ExperimentConfig::new(DataSource::Synthetic(spec(3)), strategy)
    }
}

#[test]
fn csv_and_binary_files_load_identically() {
    let f = generate_synthetic(&spec(1)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("d.bin");
    let csv = dir.path().join("d.csv");
    save_dataset(&bin, &f).unwrap();
    save_dataset(&csv, &f).unwrap();
    let a = load_dataset(&bin).unwrap();
    let b = load_dataset(&csv).unwrap();
    assert_eq!(a, b);
    assert_eq!(a, f);
    let bits = |x: &FeatureSet| x.points().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&a), bits(&b));
}

#[test]
fn binary_layout_is_as_documented() {
    let f = FeatureSet::new(vec![1.5, -2.0], 1, Some(vec![1, 0]), 2).unwrap();
    let bytes = encode_binary(&f);
    let mut expected = b"CSAL".to_vec();
    for v in [1u32, 2, 1, 2, 1] {
        expected.extend(v.to_le_bytes());
    }
    expected.extend(1.5f32.to_le_bytes());
    expected.extend((-2.0f32).to_le_bytes());
    expected.extend(1u32.to_le_bytes());
    expected.extend(0u32.to_le_bytes());
    assert_eq!(bytes, expected);
}

#[test]
fn malformed_files_give_structured_errors() {
    let f = generate_synthetic(&spec(2)).unwrap();
    let bytes = encode_binary(&f);
    for cut in [0, 3, 12, 24, bytes.len() / 2, bytes.len() - 1] {
        let err = decode_binary(&bytes[..cut]).unwrap_err();
        let code = err.code();
        assert!(
            code == "truncated" || code == "bad_magic",
            "cut {cut}: {code}"
        );
    }
    let mut wrong = bytes.clone();
    wrong[0] = b'X';
    assert_eq!(decode_binary(&wrong).unwrap_err().code(), "bad_magic");
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.bin");
    std::fs::write(&p, &bytes[..30]).unwrap();
    assert!(matches!(load_dataset(&p), Err(Error::Truncated { .. })));
}

#[test]
fn synthetic_class_means_are_close_to_configured_means() {
    let s = SyntheticSpec {
        num_classes: 3,
        per_class: 400,
        dim: 4,
        spread: 1.5,
        seed: 21,
    };
    let syn = generate_synthetic_with_means(&s).unwrap();
    let labels = syn.features.labels().unwrap();
    let tol = 4.0 * s.spread / (s.per_class as f64).sqrt();
    for c in 0..3 {
        let members: Vec<usize> = (0..labels.len())
            .filter(|&i| labels[i] == c as u32)
            .collect();
        assert_eq!(members.len(), 400);
        for k in 0..4 {
            let m = members
                .iter()
                .map(|&i| syn.features.row(i)[k] as f64)
                .sum::<f64>()
                / 400.0;
            assert!((m - syn.means[c][k]).abs() < tol, "class {c} dim {k}");
        }
    }
}

#[test]
fn zero_spread_collapses_to_means() {
    let s = SyntheticSpec {
        spread: 0.0,
        ..spec(4)
    };
    let syn = generate_synthetic_with_means(&s).unwrap();
    let labels = syn.features.labels().unwrap();
    for i in 0..syn.features.len() {
        let mean = &syn.means[labels[i] as usize];
        for (k, &v) in syn.features.row(i).iter().enumerate() {
            assert_eq!(v, mean[k] as f32);
        }
    }
}

#[test]
fn runs_are_byte_identical() {
    let f = generate_synthetic(&spec(3)).unwrap();
    for strategy in StrategyId::ALL {
        let c = small_config(strategy);
        let a = run_on(&f, &c).unwrap().to_csv_string();
        let b = run_on(&f, &c).unwrap().to_csv_string();
        assert_eq!(a, b, "{strategy}");
    }
}

#[test]
fn sequential_and_parallel_runs_agree() {
    let f = generate_synthetic(&spec(3)).unwrap();
    let mut c = small_config(StrategyId::CoresetRobust);
    c.exec = coreset_core::Exec::Sequential;
    let a = run_on(&f, &c).unwrap();
    c.exec = coreset_core::Exec::Parallel;
    let b = run_on(&f, &c).unwrap();
    assert_eq!(a, b);
}

#[test]
fn greedy_cover_radius_never_grows() {
    let f = generate_synthetic(&spec(5)).unwrap();
    let curve = run_on(&f, &small_config(StrategyId::CoresetGreedy)).unwrap();
    for seed in [0, 1, 2] {
        let r: Vec<f64> = curve
            .rows
            .iter()
            .filter(|row| row.seed == seed)
            .map(|row| row.cover_radius)
            .collect();
        assert_eq!(r.len(), 5);
        assert!(r.windows(2).all(|w| w[1] <= w[0]), "{r:?}");
    }
}

#[test]
fn std_dev_matches_hand_computation() {
    let acc = [0.61, 0.64, 0.58, 0.7, 0.66];
    let rows = acc
        .iter()
        .enumerate()
        .map(|(k, &accuracy)| CurveRow {
            seed: k as u64,
            round: 0,
            labeled: 50,
            accuracy,
            cover_radius: 0.0,
            coreset_loss: 0.0,
            train_loss: 0.0,
            wall_ms: 0,
        })
        .collect();
    let curve = LearningCurve {
        strategy: StrategyId::Random,
        rows,
        notes: vec![],
    };
    let s = summarize("r", &curve);
    // mean 0.638; squared deviations 0.000784, 0.000004, 0.003364, 0.003844, 0.000484.
    let var = (0.000784 + 0.000004 + 0.003364 + 0.003844 + 0.000484) / 5.0;
    assert!((s.points[0].mean - 0.638).abs() < 1e-12);
    assert!((s.points[0].std_dev - f64::sqrt(var)).abs() < 1e-9);
}

#[test]
fn constant_accuracy_has_zero_spread() {
    let mut curve = run_on(
        &generate_synthetic(&spec(6)).unwrap(),
        &small_config(StrategyId::Random),
    )
    .unwrap();
    for r in &mut curve.rows {
        r.accuracy = 0.5;
    }
    for p in summarize("x", &curve).points {
        assert_eq!(p.mean, 0.5);
        assert_eq!(p.std_dev, 0.0);
    }
}

#[test]
fn results_csv_round_trips() {
    let curve = run_on(
        &generate_synthetic(&spec(7)).unwrap(),
        &small_config(StrategyId::Entropy),
    )
    .unwrap();
    let text = curve.to_csv_string();
    assert!(text
        .starts_with("seed,round,labeled,accuracy,cover_radius,coreset_loss,train_loss,wall_ms\n"));
    let back = LearningCurve::read_csv(text.as_bytes(), StrategyId::Entropy).unwrap();
    assert_eq!(back.rows, curve.rows);
}

#[test]
fn csv_dataset_reader_accepts_written_text() {
    let f = generate_synthetic(&spec(8)).unwrap();
    let mut buf = Vec::new();
    write_csv(&f, &mut buf).unwrap();
    assert_eq!(read_csv(&buf).unwrap(), f);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn labeled_count_grows_by_budget(
        seed in 0u64..1000,
        initial in 1usize..10,
        budget in 1usize..8,
        rounds in 1usize..4,
        strategy in prop::sample::select(StrategyId::ALL.to_vec()),
    ) {
        let f = generate_synthetic(&SyntheticSpec { num_classes: 3, per_class: 15, dim: 3, spread: 1.0, seed }).unwrap();
        let c = ExperimentConfig {
            initial,
            budget,
            rounds,
            seeds: vec![seed],
            hyperparams: Hyperparams { epochs: 20, ..Hyperparams::default() },
            ..ExperimentConfig::new(DataSource::Synthetic(spec(0)), strategy)
        };
        let curve = run_on(&f, &c).unwrap();
        prop_assert_eq!(curve.rows.len(), rounds + 1);
        for (k, r) in curve.rows.iter().enumerate() {
            prop_assert_eq!(r.round, k);
            prop_assert_eq!(r.labeled, initial + k * budget);
        }
    }

    #[test]
    fn binary_round_trip_is_bit_exact(
        rows in prop::collection::vec(prop::collection::vec(-1e30f32..1e30, 3), 1..20),
        with_labels in any::<bool>(),
    ) {
        let n = rows.len();
        let points: Vec<f32> = rows.concat();
        // CSV infers the class count as the largest label plus one.
        let c = if with_labels { n.min(4) } else { 0 };
        let labels = with_labels.then(|| (0..n as u32).map(|i| i % 4).collect());
        let f = FeatureSet::new(points, 3, labels, c).unwrap();
        let g = decode_binary(&encode_binary(&f)).unwrap();
        prop_assert_eq!(
            f.points().iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            g.points().iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
        let mut buf = Vec::new();
        write_csv(&f, &mut buf).unwrap();
        prop_assert_eq!(read_csv(&buf).unwrap(), f);
    }
}
