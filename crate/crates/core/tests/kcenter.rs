#![allow(clippy::needless_range_loop)]

use std::time::Duration;

use coreset_core::kcenter::{
    feasible, greedy_solution, robust_k_center, robust_k_center_traced, Feasibility,
    FeasibilityOptions, FeasibilityProblem, RobustOptions,
};
use coreset_core::{DistanceOracle, FeatureSet};
use proptest::prelude::*;

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Points as the oracle sees them (rounded through f32).
fn rows_of(f: &FeatureSet) -> Vec<Vec<f64>> {
    (0..f.len())
        .map(|i| f.row(i).iter().map(|&v| v as f64).collect())
        .collect()
}

fn subsets(pool: &[usize], k: usize, out: &mut Vec<Vec<usize>>, cur: &mut Vec<usize>, from: usize) {
    if cur.len() == k {
        out.push(cur.clone());
        return;
    }
    for i in from..pool.len() {
        cur.push(pool[i]);
        subsets(pool, k, out, cur, i + 1);
        cur.pop();
    }
}

/// Distances from every point to its nearest center, sorted descending.
fn sorted_cover(rows: &[Vec<f64>], centers: &[usize]) -> Vec<f64> {
    let mut d: Vec<f64> = rows
        .iter()
        .map(|p| {
            centers
                .iter()
                .map(|&c| dist(p, &rows[c]))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    d.sort_by(|a, b| b.total_cmp(a));
    d
}

fn extra_sets(n: usize, s0: &[usize], b: usize) -> Vec<Vec<usize>> {
    let pool: Vec<usize> = (0..n).filter(|i| !s0.contains(i)).collect();
    let mut out = Vec::new();
    subsets(&pool, b, &mut out, &mut Vec::new(), 0);
    out
}

/// Smallest radius achievable with `s0` plus `b` extra centers, ignoring the
/// `xi` farthest points.
fn brute_opt(rows: &[Vec<f64>], s0: &[usize], b: usize, xi: usize) -> f64 {
    extra_sets(rows.len(), s0, b)
        .into_iter()
        .map(|extra| {
            let centers: Vec<usize> = s0.iter().copied().chain(extra).collect();
            let d = sorted_cover(rows, &centers);
            if xi >= d.len() {
                0.0
            } else {
                d[xi]
            }
        })
        .fold(f64::INFINITY, f64::min)
}

fn brute_feasible(rows: &[Vec<f64>], s0: &[usize], b: usize, delta: f64, xi: usize) -> bool {
    if s0.is_empty() && b == 0 {
        return false;
    }
    extra_sets(rows.len(), s0, b).into_iter().any(|extra| {
        let centers: Vec<usize> = s0.iter().copied().chain(extra).collect();
        sorted_cover(rows, &centers)
            .iter()
            .filter(|&&d| d > delta)
            .count()
            <= xi
    })
}

/// Small instances on a coarse grid so that ties and duplicates are common.
fn instance() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<usize>, usize)> {
    (4usize..=11)
        .prop_flat_map(|n| {
            (
                prop::collection::vec(prop::collection::vec(0i32..8, 2), n),
                prop::collection::btree_set(0..n, 1..=2),
                0usize..=3,
            )
        })
        .prop_map(|(pts, s0, b)| {
            let n = pts.len();
            let s0: Vec<usize> = s0.into_iter().collect();
            let b = b.min(n - s0.len());
            let rows = pts
                .into_iter()
                .map(|p| p.into_iter().map(|v| v as f64 * 0.5).collect())
                .collect();
            (rows, s0, b)
        })
}

fn solve(f: &FeatureSet, s0: &[usize], b: usize, delta: f64, xi: usize) -> Feasibility {
    let oracle = DistanceOracle::with_defaults(f);
    let problem = FeasibilityProblem {
        budget: b,
        fixed: s0.to_vec(),
        delta,
        max_outliers: xi,
    };
    feasible(&oracle, &problem, &FeasibilityOptions::default()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn greedy_is_within_twice_optimal((rows, s0, b) in instance()) {
        let f = FeatureSet::from_rows(&rows, None, 0).unwrap();
        let rows = rows_of(&f);
        let mut oracle = DistanceOracle::with_defaults(&f);
        let g = greedy_solution(&mut oracle, &s0, b).unwrap();
        let opt = brute_opt(&rows, &s0, b, 0);
        prop_assert!(g.radius <= 2.0 * opt + 1e-9, "greedy {} opt {}", g.radius, opt);
        prop_assert_eq!(g.centers.len(), s0.len() + b);
    }

    #[test]
    fn robust_matches_brute_force((rows, s0, b) in instance(), xi in 0usize..=2) {
        let f = FeatureSet::from_rows(&rows, None, 0).unwrap();
        let rows = rows_of(&f);
        let mut oracle = DistanceOracle::with_defaults(&f);
        let s = robust_k_center(&mut oracle, &s0, b, xi, &RobustOptions::default()).unwrap();
        prop_assert!(s.optimal);
        let opt = brute_opt(&rows, &s0, b, xi);
        prop_assert!((s.radius - opt).abs() <= 1e-9, "robust {} brute {}", s.radius, opt);
        // The reported solution achieves the reported radius.
        let d = sorted_cover(&rows, &s.centers);
        let far = d.iter().filter(|&&x| x > s.radius + 1e-9).count();
        prop_assert!(far <= xi);
        prop_assert!(s.outliers.len() <= xi);
        for &c in &s0 {
            prop_assert!(s.centers.contains(&c));
        }
    }

    #[test]
    fn feasibility_agrees_with_brute_force(
        (rows, s0, b) in instance(),
        xi in 0usize..=2,
        pick in 0usize..1000,
    ) {
        let f = FeatureSet::from_rows(&rows, None, 0).unwrap();
        let rows = rows_of(&f);
        let n = rows.len();
        let i = pick % n;
        let j = (pick / n) % n;
        let delta = dist(&rows[i], &rows[j]);
        let expected = brute_feasible(&rows, &s0, b, delta, xi);
        match solve(&f, &s0, b, delta, xi) {
            Feasibility::Feasible(w) => {
                prop_assert!(expected, "solver found a cover the brute force missed");
                prop_assert_eq!(w.centers.len(), s0.len() + b);
                for &c in &s0 {
                    prop_assert!(w.centers.contains(&c));
                }
                prop_assert!(w.outliers.len() <= xi);
                for p in 0..n {
                    prop_assert!(w.centers.contains(&w.assignment[p]));
                    let d = dist(&rows[p], &rows[w.assignment[p]]);
                    prop_assert_eq!(d > delta, w.outliers.contains(&p));
                }
            }
            Feasibility::Infeasible => prop_assert!(!expected, "solver missed a cover"),
            Feasibility::TimedOut => prop_assert!(false, "timed out on a tiny instance"),
        }
    }

    #[test]
    fn feasibility_is_monotone((rows, s0, b) in instance(), xi in 0usize..=2) {
        let f = FeatureSet::from_rows(&rows, None, 0).unwrap();
        let rows = rows_of(&f);
        let mut deltas: Vec<f64> = (0..rows.len())
            .flat_map(|i| (0..rows.len()).map(move |j| (i, j)))
            .map(|(i, j)| dist(&rows[i], &rows[j]))
            .collect();
        deltas.sort_by(f64::total_cmp);
        deltas.dedup();
        let grid: Vec<Vec<bool>> = (0..=xi + 1)
            .map(|x| deltas.iter().map(|&d| solve(&f, &s0, b, d, x).is_feasible()).collect())
            .collect();
        for row in &grid {
            for w in row.windows(2) {
                prop_assert!(!w[0] || w[1], "feasible at a smaller radius but not a larger one");
            }
        }
        for x in 1..grid.len() {
            for k in 0..deltas.len() {
                prop_assert!(!grid[x - 1][k] || grid[x][k], "more outliers lost feasibility");
            }
        }
    }
}

#[test]
fn robust_never_worse_than_greedy_on_clusters() {
    // Three tight clusters plus stragglers; the exact search should match
    // or beat farthest-first.
    let mut rows = Vec::new();
    for (cx, cy) in [(0.0, 0.0), (10.0, 0.0), (0.0, 10.0)] {
        for k in 0..8 {
            let a = k as f64 * 0.7;
            rows.push(vec![cx + a.cos() * (1.0 + k as f64 * 0.1), cy + a.sin()]);
        }
    }
    rows.push(vec![5.0, 5.0]);
    rows.push(vec![20.0, 20.0]);
    let f = FeatureSet::from_rows(&rows, None, 0).unwrap();
    let mut oracle = DistanceOracle::with_defaults(&f);
    for xi in 0..3 {
        let g = greedy_solution(&mut oracle, &[0], 4).unwrap();
        let (s, trace) =
            robust_k_center_traced(&mut oracle, &[0], 4, xi, &RobustOptions::default()).unwrap();
        assert!(s.optimal);
        assert!(s.radius <= g.radius);
        assert_eq!(trace.greedy_radius, g.radius);
    }
}

#[test]
fn probe_limit_is_respected() {
    let rows: Vec<Vec<f64>> = (0..400)
        .map(|i| vec![((i * 37) % 101) as f64, ((i * 53) % 97) as f64])
        .collect();
    let f = FeatureSet::from_rows(&rows, None, 0).unwrap();
    let mut oracle = DistanceOracle::with_defaults(&f);
    let opts = RobustOptions {
        time_limit: Duration::from_millis(1),
    };
    let (s, trace) = robust_k_center_traced(&mut oracle, &[0], 30, 0, &opts).unwrap();
    for p in &trace.probes {
        assert!(p.elapsed < Duration::from_millis(500));
    }
    if !s.optimal {
        let g = greedy_solution(&mut oracle, &[0], 30).unwrap();
        assert_eq!(s, g);
    }
}
