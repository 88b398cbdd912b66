use super::KCenterSolution;
use crate::error::{Error, Result};
use crate::geometry::DistanceOracle;

fn distinct_count(n: usize, s0: &[usize]) -> Result<usize> {
    let mut seen = vec![false; n];
    let mut count = 0;
    for &c in s0 {
        if c >= n {
            return Err(Error::IndexOutOfRange { index: c, len: n });
        }
        if !seen[c] {
            seen[c] = true;
            count += 1;
        }
    }
    Ok(count)
}

/// Farthest-first traversal seeded with `s0`.
///
/// Resets the oracle's centers to `s0`, then `budget` times adds the point
/// farthest from its nearest center (smallest index on ties). Returns the new
/// points in pick order; on return the oracle holds `s0` plus the picks.
pub fn k_center_greedy(
    oracle: &mut DistanceOracle<'_>,
    s0: &[usize],
    budget: usize,
) -> Result<Vec<usize>> {
    if s0.is_empty() {
        return Err(Error::EmptySeed);
    }
    let available = oracle.len() - distinct_count(oracle.len(), s0)?;
    if budget > available {
        return Err(Error::BudgetExceedsPool { budget, available });
    }
    oracle.reset();
    oracle.add_centers(s0)?;
    let mut picked = Vec::with_capacity(budget);
    for _ in 0..budget {
        let (u, _) = oracle
            .farthest_non_center()
            .expect("budget check guarantees a non-center point");
        oracle.add_center(u)?;
        picked.push(u);
    }
    Ok(picked)
}

/// Greedy selection packaged as a [`KCenterSolution`] (no outliers, not optimal).
pub fn greedy_solution(
    oracle: &mut DistanceOracle<'_>,
    s0: &[usize],
    budget: usize,
) -> Result<KCenterSolution> {
    k_center_greedy(oracle, s0, budget)?;
    let mut centers = oracle.centers().to_vec();
    centers.sort_unstable();
    Ok(KCenterSolution {
        centers,
        outliers: Vec::new(),
        radius: oracle.current_radius(),
        optimal: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::FeatureSet;

    fn line(xs: &[f64]) -> FeatureSet {
        FeatureSet::from_rows(&xs.iter().map(|&x| vec![x]).collect::<Vec<_>>(), None, 0).unwrap()
    }

    #[test]
    fn picks_farthest_point() {
        let f = line(&[0.0, 1.0, 2.0, 3.0, 4.0]);
        let mut o = DistanceOracle::with_defaults(&f);
        assert_eq!(k_center_greedy(&mut o, &[0], 1).unwrap(), vec![4]);
        assert_eq!(k_center_greedy(&mut o, &[0], 2).unwrap(), vec![4, 2]);
        assert_eq!(o.current_radius(), 1.0);
    }

    #[test]
    fn ties_go_to_smallest_index() {
        // 1 and 3 are both at distance 1 from center 2.
        let f = line(&[5.0, 1.0, 2.0, 3.0]);
        let mut o = DistanceOracle::with_defaults(&f);
        assert_eq!(k_center_greedy(&mut o, &[2, 0], 1).unwrap(), vec![1]);
    }

    #[test]
    fn precondition_errors() {
        let f = line(&[0.0, 1.0, 2.0]);
        let mut o = DistanceOracle::with_defaults(&f);
        assert!(matches!(
            k_center_greedy(&mut o, &[], 1),
            Err(Error::EmptySeed)
        ));
        assert!(matches!(
            k_center_greedy(&mut o, &[0, 0], 3),
            Err(Error::BudgetExceedsPool {
                budget: 3,
                available: 2
            })
        ));
        assert!(k_center_greedy(&mut o, &[7], 1).is_err());
    }

    #[test]
    fn duplicates_fill_budget() {
        let f = line(&[1.0, 1.0, 1.0, 1.0]);
        let mut o = DistanceOracle::with_defaults(&f);
        assert_eq!(k_center_greedy(&mut o, &[2], 3).unwrap(), vec![0, 1, 3]);
    }
}
