//! Feature storage, l2 distances and the incremental nearest-center bookkeeping
//! shared by every selection routine.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::par::{self, Exec};

/// `n` points in `d` dimensions, optionally labeled with classes `0..num_classes`.
///
/// Values are stored as `f32` (the on-disk precision); all distance arithmetic
/// is done in `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    n: usize,
    d: usize,
    points: Vec<f32>,
    labels: Option<Vec<u32>>,
    num_classes: usize,
}

impl FeatureSet {
    /// Builds a feature set from row-major `points` of width `d`.
    pub fn new(
        points: Vec<f32>,
        d: usize,
        labels: Option<Vec<u32>>,
        num_classes: usize,
    ) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidFeatures(
                "dimension must be at least 1".into(),
            ));
        }
        if points.is_empty() || !points.len().is_multiple_of(d) {
            return Err(Error::InvalidFeatures(format!(
                "{} values do not form a nonempty matrix with {d} columns",
                points.len()
            )));
        }
        let n = points.len() / d;
        if let Some(pos) = points.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidFeatures(format!(
                "non-finite value at row {}, column {}",
                pos / d,
                pos % d
            )));
        }
        if let Some(labels) = &labels {
            if labels.len() != n {
                return Err(Error::InvalidFeatures(format!(
                    "{} labels for {n} points",
                    labels.len()
                )));
            }
            if let Some((i, &y)) = labels
                .iter()
                .enumerate()
                .find(|(_, &y)| y as usize >= num_classes)
            {
                return Err(Error::InvalidFeatures(format!(
                    "label {y} at row {i} is not below the class count {num_classes}"
                )));
            }
        }
        Ok(Self {
            n,
            d,
            points,
            labels,
            num_classes,
        })
    }

    /// Convenience constructor from `f64` rows (values are rounded to `f32`).
    pub fn from_rows(
        rows: &[Vec<f64>],
        labels: Option<Vec<u32>>,
        num_classes: usize,
    ) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidFeatures("ragged rows".into()));
        }
        let points = rows.iter().flatten().map(|&v| v as f32).collect();
        Self::new(points, d, labels, num_classes)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn points(&self) -> &[f32] {
        &self.points
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f32] {
        &self.points[i * self.d..(i + 1) * self.d]
    }

    pub fn labels(&self) -> Option<&[u32]> {
        self.labels.as_deref()
    }

    /// Labels, or [`Error::MissingLabels`].
    pub fn require_labels(&self) -> Result<&[u32]> {
        self.labels().ok_or(Error::MissingLabels)
    }

    /// A new feature set holding the given rows in the given order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let mut points = Vec::with_capacity(indices.len() * self.d);
        for &i in indices {
            if i >= self.n {
                return Err(Error::IndexOutOfRange {
                    index: i,
                    len: self.n,
                });
            }
            points.extend_from_slice(self.row(i));
        }
        let labels = self
            .labels
            .as_ref()
            .map(|l| indices.iter().map(|&i| l[i]).collect());
        Self::new(points, self.d, labels, self.num_classes)
    }

    /// Per-dimension standardization to zero mean and unit variance.
    /// Constant columns are centered only.
    pub fn standardized(&self) -> Self {
        let n = self.n as f64;
        let mut points = self.points.clone();
        for k in 0..self.d {
            let mean = (0..self.n).map(|i| self.row(i)[k] as f64).sum::<f64>() / n;
            let var = (0..self.n)
                .map(|i| (self.row(i)[k] as f64 - mean).powi(2))
                .sum::<f64>()
                / n;
            let scale = if var > 0.0 { var.sqrt() } else { 1.0 };
            for i in 0..self.n {
                let v = &mut points[i * self.d + k];
                *v = ((*v as f64 - mean) / scale) as f32;
            }
        }
        Self {
            points,
            ..self.clone()
        }
    }
}

/// Euclidean distance between two rows, accumulated in `f64` in column order.
#[inline]
pub fn l2(a: &[f32], b: &[f32]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let t = x as f64 - y as f64;
            t * t
        })
        .sum::<f64>()
        .sqrt()
}

pub const DEFAULT_CACHE_THRESHOLD: usize = 8192;

#[derive(Debug, Clone, Copy)]
pub struct OracleConfig {
    /// The full distance matrix is cached when `n` is at most this value.
    pub cache_threshold: usize,
    pub exec: Exec,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            cache_threshold: DEFAULT_CACHE_THRESHOLD,
            exec: Exec::default(),
        }
    }
}

/// Pairwise distance access plus the distance from every point to its
/// nearest current center.
///
/// Cloning is cheap: the cached matrix is shared.
#[derive(Debug, Clone)]
pub struct DistanceOracle<'a> {
    features: &'a FeatureSet,
    /// Strict upper triangle, row-major.
    cache: Option<Arc<[f64]>>,
    exec: Exec,
    min_dist: Vec<f64>,
    is_center: Vec<bool>,
    centers: Vec<usize>,
}

#[inline]
fn condensed_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

impl<'a> DistanceOracle<'a> {
    pub fn new(features: &'a FeatureSet, config: OracleConfig) -> Self {
        let n = features.len();
        let cache = (n <= config.cache_threshold && n > 1).then(|| {
            let mut tri = vec![0.0f64; n * (n - 1) / 2];
            let mut rows: Vec<&mut [f64]> = Vec::with_capacity(n);
            let mut rest = tri.as_mut_slice();
            for i in 0..n - 1 {
                let (head, tail) = rest.split_at_mut(n - i - 1);
                rows.push(head);
                rest = tail;
            }
            par::for_each_chunk_mut(config.exec, rows, |i, row| {
                let xi = features.row(i);
                for (k, slot) in row.iter_mut().enumerate() {
                    *slot = l2(xi, features.row(i + 1 + k));
                }
            });
            Arc::from(tri)
        });
        Self {
            features,
            cache,
            exec: config.exec,
            min_dist: vec![f64::INFINITY; n],
            is_center: vec![false; n],
            centers: Vec::new(),
        }
    }

    pub fn with_defaults(features: &'a FeatureSet) -> Self {
        Self::new(features, OracleConfig::default())
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn features(&self) -> &'a FeatureSet {
        self.features
    }

    pub fn exec(&self) -> Exec {
        self.exec
    }

    pub fn is_cached(&self) -> bool {
        self.cache.is_some()
    }

    fn check(&self, i: usize) -> Result<()> {
        if i < self.len() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index: i,
                len: self.len(),
            })
        }
    }

    /// `‖x_i − x_j‖₂`.
    pub fn distance(&self, i: usize, j: usize) -> Result<f64> {
        self.check(i)?;
        self.check(j)?;
        Ok(self.dist(i, j))
    }

    /// Unchecked distance; indices must be in range.
    #[inline]
    pub(crate) fn dist(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        match &self.cache {
            Some(tri) => {
                let (a, b) = if i < j { (i, j) } else { (j, i) };
                tri[condensed_index(self.len(), a, b)]
            }
            None => {
                let (a, b) = if i < j { (i, j) } else { (j, i) };
                l2(self.features.row(a), self.features.row(b))
            }
        }
    }

    /// Distances from `c` to every point.
    pub fn distances_from(&self, c: usize) -> Result<Vec<f64>> {
        self.check(c)?;
        Ok(par::map_range(self.exec, self.len(), |i| self.dist(i, c)))
    }

    /// Makes `c` a center: `min_dist[i] ← min(min_dist[i], Δ(i, c))`.
    pub fn add_center(&mut self, c: usize) -> Result<()> {
        self.check(c)?;
        if self.is_center[c] {
            return Ok(());
        }
        self.is_center[c] = true;
        self.centers.push(c);
        let this = &*self;
        let cache = this.cache.clone();
        let features = this.features;
        let n = this.len();
        par::for_each_mut(self.exec, &mut self.min_dist, |i, m| {
            let d = if i == c {
                0.0
            } else {
                let (a, b) = if i < c { (i, c) } else { (c, i) };
                match &cache {
                    Some(tri) => tri[condensed_index(n, a, b)],
                    None => l2(features.row(a), features.row(b)),
                }
            };
            if d < *m {
                *m = d;
            }
        });
        Ok(())
    }

    pub fn add_centers(&mut self, centers: &[usize]) -> Result<()> {
        centers.iter().try_for_each(|&c| self.add_center(c))
    }

    /// Forgets all centers.
    pub fn reset(&mut self) {
        self.min_dist.fill(f64::INFINITY);
        self.is_center.fill(false);
        self.centers.clear();
    }

    pub fn min_dist(&self) -> &[f64] {
        &self.min_dist
    }

    /// Centers in insertion order.
    pub fn centers(&self) -> &[usize] {
        &self.centers
    }

    pub fn is_center(&self, i: usize) -> bool {
        self.is_center[i]
    }

    /// Largest `min_dist` entry; infinite when there are no centers.
    pub fn current_radius(&self) -> f64 {
        par::reduce_range(
            self.exec,
            self.len(),
            0.0f64,
            |i| self.min_dist[i],
            f64::max,
        )
    }

    /// The non-center point farthest from the current centers, smallest index on ties.
    pub fn farthest_non_center(&self) -> Option<(usize, f64)> {
        let (d, i) = par::reduce_range(
            self.exec,
            self.len(),
            (f64::NEG_INFINITY, usize::MAX),
            |i| {
                if self.is_center[i] {
                    (f64::NEG_INFINITY, usize::MAX)
                } else {
                    (self.min_dist[i], i)
                }
            },
            par::argmax_pair,
        );
        (i != usize::MAX).then_some((i, d))
    }

    /// `max_i min_{j ∈ centers} Δ(x_i, x_j)`, computed from scratch.
    pub fn cover_radius(&self, centers: &[usize]) -> Result<f64> {
        if centers.is_empty() {
            return Err(Error::EmptyCenters);
        }
        centers.iter().try_for_each(|&c| self.check(c))?;
        Ok(par::reduce_range(
            self.exec,
            self.len(),
            0.0f64,
            |i| {
                centers
                    .iter()
                    .map(|&c| self.dist(i, c))
                    .fold(f64::INFINITY, f64::min)
            },
            f64::max,
        ))
    }

    /// For each point, the index and distance of its nearest center
    /// (smallest center index on ties).
    pub fn nearest_centers(&self, centers: &[usize]) -> Result<Vec<(usize, f64)>> {
        if centers.is_empty() {
            return Err(Error::EmptyCenters);
        }
        centers.iter().try_for_each(|&c| self.check(c))?;
        Ok(par::map_range(self.exec, self.len(), |i| {
            centers
                .iter()
                .fold((usize::MAX, f64::INFINITY), |best, &c| {
                    let d = self.dist(i, c);
                    if d < best.1 || (d == best.1 && c < best.0) {
                        (c, d)
                    } else {
                        best
                    }
                })
        }))
    }

    /// Points within `delta` of `i` (including `i`), in increasing index order.
    pub fn neighbors_within(&self, i: usize, delta: f64) -> Vec<usize> {
        (0..self.len())
            .filter(|&j| self.dist(i, j) <= delta)
            .collect()
    }

    /// δ-neighborhoods of all points.
    pub fn neighborhoods(&self, delta: f64) -> Vec<Vec<usize>> {
        par::map_range(self.exec, self.len(), |i| self.neighbors_within(i, delta))
    }

    /// Largest realized pairwise distance `≤ t` (zero counts as realized).
    pub fn largest_distance_at_most(&self, t: f64) -> f64 {
        let n = self.len();
        par::reduce_range(
            self.exec,
            n,
            0.0f64,
            |i| {
                ((i + 1)..n)
                    .map(|j| self.dist(i, j))
                    .filter(|&d| d <= t)
                    .fold(0.0, f64::max)
            },
            f64::max,
        )
    }

    /// Smallest realized pairwise distance `≥ t`, if any.
    pub fn smallest_distance_at_least(&self, t: f64) -> Option<f64> {
        let n = self.len();
        let best = par::reduce_range(
            self.exec,
            n,
            f64::INFINITY,
            |i| {
                let own = if t <= 0.0 { 0.0 } else { f64::INFINITY };
                ((i + 1)..n)
                    .map(|j| self.dist(i, j))
                    .filter(|&d| d >= t)
                    .fold(own, f64::min)
            },
            f64::min,
        );
        best.is_finite().then_some(best)
    }
}
