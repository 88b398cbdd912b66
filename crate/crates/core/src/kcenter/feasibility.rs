//! Exact decision procedure for "can `s0` plus `b` extra centers cover all
//! but `Ξ` points within radius `δ`?".
//!
//! The question is a partial set-cover instance: rows are the points not
//! already covered by `s0`, columns are candidate centers, and a column covers
//! a row when the two points are within `δ`. The search is a depth-first
//! branch and bound:
//!
//! * candidates whose open rows are a subset of another candidate's are
//!   dropped, and without outliers so are rows whose candidates include all of
//!   another open row's;
//! * rows with a single remaining candidate force that candidate, rows with
//!   none become outliers;
//! * a greedy packing of rows with pairwise disjoint candidate sets gives a
//!   quick lower bound on the number of centers still needed;
//! * a Lagrangian relaxation of the covering constraints, tightened by
//!   subgradient steps, gives a stronger bound and reduced costs used to fix
//!   candidates in or out;
//! * a greedy completion searches for a witness at every node;
//! * branching picks the open row with the fewest candidates and tries each
//!   candidate in turn, excluding the ones already tried, with a final
//!   "leave it uncovered" branch while the outlier budget lasts.

use std::cmp::Ordering;
use std::time::{Duration, Instant};

use super::DEFAULT_TIME_LIMIT;
use crate::error::{Error, Result};
use crate::geometry::DistanceOracle;
use crate::par;

/// Parameters of one feasibility question.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityProblem {
    /// Number of centers to add on top of `fixed`.
    pub budget: usize,
    /// Centers that are always open.
    pub fixed: Vec<usize>,
    /// Covering threshold.
    pub delta: f64,
    /// Maximum number of points allowed to stay farther than `delta`.
    pub max_outliers: usize,
}

#[derive(Debug, Clone)]
pub struct FeasibilityOptions {
    pub time_limit: Duration,
    /// Candidate center set tried before searching (for example a greedy
    /// solution). Entries beyond the budget are ignored.
    pub hint: Vec<usize>,
}

impl Default for FeasibilityOptions {
    fn default() -> Self {
        Self {
            time_limit: DEFAULT_TIME_LIMIT,
            hint: Vec::new(),
        }
    }
}

/// A full assignment for the covering program.
///
/// `centers` has exactly `|fixed| + budget` entries (the `u_j = 1` set);
/// point `i` is assigned to `assignment[i]` (the single `ω_{i,j} = 1`), and
/// `outliers` lists the points whose assignment is farther than `δ`
/// (the `ξ_{i,j} = 1` entries).
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub centers: Vec<usize>,
    pub assignment: Vec<usize>,
    pub outliers: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Feasibility {
    Feasible(Witness),
    Infeasible,
    TimedOut,
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible(_))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub rows: usize,
    pub columns: usize,
    pub nodes: u64,
}

pub fn feasible(
    oracle: &DistanceOracle<'_>,
    problem: &FeasibilityProblem,
    options: &FeasibilityOptions,
) -> Result<Feasibility> {
    feasible_with_stats(oracle, problem, options).map(|(f, _)| f)
}

pub fn feasible_with_stats(
    oracle: &DistanceOracle<'_>,
    problem: &FeasibilityProblem,
    options: &FeasibilityOptions,
) -> Result<(Feasibility, SearchStats)> {
    let start = Instant::now();
    let n = oracle.len();
    if problem.delta.is_nan() || problem.delta < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "delta must be nonnegative, got {}",
            problem.delta
        )));
    }
    let mut is_fixed = vec![false; n];
    for &c in &problem.fixed {
        if c >= n {
            return Err(Error::IndexOutOfRange { index: c, len: n });
        }
        is_fixed[c] = true;
    }
    let fixed: Vec<usize> = (0..n).filter(|&i| is_fixed[i]).collect();
    let available = n - fixed.len();
    if problem.budget > available {
        return Err(Error::BudgetExceedsPool {
            budget: problem.budget,
            available,
        });
    }
    for &h in &options.hint {
        if h >= n {
            return Err(Error::IndexOutOfRange { index: h, len: n });
        }
    }

    let delta = problem.delta;
    let mut stats = SearchStats::default();

    let hint: Vec<usize> = {
        let mut seen = is_fixed.clone();
        let mut h = Vec::new();
        for &c in &options.hint {
            if !seen[c] && h.len() < problem.budget {
                seen[c] = true;
                h.push(c);
            }
        }
        h
    };
    if problem.budget == 0 {
        if fixed.is_empty() {
            // No center can be opened, so no point can be assigned.
            return Ok((Feasibility::Infeasible, stats));
        }
        let witness = build_witness(oracle, &fixed, &[], 0, delta);
        return Ok((
            if witness.outliers.len() <= problem.max_outliers {
                Feasibility::Feasible(witness)
            } else {
                Feasibility::Infeasible
            },
            stats,
        ));
    }
    if !hint.is_empty() {
        let witness = build_witness(oracle, &fixed, &hint, problem.budget, delta);
        if witness.outliers.len() <= problem.max_outliers {
            return Ok((Feasibility::Feasible(witness), stats));
        }
    }

    let cover = Cover::build(oracle, &is_fixed, delta);
    stats.rows = cover.row_point.len();
    stats.columns = cover.col_point.len();

    let mut search = Search {
        cover: &cover,
        deadline: start + options.time_limit,
        nodes: 0,
    };
    let mut root = Node::root(&cover, problem.budget, problem.max_outliers);
    search.reduce(&mut root);
    let outcome = search.dfs(root);
    stats.nodes = search.nodes;

    Ok((
        match outcome {
            Outcome::Found(cols) => {
                let extra: Vec<usize> = cols.iter().map(|&c| cover.col_point[c as usize]).collect();
                let witness = build_witness(oracle, &fixed, &extra, problem.budget, delta);
                debug_assert!(witness.outliers.len() <= problem.max_outliers);
                Feasibility::Feasible(witness)
            }
            Outcome::Pruned => Feasibility::Infeasible,
            Outcome::TimedOut => Feasibility::TimedOut,
        },
        stats,
    ))
}

/// Expands a center choice into a full assignment, padding the center set to
/// exactly `|fixed| + budget` with the smallest unused indices.
fn build_witness(
    oracle: &DistanceOracle<'_>,
    fixed: &[usize],
    extra: &[usize],
    budget: usize,
    delta: f64,
) -> Witness {
    let n = oracle.len();
    let mut is_center = vec![false; n];
    for &c in fixed.iter().chain(extra) {
        is_center[c] = true;
    }
    let mut missing = fixed.len() + budget - is_center.iter().filter(|&&b| b).count();
    for flag in is_center.iter_mut() {
        if missing == 0 {
            break;
        }
        if !*flag {
            *flag = true;
            missing -= 1;
        }
    }
    let centers: Vec<usize> = (0..n).filter(|&i| is_center[i]).collect();
    let nearest = oracle
        .nearest_centers(&centers)
        .expect("center set is nonempty");
    let outliers = nearest
        .iter()
        .enumerate()
        .filter(|(_, &(_, d))| d > delta)
        .map(|(i, _)| i)
        .collect();
    Witness {
        centers,
        assignment: nearest.into_iter().map(|(c, _)| c).collect(),
        outliers,
    }
}

/// Row/column incidence of the covering instance.
struct Cover {
    row_point: Vec<usize>,
    col_point: Vec<usize>,
    row_cols: Vec<Vec<u32>>,
    col_rows: Vec<Vec<u32>>,
}

impl Cover {
    fn build(oracle: &DistanceOracle<'_>, is_fixed: &[bool], delta: f64) -> Self {
        let n = oracle.len();
        let fixed: Vec<usize> = (0..n).filter(|&i| is_fixed[i]).collect();
        let covered = par::map_range(oracle.exec(), n, |i| {
            fixed.iter().any(|&c| oracle.dist(i, c) <= delta)
        });
        let row_point: Vec<usize> = (0..n).filter(|&i| !covered[i]).collect();
        let near: Vec<Vec<usize>> = par::map_range(oracle.exec(), row_point.len(), |r| {
            let p = row_point[r];
            (0..n)
                .filter(|&c| !is_fixed[c] && oracle.dist(p, c) <= delta)
                .collect()
        });
        let mut col_id = vec![u32::MAX; n];
        let mut used = vec![false; n];
        for list in &near {
            for &c in list {
                used[c] = true;
            }
        }
        let col_point: Vec<usize> = (0..n).filter(|&c| used[c]).collect();
        for (k, &c) in col_point.iter().enumerate() {
            col_id[c] = k as u32;
        }
        let row_cols: Vec<Vec<u32>> = near
            .iter()
            .map(|list| list.iter().map(|&c| col_id[c]).collect())
            .collect();
        let mut col_rows = vec![Vec::new(); col_point.len()];
        for (r, cols) in row_cols.iter().enumerate() {
            for &c in cols {
                col_rows[c as usize].push(r as u32);
            }
        }
        Self {
            row_point,
            col_point,
            row_cols,
            col_rows,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ColState {
    Free,
    Chosen,
    Excluded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RowState {
    Open,
    Covered,
    Outlier,
    /// Covered automatically whenever a dominating row is covered.
    Implied,
}

#[derive(Debug, Clone)]
struct Node {
    col: Vec<ColState>,
    row: Vec<RowState>,
    budget: usize,
    outliers: usize,
    lambda: Vec<f64>,
    depth: usize,
}

struct Infeasible;

impl Node {
    fn root(cover: &Cover, budget: usize, outliers: usize) -> Self {
        Self {
            col: vec![ColState::Free; cover.col_point.len()],
            row: vec![RowState::Open; cover.row_point.len()],
            budget,
            outliers,
            lambda: vec![0.0; cover.row_point.len()],
            depth: 0,
        }
    }

    fn choose(&mut self, cover: &Cover, c: usize) -> std::result::Result<(), Infeasible> {
        debug_assert_eq!(self.col[c], ColState::Free);
        if self.budget == 0 {
            return Err(Infeasible);
        }
        self.budget -= 1;
        self.col[c] = ColState::Chosen;
        for &r in &cover.col_rows[c] {
            let r = r as usize;
            if self.row[r] == RowState::Open {
                self.row[r] = RowState::Covered;
            }
        }
        Ok(())
    }

    fn chosen(&self) -> Vec<u32> {
        (0..self.col.len())
            .filter(|&c| self.col[c] == ColState::Chosen)
            .map(|c| c as u32)
            .collect()
    }

    fn open_rows(&self) -> Vec<usize> {
        (0..self.row.len())
            .filter(|&r| self.row[r] == RowState::Open)
            .collect()
    }

    fn free_count(&self, cover: &Cover, r: usize) -> usize {
        cover.row_cols[r]
            .iter()
            .filter(|&&c| self.col[c as usize] == ColState::Free)
            .count()
    }

    /// Forced moves until a fixpoint: rows without candidates become
    /// outliers, and with no outlier budget a row's only candidate is chosen.
    fn propagate(&mut self, cover: &Cover) -> std::result::Result<(), Infeasible> {
        loop {
            let mut changed = false;
            for r in 0..self.row.len() {
                if self.row[r] != RowState::Open {
                    continue;
                }
                let mut free = 0;
                let mut last = 0usize;
                for &c in &cover.row_cols[r] {
                    if self.col[c as usize] == ColState::Free {
                        free += 1;
                        last = c as usize;
                    }
                }
                if free == 0 {
                    if self.outliers == 0 {
                        return Err(Infeasible);
                    }
                    self.outliers -= 1;
                    self.row[r] = RowState::Outlier;
                    changed = true;
                } else if free == 1 && self.outliers == 0 {
                    self.choose(cover, last)?;
                    changed = true;
                }
            }
            if !changed {
                return Ok(());
            }
        }
    }
}

enum Outcome {
    Found(Vec<u32>),
    Pruned,
    TimedOut,
}

const EPS: f64 = 1e-7;
const ROOT_ITERATIONS: usize = 400;
const NODE_ITERATIONS: usize = 60;

struct Bound {
    value: f64,
    reduced: Vec<f64>,
}

struct Search<'c> {
    cover: &'c Cover,
    deadline: Instant,
    nodes: u64,
}

impl Search<'_> {
    /// Dominance reductions on the open rows and free columns of `node`.
    fn reduce(&self, node: &mut Node) {
        let cover = self.cover;
        let open_rows = |c: usize, node: &Node| -> Vec<u32> {
            cover.col_rows[c]
                .iter()
                .copied()
                .filter(|&r| node.row[r as usize] == RowState::Open)
                .collect()
        };
        // A column whose open rows are a subset of another free column's is
        // never needed. Equal sets keep the smaller index.
        let mut mark = vec![false; cover.row_point.len()];
        let mut open_count = vec![0usize; cover.col_point.len()];
        for c in 0..cover.col_point.len() {
            if node.col[c] == ColState::Free {
                open_count[c] = open_rows(c, node).len();
            }
        }
        for c in 0..cover.col_point.len() {
            if node.col[c] != ColState::Free {
                continue;
            }
            let rows_c = open_rows(c, node);
            let Some(&pivot) = rows_c
                .iter()
                .min_by_key(|&&r| (cover.row_cols[r as usize].len(), r))
            else {
                node.col[c] = ColState::Excluded;
                continue;
            };
            for &r in &rows_c {
                mark[r as usize] = true;
            }
            let dominated = cover.row_cols[pivot as usize].iter().any(|&other| {
                let other = other as usize;
                if other == c || node.col[other] != ColState::Free {
                    return false;
                }
                let len_o = open_count[other];
                if len_o < rows_c.len() {
                    return false;
                }
                let shared = cover.col_rows[other]
                    .iter()
                    .filter(|&&r| mark[r as usize])
                    .count();
                shared == rows_c.len() && (len_o > rows_c.len() || other < c)
            });
            for &r in &rows_c {
                mark[r as usize] = false;
            }
            if dominated {
                node.col[c] = ColState::Excluded;
            }
        }

        if node.outliers > 0 {
            return;
        }
        // Without outliers, a row whose free candidates include all of
        // another open row's is covered whenever that row is.
        let nrows = cover.row_point.len();
        let mut colmark = vec![false; cover.col_point.len()];
        let free: Vec<Vec<u32>> = (0..nrows)
            .map(|r| {
                if node.row[r] != RowState::Open {
                    return Vec::new();
                }
                cover.row_cols[r]
                    .iter()
                    .copied()
                    .filter(|&c| node.col[c as usize] == ColState::Free)
                    .collect()
            })
            .collect();
        let mut implied = vec![false; nrows];
        let mut seen = vec![0usize; nrows];
        for q in 0..nrows {
            let cols_q = &free[q];
            if cols_q.is_empty() {
                continue;
            }
            for &c in cols_q {
                colmark[c as usize] = true;
            }
            // A dominating row has all of its columns in q, so it shows up in
            // the row list of at least one of q's columns.
            let mut found = false;
            'search: for &c in cols_q {
                for &p in &cover.col_rows[c as usize] {
                    let p = p as usize;
                    if p == q || implied[p] || seen[p] == q + 1 {
                        continue;
                    }
                    seen[p] = q + 1;
                    let cols_p = &free[p];
                    if !cols_p.is_empty()
                        && cols_p.len() <= cols_q.len()
                        && cols_p.iter().all(|&c| colmark[c as usize])
                        && (cols_p.len() < cols_q.len() || p < q)
                    {
                        found = true;
                        break 'search;
                    }
                }
            }
            for &c in cols_q {
                colmark[c as usize] = false;
            }
            if found {
                implied[q] = true;
            }
        }
        for (r, &imp) in implied.iter().enumerate() {
            if imp {
                node.row[r] = RowState::Implied;
            }
        }
    }

    fn dfs(&mut self, mut node: Node) -> Outcome {
        self.nodes += 1;
        if Instant::now() >= self.deadline {
            return Outcome::TimedOut;
        }
        let cover = self.cover;

        let mut bound = None;
        if node.depth > 0 {
            self.reduce(&mut node);
        }
        for _ in 0..4 {
            if node.propagate(cover).is_err() {
                return Outcome::Pruned;
            }
            let open = node.open_rows();
            if open.len() <= node.outliers {
                return Outcome::Found(node.chosen());
            }
            if node.budget == 0 {
                return Outcome::Pruned;
            }
            if self.packing_bound(&node, &open) > node.budget + node.outliers {
                return Outcome::Pruned;
            }
            let iterations = if node.depth == 0 {
                ROOT_ITERATIONS
            } else {
                NODE_ITERATIONS
            };
            let b = self.lagrangian(&mut node, &open, iterations);
            if b.value > node.budget as f64 + EPS {
                return Outcome::Pruned;
            }
            let Ok(changed) = self.fix_by_reduced_cost(&mut node, &b) else {
                return Outcome::Pruned;
            };
            bound = Some(b);
            if !changed {
                break;
            }
        }
        let bound = bound.expect("loop runs at least once");

        if let Some(cols) = self.greedy_completion(&node, &bound.reduced) {
            return Outcome::Found(cols);
        }

        let open = node.open_rows();
        if open.len() <= node.outliers {
            return Outcome::Found(node.chosen());
        }
        let branch_row = *open
            .iter()
            .min_by_key(|&&r| (node.free_count(cover, r), r))
            .expect("open rows exceed the outlier budget");
        let mut candidates: Vec<usize> = cover.row_cols[branch_row]
            .iter()
            .map(|&c| c as usize)
            .filter(|&c| node.col[c] == ColState::Free)
            .collect();
        candidates.sort_by(|&a, &b| {
            bound.reduced[a]
                .total_cmp(&bound.reduced[b])
                .then_with(|| a.cmp(&b))
        });

        for (k, &c) in candidates.iter().enumerate() {
            let mut child = node.clone();
            child.depth += 1;
            for &prev in &candidates[..k] {
                child.col[prev] = ColState::Excluded;
            }
            if child.choose(cover, c).is_err() {
                continue;
            }
            match self.dfs(child) {
                Outcome::Pruned => {}
                other => return other,
            }
        }
        if node.outliers > 0 {
            let mut child = node;
            child.depth += 1;
            for &c in &candidates {
                child.col[c] = ColState::Excluded;
            }
            child.row[branch_row] = RowState::Outlier;
            child.outliers -= 1;
            return self.dfs(child);
        }
        Outcome::Pruned
    }

    /// Size of a greedy set of open rows with pairwise disjoint free
    /// candidate sets; each needs its own center or an outlier slot.
    fn packing_bound(&self, node: &Node, open: &[usize]) -> usize {
        let cover = self.cover;
        let mut order: Vec<(usize, usize)> = open
            .iter()
            .map(|&r| (node.free_count(cover, r), r))
            .collect();
        order.sort_unstable();
        let mut used = vec![false; cover.col_point.len()];
        let mut count = 0;
        for (_, r) in order {
            let cols = cover.row_cols[r]
                .iter()
                .map(|&c| c as usize)
                .filter(|&c| node.col[c] == ColState::Free);
            if cols.clone().any(|c| used[c]) {
                continue;
            }
            for c in cols {
                used[c] = true;
            }
            count += 1;
        }
        count
    }

    /// Subgradient ascent on the Lagrangian dual of the covering constraints.
    ///
    /// For multipliers `λ ≥ 0` on open rows, with reduced costs
    /// `r_c = 1 − Σ_{rows of c} λ_r`, every feasible completion uses at least
    /// `Σ λ − (sum of the Ξ largest λ) + Σ_c min(0, r_c)` further centers.
    fn lagrangian(&self, node: &mut Node, open: &[usize], iterations: usize) -> Bound {
        let cover = self.cover;
        let ncols = cover.col_point.len();
        let m = open.len();

        // Compact incidence restricted to open rows and free columns.
        let mut local = vec![u32::MAX; cover.row_point.len()];
        for (i, &r) in open.iter().enumerate() {
            local[r] = i as u32;
        }
        let mut cols: Vec<usize> = Vec::new();
        let mut col_start = vec![0usize];
        let mut col_rows: Vec<u32> = Vec::new();
        for c in 0..ncols {
            if node.col[c] != ColState::Free {
                continue;
            }
            let before = col_rows.len();
            col_rows.extend(
                cover.col_rows[c]
                    .iter()
                    .map(|&r| local[r as usize])
                    .filter(|&i| i != u32::MAX),
            );
            if col_rows.len() > before {
                cols.push(c);
                col_start.push(col_rows.len());
            }
        }
        let k = cols.len();
        let mut row_start = vec![0usize; m + 1];
        for &i in &col_rows {
            row_start[i as usize + 1] += 1;
        }
        for i in 0..m {
            row_start[i + 1] += row_start[i];
        }
        let mut fill = row_start.clone();
        let mut row_cols = vec![0u32; col_rows.len()];
        for j in 0..k {
            for &i in &col_rows[col_start[j]..col_start[j + 1]] {
                row_cols[fill[i as usize]] = j as u32;
                fill[i as usize] += 1;
            }
        }

        let mut lambda = vec![0.0f64; m];
        let warm = open.iter().any(|&r| node.lambda[r] > 0.0);
        if warm {
            for (i, &r) in open.iter().enumerate() {
                lambda[i] = node.lambda[r];
            }
        } else {
            for (i, l) in lambda.iter_mut().enumerate() {
                let best = row_cols[row_start[i]..row_start[i + 1]]
                    .iter()
                    .map(|&j| (col_start[j as usize + 1] - col_start[j as usize]) as f64)
                    .fold(0.0, f64::max);
                *l = if best > 0.0 { 1.0 / best } else { 0.0 };
            }
        }

        let target = node.budget as f64 + 1.0;
        let mut reduced = vec![0.0f64; k];
        let mut best_value = f64::NEG_INFINITY;
        let mut best_reduced = vec![0.0f64; k];
        let mut best_lambda = lambda.clone();
        let mut step = if warm { 0.5 } else { 2.0 };
        let mut stall = 0;
        let mut top: Vec<f64> = Vec::new();
        let mut g = vec![0.0f64; m];

        for _ in 0..iterations {
            for j in 0..k {
                reduced[j] = 1.0
                    - col_rows[col_start[j]..col_start[j + 1]]
                        .iter()
                        .map(|&i| lambda[i as usize])
                        .sum::<f64>();
            }
            let mut value: f64 = lambda.iter().sum();
            let mut threshold = f64::INFINITY;
            if node.outliers > 0 {
                top.clear();
                top.extend_from_slice(&lambda);
                let q = node.outliers.min(m);
                top.select_nth_unstable_by(q - 1, |a, b| b.total_cmp(a));
                value -= top[..q].iter().sum::<f64>();
                threshold = top[q - 1];
            }
            value += reduced.iter().map(|&r| r.min(0.0)).sum::<f64>();

            if value > best_value + 1e-9 {
                best_value = value;
                best_reduced.copy_from_slice(&reduced);
                best_lambda.copy_from_slice(&lambda);
                stall = 0;
            } else {
                stall += 1;
                if stall >= 10 {
                    step *= 0.5;
                    stall = 0;
                }
            }
            if best_value > node.budget as f64 + EPS || step < 5e-3 {
                break;
            }

            // Subgradient: slack of each covering constraint at the
            // Lagrangian minimizer.
            let mut outlier_slots = node.outliers;
            for i in 0..m {
                let mut s = 1.0;
                for &j in &row_cols[row_start[i]..row_start[i + 1]] {
                    if reduced[j as usize] < 0.0 {
                        s -= 1.0;
                    }
                }
                if outlier_slots > 0 && lambda[i] > threshold {
                    s -= 1.0;
                    outlier_slots -= 1;
                }
                g[i] = s;
            }
            if outlier_slots > 0 {
                for i in 0..m {
                    if outlier_slots == 0 {
                        break;
                    }
                    if lambda[i] == threshold {
                        g[i] -= 1.0;
                        outlier_slots -= 1;
                    }
                }
            }
            let norm: f64 = g.iter().map(|x| x * x).sum();
            if norm == 0.0 {
                break;
            }
            let t = step * (target - value).max(0.0) / norm;
            if t == 0.0 {
                break;
            }
            for i in 0..m {
                lambda[i] = (lambda[i] + t * g[i]).max(0.0);
            }
        }

        for (i, &r) in open.iter().enumerate() {
            node.lambda[r] = best_lambda[i];
        }
        // Free columns that touch no open row keep reduced cost 1.
        let mut full = vec![1.0f64; ncols];
        for (j, &c) in cols.iter().enumerate() {
            full[c] = best_reduced[j];
        }
        Bound {
            value: best_value,
            reduced: full,
        }
    }

    /// Reduced-cost fixing. Returns whether any column changed state.
    fn fix_by_reduced_cost(
        &self,
        node: &mut Node,
        bound: &Bound,
    ) -> std::result::Result<bool, Infeasible> {
        let limit = node.budget as f64 + EPS;
        let mut forced = Vec::new();
        let mut changed = false;
        for c in 0..node.col.len() {
            if node.col[c] != ColState::Free {
                continue;
            }
            let r = bound.reduced[c];
            if r >= 0.0 && bound.value + r > limit {
                node.col[c] = ColState::Excluded;
                changed = true;
            } else if r < 0.0 && bound.value - r > limit {
                forced.push(c);
            }
        }
        for c in forced {
            if node.col[c] != ColState::Free {
                continue;
            }
            node.choose(self.cover, c)?;
            changed = true;
        }
        Ok(changed)
    }

    /// Greedy max-coverage completion followed by redundancy removal.
    fn greedy_completion(&self, node: &Node, reduced: &[f64]) -> Option<Vec<u32>> {
        let cover = self.cover;
        let ncols = cover.col_point.len();
        let mut uncovered = vec![false; cover.row_point.len()];
        let mut remaining = 0usize;
        for r in 0..cover.row_point.len() {
            if node.row[r] == RowState::Open {
                uncovered[r] = true;
                remaining += 1;
            }
        }
        let mut gain = vec![0usize; ncols];
        for c in 0..ncols {
            if node.col[c] == ColState::Free {
                gain[c] = cover.col_rows[c]
                    .iter()
                    .filter(|&&r| uncovered[r as usize])
                    .count();
            }
        }
        let mut picks: Vec<usize> = Vec::new();
        let slack = node.budget + node.budget / 4 + 2;
        while remaining > node.outliers && picks.len() < slack {
            let best = (0..ncols)
                .filter(|&c| node.col[c] == ColState::Free && gain[c] > 0)
                .max_by(|&a, &b| {
                    gain[a]
                        .cmp(&gain[b])
                        .then_with(|| reduced[b].total_cmp(&reduced[a]))
                        .then_with(|| b.cmp(&a))
                });
            let Some(c) = best else { break };
            picks.push(c);
            gain[c] = 0;
            for &r in &cover.col_rows[c] {
                let r = r as usize;
                if uncovered[r] {
                    uncovered[r] = false;
                    remaining -= 1;
                    for &c2 in &cover.row_cols[r] {
                        let c2 = c2 as usize;
                        if gain[c2] > 0 {
                            gain[c2] -= 1;
                        }
                    }
                }
            }
        }
        if remaining > node.outliers {
            return None;
        }

        // Drop picks whose removal keeps the uncovered count within budget,
        // trying the least useful first.
        let mut count = vec![0u32; cover.row_point.len()];
        for &c in &picks {
            for &r in &cover.col_rows[c] {
                if node.row[r as usize] == RowState::Open {
                    count[r as usize] += 1;
                }
            }
        }
        let mut order: Vec<usize> = (0..picks.len()).collect();
        let own = |c: usize| {
            cover.col_rows[c]
                .iter()
                .filter(|&&r| node.row[r as usize] == RowState::Open)
                .count()
        };
        order.sort_by(|&a, &b| match own(picks[a]).cmp(&own(picks[b])) {
            Ordering::Equal => b.cmp(&a),
            o => o,
        });
        let mut keep = vec![true; picks.len()];
        for k in order {
            let c = picks[k];
            let lost = cover.col_rows[c]
                .iter()
                .filter(|&&r| node.row[r as usize] == RowState::Open && count[r as usize] == 1)
                .count();
            if remaining + lost <= node.outliers {
                keep[k] = false;
                remaining += lost;
                for &r in &cover.col_rows[c] {
                    if node.row[r as usize] == RowState::Open {
                        count[r as usize] -= 1;
                    }
                }
            }
        }
        let picks: Vec<usize> = picks
            .into_iter()
            .zip(keep)
            .filter_map(|(c, k)| k.then_some(c))
            .collect();
        if picks.len() > node.budget {
            return None;
        }
        let mut cols = node.chosen();
        cols.extend(picks.into_iter().map(|c| c as u32));
        Some(cols)
    }
}
