use crate::error::{Error, Result};

/// Points added in one acquisition round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundRecord {
    pub round: usize,
    pub added: Vec<usize>,
}

/// Split of the pool `0..n` into a labeled set (in labeling order) and the
/// unlabeled remainder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoolState {
    labeled: Vec<usize>,
    is_labeled: Vec<bool>,
    round: usize,
    history: Vec<RoundRecord>,
}

impl PoolState {
    /// A pool of `n` points with `initial` labeled. Duplicates are rejected.
    pub fn new(n: usize, initial: &[usize]) -> Result<Self> {
        let mut state = Self {
            labeled: Vec::with_capacity(initial.len()),
            is_labeled: vec![false; n],
            round: 0,
            history: Vec::new(),
        };
        state.insert(initial)?;
        Ok(state)
    }

    fn insert(&mut self, points: &[usize]) -> Result<()> {
        let n = self.is_labeled.len();
        for (k, &i) in points.iter().enumerate() {
            if i >= n {
                return Err(Error::IndexOutOfRange { index: i, len: n });
            }
            if self.is_labeled[i] || points[..k].contains(&i) {
                return Err(Error::InvalidArgument(format!(
                    "point {i} is already labeled"
                )));
            }
        }
        for &i in points {
            self.is_labeled[i] = true;
            self.labeled.push(i);
        }
        Ok(())
    }

    /// Labels `points` and closes the current round.
    pub fn label(&mut self, points: &[usize]) -> Result<()> {
        self.insert(points)?;
        self.history.push(RoundRecord {
            round: self.round,
            added: points.to_vec(),
        });
        self.round += 1;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.is_labeled.len()
    }

    pub fn is_empty(&self) -> bool {
        self.is_labeled.is_empty()
    }

    /// Labeled points in the order they were labeled.
    pub fn labeled(&self) -> &[usize] {
        &self.labeled
    }

    /// Unlabeled points in increasing order.
    pub fn unlabeled(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| !self.is_labeled[i]).collect()
    }

    pub fn unlabeled_count(&self) -> usize {
        self.len() - self.labeled.len()
    }

    pub fn is_labeled(&self, i: usize) -> bool {
        self.is_labeled[i]
    }

    pub fn round(&self) -> usize {
        self.round
    }

    pub fn history(&self) -> &[RoundRecord] {
        &self.history
    }
}
