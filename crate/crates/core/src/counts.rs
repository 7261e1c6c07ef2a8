//! Observed category counts for one sample, and joint counts for paired samples.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::ProbVector;

/// Category counts of one sample; `n = sum(counts) >= 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CountVector {
    counts: Vec<u64>,
    n: u64,
}

impl CountVector {
    pub fn new(counts: Vec<u64>) -> Result<Self> {
        let n = counts.iter().sum();
        if n == 0 {
            return Err(Error::domain("count vector has total n = 0"));
        }
        Ok(CountVector { counts, n })
    }

    #[inline]
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    #[inline]
    pub fn n(&self) -> u64 {
        self.n
    }

    /// Number of categories, including unobserved ones.
    #[inline]
    pub fn m(&self) -> usize {
        self.counts.len()
    }

    /// Number of categories with a positive count.
    pub fn observed(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    /// Plug-in frequencies `count_i / n`.
    pub fn frequencies(&self) -> ProbVector {
        ProbVector::from_counts(&self.counts).expect("n >= 1")
    }

    /// The counts of the given categories, in the given order.
    pub fn restrict(&self, categories: &[usize]) -> Result<CountVector> {
        CountVector::new(categories.iter().map(|&i| self.counts[i]).collect())
    }

    pub fn into_counts(self) -> Vec<u64> {
        self.counts
    }
}

/// Sparse `m x m` table of paired counts `(x, y) -> count`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct JointCountTable {
    m: usize,
    cells: BTreeMap<(usize, usize), u64>,
    n: u64,
}

impl JointCountTable {
    pub fn new(m: usize, cells: impl IntoIterator<Item = ((usize, usize), u64)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for ((i, j), c) in cells {
            if i >= m || j >= m {
                return Err(Error::domain(format!("cell ({i}, {j}) outside a {m} x {m} table")));
            }
            if c > 0 {
                *map.entry((i, j)).or_insert(0) += c;
            }
        }
        let n = map.values().sum();
        if n == 0 {
            return Err(Error::domain("joint count table has total n = 0"));
        }
        Ok(JointCountTable { m, cells: map, n })
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.cells.get(&(i, j)).copied().unwrap_or(0)
    }

    /// Positive cells in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = ((usize, usize), u64)> + '_ {
        self.cells.iter().map(|(&k, &v)| (k, v))
    }

    /// Counts of the first coordinate (sample X).
    pub fn row_counts(&self) -> CountVector {
        let mut v = vec![0; self.m];
        for (&(i, _), &c) in &self.cells {
            v[i] += c;
        }
        CountVector::new(v).expect("n >= 1")
    }

    /// Counts of the second coordinate (sample Y).
    pub fn col_counts(&self) -> CountVector {
        let mut v = vec![0; self.m];
        for (&(_, j), &c) in &self.cells {
            v[j] += c;
        }
        CountVector::new(v).expect("n >= 1")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn count_vector_total() {
        let c = CountVector::new(vec![3, 0, 7]).unwrap();
        assert_eq!(c.n(), 10);
        assert_eq!(c.m(), 3);
        assert_eq!(c.observed(), 2);
        assert!(CountVector::new(vec![0, 0]).is_err());
        assert!(CountVector::new(vec![]).is_err());
    }

    #[test]
    fn joint_marginals() {
        let t = JointCountTable::new(2, [((0, 0), 5), ((0, 1), 3), ((1, 0), 0), ((1, 1), 2)]).unwrap();
        assert_eq!(t.n(), 10);
        assert_eq!(t.row_counts().counts(), &[8, 2]);
        assert_eq!(t.col_counts().counts(), &[5, 5]);
        assert!(JointCountTable::new(2, [((2, 0), 1)]).is_err());
    }
}
