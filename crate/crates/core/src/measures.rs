//! Power sums, Rényi entropy and divergence, Tsallis entropy and Hill numbers.
//!
//! All logarithms are natural, so entropies and divergences are in nats.
//! Zero-probability categories contribute nothing to any sum (`0^a = 0`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::csum;

/// Tolerance on `sum(p) == 1` accepted by [`ProbVector::new`].
pub const SUM_TOLERANCE: f64 = 1e-12;

/// Exponent of a power sum, restricted to the open interval (0, 1).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Alpha(f64);

impl Alpha {
    pub fn new(value: f64) -> Result<Self> {
        if value > 0.0 && value < 1.0 {
            Ok(Alpha(value))
        } else {
            Err(Error::domain(format!("alpha must lie in (0, 1), got {value}")))
        }
    }

    /// The Bhattacharyya exponent 1/2.
    pub fn half() -> Self {
        Alpha(0.5)
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }

    /// Generalized binomial coefficient `C(alpha, 2) = alpha (alpha - 1) / 2`.
    pub fn binom2(self) -> f64 {
        self.0 * (self.0 - 1.0) / 2.0
    }
}

impl TryFrom<f64> for Alpha {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Alpha::new(v)
    }
}

impl From<Alpha> for f64 {
    fn from(a: Alpha) -> f64 {
        a.0
    }
}

/// A discrete probability distribution over `m >= 1` categories.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbVector {
    probs: Vec<f64>,
}

impl ProbVector {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::domain("a distribution needs at least one category"));
        }
        if let Some(bad) = probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::domain(format!("probabilities must be finite and >= 0, got {bad}")));
        }
        let total = csum(probs.iter().copied());
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::domain(format!("probabilities sum to {total}, not 1")));
        }
        Ok(ProbVector { probs })
    }

    /// Normalizes non-negative weights.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let total = csum(weights.iter().copied());
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::domain("weights must have a positive finite total"));
        }
        ProbVector::new(weights.iter().map(|w| w / total).collect())
    }

    /// Empirical frequencies `count_i / n`.
    pub fn from_counts(counts: &[u64]) -> Result<Self> {
        let n: u64 = counts.iter().sum();
        if n == 0 {
            return Err(Error::domain("cannot normalize an all-zero count vector"));
        }
        let n = n as f64;
        ProbVector::new(counts.iter().map(|&c| c as f64 / n).collect())
    }

    pub fn uniform(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::domain("uniform distribution needs m >= 1"));
        }
        Ok(ProbVector { probs: vec![1.0 / m as f64; m] })
    }

    #[inline]
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Number of categories, including zero-probability ones.
    #[inline]
    pub fn m(&self) -> usize {
        self.probs.len()
    }

    /// Number of categories with positive probability.
    pub fn support_size(&self) -> usize {
        self.probs.iter().filter(|&&p| p > 0.0).count()
    }

    /// Smallest positive probability.
    pub fn min_positive(&self) -> f64 {
        self.probs
            .iter()
            .copied()
            .filter(|&p| p > 0.0)
            .fold(f64::INFINITY, f64::min)
    }

    /// The distribution restricted to its positive support, renumbered.
    pub fn positive_part(&self) -> ProbVector {
        ProbVector { probs: self.probs.iter().copied().filter(|&p| p > 0.0).collect() }
    }
}

/// A bivariate distribution `(p_ij)` over an `m x m` grid, stored densely row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    m: usize,
    cells: Vec<f64>,
}

impl JointDistribution {
    pub fn new(m: usize, cells: Vec<f64>) -> Result<Self> {
        if m == 0 {
            return Err(Error::domain("joint distribution needs m >= 1"));
        }
        if cells.len() != m * m {
            return Err(Error::Shape { expected: m * m, actual: cells.len() });
        }
        if cells.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::domain("joint probabilities must be finite and >= 0"));
        }
        let total = csum(cells.iter().copied());
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::domain(format!("joint probabilities sum to {total}, not 1")));
        }
        Ok(JointDistribution { m, cells })
    }

    /// The product joint `p_i q_j` of independent marginals.
    pub fn product(p: &ProbVector, q: &ProbVector) -> Result<Self> {
        check_same_m(p, q)?;
        let m = p.m();
        let mut cells = Vec::with_capacity(m * m);
        for &pi in p.probs() {
            cells.extend(q.probs().iter().map(|&qj| pi * qj));
        }
        Ok(JointDistribution { m, cells })
    }

    /// `(1 - rho) p_i p_j + rho p_i 1{i = j}`: equal marginals `p`, dependence `rho` in [0, 1].
    pub fn equal_marginal_blend(p: &ProbVector, rho: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&rho) {
            return Err(Error::domain(format!("rho must lie in [0, 1], got {rho}")));
        }
        let m = p.m();
        let mut cells = Vec::with_capacity(m * m);
        for (i, &pi) in p.probs().iter().enumerate() {
            for (j, &pj) in p.probs().iter().enumerate() {
                let diag = if i == j { rho * pi } else { 0.0 };
                cells.push((1.0 - rho) * pi * pj + diag);
            }
        }
        Ok(JointDistribution { m, cells })
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.cells[i * self.m + j]
    }

    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    /// Row marginal (distribution of X).
    pub fn row_marginal(&self) -> Vec<f64> {
        self.cells.chunks(self.m).map(|row| csum(row.iter().copied())).collect()
    }

    /// Column marginal (distribution of Y).
    pub fn col_marginal(&self) -> Vec<f64> {
        (0..self.m)
            .map(|j| csum((0..self.m).map(|i| self.get(i, j))))
            .collect()
    }

    /// Iterator over `(i, j, p_ij)` for the positive cells.
    pub fn positive_cells(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let m = self.m;
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(move |(k, &p)| (k / m, k % m, p))
    }
}

pub(crate) fn check_same_m(p: &ProbVector, q: &ProbVector) -> Result<()> {
    if p.m() != q.m() {
        return Err(Error::Shape { expected: p.m(), actual: q.m() });
    }
    Ok(())
}

/// `S_a(p) = sum p_i^a` over the positive support.
pub fn power_sum(p: &ProbVector, alpha: Alpha) -> f64 {
    power_sum_raw(p.probs(), alpha.get())
}

pub(crate) fn power_sum_raw(p: &[f64], a: f64) -> f64 {
    csum(p.iter().filter(|&&x| x > 0.0).map(|&x| x.powf(a)))
}

/// Value of `S_a(p, q) = sum p_i^a q_i^(1-a)` with a support diagnostic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrossPowerSum {
    pub value: f64,
    /// Mass of `p` on categories where `q` is zero; those terms contribute 0.
    pub unmatched_p_mass: f64,
}

/// `S_a(p, q)`. Terms with `p_i = 0` or `q_i = 0` contribute nothing.
pub fn cross_power_sum(p: &ProbVector, q: &ProbVector, alpha: Alpha) -> Result<CrossPowerSum> {
    check_same_m(p, q)?;
    Ok(cross_power_sum_raw(p.probs(), q.probs(), alpha.get()))
}

pub(crate) fn cross_power_sum_raw(p: &[f64], q: &[f64], a: f64) -> CrossPowerSum {
    let value = csum(
        p.iter()
            .zip(q)
            .filter(|(&pi, &qi)| pi > 0.0 && qi > 0.0)
            .map(|(&pi, &qi)| pi.powf(a) * qi.powf(1.0 - a)),
    );
    let unmatched_p_mass = csum(
        p.iter()
            .zip(q)
            .filter(|(&pi, &qi)| pi > 0.0 && qi == 0.0)
            .map(|(&pi, _)| pi),
    );
    CrossPowerSum { value, unmatched_p_mass }
}

/// Rényi entropy `H_a(p) = log S_a(p) / (1 - a)`.
pub fn renyi_entropy(p: &ProbVector, alpha: Alpha) -> f64 {
    power_sum(p, alpha).ln() / (1.0 - alpha.get())
}

/// Rényi divergence `D_a(p, q) = log S_a(p, q) / (a - 1)`.
///
/// Infinite when `p` and `q` have disjoint supports.
pub fn renyi_divergence(p: &ProbVector, q: &ProbVector, alpha: Alpha) -> Result<f64> {
    let s = cross_power_sum(p, q, alpha)?;
    Ok(divergence_from_sum(s.value, alpha.get()))
}

pub(crate) fn divergence_from_sum(s: f64, a: f64) -> f64 {
    // S_a(p, p) can round a hair above 1; the divergence is non-negative.
    (s.ln() / (a - 1.0)).max(0.0)
}

/// Tsallis entropy `(S_a(p) - 1) / (1 - a)`.
pub fn tsallis_entropy(p: &ProbVector, alpha: Alpha) -> f64 {
    (power_sum(p, alpha) - 1.0) / (1.0 - alpha.get())
}

/// Hill number (effective number of classes) `S_a(p)^(1 / (1 - a)) = exp(H_a(p))`.
pub fn hill_number(p: &ProbVector, alpha: Alpha) -> f64 {
    renyi_entropy(p, alpha).exp()
}
