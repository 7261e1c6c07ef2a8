//! Confidence intervals and hypothesis tests from the entropy and divergence CLTs.
//!
//! Non-degenerate projections give normal intervals for `H_a` and `D_a`
//! ([`entropy_ci`], [`divergence_ci`]). The degenerate cases, uniform `p` and
//! `p = q`, are handled by the chi-square type statistics in
//! [`uniformity_test`] and [`equality_test`].

mod chi_square;
mod hypothesis;
mod intervals;
mod thinning;

use serde::Serialize;

pub use chi_square::{chi_square_null_params, pearson_chi_square, two_sample_chi_square, NullParams};
pub use hypothesis::{equality_test, uniformity_test, EqualitySamples, PairingMode, UniformityMethod};
pub use intervals::{divergence_ci, entropy_ci, hill_ci};
pub use thinning::{binomial_thinning, binomial_thinning_joint};

use crate::error::{Error, Result};
use crate::projections::LdReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CiMethod {
    /// Rényi entropy CLT with projection W.
    Thm1,
    /// Rényi divergence CLT with projection V.
    Thm2,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateWithCI {
    pub estimate: f64,
    pub level: f64,
    pub lower: f64,
    pub upper: f64,
    pub std_error: f64,
    pub n: u64,
    pub m: usize,
    pub method: CiMethod,
    pub diagnostics: LdReport,
}

impl EstimateWithCI {
    pub fn covers(&self, value: f64) -> bool {
        self.lower <= value && value <= self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Sidedness {
    TwoSided,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TestMethod {
    /// Standardized Pearson statistic against a known distribution.
    Lemma2i,
    /// Standardized two-sample chi-square with equal marginals.
    Lemma2ii,
    /// Uniform-entropy CLT.
    Thm3,
    /// Degenerate divergence CLT.
    Thm4,
    /// Sum of squared standardized divergence statistics over several pairs.
    Chi2Homogeneity,
}

/// Outcome of a test. `statistic` is the standardized value compared with the
/// null distribution; `raw_statistic` is the unstandardized quantity it was
/// built from, with `null_mean` and `null_sd` on the raw scale.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestReport {
    pub statistic: f64,
    pub raw_statistic: f64,
    pub null_mean: f64,
    pub null_sd: f64,
    pub p_value: f64,
    pub sidedness: Sidedness,
    pub m: usize,
    pub n: u64,
    pub method: TestMethod,
}

impl TestReport {
    pub fn rejects(&self, significance: f64) -> bool {
        self.p_value < significance
    }
}

pub(crate) fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("level must lie in (0, 1), got {level}")))
    }
}

/// Indices of categories with a positive count in either sample.
pub(crate) fn union_support(x: &[u64], y: &[u64]) -> Vec<usize> {
    (0..x.len()).filter(|&i| x[i] > 0 || y[i] > 0).collect()
}

/// Effective sample size for two independent samples; equals `n` when both have size `n`.
pub(crate) fn effective_n(nx: u64, ny: u64) -> f64 {
    if nx == ny {
        nx as f64
    } else {
        2.0 * nx as f64 * ny as f64 / (nx + ny) as f64
    }
}
