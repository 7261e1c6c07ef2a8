//! Power-law (Zipf-type) count models: `p_i = i^(-beta) / H(beta, m)`.

use serde::Serialize;

use crate::counts::CountVector;
use crate::error::{Error, Result};
use crate::measures::ProbVector;
use crate::numeric::csum;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerLawModel {
    pub beta: f64,
    pub m: usize,
    /// `H(beta, m) = sum_{i=1}^m i^(-beta)`.
    pub h_norm: f64,
}

impl PowerLawModel {
    pub fn new(beta: f64, m: usize) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::domain(format!("power-law exponent must be > 0, got {beta}")));
        }
        if m == 0 {
            return Err(Error::domain("power law needs m >= 1"));
        }
        let h_norm = csum((1..=m).map(|i| (i as f64).powf(-beta)));
        Ok(PowerLawModel { beta, m, h_norm })
    }

    pub fn pmf(&self) -> ProbVector {
        let probs = (1..=self.m)
            .map(|i| (i as f64).powf(-self.beta) / self.h_norm)
            .collect();
        ProbVector::new(probs).expect("normalized power law")
    }
}

pub fn powerlaw_pmf(beta: f64, m: usize) -> Result<ProbVector> {
    Ok(PowerLawModel::new(beta, m)?.pmf())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitResult {
    pub beta_hat: f64,
    pub std_error: f64,
    pub residual_sse: f64,
}

/// Least-squares fit of `log(count)` on `log(rank)` over all positive ranks.
pub fn fit_powerlaw_ls(c: &CountVector) -> Result<FitResult> {
    let values: Vec<f64> = c.counts().iter().map(|&x| x as f64).collect();
    fit_powerlaw_values(&values)
}

/// Same as [`fit_powerlaw_ls`] for real-valued abundances (e.g. frequencies).
pub fn fit_powerlaw_values(values: &[f64]) -> Result<FitResult> {
    let mut sorted: Vec<f64> = values.iter().copied().filter(|&v| v > 0.0).collect();
    if sorted.len() < 3 {
        return Err(Error::domain(format!(
            "power-law fit needs at least 3 positive categories, got {}",
            sorted.len()
        )));
    }
    sorted.sort_by(|a, b| b.total_cmp(a));
    let k = sorted.len() as f64;
    let xs: Vec<f64> = (1..=sorted.len()).map(|r| (r as f64).ln()).collect();
    let ys: Vec<f64> = sorted.iter().map(|v| v.ln()).collect();
    let x_mean = csum(xs.iter().copied()) / k;
    let y_mean = csum(ys.iter().copied()) / k;
    let sxx = csum(xs.iter().map(|x| (x - x_mean).powi(2)));
    let sxy = csum(xs.iter().zip(&ys).map(|(x, y)| (x - x_mean) * (y - y_mean)));
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let residual_sse = csum(
        xs.iter()
            .zip(&ys)
            .map(|(x, y)| (y - intercept - slope * x).powi(2)),
    );
    let std_error = (residual_sse / (k - 2.0) / sxx).sqrt();
    Ok(FitResult { beta_hat: -slope, std_error, residual_sse })
}

/// Abundance QQ data: for rank `r`, `(ln(n p_r), ln(c_(r)))` where `c_(r)` is the
/// `r`-th largest observed count and `n p_r` the model's expected count at that rank.
///
/// Ranks run over the positive counts, capped at the model size. Points on the
/// diagonal mean the model reproduces the observed rank-abundance curve.
pub fn powerlaw_qq(counts: &[u64], model: &PowerLawModel) -> Vec<(f64, f64)> {
    let mut observed: Vec<u64> = counts.iter().copied().filter(|&x| x > 0).collect();
    observed.sort_unstable_by(|a, b| b.cmp(a));
    let n: u64 = observed.iter().sum();
    let n = n as f64;
    observed
        .iter()
        .take(model.m)
        .enumerate()
        .map(|(r, &count)| {
            let expected = n * ((r + 1) as f64).powf(-model.beta) / model.h_norm;
            (expected.ln(), (count as f64).ln())
        })
        .collect()
}
