use serde::Serialize;

use crate::counts::{CountVector, JointCountTable};
use crate::error::{Error, Result};
use crate::measures::{JointDistribution, ProbVector};
use crate::numeric::{csum, CompensatedSum};

/// Marginals closer than this are treated as equal.
const MARGINAL_TOLERANCE: f64 = 1e-9;

fn require_positive(p: &ProbVector) -> Result<()> {
    if let Some(i) = p.probs().iter().position(|&x| x <= 0.0) {
        return Err(Error::domain(format!("reference probability at category {i} is zero")));
    }
    Ok(())
}

/// Pearson statistic `n sum (p^_i - p_i)^2 / p_i`.
pub fn pearson_chi_square(c: &CountVector, p: &ProbVector) -> Result<f64> {
    if c.m() != p.m() {
        return Err(Error::Shape { expected: p.m(), actual: c.m() });
    }
    require_positive(p)?;
    let n = c.n() as f64;
    Ok(n * csum(c.counts().iter().zip(p.probs()).map(|(&k, &pi)| {
        let d = k as f64 / n - pi;
        d * d / pi
    })))
}

/// Two-sample statistic `n sum (p^_i - q^_i)^2 / (2 p_i)` on the marginals of a joint table.
pub fn two_sample_chi_square(joint: &JointCountTable, p: &ProbVector) -> Result<f64> {
    if joint.m() != p.m() {
        return Err(Error::Shape { expected: p.m(), actual: joint.m() });
    }
    require_positive(p)?;
    let n = joint.n() as f64;
    let x = joint.row_counts();
    let y = joint.col_counts();
    Ok(n * csum((0..p.m()).map(|i| {
        let d = (x.counts()[i] as f64 - y.counts()[i] as f64) / n;
        d * d / (2.0 * p.probs()[i])
    })))
}

/// Centering `mu_n` and scale `gamma_n^2` of the two-sample chi-square under equal marginals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NullParams {
    pub mu: f64,
    pub gamma_sq: f64,
}

/// `mu_n = sum (1 - p_ii / p_i)` and
/// `gamma_n^2 = sum (p_i - p_ii)^2 / p_i^2 + sum_{i != j} (p_ij + p_ji)^2 / (4 p_i p_j)`.
///
/// Categories with zero marginal mass are skipped.
pub fn chi_square_null_params(joint: &JointDistribution) -> Result<NullParams> {
    let rows = joint.row_marginal();
    let cols = joint.col_marginal();
    if let Some(i) = (0..rows.len()).find(|&i| (rows[i] - cols[i]).abs() > MARGINAL_TOLERANCE) {
        return Err(Error::domain(format!(
            "marginals differ at category {i}: {} vs {}",
            rows[i], cols[i]
        )));
    }
    let support: Vec<usize> = (0..rows.len()).filter(|&i| rows[i] > 0.0).collect();
    let marginal = |i: usize| 0.5 * (rows[i] + cols[i]);

    let mut mu = CompensatedSum::new();
    let mut gamma = CompensatedSum::new();
    for (k, &i) in support.iter().enumerate() {
        let pi = marginal(i);
        let pii = joint.get(i, i);
        mu.add(1.0 - pii / pi);
        gamma.add((pi - pii) * (pi - pii) / (pi * pi));
        for &j in &support[k + 1..] {
            let s = joint.get(i, j) + joint.get(j, i);
            // (i, j) and (j, i) contribute equally
            gamma.add(s * s / (2.0 * pi * marginal(j)));
        }
    }
    Ok(NullParams { mu: mu.value(), gamma_sq: gamma.value() })
}
