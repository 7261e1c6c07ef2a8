//! Moments of the projection variables W and V, and finite-n values of the
//! conditions under which the entropy and divergence CLTs apply.
//!
//! `W` takes the value `a p_i^(a-1)` with probability `p_i`; `V` takes the value
//! `a (q_i/p_i)^(1-a) + (1-a) (p_j/q_j)^a` with probability `p_ij`. Their
//! variances drive the non-degenerate CLTs and vanish exactly when `p` is
//! uniform (for W) or `p = q` (for V).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::{power_sum_raw, Alpha, JointDistribution, ProbVector};
use crate::numeric::csum;

/// Finite-n quotient below which a condition is reported as satisfied.
pub const ADVISORY_PASS: f64 = 0.1;
/// Finite-n quotient below which a condition is reported as marginal.
pub const ADVISORY_MARGINAL: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProjectionMoments {
    pub mean: f64,
    pub variance: f64,
    /// `sqrt(variance) / |mean|`.
    pub cv: f64,
}

impl ProjectionMoments {
    fn new(mean: f64, variance: f64) -> Self {
        let variance = variance.max(0.0);
        ProjectionMoments { mean, variance, cv: variance.sqrt() / mean.abs() }
    }
}

/// Moments of W for a strictly positive `p`.
pub fn projection_w_moments(p: &ProbVector, alpha: Alpha) -> Result<ProjectionMoments> {
    if p.probs().contains(&0.0) {
        return Err(Error::domain("W is undefined on zero-probability categories"));
    }
    Ok(w_moments_raw(p.probs(), alpha.get()))
}

/// W moments over the positive entries of `p`, skipping zeros.
pub(crate) fn w_moments_raw(p: &[f64], a: f64) -> ProjectionMoments {
    let values = || p.iter().filter(|&&x| x > 0.0).map(move |&x| (x, a * x.powf(a - 1.0)));
    let mean = csum(values().map(|(x, w)| x * w));
    // Two-pass variance keeps the uniform case at (numerically) zero.
    let variance = csum(values().map(|(x, w)| x * (w - mean) * (w - mean)));
    ProjectionMoments::new(mean, variance)
}

/// Moments of V for a joint distribution whose marginals share their support.
pub fn projection_v_moments(joint: &JointDistribution, alpha: Alpha) -> Result<ProjectionMoments> {
    let p = joint.row_marginal();
    let q = joint.col_marginal();
    if let Some(i) = (0..p.len()).find(|&i| (p[i] > 0.0) != (q[i] > 0.0)) {
        return Err(Error::domain(format!(
            "marginals disagree on support at category {i} (p = {}, q = {})",
            p[i], q[i]
        )));
    }
    Ok(v_moments_joint_raw(joint, &p, &q, alpha.get()))
}

/// V moments over the positive cells of `joint`, with zero-convention terms.
pub(crate) fn v_moments_joint_raw(
    joint: &JointDistribution,
    p: &[f64],
    q: &[f64],
    a: f64,
) -> ProjectionMoments {
    let value = |i: usize, j: usize| v_left(p[i], q[i], a) + v_right(p[j], q[j], a);
    let mean = csum(joint.positive_cells().map(|(i, j, pij)| pij * value(i, j)));
    let variance = csum(joint.positive_cells().map(|(i, j, pij)| {
        let d = value(i, j) - mean;
        pij * d * d
    }));
    ProjectionMoments::new(mean, variance)
}

#[inline]
fn v_left(pi: f64, qi: f64, a: f64) -> f64 {
    if qi > 0.0 {
        a * (qi / pi).powf(1.0 - a)
    } else {
        0.0
    }
}

#[inline]
fn v_right(pj: f64, qj: f64, a: f64) -> f64 {
    if pj > 0.0 {
        (1.0 - a) * (pj / qj).powf(a)
    } else {
        0.0
    }
}

/// Variance components of V under independent marginals: `V = A(X) + B(Y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct SplitVMoments {
    /// `E V = S_a(p, q)`.
    pub mean: f64,
    pub var_x: f64,
    pub var_y: f64,
}

/// V moments for the product joint `p_i q_j`, in O(m).
pub(crate) fn v_moments_independent_raw(p: &[f64], q: &[f64], a: f64) -> SplitVMoments {
    let left: Vec<(f64, f64)> = p
        .iter()
        .zip(q)
        .filter(|(&pi, _)| pi > 0.0)
        .map(|(&pi, &qi)| (pi, v_left(pi, qi, a)))
        .collect();
    let right: Vec<(f64, f64)> = p
        .iter()
        .zip(q)
        .filter(|(_, &qj)| qj > 0.0)
        .map(|(&pj, &qj)| (qj, v_right(pj, qj, a)))
        .collect();
    let moments = |vals: &[(f64, f64)]| {
        let mean = csum(vals.iter().map(|(w, v)| w * v));
        let var = csum(vals.iter().map(|(w, v)| w * (v - mean) * (v - mean)));
        (mean, var)
    };
    let (ml, vl) = moments(&left);
    let (mr, vr) = moments(&right);
    SplitVMoments { mean: ml + mr, var_x: vl, var_y: vr }
}

/// V moments for independent marginals `p` and `q` (product joint) in O(m).
pub fn projection_v_moments_independent(
    p: &ProbVector,
    q: &ProbVector,
    alpha: Alpha,
) -> Result<ProjectionMoments> {
    crate::measures::check_same_m(p, q)?;
    if let Some(i) = (0..p.m()).find(|&i| (p.probs()[i] > 0.0) != (q.probs()[i] > 0.0)) {
        return Err(Error::domain(format!("marginals disagree on support at category {i}")));
    }
    let s = v_moments_independent_raw(p.probs(), q.probs(), alpha.get());
    Ok(ProjectionMoments::new(s.mean, s.var_x + s.var_y))
}

/// Desk-scale reading of an asymptotic `o(1)` condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Advisory {
    Pass,
    Marginal,
    Fail,
}

impl Advisory {
    pub fn classify(quotient: f64) -> Self {
        if quotient < ADVISORY_PASS {
            Advisory::Pass
        } else if quotient < ADVISORY_MARGINAL {
            Advisory::Marginal
        } else {
            Advisory::Fail
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LdAdvisories {
    pub low_diversity: Advisory,
    pub entropy: Option<Advisory>,
    pub divergence: Option<Advisory>,
    pub uniform_entropy: Advisory,
    pub equal_marginals: Advisory,
}

/// Finite-n values of the rate conditions behind the CLTs.
///
/// `entropy_condition` is `sum p_i^(a-1) / sqrt(n Var W)` and
/// `divergence_condition` is `(sum (q_i/p_i)^(1-a) + sum (p_i/q_i)^a) / sqrt(n Var V)`;
/// each is `None` when its projection is degenerate (or `q` is absent).
/// `uniform_condition` is `m^2 / n` and `equal_marginal_condition` is
/// `max(1 / (n m p_*^2), m / (n p_*))`. The rate exponent itself is not
/// estimable from one `(m, n)` pair, so only raw quotients are reported.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LdReport {
    pub p_star: f64,
    /// `1 / (n p_*)`.
    pub ld_ratio: f64,
    pub m_over_n: f64,
    pub entropy_condition: Option<f64>,
    pub divergence_condition: Option<f64>,
    pub uniform_condition: f64,
    pub equal_marginal_condition: f64,
    pub advisories: LdAdvisories,
}

/// Diagnostic only: never fails, reports infinite quotients when `n = 0`.
///
/// Zero-probability categories are ignored; `m` is the size of the positive
/// support (of the union of supports when `q` is given). With `q`, V is taken
/// under independent marginals.
pub fn ld_diagnostic(p: &ProbVector, q: Option<&ProbVector>, n: u64, alpha: Alpha) -> LdReport {
    let a = alpha.get();
    let nf = n as f64;
    let mut p_star = p.min_positive();
    let mut m = p.support_size();
    if let Some(q) = q {
        p_star = p_star.min(q.min_positive());
        m = p
            .probs()
            .iter()
            .zip(q.probs())
            .filter(|(&x, &y)| x > 0.0 || y > 0.0)
            .count();
    }
    let mf = m as f64;

    let w = w_moments_raw(p.probs(), a);
    let entropy_condition = nondegenerate(w.variance, w.mean).then(|| {
        let s = power_sum_raw(p.probs(), a - 1.0);
        s / (nf * w.variance).sqrt()
    });

    let divergence_condition = q.and_then(|q| {
        if q.m() != p.m() {
            return None;
        }
        let v = v_moments_independent_raw(p.probs(), q.probs(), a);
        let var = v.var_x + v.var_y;
        if !nondegenerate(var, v.mean) {
            return None;
        }
        let num = csum(
            p.probs()
                .iter()
                .zip(q.probs())
                .filter(|(&x, &y)| x > 0.0 && y > 0.0)
                .map(|(&x, &y)| (y / x).powf(1.0 - a) + (x / y).powf(a)),
        );
        Some(num / (nf * var).sqrt())
    });

    let uniform_condition = mf * mf / nf;
    let equal_marginal_condition =
        (1.0 / (nf * mf * p_star * p_star)).max(mf / (nf * p_star));

    LdReport {
        p_star,
        ld_ratio: 1.0 / (nf * p_star),
        m_over_n: mf / nf,
        entropy_condition,
        divergence_condition,
        uniform_condition,
        equal_marginal_condition,
        advisories: LdAdvisories {
            low_diversity: Advisory::classify(1.0 / (nf * p_star)),
            entropy: entropy_condition.map(Advisory::classify),
            divergence: divergence_condition.map(Advisory::classify),
            uniform_entropy: Advisory::classify(uniform_condition),
            equal_marginals: Advisory::classify(equal_marginal_condition),
        },
    }
}

/// Relative variance threshold treated as zero.
pub(crate) const DEGENERACY_CV: f64 = 1e-12;

pub(crate) fn nondegenerate(variance: f64, mean: f64) -> bool {
    variance.sqrt() > DEGENERACY_CV * mean.abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn pv(v: &[f64]) -> ProbVector {
        ProbVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn uniform_w_is_degenerate() {
        for m in [2, 5, 64] {
            let w = projection_w_moments(&ProbVector::uniform(m).unwrap(), Alpha::new(0.3).unwrap())
                .unwrap();
            assert!(w.variance < 1e-28, "m={m} var={}", w.variance);
        }
    }

    #[test]
    fn noise_and_signal_w_variance() {
        // Two-point law: 0.5^(-1/2)/2 and 0.25^(-1/2)/2 with equal mass.
        let w = projection_w_moments(&pv(&[0.5, 0.25, 0.25]), Alpha::half()).unwrap();
        assert_abs_diff_eq!(w.variance, 0.021_446_609_406_726_238, epsilon = 1e-15);
    }

    #[test]
    fn three_point_w_moments() {
        let w = projection_w_moments(&pv(&[0.5, 0.3, 0.2]), Alpha::half()).unwrap();
        assert_abs_diff_eq!(w.mean, 0.851_021_467_095_835_8, epsilon = 1e-15);
        assert_abs_diff_eq!(w.variance, 0.025_762_462_542_051_284, epsilon = 1e-14);
        assert_abs_diff_eq!(w.cv, w.variance.sqrt() / w.mean, epsilon = 1e-15);
    }

    #[test]
    fn w_rejects_zero_mass() {
        assert!(matches!(
            projection_w_moments(&pv(&[0.5, 0.5, 0.0]), Alpha::half()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn v_moments_product_example() {
        let p = pv(&[0.5, 0.5]);
        let q = pv(&[0.9, 0.1]);
        let joint = JointDistribution::product(&p, &q).unwrap();
        let v = projection_v_moments(&joint, Alpha::half()).unwrap();
        assert_abs_diff_eq!(v.mean, 0.894_427_190_999_915_9, epsilon = 1e-15);
        assert_abs_diff_eq!(v.variance, 0.1, epsilon = 1e-14);
        let split = projection_v_moments_independent(&p, &q, Alpha::half()).unwrap();
        assert_abs_diff_eq!(split.variance, v.variance, epsilon = 1e-15);
    }

    #[test]
    fn v_degenerate_for_equal_marginals() {
        let p = pv(&[0.1, 0.2, 0.3, 0.4]);
        let joint = JointDistribution::equal_marginal_blend(&p, 0.4).unwrap();
        let v = projection_v_moments(&joint, Alpha::new(0.7).unwrap()).unwrap();
        assert_abs_diff_eq!(v.mean, 1.0, epsilon = 1e-14);
        assert!(v.variance < 1e-28);
    }

    #[test]
    fn v_rejects_support_mismatch() {
        let joint = JointDistribution::new(2, vec![0.5, 0.5, 0.0, 0.0]).unwrap();
        assert!(matches!(projection_v_moments(&joint, Alpha::half()), Err(Error::Domain(_))));
    }

    #[test]
    fn uniform_ld_report() {
        let m = 50usize;
        let n = (m as u64).pow(3);
        let r = ld_diagnostic(&ProbVector::uniform(m).unwrap(), None, n, Alpha::half());
        assert_abs_diff_eq!(r.uniform_condition, 1.0 / m as f64, epsilon = 1e-15);
        assert_eq!(r.advisories.uniform_entropy, Advisory::Pass);
        assert_eq!(r.entropy_condition, None);
        assert_eq!(r.divergence_condition, None);
        assert_abs_diff_eq!(r.ld_ratio, m as f64 / n as f64, epsilon = 1e-15);
    }

    #[test]
    fn powerlaw_ld_quotients_shrink_with_n() {
        let m = 1000usize;
        let p = crate::powerlaw_pmf(1.0, m).unwrap();
        let quotient = |e: f64| {
            let n = (m as f64).powf(e).round() as u64;
            ld_diagnostic(&p, None, n, Alpha::half())
        };
        let deep = quotient(2.5);
        assert_eq!(deep.advisories.low_diversity, Advisory::Pass);
        let shallow = quotient(1.5);
        assert!(deep.entropy_condition.unwrap() < shallow.entropy_condition.unwrap());
        assert!(deep.ld_ratio < shallow.ld_ratio);
    }

    #[test]
    fn advisory_thresholds() {
        assert_eq!(Advisory::classify(0.05), Advisory::Pass);
        assert_eq!(Advisory::classify(0.1), Advisory::Marginal);
        assert_eq!(Advisory::classify(0.49), Advisory::Marginal);
        assert_eq!(Advisory::classify(0.5), Advisory::Fail);
        assert_eq!(Advisory::classify(f64::INFINITY), Advisory::Fail);
    }
}
