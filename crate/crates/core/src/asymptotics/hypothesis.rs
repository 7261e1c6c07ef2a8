use serde::{Deserialize, Serialize};

use crate::counts::{CountVector, JointCountTable};
use crate::error::{Error, Result};
use crate::measures::{cross_power_sum_raw, power_sum_raw, Alpha, JointDistribution};
use crate::numeric::{csum, normal_sf};

use super::chi_square::{chi_square_null_params, NullParams};
use super::{effective_n, union_support, Sidedness, TestMethod, TestReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UniformityMethod {
    /// `n [H_a(u^) - log m - log(1 + C(a,2) m/n) / (1 - a)] / (a sqrt(m/2))`.
    Thm3,
    /// `(X^2_u - m) / sqrt(2m)`.
    Lemma2i,
}

/// Two-sided test of `p = uniform(m)` over the `m = c.m()` listed categories.
///
/// Unobserved categories count: under the uniform null every listed category
/// has mass `1/m`.
pub fn uniformity_test(c: &CountVector, alpha: Alpha, method: UniformityMethod) -> Result<TestReport> {
    let m = c.m();
    let n = c.n();
    if m < 2 || n < 2 {
        return Err(Error::domain(format!("uniformity test needs m >= 2 and n >= 2 (m = {m}, n = {n})")));
    }
    let (mf, nf) = (m as f64, n as f64);
    let (raw, null_mean, null_sd) = match method {
        UniformityMethod::Lemma2i => {
            let expected = nf / mf;
            let x2 = csum(c.counts().iter().map(|&k| {
                let d = k as f64 - expected;
                d * d / expected
            }));
            (x2, mf, (2.0 * mf).sqrt())
        }
        UniformityMethod::Thm3 => {
            if n <= c.m() as u64 {
                return Err(Error::Undefined(format!(
                    "normalized uniform entropy needs n > m (n = {n}, m = {m})"
                )));
            }
            let a = alpha.get();
            let shift = 1.0 + alpha.binom2() * mf / nf;
            if shift <= 0.0 {
                return Err(Error::Undefined("centering term 1 + C(a,2) m/n is not positive".into()));
            }
            let freqs: Vec<f64> = c.counts().iter().map(|&k| k as f64 / nf).collect();
            let h = power_sum_raw(&freqs, a).ln() / (1.0 - a);
            let centre = mf.ln() + shift.ln() / (1.0 - a);
            (h, centre, a * (mf / 2.0).sqrt() / nf)
        }
    };
    let z = (raw - null_mean) / null_sd;
    Ok(TestReport {
        statistic: z,
        raw_statistic: raw,
        null_mean,
        null_sd,
        p_value: (2.0 * normal_sf(z.abs())).min(1.0),
        sidedness: Sidedness::TwoSided,
        m,
        n,
        method: match method {
            UniformityMethod::Thm3 => TestMethod::Thm3,
            UniformityMethod::Lemma2i => TestMethod::Lemma2i,
        },
    })
}

/// How the two samples of an equality test relate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PairingMode {
    /// Separate samples: `mu_n = gamma_n^2 = m - 1`.
    #[default]
    Independent,
    /// Paired observations: `mu_n`, `gamma_n^2` estimated from the joint counts.
    Paired,
}

#[derive(Debug, Clone, Copy)]
pub enum EqualitySamples<'a> {
    Counts(&'a CountVector, &'a CountVector),
    Joint(&'a JointCountTable),
}

/// One-sided test of `p = q` with the degenerate divergence statistic
/// `[n (S_a(p^, q^) - 1) / (a (a - 1)) - mu_n] / (sqrt(2) gamma_n)`.
///
/// Only large values indicate `p != q`, so the p-value is the upper normal tail.
/// `m` is the number of categories observed in either sample. Independent
/// samples of different sizes use `n = 2 n_x n_y / (n_x + n_y)`.
pub fn equality_test(samples: EqualitySamples<'_>, alpha: Alpha, mode: PairingMode) -> Result<TestReport> {
    let (cx, cy, joint) = match samples {
        EqualitySamples::Counts(x, y) => (x.clone(), y.clone(), None),
        EqualitySamples::Joint(t) => (t.row_counts(), t.col_counts(), Some(t)),
    };
    if cx.m() != cy.m() {
        return Err(Error::Shape { expected: cx.m(), actual: cy.m() });
    }
    if mode == PairingMode::Paired && joint.is_none() {
        return Err(Error::usage("paired mode needs a joint count table"));
    }
    let support = union_support(cx.counts(), cy.counts());
    let m = support.len();
    if m < 2 {
        return Err(Error::domain(format!("equality test needs at least 2 observed categories, got {m}")));
    }
    let n = match joint {
        Some(t) => t.n() as f64,
        None => effective_n(cx.n(), cy.n()),
    };
    let freq = |c: &CountVector| -> Vec<f64> {
        support.iter().map(|&i| c.counts()[i] as f64 / c.n() as f64).collect()
    };
    let a = alpha.get();
    let s = cross_power_sum_raw(&freq(&cx), &freq(&cy), a).value;
    let raw = n * (s - 1.0) / (a * (a - 1.0));

    let null = match (mode, joint) {
        (PairingMode::Paired, Some(t)) => paired_null_params(t, &support)?,
        _ => NullParams { mu: (m - 1) as f64, gamma_sq: (m - 1) as f64 },
    };
    if null.gamma_sq.is_nan() || null.gamma_sq <= 0.0 {
        return Err(Error::Undefined("gamma_n^2 is zero; the statistic cannot be standardized".into()));
    }
    let null_sd = std::f64::consts::SQRT_2 * null.gamma_sq.sqrt();
    let z = (raw - null.mu) / null_sd;
    Ok(TestReport {
        statistic: z,
        raw_statistic: raw,
        null_mean: null.mu,
        null_sd,
        p_value: normal_sf(z),
        sidedness: Sidedness::Upper,
        m,
        n: n.round() as u64,
        method: TestMethod::Thm4,
    })
}

/// `mu_n`, `gamma_n^2` from joint counts under the equal-marginal null.
///
/// Each cell of the plug-in joint is shrunk toward the product of its plug-in
/// marginals with weight `1 / (1 + n_ij)`, renormalized, then symmetrized. The
/// symmetrization enforces equal marginals without changing `p_ii` or
/// `p_ij + p_ji`, which are all `mu_n` and `gamma_n^2` depend on.
fn paired_null_params(t: &JointCountTable, support: &[usize]) -> Result<NullParams> {
    let k = support.len();
    let n = t.n() as f64;
    let rows = t.row_counts();
    let cols = t.col_counts();
    let r: Vec<f64> = support.iter().map(|&i| rows.counts()[i] as f64 / n).collect();
    let c: Vec<f64> = support.iter().map(|&j| cols.counts()[j] as f64 / n).collect();
    let mut cells = vec![0.0; k * k];
    for (a, &i) in support.iter().enumerate() {
        for (b, &j) in support.iter().enumerate() {
            let nij = t.get(i, j) as f64;
            let w = 1.0 / (1.0 + nij);
            cells[a * k + b] = w * r[a] * c[b] + (1.0 - w) * nij / n;
        }
    }
    let total = csum(cells.iter().copied());
    let mut sym = vec![0.0; k * k];
    for a in 0..k {
        for b in 0..k {
            sym[a * k + b] = 0.5 * (cells[a * k + b] + cells[b * k + a]) / total;
        }
    }
    let total = csum(sym.iter().copied());
    sym.iter_mut().for_each(|x| *x /= total);
    chi_square_null_params(&JointDistribution::new(k, sym)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn cv(v: &[u64]) -> CountVector {
        CountVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn pearson_uniformity_statistic() {
        let c = cv(&[3, 3, 4]);
        let r = uniformity_test(&c, Alpha::half(), UniformityMethod::Lemma2i).unwrap();
        assert_abs_diff_eq!(r.raw_statistic, 0.2, epsilon = 1e-14);
        assert_abs_diff_eq!(r.statistic, (0.2 - 3.0) / 6f64.sqrt(), epsilon = 1e-14);
        assert!(r.p_value > 0.0 && r.p_value <= 1.0);
    }

    #[test]
    fn uniform_entropy_centering() {
        // 1 + C(1/2, 2) m / n at m = 100, n = 1e5.
        let shift = 1.0 + Alpha::half().binom2() * 100.0 / 1e5;
        assert_abs_diff_eq!(shift, 0.999_875, epsilon = 1e-15);
        let c = CountVector::new(vec![1000; 100]).unwrap();
        let r = uniformity_test(&c, Alpha::half(), UniformityMethod::Thm3).unwrap();
        let centre = 100f64.ln() + 2.0 * shift.ln();
        assert_abs_diff_eq!(r.null_mean, centre, epsilon = 1e-14);
        assert_abs_diff_eq!(r.raw_statistic, 100f64.ln(), epsilon = 1e-13);
    }

    #[test]
    fn uniform_entropy_undefined_when_n_not_above_m() {
        let c = cv(&[1; 10]);
        let err = uniformity_test(&c, Alpha::half(), UniformityMethod::Thm3).unwrap_err();
        assert!(matches!(err, Error::Undefined(_)));
        assert!(uniformity_test(&c, Alpha::half(), UniformityMethod::Lemma2i).is_ok());
    }

    #[test]
    fn identical_samples_sit_at_boundary() {
        let x = cv(&[40, 25, 12, 9, 3, 0, 1]);
        let r = equality_test(EqualitySamples::Counts(&x, &x), Alpha::half(), PairingMode::Independent).unwrap();
        let m = 6.0;
        assert_abs_diff_eq!(r.raw_statistic, 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(r.statistic, -((m - 1.0) / 2.0f64).sqrt(), epsilon = 1e-10);
        assert!(r.p_value > 0.9);
        assert_eq!(r.m, 6);
        assert_eq!(r.sidedness, Sidedness::Upper);
    }

    #[test]
    fn equality_test_mode_errors() {
        let x = cv(&[4, 5]);
        let y = cv(&[6, 3]);
        assert!(matches!(
            equality_test(EqualitySamples::Counts(&x, &y), Alpha::half(), PairingMode::Paired),
            Err(Error::Usage(_))
        ));
        let one = cv(&[4, 0]);
        assert!(matches!(
            equality_test(EqualitySamples::Counts(&one, &one), Alpha::half(), PairingMode::Independent),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn paired_mode_uses_joint_dependence() {
        // Strong diagonal dependence lowers mu_n well below m - 1.
        let t = JointCountTable::new(
            3,
            [((0, 0), 300), ((1, 1), 200), ((2, 2), 100), ((0, 1), 5), ((1, 2), 5), ((2, 0), 5)],
        )
        .unwrap();
        let r = equality_test(EqualitySamples::Joint(&t), Alpha::half(), PairingMode::Paired).unwrap();
        assert!(r.null_mean < 1.0, "mu = {}", r.null_mean);
        let ind = equality_test(EqualitySamples::Joint(&t), Alpha::half(), PairingMode::Independent).unwrap();
        assert_eq!(ind.null_mean, 2.0);
        assert_eq!(ind.raw_statistic, r.raw_statistic);
    }
}
