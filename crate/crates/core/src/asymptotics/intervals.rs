use crate::counts::{CountVector, JointCountTable};
use crate::error::{Error, Result};
use crate::measures::{cross_power_sum_raw, divergence_from_sum, power_sum_raw, Alpha, JointDistribution, ProbVector};
use crate::numeric::two_sided_z;
use crate::projections::{ld_diagnostic, nondegenerate, v_moments_independent_raw, v_moments_joint_raw, w_moments_raw};

use super::{check_level, effective_n, union_support, CiMethod, EstimateWithCI};

/// Normal interval for `H_a(p)` from the plug-in estimate `H_a(p^)`.
///
/// The standard error `CV(W) a / ((1 - a) sqrt(n))` uses W evaluated at `p^`.
/// Unobserved categories are dropped; `m` in the result is the observed count.
pub fn entropy_ci(c: &CountVector, alpha: Alpha, level: f64) -> Result<EstimateWithCI> {
    check_level(level)?;
    if c.n() < 2 {
        return Err(Error::domain("entropy interval needs n >= 2"));
    }
    let observed: Vec<u64> = c.counts().iter().copied().filter(|&k| k > 0).collect();
    if observed.len() < 2 {
        return Err(Error::Degenerate(
            "all observations fall in one category; the entropy projection has no variance".into(),
        ));
    }
    if observed.iter().all(|&k| k == observed[0]) {
        return Err(Error::Degenerate(
            "counts are empirically uniform; use uniformity_test (uniform-entropy CLT)".into(),
        ));
    }
    let a = alpha.get();
    let n = c.n();
    let p_hat = ProbVector::from_counts(&observed)?;
    let s = power_sum_raw(p_hat.probs(), a);
    let estimate = s.ln() / (1.0 - a);
    let w = w_moments_raw(p_hat.probs(), a);
    if !nondegenerate(w.variance, w.mean) {
        return Err(Error::Degenerate(
            "plug-in CV of W is zero; use uniformity_test (uniform-entropy CLT)".into(),
        ));
    }
    let std_error = w.cv * a / ((1.0 - a) * (n as f64).sqrt());
    let z = two_sided_z(level);
    Ok(EstimateWithCI {
        estimate,
        level,
        lower: estimate - z * std_error,
        upper: estimate + z * std_error,
        std_error,
        n,
        m: observed.len(),
        method: CiMethod::Thm1,
        diagnostics: ld_diagnostic(&p_hat, None, n, alpha),
    })
}

/// Interval for the Hill number `exp(H_a)`: the entropy interval mapped through `exp`.
pub fn hill_ci(c: &CountVector, alpha: Alpha, level: f64) -> Result<EstimateWithCI> {
    let h = entropy_ci(c, alpha, level)?;
    let estimate = h.estimate.exp();
    Ok(EstimateWithCI {
        estimate,
        lower: h.lower.exp(),
        upper: h.upper.exp(),
        std_error: estimate * h.std_error,
        ..h
    })
}

/// Normal interval for `D_a(p, q)` from two samples over the same categories.
///
/// Without `joint` the samples are taken as independent and the variance of
/// `S_a(p^, q^)` is `Var A / n_x + Var B / n_y` where `V = A(X) + B(Y)`; the
/// samples may then differ in size. With `joint` (paired observations) the
/// full V variance over the joint plug-in is used and `cx`, `cy` must be its
/// marginals.
pub fn divergence_ci(
    cx: &CountVector,
    cy: &CountVector,
    alpha: Alpha,
    level: f64,
    joint: Option<&JointCountTable>,
) -> Result<EstimateWithCI> {
    check_level(level)?;
    if cx.m() != cy.m() {
        return Err(Error::Shape { expected: cx.m(), actual: cy.m() });
    }
    if let Some(t) = joint {
        if t.m() != cx.m() || &t.row_counts() != cx || &t.col_counts() != cy {
            return Err(Error::usage("joint table marginals must equal the two count vectors"));
        }
    }
    let (nx, ny) = (cx.n(), cy.n());
    let identical = cx
        .counts()
        .iter()
        .zip(cy.counts())
        .all(|(&x, &y)| x as u128 * ny as u128 == y as u128 * nx as u128);
    if identical {
        return Err(Error::Degenerate(
            "empirical marginals are identical; use equality_test (degenerate divergence CLT)".into(),
        ));
    }

    let support = union_support(cx.counts(), cy.counts());
    let freq = |c: &CountVector| -> Vec<f64> {
        support.iter().map(|&i| c.counts()[i] as f64 / c.n() as f64).collect()
    };
    let (p_hat, q_hat) = (freq(cx), freq(cy));
    let a = alpha.get();
    let s = cross_power_sum_raw(&p_hat, &q_hat, a).value;
    let estimate = divergence_from_sum(s, a);

    let (var_s, n_report) = match joint {
        None => {
            let v = v_moments_independent_raw(&p_hat, &q_hat, a);
            if !nondegenerate((v.var_x + v.var_y).max(0.0), v.mean) {
                return Err(Error::Degenerate(
                    "plug-in CV of V is zero; use equality_test (degenerate divergence CLT)".into(),
                ));
            }
            (v.var_x / nx as f64 + v.var_y / ny as f64, effective_n(nx, ny))
        }
        Some(t) => {
            let j = plug_in_joint(t, &support)?;
            let v = v_moments_joint_raw(&j, &p_hat, &q_hat, a);
            if !nondegenerate(v.variance, v.mean) {
                return Err(Error::Degenerate(
                    "plug-in CV of V is zero; use equality_test (degenerate divergence CLT)".into(),
                ));
            }
            (v.variance / t.n() as f64, t.n() as f64)
        }
    };
    let std_error = var_s.sqrt() / (s * (1.0 - a));
    let z = two_sided_z(level);
    let n_eff = n_report.round() as u64;
    let p_vec = ProbVector::new(p_hat).map_err(|_| Error::domain("invalid plug-in frequencies"))?;
    let q_vec = ProbVector::new(q_hat).map_err(|_| Error::domain("invalid plug-in frequencies"))?;
    Ok(EstimateWithCI {
        estimate,
        level,
        lower: estimate - z * std_error,
        upper: estimate + z * std_error,
        std_error,
        n: n_eff,
        m: support.len(),
        method: CiMethod::Thm2,
        diagnostics: ld_diagnostic(&p_vec, Some(&q_vec), n_eff, alpha),
    })
}

/// Dense plug-in joint `n_ij / n` restricted to `support` (renumbered).
pub(crate) fn plug_in_joint(t: &JointCountTable, support: &[usize]) -> Result<JointDistribution> {
    let k = support.len();
    let mut index = vec![usize::MAX; t.m()];
    for (new, &old) in support.iter().enumerate() {
        index[old] = new;
    }
    let n = t.n() as f64;
    let mut cells = vec![0.0; k * k];
    for ((i, j), c) in t.cells() {
        cells[index[i] * k + index[j]] = c as f64 / n;
    }
    JointDistribution::new(k, cells)
}
