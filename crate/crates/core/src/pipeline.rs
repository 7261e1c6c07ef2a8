//! Two-sample diversity analysis for noisy count data.
//!
//! Each sample is modelled as a blend of a signal distribution and a noise
//! distribution made of a few uniform blocks on low-count categories. The
//! pipeline strips the noise blocks, tests the remaining signal for equality
//! and, when the samples differ, quantifies the difference.

use serde::Serialize;

use crate::asymptotics::{
    check_level, divergence_ci, entropy_ci, equality_test, hill_ci, EqualitySamples, EstimateWithCI, PairingMode,
    Sidedness, TestMethod, TestReport,
};
use crate::counts::CountVector;
use crate::error::{Error, Result};
use crate::numeric::{chi_square_sf, csum, normal_sf};
use crate::powerlaw::{fit_powerlaw_ls, FitResult};
use crate::measures::Alpha;

/// One uniform noise block.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseComponent {
    pub categories: Vec<usize>,
    /// Fitted uniform level: the mean count per category in the block.
    pub mean_count: f64,
    /// Share of the sample falling in the block.
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixtureDecomposition {
    /// Largest count assigned to noise; 0 when nothing is.
    #[serde(rename = "k_m")]
    pub cutoff_k_m: u64,
    pub noise_components: Vec<NoiseComponent>,
    pub signal_categories: Vec<usize>,
    pub noise_fraction: f64,
    pub signal_fraction: f64,
    pub m_signal: usize,
}

/// Upper-tail standardized Pearson test of uniformity for the counts of one block.
fn block_rejects(counts: &[u64], level: f64) -> bool {
    let k = counts.len() as f64;
    if counts.len() < 2 {
        return false;
    }
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return false;
    }
    let mean = total as f64 / k;
    let x2 = csum(counts.iter().map(|&c| {
        let d = c as f64 - mean;
        d * d / mean
    }));
    normal_sf((x2 - k) / (2.0 * k).sqrt()) < level
}

/// Splits categories into at most `max_k` uniform noise blocks and a signal part.
///
/// Categories are grouped by count value and swept from the lowest value up.
/// A block grows one count value at a time and is tested for uniformity after
/// each step; a rejection closes the block without the new value, which then
/// opens the next block. The sweep stops once `max_k` blocks are closed, or
/// when a block holding a single count value rejects at its first extension:
/// such a value is too far from its neighbours to be noise. Everything not
/// swept into a block is signal.
pub fn filter_noise(c: &CountVector, level: f64, max_k: usize) -> Result<MixtureDecomposition> {
    check_level(level)?;
    if max_k == 0 {
        return Err(Error::domain("max_k must be at least 1"));
    }
    let counts = c.counts();
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by_key(|&i| (counts[i], i));
    // Runs of equal count value in `order`.
    let mut strata: Vec<std::ops::Range<usize>> = Vec::new();
    for (pos, &i) in order.iter().enumerate() {
        match strata.last_mut() {
            Some(r) if counts[order[r.start]] == counts[i] => r.end = pos + 1,
            _ => strata.push(pos..pos + 1),
        }
    }

    let values = |r: &std::ops::Range<usize>| -> Vec<u64> { order[r.clone()].iter().map(|&i| counts[i]).collect() };
    let mut closed: Vec<std::ops::Range<usize>> = Vec::new();
    let mut block: Option<(std::ops::Range<usize>, usize)> = None; // (positions, number of strata)
    for stratum in &strata {
        let Some((current, n_strata)) = block.clone() else {
            block = Some((stratum.clone(), 1));
            continue;
        };
        let grown = current.start..stratum.end;
        if !block_rejects(&values(&grown), level) {
            block = Some((grown, n_strata + 1));
            continue;
        }
        if n_strata == 1 {
            block = None;
            break;
        }
        closed.push(current);
        if closed.len() == max_k {
            block = None;
            break;
        }
        block = Some((stratum.clone(), 1));
    }
    if let Some((current, _)) = block {
        closed.push(current);
    }

    let n = c.n() as f64;
    let mut in_noise = vec![false; counts.len()];
    let mut cutoff = 0;
    let mut noise_total = 0u64;
    let noise_components: Vec<NoiseComponent> = closed
        .into_iter()
        .map(|r| {
            let mut categories: Vec<usize> = order[r].to_vec();
            categories.sort_unstable();
            let total: u64 = categories.iter().map(|&i| counts[i]).sum();
            for &i in &categories {
                in_noise[i] = true;
                cutoff = cutoff.max(counts[i]);
            }
            noise_total += total;
            NoiseComponent {
                mean_count: total as f64 / categories.len() as f64,
                probability: total as f64 / n,
                categories,
            }
        })
        .collect();
    let signal_categories: Vec<usize> = (0..counts.len()).filter(|&i| !in_noise[i]).collect();
    let noise_fraction = noise_total as f64 / n;
    Ok(MixtureDecomposition {
        cutoff_k_m: cutoff,
        noise_components,
        m_signal: signal_categories.len(),
        signal_categories,
        noise_fraction,
        signal_fraction: (c.n() - noise_total) as f64 / n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PipelineConfig {
    /// Significance level of the per-block uniformity tests.
    pub noise_level: f64,
    pub max_components: usize,
    /// Significance level of the equality test.
    pub test_level: f64,
    pub ci_level: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig { noise_level: 0.01, max_components: 2, test_level: 0.05, ci_level: 0.95 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleSummary {
    pub decomposition: MixtureDecomposition,
    /// Signal reads kept for inference (counts above the shared cutoff).
    pub n_signal: u64,
    #[serde(rename = "H_alpha")]
    pub entropy: EstimateWithCI,
    #[serde(rename = "ENC_alpha")]
    pub hill_number: EstimateWithCI,
    pub powerlaw_fit: Option<FitResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineReport {
    pub alpha: Alpha,
    /// Shared noise cutoff: the larger of the two per-sample cutoffs.
    pub k_m: u64,
    /// Categories above the cutoff in both samples; inference runs on these.
    pub signal_categories: Vec<usize>,
    pub samples: [SampleSummary; 2],
    pub equality: TestReport,
    /// True when equality was not rejected, in which case the divergence is taken as 0.
    pub equal_distributions: bool,
    #[serde(rename = "D_alpha")]
    pub divergence: Option<EstimateWithCI>,
}

/// Runs noise filtering, equality testing and difference quantification on two
/// samples over the same categories.
///
/// Signal counts are treated as complete samples of their own totals.
pub fn diversity_pipeline(
    cx: &CountVector,
    cy: &CountVector,
    alpha: Alpha,
    config: &PipelineConfig,
) -> Result<PipelineReport> {
    if cx.m() != cy.m() {
        return Err(Error::Shape { expected: cx.m(), actual: cy.m() });
    }
    check_level(config.test_level)?;
    check_level(config.ci_level)?;
    let dx = filter_noise(cx, config.noise_level, config.max_components)?;
    let dy = filter_noise(cy, config.noise_level, config.max_components)?;
    let k_m = dx.cutoff_k_m.max(dy.cutoff_k_m);
    let mut signal_x = vec![false; cx.m()];
    dx.signal_categories.iter().for_each(|&i| signal_x[i] = true);
    let shared: Vec<usize> = dy
        .signal_categories
        .iter()
        .copied()
        .filter(|&i| signal_x[i] && cx.counts()[i] > k_m && cy.counts()[i] > k_m)
        .collect();
    if shared.is_empty() {
        return Err(Error::NoSignal);
    }
    let sx = cx.restrict(&shared)?;
    let sy = cy.restrict(&shared)?;

    let equality = equality_test(EqualitySamples::Counts(&sx, &sy), alpha, PairingMode::Independent)?;
    let rejected = equality.rejects(config.test_level);
    let divergence = if rejected { Some(divergence_ci(&sx, &sy, alpha, config.ci_level, None)?) } else { None };

    let summarize = |d: MixtureDecomposition, s: &CountVector| -> Result<SampleSummary> {
        Ok(SampleSummary {
            decomposition: d,
            n_signal: s.n(),
            entropy: entropy_ci(s, alpha, config.ci_level)?,
            hill_number: hill_ci(s, alpha, config.ci_level)?,
            powerlaw_fit: fit_powerlaw_ls(s).ok(),
        })
    };
    Ok(PipelineReport {
        alpha,
        k_m,
        samples: [summarize(dx, &sx)?, summarize(dy, &sy)?],
        signal_categories: shared,
        equality,
        equal_distributions: !rejected,
        divergence,
    })
}

/// Joint test that every pair has equal members: `Q = sum z_i^2` over the
/// standardized equality statistics, referred to chi-square with `k` degrees
/// of freedom.
pub fn homogeneity_test(pairs: &[(CountVector, CountVector)], alpha: Alpha) -> Result<TestReport> {
    let k = pairs.len();
    if k < 2 {
        return Err(Error::usage(format!("homogeneity test needs at least 2 pairs, got {k}")));
    }
    let reports = pairs
        .iter()
        .map(|(x, y)| equality_test(EqualitySamples::Counts(x, y), alpha, PairingMode::Independent))
        .collect::<Result<Vec<_>>>()?;
    let q = csum(reports.iter().map(|r| r.statistic * r.statistic));
    let kf = k as f64;
    Ok(TestReport {
        statistic: q,
        raw_statistic: q,
        null_mean: kf,
        null_sd: (2.0 * kf).sqrt(),
        p_value: chi_square_sf(q, kf),
        sidedness: Sidedness::Upper,
        m: reports.iter().map(|r| r.m).max().unwrap_or(0),
        n: reports.iter().map(|r| r.n).sum(),
        method: TestMethod::Chi2Homogeneity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn cv(v: Vec<u64>) -> CountVector {
        CountVector::new(v).unwrap()
    }

    #[test]
    fn heterogeneous_large_counts_have_no_noise() {
        let d = filter_noise(&cv(vec![500, 800, 1200, 2500, 4000]), 0.01, 2).unwrap();
        assert_eq!(d.cutoff_k_m, 0);
        assert!(d.noise_components.is_empty());
        assert_eq!(d.signal_fraction, 1.0);
        assert_eq!(d.m_signal, 5);
    }

    #[test]
    fn flat_counts_are_all_noise() {
        let counts: Vec<u64> = (0..100).map(|i| 95 + (i % 11)).collect();
        let d = filter_noise(&cv(counts), 0.01, 2).unwrap();
        assert_eq!(d.noise_components.len(), 1);
        assert_eq!(d.noise_components[0].categories.len(), 100);
        assert_eq!(d.signal_fraction, 0.0);
        assert_eq!(d.cutoff_k_m, 105);
    }

    #[test]
    fn two_noise_levels_and_signal() {
        let mut counts = vec![2u64; 200];
        counts.extend([1, 3].repeat(50));
        counts.extend(vec![10u64; 100]);
        counts.extend([9, 11].repeat(50));
        counts.extend([300, 500, 800, 1300, 2100, 3400]);
        let d = filter_noise(&cv(counts.clone()), 0.01, 2).unwrap();
        assert_eq!(d.noise_components.len(), 2);
        assert_eq!(d.cutoff_k_m, 11);
        assert_eq!(d.m_signal, 6);
        assert_abs_diff_eq!(d.noise_fraction + d.signal_fraction, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.noise_components[0].mean_count, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d.noise_components[1].mean_count, 10.0, epsilon = 1e-12);
    }

    #[test]
    fn filter_level_domain() {
        assert!(matches!(filter_noise(&cv(vec![1, 2]), 0.0, 2), Err(Error::Domain(_))));
        assert!(matches!(filter_noise(&cv(vec![1, 2]), 1.0, 2), Err(Error::Domain(_))));
    }

    fn powerlawish(scale: f64, beta: f64) -> Vec<u64> {
        (1..=60).map(|i| (scale * (i as f64).powf(-beta)).round() as u64).collect()
    }

    #[test]
    fn identical_samples_report_no_divergence() {
        let x = cv(powerlawish(5000.0, 0.9));
        let r = diversity_pipeline(&x, &x, Alpha::half(), &PipelineConfig::default()).unwrap();
        assert!(r.equal_distributions);
        assert!(r.divergence.is_none());
        let json = serde_json::to_value(&r).unwrap();
        assert!(json["D_alpha"].is_null());
        for key in ["H_alpha", "ENC_alpha"] {
            assert!(json["samples"][0][key]["estimate"].is_number());
        }
        assert!(json["samples"][0]["decomposition"]["k_m"].is_number());
        assert!(json["samples"][0]["decomposition"]["noise_fraction"].is_number());
    }

    #[test]
    fn different_samples_report_divergence() {
        let x = cv(powerlawish(5000.0, 0.6));
        let y = cv(powerlawish(5000.0, 1.2));
        let r = diversity_pipeline(&x, &y, Alpha::half(), &PipelineConfig::default()).unwrap();
        assert!(!r.equal_distributions);
        let d = r.divergence.unwrap();
        assert!(d.lower > 0.0);
    }

    #[test]
    fn disjoint_signal_is_an_error() {
        let x = cv(vec![900, 0, 3000, 0]);
        let y = cv(vec![0, 900, 0, 3000]);
        assert_eq!(diversity_pipeline(&x, &y, Alpha::half(), &PipelineConfig::default()), Err(Error::NoSignal));
    }

    #[test]
    fn homogeneity_q_sums_squares_and_ignores_order() {
        let a = cv(vec![120, 80, 50, 30]);
        let b = cv(vec![100, 90, 55, 35]);
        let c = cv(vec![60, 60, 90, 70]);
        let pairs = vec![(a.clone(), b.clone()), (a.clone(), c.clone()), (b.clone(), c.clone())];
        let r = homogeneity_test(&pairs, Alpha::half()).unwrap();
        let z: Vec<f64> = pairs
            .iter()
            .map(|(x, y)| {
                equality_test(EqualitySamples::Counts(x, y), Alpha::half(), PairingMode::Independent)
                    .unwrap()
                    .statistic
            })
            .collect();
        assert_abs_diff_eq!(r.statistic, z.iter().map(|v| v * v).sum::<f64>(), epsilon = 1e-12);
        let reversed: Vec<_> = pairs.iter().rev().cloned().collect();
        assert_abs_diff_eq!(homogeneity_test(&reversed, Alpha::half()).unwrap().statistic, r.statistic, epsilon = 1e-12);
        assert!(matches!(homogeneity_test(&pairs[..1], Alpha::half()), Err(Error::Usage(_))));
    }

    #[test]
    fn identical_pairs_give_deterministic_q() {
        let a = cv(vec![40, 30, 20, 10]);
        let r = homogeneity_test(&[(a.clone(), a.clone()), (a.clone(), a.clone())], Alpha::half()).unwrap();
        // Each z sits at -sqrt((m - 1) / 2).
        assert_abs_diff_eq!(r.statistic, 2.0 * 1.5, epsilon = 1e-10);
    }
}
