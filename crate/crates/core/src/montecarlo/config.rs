use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{Alpha, JointDistribution, ProbVector};
use crate::powerlaw::powerlaw_pmf;

/// Population the replicates are drawn from. Univariate families yield one
/// sample per replicate, bivariate families a pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    PowerLaw {
        beta: f64,
    },
    Uniform,
    /// Category 0 carries `p0`; the other `m - 1` share `1 - p0` equally.
    NoiseAndSignal {
        p0: f64,
    },
    /// A power-law signal of weight `signal_fraction` on the first categories,
    /// plus uniform noise blocks of the given sizes after it. `noise_weights`
    /// split the noise mass between blocks and are normalized.
    Mixture {
        signal_beta: f64,
        signal_fraction: f64,
        noise_sizes: Vec<usize>,
        noise_weights: Vec<f64>,
    },
    /// Independent samples from power laws `beta` and `beta_q`; exponent 0 means uniform.
    BivariateProduct {
        beta: f64,
        beta_q: f64,
    },
    /// Paired samples with equal power-law marginals and diagonal dependence `rho`.
    BivariateJoint {
        beta: f64,
        rho: f64,
    },
}

/// The population behind a family at a given `m`.
#[derive(Debug, Clone, PartialEq)]
pub enum Population {
    Univariate(ProbVector),
    Independent(ProbVector, ProbVector),
    Paired(JointDistribution, ProbVector),
}

fn law(beta: f64, m: usize) -> Result<ProbVector> {
    if beta == 0.0 {
        ProbVector::uniform(m)
    } else {
        powerlaw_pmf(beta, m)
    }
}

impl Family {
    pub fn population(&self, m: usize) -> Result<Population> {
        Ok(match self {
            Family::PowerLaw { beta } => Population::Univariate(powerlaw_pmf(*beta, m)?),
            Family::Uniform => Population::Univariate(ProbVector::uniform(m)?),
            Family::NoiseAndSignal { p0 } => {
                if !(*p0 > 0.0 && *p0 < 1.0) {
                    return Err(Error::domain(format!("p0 must lie in (0, 1), got {p0}")));
                }
                let mut probs = vec![(1.0 - p0) / (m - 1) as f64; m];
                probs[0] = *p0;
                Population::Univariate(ProbVector::new(probs)?)
            }
            Family::Mixture { signal_beta, signal_fraction, noise_sizes, noise_weights } => {
                Population::Univariate(mixture_pmf(m, *signal_beta, *signal_fraction, noise_sizes, noise_weights)?)
            }
            Family::BivariateProduct { beta, beta_q } => Population::Independent(law(*beta, m)?, law(*beta_q, m)?),
            Family::BivariateJoint { beta, rho } => {
                let p = law(*beta, m)?;
                Population::Paired(JointDistribution::equal_marginal_blend(&p, *rho)?, p)
            }
        })
    }
}

fn mixture_pmf(m: usize, beta: f64, signal_fraction: f64, sizes: &[usize], weights: &[f64]) -> Result<ProbVector> {
    if sizes.len() != weights.len() || sizes.is_empty() {
        return Err(Error::domain("noise_sizes and noise_weights must be non-empty and of equal length"));
    }
    if !(signal_fraction > 0.0 && signal_fraction < 1.0) {
        return Err(Error::domain(format!("signal_fraction must lie in (0, 1), got {signal_fraction}")));
    }
    let noise_m: usize = sizes.iter().sum();
    if noise_m >= m || sizes.contains(&0) {
        return Err(Error::domain(format!("noise blocks ({noise_m} categories) must be non-empty and leave signal categories in m = {m}")));
    }
    let total_weight: f64 = weights.iter().sum();
    if weights.iter().any(|&w| w.is_nan() || w <= 0.0) || !total_weight.is_finite() {
        return Err(Error::domain("noise weights must be positive"));
    }
    let signal = powerlaw_pmf(beta, m - noise_m)?;
    let mut probs: Vec<f64> = signal.probs().iter().map(|&x| signal_fraction * x).collect();
    for (&size, &w) in sizes.iter().zip(weights) {
        let level = (1.0 - signal_fraction) * w / total_weight / size as f64;
        probs.extend(std::iter::repeat_n(level, size));
    }
    ProbVector::new(probs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    /// `sqrt(n) (1/a - 1)(H_a(p^) - H_a(p)) / CV(W)`, population CV of W.
    Thm1Entropy,
    /// `sqrt(n) (a - 1)(D_a(p^, q^) - D_a(p, q)) / CV(V)`, population CV of V.
    Thm2Divergence,
    /// Normalized plug-in entropy under the uniform law.
    Thm3UniformEntropy,
    /// Standardized `n (S_a(p^, q^) - 1) / (a (a - 1))` under `p = q`.
    Thm4DegenerateDivergence,
    /// `(X^2_p - m) / sqrt(2m)`.
    Lemma2Pearson,
    /// Standardized two-sample chi-square under equal marginals.
    Lemma2TwoSample,
}

fn default_alpha() -> Alpha {
    Alpha::half()
}

/// One simulation design. The sample size is `n_override` if given, else
/// `round(m^(1 + epsilon))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    #[serde(flatten)]
    pub family: Family,
    pub m: usize,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub n_override: Option<u64>,
    #[serde(default = "default_alpha")]
    pub alpha: Alpha,
    pub replicates: usize,
    pub statistic: Statistic,
    #[serde(default)]
    pub thinning_tau: Option<f64>,
    #[serde(default)]
    pub master_seed: u64,
}

impl SimConfig {
    pub fn new(family: Family, m: usize, epsilon: f64, statistic: Statistic, replicates: usize, master_seed: u64) -> Self {
        SimConfig {
            family,
            m,
            epsilon: Some(epsilon),
            n_override: None,
            alpha: Alpha::half(),
            replicates,
            statistic,
            thinning_tau: None,
            master_seed,
        }
    }

    pub fn with_n(mut self, n: u64) -> Self {
        self.n_override = Some(n);
        self
    }

    pub fn sample_size(&self) -> Result<u64> {
        let n = match (self.n_override, self.epsilon) {
            (Some(n), _) => n,
            (None, Some(eps)) => (self.m as f64).powf(1.0 + eps).round() as u64,
            (None, None) => return Err(Error::usage("config needs epsilon or n_override")),
        };
        if n == 0 {
            return Err(Error::domain("derived sample size is 0"));
        }
        Ok(n)
    }

    pub fn validate(&self) -> Result<u64> {
        if self.replicates == 0 {
            return Err(Error::domain("replicates must be at least 1"));
        }
        if self.m < 2 {
            return Err(Error::domain(format!("m must be at least 2, got {}", self.m)));
        }
        if let Some(tau) = self.thinning_tau {
            if !(tau > 0.0 && tau < 1.0) {
                return Err(Error::domain(format!("thinning_tau must lie in (0, 1), got {tau}")));
            }
        }
        self.sample_size()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_toml_round_trip() {
        let text = r#"
family = "power_law"
beta = 1.0
m = 300
epsilon = 1.5
alpha = 0.5
replicates = 2000
statistic = "thm1_entropy"
master_seed = 7
"#;
        let cfg: SimConfig = toml::from_str(text).unwrap();
        assert_eq!(cfg.family, Family::PowerLaw { beta: 1.0 });
        assert_eq!(cfg.statistic, Statistic::Thm1Entropy);
        assert_eq!(cfg.sample_size().unwrap(), 1_558_846);
        let back: SimConfig = toml::from_str(&toml::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn mixture_population_layout() {
        let fam = Family::Mixture {
            signal_beta: 1.0,
            signal_fraction: 0.5,
            noise_sizes: vec![2, 4],
            noise_weights: vec![1.0, 3.0],
        };
        let Population::Univariate(p) = fam.population(10).unwrap() else { panic!() };
        assert_eq!(p.m(), 10);
        let noise: f64 = p.probs()[4..].iter().sum();
        assert!((noise - 0.5).abs() < 1e-12);
        assert!((p.probs()[4] - 0.0625).abs() < 1e-12);
        assert!((p.probs()[9] - 0.09375).abs() < 1e-12);
        assert!(fam.population(6).is_err());
    }

    #[test]
    fn sample_size_rules() {
        let cfg = SimConfig::new(Family::Uniform, 100, -0.5, Statistic::Lemma2Pearson, 10, 0);
        assert_eq!(cfg.sample_size().unwrap(), 10);
        assert_eq!(cfg.clone().with_n(77).sample_size().unwrap(), 77);
        let mut bad = cfg;
        bad.replicates = 0;
        assert!(bad.validate().is_err());
    }
}
