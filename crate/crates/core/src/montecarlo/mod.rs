//! Seeded, parallel Monte Carlo for the normalized statistics.
//!
//! Replicate `r` draws from its own ChaCha8 stream (`master_seed`, stream `r`),
//! so a run is bit-identical whatever the number of worker threads.

mod config;
mod sampling;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::Serialize;

pub use config::{Family, Population, SimConfig, Statistic};
pub use sampling::{sample_joint, sample_multinomial, MultinomialSampler};

use crate::asymptotics::{
    binomial_thinning, binomial_thinning_joint, chi_square_null_params, divergence_ci, entropy_ci,
    uniformity_test, UniformityMethod,
};
use crate::counts::{CountVector, JointCountTable};
use crate::error::{Error, Result};
use crate::measures::{cross_power_sum_raw, power_sum_raw, JointDistribution, ProbVector};
use crate::numeric::{csum, normal_cdf, normal_quantile};
use crate::projections::{nondegenerate, v_moments_independent_raw, v_moments_joint_raw, w_moments_raw};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimRun {
    pub samples: Vec<f64>,
    pub ks_distance: f64,
    /// `(normal quantile at (i - 0.5) / B, i-th smallest sample)`.
    pub qq_pairs: Vec<(f64, f64)>,
    pub config: SimConfig,
    pub n: u64,
}

/// Sup distance between the empirical CDF of `samples` and the standard normal CDF.
pub fn ks_distance_normal(samples: &[f64]) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let b = sorted.len() as f64;
    sorted.iter().enumerate().fold(0.0, |d: f64, (i, &x)| {
        let f = normal_cdf(x);
        d.max((i + 1) as f64 / b - f).max(f - i as f64 / b)
    })
}

fn qq_pairs(samples: &[f64]) -> Vec<(f64, f64)> {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let b = sorted.len() as f64;
    sorted.into_iter().enumerate().map(|(i, x)| (normal_quantile((i as f64 + 0.5) / b), x)).collect()
}

/// Runs `f` on a dedicated pool of `workers` threads.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Io(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

/// A sample (or pair of samples) from one replicate.
enum Draw {
    One(CountVector),
    Two { x: CountVector, y: CountVector, joint: Option<JointCountTable> },
}

impl Draw {
    fn one(&self) -> &CountVector {
        match self {
            Draw::One(c) => c,
            Draw::Two { x, .. } => x,
        }
    }

    fn pair(&self) -> (&CountVector, &CountVector) {
        match self {
            Draw::One(c) => (c, c),
            Draw::Two { x, y, .. } => (x, y),
        }
    }
}

fn freqs(c: &CountVector) -> Vec<f64> {
    let n = c.n() as f64;
    c.counts().iter().map(|&k| k as f64 / n).collect()
}

/// Everything a replicate needs, computed once per run.
struct Design {
    population: Population,
    samplers: Vec<MultinomialSampler>,
    n: u64,
    tau: Option<f64>,
    alpha: f64,
}

impl Design {
    fn new(cfg: &SimConfig) -> Result<Self> {
        let n = cfg.validate()?;
        let population = cfg.family.population(cfg.m)?;
        let samplers = match &population {
            Population::Univariate(p) => vec![MultinomialSampler::new(p.probs())],
            Population::Independent(p, q) => vec![MultinomialSampler::new(p.probs()), MultinomialSampler::new(q.probs())],
            Population::Paired(j, _) => vec![MultinomialSampler::new(j.cells())],
        };
        Ok(Design { population, samplers, n, tau: cfg.thinning_tau, alpha: cfg.alpha.get() })
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Result<Draw> {
        match &self.population {
            Population::Univariate(_) => {
                let c = CountVector::new(self.samplers[0].sample(self.n, rng))?;
                Ok(Draw::One(match self.tau {
                    Some(tau) => binomial_thinning(&c, tau, rng)?,
                    None => c,
                }))
            }
            Population::Independent(..) => {
                // Pairs are thinned as units, so both samples keep a common size.
                let n = match self.tau {
                    Some(tau) => Binomial::new(self.n, tau).expect("tau in (0, 1)").sample(rng),
                    None => self.n,
                };
                if n == 0 {
                    return Err(Error::domain("thinning removed every observation"));
                }
                let x = CountVector::new(self.samplers[0].sample(n, rng))?;
                let y = CountVector::new(self.samplers[1].sample(n, rng))?;
                Ok(Draw::Two { x, y, joint: None })
            }
            Population::Paired(j, _) => {
                let m = j.m();
                let cells = self.samplers[0].sample(self.n, rng);
                let t = JointCountTable::new(
                    m,
                    cells.into_iter().enumerate().filter(|&(_, k)| k > 0).map(|(c, k)| ((c / m, c % m), k)),
                )?;
                let t = match self.tau {
                    Some(tau) => binomial_thinning_joint(&t, tau, rng)?,
                    None => t,
                };
                Ok(Draw::Two { x: t.row_counts(), y: t.col_counts(), joint: Some(t) })
            }
        }
    }

    fn univariate(&self, what: &str) -> Result<&ProbVector> {
        match &self.population {
            Population::Univariate(p) => Ok(p),
            _ => Err(Error::usage(format!("{what} needs a univariate family"))),
        }
    }

    fn marginals(&self, what: &str) -> Result<(&[f64], &[f64])> {
        match &self.population {
            Population::Independent(p, q) => Ok((p.probs(), q.probs())),
            Population::Paired(_, p) => Ok((p.probs(), p.probs())),
            Population::Univariate(_) => Err(Error::usage(format!("{what} needs a bivariate family"))),
        }
    }

    /// The joint law of a pair; the product for independent samples.
    fn joint(&self) -> Result<JointDistribution> {
        match &self.population {
            Population::Independent(p, q) => JointDistribution::product(p, q),
            Population::Paired(j, _) => Ok(j.clone()),
            Population::Univariate(_) => Err(Error::usage("a bivariate family is required")),
        }
    }

    fn same_marginals(&self, what: &str) -> Result<&[f64]> {
        let (p, q) = self.marginals(what)?;
        if p.iter().zip(q).any(|(a, b)| (a - b).abs() > 1e-12) {
            return Err(Error::usage(format!("{what} needs equal marginals (p = q)")));
        }
        Ok(p)
    }

    /// Population `D_a(p, q)`, `S_a(p, q)` and `sd(V)`.
    fn divergence_truth(&self) -> Result<(f64, f64, f64)> {
        let a = self.alpha;
        let (p, q) = self.marginals("thm2_divergence")?;
        let s = cross_power_sum_raw(p, q, a).value;
        let (mean, var) = match &self.population {
            Population::Paired(j, _) => {
                let v = v_moments_joint_raw(j, p, q, a);
                (v.mean, v.variance)
            }
            _ => {
                let v = v_moments_independent_raw(p, q, a);
                (v.mean, v.var_x + v.var_y)
            }
        };
        if !nondegenerate(var, mean) {
            return Err(Error::usage("V is degenerate (p = q); use thm4_degenerate_divergence"));
        }
        Ok((s.ln() / (a - 1.0), s, var.sqrt()))
    }
}

type Replicate = Box<dyn Fn(&Draw) -> Result<f64> + Sync>;

/// Builds the statistic for a design, with normalizers from the population.
fn normalized_statistic(cfg: &SimConfig, design: &Design) -> Result<Replicate> {
    let a = design.alpha;
    let alpha = cfg.alpha;
    Ok(match cfg.statistic {
        Statistic::Thm1Entropy => {
            let p = design.univariate("thm1_entropy")?;
            let truth = power_sum_raw(p.probs(), a).ln() / (1.0 - a);
            let w = w_moments_raw(p.probs(), a);
            if !nondegenerate(w.variance, w.mean) {
                return Err(Error::usage("W is degenerate for a uniform law; use thm3_uniform_entropy"));
            }
            let scale = w.cv * a / (1.0 - a);
            Box::new(move |d| {
                let c = d.one();
                let h = power_sum_raw(&freqs(c), a).ln() / (1.0 - a);
                Ok((h - truth) * (c.n() as f64).sqrt() / scale)
            })
        }
        Statistic::Thm2Divergence => {
            // (a - 1)(D^ - D) = log S^ - log S
            let (_, s, sd) = design.divergence_truth()?;
            let cv = sd / s;
            Box::new(move |d| {
                let (x, y) = d.pair();
                let log_ratio = (cross_power_sum_raw(&freqs(x), &freqs(y), a).value / s).ln();
                Ok(log_ratio * (x.n() as f64).sqrt() / cv)
            })
        }
        Statistic::Thm3UniformEntropy => {
            if !matches!(cfg.family, Family::Uniform) {
                return Err(Error::usage("thm3_uniform_entropy needs the uniform family"));
            }
            if design.n <= cfg.m as u64 {
                return Err(Error::Undefined(format!(
                    "normalized uniform entropy is undefined for n <= m (n = {}, m = {})",
                    design.n, cfg.m
                )));
            }
            Box::new(move |d| Ok(uniformity_test(d.one(), alpha, UniformityMethod::Thm3)?.statistic))
        }
        Statistic::Thm4DegenerateDivergence => {
            design.same_marginals("thm4_degenerate_divergence")?;
            let null = chi_square_null_params(&design.joint()?)?;
            let sd = std::f64::consts::SQRT_2 * null.gamma_sq.sqrt();
            Box::new(move |d| {
                let (x, y) = d.pair();
                let s = cross_power_sum_raw(&freqs(x), &freqs(y), a).value;
                let raw = x.n() as f64 * (s - 1.0) / (a * (a - 1.0));
                Ok((raw - null.mu) / sd)
            })
        }
        Statistic::Lemma2Pearson => {
            let p = design.univariate("lemma2_pearson")?.clone();
            let m = p.m() as f64;
            Box::new(move |d| {
                let c = d.one();
                let n = c.n() as f64;
                let x2 = n * csum(c.counts().iter().zip(p.probs()).map(|(&k, &pi)| {
                    let e = k as f64 / n - pi;
                    e * e / pi
                }));
                Ok((x2 - m) / (2.0 * m).sqrt())
            })
        }
        Statistic::Lemma2TwoSample => {
            let p = design.same_marginals("lemma2_two_sample")?.to_vec();
            let null = chi_square_null_params(&design.joint()?)?;
            let sd = std::f64::consts::SQRT_2 * null.gamma_sq.sqrt();
            Box::new(move |d| {
                let (x, y) = d.pair();
                let n = x.n() as f64;
                let x2 = n * csum(p.iter().enumerate().map(|(i, &pi)| {
                    let e = (x.counts()[i] as f64 - y.counts()[i] as f64) / n;
                    e * e / (2.0 * pi)
                }));
                Ok((x2 - null.mu) / sd)
            })
        }
    })
}

fn replicate_stream(seed: u64, r: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(r as u64);
    rng
}

fn run_replicates<T: Send>(cfg: &SimConfig, design: &Design, f: impl Fn(&Draw) -> Result<T> + Sync) -> Result<Vec<T>> {
    (0..cfg.replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = replicate_stream(cfg.master_seed, r);
            f(&design.draw(&mut rng)?)
        })
        .collect()
}

/// Draws `B` replicates and standardizes the chosen statistic with
/// population normalizers. Runs on the current rayon pool; see [`with_workers`].
pub fn simulate_statistic(cfg: &SimConfig) -> Result<SimRun> {
    let design = Design::new(cfg)?;
    let stat = normalized_statistic(cfg, &design)?;
    let samples = run_replicates(cfg, &design, |d| stat(d))?;
    Ok(SimRun {
        ks_distance: ks_distance_normal(&samples),
        qq_pairs: qq_pairs(&samples),
        samples,
        config: cfg.clone(),
        n: design.n,
    })
}

/// Fraction of replicates whose plug-in interval covers the population value.
/// Replicates where the interval cannot be formed count as misses.
pub fn coverage_experiment(cfg: &SimConfig, level: f64) -> Result<f64> {
    let design = Design::new(cfg)?;
    let alpha = cfg.alpha;
    let hits = match cfg.statistic {
        Statistic::Thm1Entropy => {
            let p = design.univariate("entropy coverage")?;
            let truth = power_sum_raw(p.probs(), alpha.get()).ln() / (1.0 - alpha.get());
            run_replicates(cfg, &design, |d| Ok(entropy_ci(d.one(), alpha, level).is_ok_and(|ci| ci.covers(truth))))?
        }
        Statistic::Thm2Divergence => {
            let (truth, _, _) = design.divergence_truth()?;
            run_replicates(cfg, &design, |d| {
                let Draw::Two { x, y, joint } = d else { unreachable!("bivariate design") };
                Ok(divergence_ci(x, y, alpha, level, joint.as_ref()).is_ok_and(|ci| ci.covers(truth)))
            })?
        }
        _ => return Err(Error::usage("coverage needs thm1_entropy or thm2_divergence")),
    };
    Ok(hits.iter().filter(|&&h| h).count() as f64 / hits.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BiasEstimate {
    /// Monte Carlo mean of `S_a(p^) / S_a(p) - 1`, or the two-sample analogue.
    pub relative_bias: f64,
    pub mc_se: f64,
}

/// Relative bias of the plug-in power sum.
pub fn bias_experiment(cfg: &SimConfig) -> Result<BiasEstimate> {
    let design = Design::new(cfg)?;
    let a = cfg.alpha.get();
    let ratios = match cfg.statistic {
        Statistic::Thm1Entropy => {
            let s = power_sum_raw(design.univariate("entropy bias")?.probs(), a);
            run_replicates(cfg, &design, |d| Ok(power_sum_raw(&freqs(d.one()), a) / s - 1.0))?
        }
        Statistic::Thm2Divergence => {
            let (p, q) = design.marginals("divergence bias")?;
            let s = cross_power_sum_raw(p, q, a).value;
            run_replicates(cfg, &design, |d| {
                let (x, y) = d.pair();
                Ok(cross_power_sum_raw(&freqs(x), &freqs(y), a).value / s - 1.0)
            })?
        }
        _ => return Err(Error::usage("bias needs thm1_entropy or thm2_divergence")),
    };
    let b = ratios.len() as f64;
    let mean = csum(ratios.iter().copied()) / b;
    let var = if ratios.len() > 1 { csum(ratios.iter().map(|r| (r - mean).powi(2))) / (b - 1.0) } else { 0.0 };
    Ok(BiasEstimate { relative_bias: mean, mc_se: (var / b).sqrt() })
}
