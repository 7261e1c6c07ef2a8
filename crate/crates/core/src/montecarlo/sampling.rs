use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::counts::{CountVector, JointCountTable};
use crate::error::{Error, Result};
use crate::measures::{JointDistribution, ProbVector};

/// Multinomial sampler by sequential conditional binomials.
///
/// Category `i` receives `bin(remaining, p_i / sum_{j >= i} p_j)` draws.
#[derive(Debug, Clone)]
pub struct MultinomialSampler {
    conditional: Vec<f64>,
}

impl MultinomialSampler {
    pub fn new(probs: &[f64]) -> Self {
        let mut conditional = vec![0.0; probs.len()];
        let mut tail = 0.0;
        for i in (0..probs.len()).rev() {
            tail += probs[i];
            conditional[i] = if tail > 0.0 { (probs[i] / tail).clamp(0.0, 1.0) } else { 0.0 };
        }
        // Rounding in the tail sums must not leave draws unassigned.
        if let Some(last) = probs.iter().rposition(|&x| x > 0.0) {
            conditional[last] = 1.0;
        }
        MultinomialSampler { conditional }
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: u64, rng: &mut R) -> Vec<u64> {
        let mut counts = vec![0; self.conditional.len()];
        let mut remaining = n;
        for (slot, &prob) in counts.iter_mut().zip(&self.conditional) {
            if remaining == 0 {
                break;
            }
            let k = if prob >= 1.0 {
                remaining
            } else if prob <= 0.0 {
                0
            } else {
                Binomial::new(remaining, prob).expect("probability in (0, 1)").sample(rng)
            };
            *slot = k;
            remaining -= k;
        }
        counts
    }
}

/// Counts of `n` iid draws from `p`.
pub fn sample_multinomial<R: Rng + ?Sized>(p: &ProbVector, n: u64, rng: &mut R) -> Result<CountVector> {
    if n == 0 {
        return Err(Error::domain("sample size must be at least 1"));
    }
    CountVector::new(MultinomialSampler::new(p.probs()).sample(n, rng))
}

/// Joint counts of `n` iid pairs drawn from `joint`.
pub fn sample_joint<R: Rng + ?Sized>(joint: &JointDistribution, n: u64, rng: &mut R) -> Result<JointCountTable> {
    if n == 0 {
        return Err(Error::domain("sample size must be at least 1"));
    }
    let m = joint.m();
    let counts = MultinomialSampler::new(joint.cells()).sample(n, rng);
    JointCountTable::new(
        m,
        counts.into_iter().enumerate().filter(|&(_, k)| k > 0).map(|(cell, k)| ((cell / m, cell % m), k)),
    )
}
