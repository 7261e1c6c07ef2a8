use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::counts::{CountVector, JointCountTable};
use crate::error::{Error, Result};

fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("retention probability must lie in (0, 1), got {tau}")))
    }
}

#[inline]
fn thin<R: Rng + ?Sized>(count: u64, tau: f64, rng: &mut R) -> u64 {
    if count == 0 {
        0
    } else {
        Binomial::new(count, tau).expect("tau in (0, 1)").sample(rng)
    }
}

/// Keeps each of the `n` observations independently with probability `tau`.
///
/// The retained total is `bin(n, tau)`. Fails if every observation is dropped.
pub fn binomial_thinning<R: Rng + ?Sized>(c: &CountVector, tau: f64, rng: &mut R) -> Result<CountVector> {
    check_tau(tau)?;
    let kept: Vec<u64> = c.counts().iter().map(|&k| thin(k, tau, rng)).collect();
    CountVector::new(kept).map_err(|_| Error::domain("thinning removed every observation"))
}

/// Thinning of paired observations: each pair is kept or dropped as a unit.
pub fn binomial_thinning_joint<R: Rng + ?Sized>(
    t: &JointCountTable,
    tau: f64,
    rng: &mut R,
) -> Result<JointCountTable> {
    check_tau(tau)?;
    let cells: Vec<_> = t.cells().map(|(ij, k)| (ij, thin(k, tau, rng))).collect();
    JointCountTable::new(t.m(), cells).map_err(|_| Error::domain("thinning removed every observation"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn thinning_is_reproducible() {
        let c = CountVector::new(vec![10, 0]).unwrap();
        let a = binomial_thinning(&c, 0.5, &mut ChaCha8Rng::seed_from_u64(9));
        let b = binomial_thinning(&c, 0.5, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
        if let Ok(v) = a {
            assert!(v.n() <= 10);
            assert_eq!(v.counts()[1], 0);
        }
    }

    #[test]
    fn near_one_retention_keeps_everything() {
        let c = CountVector::new(vec![4, 3, 2, 1]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let out = binomial_thinning(&c, 1.0 - 1e-12, &mut rng).unwrap();
        assert_eq!(out, c);
    }

    #[test]
    fn retention_probability_domain() {
        let c = CountVector::new(vec![1]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for tau in [0.0, 1.0, -0.2, 1.5] {
            assert!(matches!(binomial_thinning(&c, tau, &mut rng), Err(Error::Domain(_))));
        }
    }

    #[test]
    fn retained_total_has_binomial_mean() {
        let c = CountVector::new(vec![500, 300, 200]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let reps = 400;
        let total: u64 = (0..reps).map(|_| binomial_thinning(&c, 0.3, &mut rng).unwrap().n()).sum();
        let mean = total as f64 / reps as f64;
        // sd of the mean: sqrt(1000 * 0.3 * 0.7 / 400) ~ 0.72
        assert!((mean - 300.0).abs() < 4.0, "mean {mean}");
    }
}
