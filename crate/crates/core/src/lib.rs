//! Rényi entropy, Rényi divergence and Hill numbers for sparse count data,
//! with central-limit-based intervals and tests that stay valid when the
//! number of categories grows with the sample size.
//!
//! ```
//! use renydiv::{entropy_ci, Alpha, CountVector};
//!
//! let counts = CountVector::new(vec![120, 64, 40, 31, 22, 9, 5, 2]).unwrap();
//! let ci = entropy_ci(&counts, Alpha::half(), 0.95).unwrap();
//! assert!(ci.lower < ci.estimate && ci.estimate < ci.upper);
//! ```

pub mod asymptotics;
pub mod cli;
pub mod counts;
pub mod error;
pub mod measures;
pub mod montecarlo;
pub mod numeric;
pub mod pipeline;
pub mod powerlaw;
pub mod projections;

pub use asymptotics::{
    binomial_thinning, chi_square_null_params, divergence_ci, entropy_ci, equality_test, hill_ci,
    pearson_chi_square, two_sample_chi_square, uniformity_test, EqualitySamples, EstimateWithCI, PairingMode,
    TestReport, UniformityMethod,
};
pub use counts::{CountVector, JointCountTable};
pub use error::{Error, Result};
pub use measures::{
    cross_power_sum, hill_number, power_sum, renyi_divergence, renyi_entropy, tsallis_entropy, Alpha,
    JointDistribution, ProbVector,
};
pub use pipeline::{diversity_pipeline, filter_noise, homogeneity_test, MixtureDecomposition, PipelineConfig, PipelineReport};
pub use powerlaw::{fit_powerlaw_ls, powerlaw_pmf, powerlaw_qq, FitResult, PowerLawModel};
pub use projections::{ld_diagnostic, projection_v_moments, projection_w_moments, LdReport};
