//! Command-line front end: count-table input, JSON/TSV reports, CSV plot data.

mod output;
mod table;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

pub use output::{render, Format};
pub use table::{parse_count_table, read_count_table, write_count_table, CountTableFile};

use crate::asymptotics::{
    divergence_ci, entropy_ci, equality_test, hill_ci, EqualitySamples, EstimateWithCI, PairingMode, TestReport,
};
use crate::counts::CountVector;
use crate::error::{Error, Result};
use crate::measures::Alpha;
use crate::montecarlo::{simulate_statistic, with_workers, SimConfig};
use crate::pipeline::{diversity_pipeline, filter_noise, homogeneity_test, MixtureDecomposition, PipelineConfig, PipelineReport};
use crate::powerlaw::{fit_powerlaw_ls, FitResult};

/// Environment variable supplying a default simulation seed.
pub const SEED_ENV: &str = "RENYDIV_SEED";

#[derive(Debug, Parser)]
#[command(name = "renydiv", version, about = "Rényi entropy and divergence inference for count data")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Rényi exponent in (0, 1).
    #[arg(long, global = true, default_value_t = 0.5)]
    alpha: f64,
    /// Confidence level of intervals.
    #[arg(long, global = true, default_value_t = 0.95)]
    level: f64,
    /// Random seed (overrides the config file and RENYDIV_SEED).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Debug, Args)]
struct Inputs {
    /// Count tables (TSV). Categories are matched by id across files.
    #[arg(required = true)]
    tables: Vec<PathBuf>,
    /// Comma-separated sample columns to use, in order; default all.
    #[arg(long, value_delimiter = ',')]
    samples: Vec<String>,
}

#[derive(Debug, Args)]
struct NoiseArgs {
    /// Significance level of the sequential uniformity tests.
    #[arg(long, default_value_t = 0.01)]
    noise_level: f64,
    /// Maximum number of noise blocks.
    #[arg(long, default_value_t = 2)]
    max_components: usize,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Entropy and Hill-number intervals for each sample.
    Entropy(Inputs),
    /// Divergence interval for a pair of samples.
    Divergence(Inputs),
    /// Split each sample into uniform noise blocks and signal.
    FilterNoise {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        noise: NoiseArgs,
    },
    /// Test whether two samples share one distribution.
    TestEquality(Inputs),
    /// Joint equality test over consecutive sample pairs (s1,s2), (s3,s4), ...
    TestHomogeneity(Inputs),
    /// Least-squares power-law fit for each sample.
    FitPowerlaw(Inputs),
    /// Noise filtering, equality test and divergence for a pair of samples.
    Pipeline {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        noise: NoiseArgs,
        /// Significance level of the equality test.
        #[arg(long, default_value_t = 0.05)]
        test_level: f64,
    },
    /// Monte Carlo run from a TOML config; writes QQ data as CSV.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Worker threads; defaults to the number of CPUs.
        #[arg(long)]
        workers: Option<usize>,
    },
}

/// Runs the command line `args` (program name first) and returns the exit code:
/// 0 on success, 2 on usage or validation errors, 1 on internal errors.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                2
            } else {
                1
            }
        }
    }
}

fn execute(cli: &Cli) -> Result<()> {
    let c = &cli.common;
    let alpha = Alpha::new(c.alpha)?;
    let text = match &cli.command {
        Command::Entropy(inputs) => render(&entropy_report(inputs, alpha, c.level)?, c.format)?,
        Command::Divergence(inputs) => {
            let [(xn, x), (yn, y)] = pair(inputs)?;
            let d = divergence_ci(&x, &y, alpha, c.level, None)?;
            render(&DivergenceReport { alpha, x: xn, y: yn, divergence: d }, c.format)?
        }
        Command::FilterNoise { inputs, noise } => {
            let samples = load_samples(inputs)?
                .into_iter()
                .map(|(sample, counts)| {
                    Ok(SampleDecomposition { decomposition: filter_noise(&counts, noise.noise_level, noise.max_components)?, sample })
                })
                .collect::<Result<Vec<_>>>()?;
            render(&FilterReport { noise_level: noise.noise_level, max_components: noise.max_components, samples }, c.format)?
        }
        Command::TestEquality(inputs) => {
            let [(xn, x), (yn, y)] = pair(inputs)?;
            let test = equality_test(EqualitySamples::Counts(&x, &y), alpha, PairingMode::Independent)?;
            render(&EqualityReport { alpha, x: xn, y: yn, test }, c.format)?
        }
        Command::TestHomogeneity(inputs) => {
            let samples = load_samples(inputs)?;
            if samples.len() % 2 != 0 {
                return Err(Error::usage(format!("homogeneity needs an even number of samples, got {}", samples.len())));
            }
            let names = samples.chunks(2).map(|w| [w[0].0.clone(), w[1].0.clone()]).collect();
            let pairs: Vec<_> = samples.chunks(2).map(|w| (w[0].1.clone(), w[1].1.clone())).collect();
            render(&HomogeneityReport { alpha, pairs: names, test: homogeneity_test(&pairs, alpha)? }, c.format)?
        }
        Command::FitPowerlaw(inputs) => {
            let samples = load_samples(inputs)?
                .into_iter()
                .map(|(sample, counts)| Ok(SampleFit { fit: fit_powerlaw_ls(&counts)?, sample }))
                .collect::<Result<Vec<_>>>()?;
            render(&FitReport { samples }, c.format)?
        }
        Command::Pipeline { inputs, noise, test_level } => {
            let [(xn, x), (yn, y)] = pair(inputs)?;
            let config = PipelineConfig {
                noise_level: noise.noise_level,
                max_components: noise.max_components,
                test_level: *test_level,
                ci_level: c.level,
            };
            let report = diversity_pipeline(&x, &y, alpha, &config)?;
            render(&NamedPipelineReport { x: xn, y: yn, config, report }, c.format)?
        }
        Command::Simulate { config, workers } => simulate_csv(config, *workers, c.seed)?,
    };
    emit(c.output.as_deref(), &text)
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

/// Reads the tables, aligns them on the union of category ids, and returns
/// the selected samples in order.
fn load_samples(inputs: &Inputs) -> Result<Vec<(String, CountVector)>> {
    let tables = inputs.tables.iter().map(|p| read_count_table(p)).collect::<Result<Vec<_>>>()?;
    let mut universe: Vec<String> = Vec::new();
    let mut known = std::collections::HashSet::new();
    for t in &tables {
        for id in &t.categories {
            if known.insert(id.clone()) {
                universe.push(id.clone());
            }
        }
    }
    let mut all: Vec<(String, Vec<u64>)> = Vec::new();
    for t in &tables {
        all.extend(t.sample_names.iter().cloned().zip(t.aligned(&universe)));
    }
    let chosen: Vec<(String, Vec<u64>)> = if inputs.samples.is_empty() {
        all
    } else {
        inputs
            .samples
            .iter()
            .map(|name| {
                all.iter()
                    .find(|(n, _)| n == name)
                    .cloned()
                    .ok_or_else(|| Error::usage(format!("no sample column named '{name}'")))
            })
            .collect::<Result<_>>()?
    };
    chosen
        .into_iter()
        .map(|(name, counts)| {
            let c = CountVector::new(counts).map_err(|_| Error::domain(format!("sample '{name}' has no observations")))?;
            Ok((name, c))
        })
        .collect()
}

fn pair(inputs: &Inputs) -> Result<[(String, CountVector); 2]> {
    let samples = load_samples(inputs)?;
    let k = samples.len();
    <[_; 2]>::try_from(samples)
        .map_err(|_| Error::usage(format!("expected exactly 2 samples, found {k}; choose them with --samples")))
}

fn entropy_report(inputs: &Inputs, alpha: Alpha, level: f64) -> Result<EntropyReport> {
    let samples = load_samples(inputs)?
        .into_iter()
        .map(|(sample, c)| {
            Ok(SampleEntropy { entropy: entropy_ci(&c, alpha, level)?, hill_number: hill_ci(&c, alpha, level)?, sample })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EntropyReport { alpha, level, samples })
}

fn format_number(x: f64) -> String {
    let rounded: f64 = format!("{x:.8e}").parse().expect("formatted float");
    rounded.to_string()
}

/// Loads a flat TOML config. Seed precedence: `--seed`, then `master_seed` in
/// the file, then `RENYDIV_SEED`, then 0.
pub fn load_sim_config(path: &Path, seed: Option<u64>) -> Result<SimConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let raw: toml::Table = toml::from_str(&text).map_err(|e| Error::Parse {
        line: e.span().map_or(1, |s| text[..s.start].lines().count().max(1)),
        message: e.message().to_string(),
    })?;
    let in_file = raw.contains_key("master_seed");
    let mut cfg: SimConfig = raw
        .try_into()
        .map_err(|e: toml::de::Error| Error::Validation { line: 0, message: e.message().to_string() })?;
    if let Some(s) = seed {
        cfg.master_seed = s;
    } else if !in_file {
        if let Ok(v) = std::env::var(SEED_ENV) {
            cfg.master_seed = v
                .trim()
                .parse()
                .map_err(|_| Error::usage(format!("{SEED_ENV} must be a non-negative integer, got '{v}'")))?;
        }
    }
    Ok(cfg)
}

/// `simulate` takes the exponent from the config file, not from `--alpha`.
fn simulate_csv(path: &Path, workers: Option<usize>, seed: Option<u64>) -> Result<String> {
    let cfg = load_sim_config(path, seed)?;
    let run = match workers {
        Some(0) => return Err(Error::usage("--workers must be at least 1")),
        Some(w) => with_workers(w, || simulate_statistic(&cfg))??,
        None => simulate_statistic(&cfg)?,
    };
    let mut out = String::from("normal_quantile,sample_quantile\n");
    for (q, x) in &run.qq_pairs {
        out.push_str(&format!("{},{}\n", format_number(*q), format_number(*x)));
    }
    out.push_str(&format!("# ks_distance,{}\n", format_number(run.ks_distance)));
    out.push_str(&format!("# n,{}\n# replicates,{}\n", run.n, run.samples.len()));
    Ok(out)
}

#[derive(Serialize)]
struct SampleEntropy {
    sample: String,
    #[serde(rename = "H_alpha")]
    entropy: EstimateWithCI,
    #[serde(rename = "ENC_alpha")]
    hill_number: EstimateWithCI,
}

#[derive(Serialize)]
struct EntropyReport {
    alpha: Alpha,
    level: f64,
    samples: Vec<SampleEntropy>,
}

#[derive(Serialize)]
struct DivergenceReport {
    alpha: Alpha,
    x: String,
    y: String,
    #[serde(rename = "D_alpha")]
    divergence: EstimateWithCI,
}

#[derive(Serialize)]
struct SampleDecomposition {
    sample: String,
    decomposition: MixtureDecomposition,
}

#[derive(Serialize)]
struct FilterReport {
    noise_level: f64,
    max_components: usize,
    samples: Vec<SampleDecomposition>,
}

#[derive(Serialize)]
struct EqualityReport {
    alpha: Alpha,
    x: String,
    y: String,
    test: TestReport,
}

#[derive(Serialize)]
struct HomogeneityReport {
    alpha: Alpha,
    pairs: Vec<[String; 2]>,
    test: TestReport,
}

#[derive(Serialize)]
struct SampleFit {
    sample: String,
    fit: FitResult,
}

#[derive(Serialize)]
struct FitReport {
    samples: Vec<SampleFit>,
}

#[derive(Serialize)]
struct NamedPipelineReport {
    x: String,
    y: String,
    config: PipelineConfig,
    #[serde(flatten)]
    report: PipelineReport,
}
