use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_renydiv"));
    c.env_remove("RENYDIV_SEED");
    c
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn powerlaw_table(names: &[&str], betas: &[f64], m: usize, scale: f64) -> String {
    let mut s = format!("category\t{}\n", names.join("\t"));
    for i in 1..=m {
        s.push_str(&format!("c{i}"));
        for b in betas {
            s.push_str(&format!("\t{}", (scale * (i as f64).powf(-b)).round() as u64));
        }
        s.push('\n');
    }
    s
}

#[test]
fn entropy_reports_interval_per_sample() {
    let dir = tempfile::tempdir().unwrap();
    let t = write(dir.path(), "counts.tsv", &powerlaw_table(&["a", "b"], &[0.8, 1.0], 50, 2000.0));
    let v = json(&bin().args(["entropy", "--alpha", "0.5"]).arg(&t).output().unwrap());
    let samples = v["samples"].as_array().unwrap();
    assert_eq!(samples.len(), 2);
    for s in samples {
        let h = &s["H_alpha"];
        for key in ["estimate", "lower", "upper", "std_error"] {
            assert!(h[key].is_number(), "{key}");
        }
        assert!(h["lower"].as_f64() < h["estimate"].as_f64());
        assert!(s["ENC_alpha"]["estimate"].as_f64().unwrap() > 1.0);
    }
    assert_eq!(samples[0]["sample"], "a");
}

#[test]
fn pipeline_uses_table_field_names() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.tsv", &powerlaw_table(&["treated"], &[0.6], 80, 4000.0));
    let b = write(dir.path(), "b.tsv", &powerlaw_table(&["control"], &[1.1], 80, 4000.0));
    let v = json(&bin().args(["pipeline", "--alpha", "0.5"]).arg(&a).arg(&b).output().unwrap());
    assert!(v["k_m"].is_u64());
    assert!(v["D_alpha"]["estimate"].is_number());
    for s in v["samples"].as_array().unwrap() {
        assert!(s["H_alpha"]["estimate"].is_number());
        assert!(s["ENC_alpha"]["estimate"].is_number());
        assert!(s["decomposition"]["noise_fraction"].is_number());
        assert!(s["decomposition"]["signal_fraction"].is_number());
        assert!(s["decomposition"]["k_m"].is_u64());
    }
    assert_eq!(v["x"], "treated");
}

#[test]
fn tsv_format_and_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let t = write(dir.path(), "counts.tsv", &powerlaw_table(&["a", "b"], &[0.8, 1.0], 30, 900.0));
    let out = dir.path().join("report.tsv");
    let status = bin().args(["fit-powerlaw", "--format", "tsv", "--output"]).arg(&out).arg(&t).status().unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(out).unwrap();
    assert!(text.starts_with("field\tvalue\n"));
    assert!(text.contains("samples.1.fit.beta_hat\t"));
}

#[test]
fn other_subcommands_run() {
    let dir = tempfile::tempdir().unwrap();
    let t = write(dir.path(), "six.tsv", &powerlaw_table(&["T1", "N1", "T2", "N2", "T3", "N3"], &[0.7, 0.9, 0.75, 0.95, 0.8, 1.0], 60, 3000.0));
    let v = json(&bin().arg("test-homogeneity").arg(&t).output().unwrap());
    assert_eq!(v["test"]["method"], "chi2_homogeneity");
    assert!(v["test"]["p_value"].as_f64().unwrap() < 0.001);

    let v = json(&bin().args(["test-equality", "--samples", "T1,N1"]).arg(&t).output().unwrap());
    assert_eq!(v["test"]["sidedness"], "upper");

    let v = json(&bin().args(["divergence", "--samples", "T1,N1", "--level", "0.9"]).arg(&t).output().unwrap());
    assert_eq!(v["D_alpha"]["level"], 0.9);

    let v = json(&bin().args(["filter-noise", "--samples", "T2"]).arg(&t).output().unwrap());
    assert_eq!(v["samples"][0]["sample"], "T2");
}

#[test]
fn usage_and_validation_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let dup = write(dir.path(), "dup.tsv", "category\ta\nx\t1\ny\t2\nx\t3\n");
    let out = bin().arg("entropy").arg(&dup).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("'x'") && err.contains("line 4"), "{err}");

    assert_eq!(bin().arg("no-such-command").status().unwrap().code(), Some(2));
    assert_eq!(bin().args(["entropy", "--bogus"]).arg(&dup).status().unwrap().code(), Some(2));
    let t = write(dir.path(), "ok.tsv", &powerlaw_table(&["a"], &[0.8], 20, 500.0));
    assert_eq!(bin().args(["entropy", "--alpha", "1.5"]).arg(&t).status().unwrap().code(), Some(2));
    assert_eq!(bin().args(["divergence"]).arg(&t).status().unwrap().code(), Some(2));
    assert_eq!(bin().arg("--help").status().unwrap().code(), Some(0));
}

#[test]
fn missing_file_is_an_internal_error() {
    assert_eq!(bin().args(["entropy", "/nonexistent/counts.tsv"]).status().unwrap().code(), Some(1));
}

const SIM: &str = r#"family = "uniform"
m = 30
epsilon = 1.0
statistic = "lemma2_pearson"
replicates = 50
"#;

#[test]
fn simulate_writes_qq_csv_and_respects_seed_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "sim.toml", SIM);
    let run = |extra: &[&str], env: Option<&str>| {
        let mut c = bin();
        c.args(["simulate", "--config"]).arg(&cfg).args(extra);
        if let Some(e) = env {
            c.env("RENYDIV_SEED", e);
        }
        let out = c.output().unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        String::from_utf8(out.stdout).unwrap()
    };
    let text = run(&[], None);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("normal_quantile,sample_quantile"));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 51);
    assert!(text.lines().any(|l| l.starts_with("# ks_distance,")));

    assert_eq!(run(&["--seed", "5"], None), run(&[], Some("5")));
    assert_eq!(run(&["--seed", "5"], Some("9")), run(&["--seed", "5"], None));
    assert_ne!(run(&["--seed", "5"], None), run(&["--seed", "6"], None));
}

#[test]
fn simulate_rejects_undefined_statistic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "thm3.toml", "family = \"uniform\"\nm = 100\nepsilon = -0.5\nstatistic = \"thm3_uniform_entropy\"\nreplicates = 10\n");
    let out = bin().args(["simulate", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("undefined"));
}
