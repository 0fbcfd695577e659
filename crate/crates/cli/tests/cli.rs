use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fibertrace_cli::config::Geometry;
use fibertrace_cli::{read_manifest, CliError, ExperimentConfig, ExperimentKind, OUTPUT_DIR_ENV};
use tempfile::TempDir;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn fibertrace(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fibertrace")).args(args).env_remove(OUTPUT_DIR_ENV).output().expect("binary runs")
}

fn run_in(kind: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![kind, config.to_str().unwrap(), "--output", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    fibertrace(&args)
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

const SMALL_MATRIX: &str = "kind = \"matrixmodel\"\nseed = 7\n\n[matrixmodel]\noperators = 6\ndplus_samples = 6\ndstr_samples = 2\n";

#[test]
fn malformed_config_exits_two_with_position() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "bad.toml", "kind = \"ledger\"\n\n[ledger\nq = 1\n");
    let out = run_in("ledger", &cfg, &dir.path().join("out"), &[]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3, column"), "{err}");

    match ExperimentConfig::parse("kind = \"spa\"\nseed = \n") {
        Err(CliError::Parse { line, .. }) => assert_eq!(line, 2),
        other => panic!("{other:?}"),
    }
}

#[test]
fn invalid_configs_exit_three() {
    let dir = TempDir::new().unwrap();
    let cases = [
        // non-positive tolerance
        ("wavetrace", "kind = \"wavetrace\"\n[wavetrace]\nsigma = -0.05\ncutoff = 1e4\nt_min = 0.0\nt_max = 1.0\nt_step = 0.1\n[wavetrace.geometry]\ntype = \"circle\"\nmetric = { constant = 1 }\n"),
        // unknown key
        ("ledger", "kind = \"ledger\"\n[ledger]\nq = 1\nm = 2\norders = [2]\nd = 1\ncodims = [0]\nv_max = 0\ncolour = 3\n"),
        // empty base grid
        ("pushdown", "kind = \"pushdown\"\n[pushdown]\nbase = []\nscales = []\n"),
        // section missing for the kind
        ("spa", "kind = \"spa\"\n[ledger]\nq = 1\nm = 2\norders = [2]\nd = 1\ncodims = [0]\nv_max = 0\n"),
        // subcommand and kind disagree
        ("spa", "kind = \"ledger\"\n[ledger]\nq = 1\nm = 2\norders = [2]\nd = 1\ncodims = [0]\nv_max = 0\n"),
    ];
    for (i, (kind, body)) in cases.iter().enumerate() {
        let cfg = write(dir.path(), &format!("c{i}.toml"), body);
        let out = run_in(kind, &cfg, &dir.path().join("out"), &[]);
        assert_eq!(out.status.code(), Some(3), "case {i}: {}", String::from_utf8_lossy(&out.stderr));
    }
    assert!(ExperimentConfig::parse(cases[1].1).unwrap_err().to_string().contains("line 9"));
}

#[test]
fn geometry_tables_parse() {
    let src = "kind = \"heattrace\"\n[heattrace]\ncutoff = 1e4\nt_min = 1e-3\nt_max = 1e-2\n[heattrace.geometry]\ntype = \"torus\"\nv1 = [1.0, 0.0]\nv2 = [0.3, 1.1]\n";
    let cfg = ExperimentConfig::parse(src).unwrap();
    let heat = cfg.heattrace.as_ref().unwrap();
    assert_eq!(heat.geometry, Geometry::Torus { v1: [1.0, 0.0], v2: [0.3, 1.1] });
    assert_eq!(heat.tolerance, 5e-3);
    // echo carries every default and parses back to the same value
    assert_eq!(ExperimentConfig::parse(&cfg.echo()).unwrap(), cfg);
    let bad = src.replace("v2 = [0.3, 1.1]", "v2 = [0.3, 1.1]\nv3 = [0.0, 0.0]");
    assert!(matches!(ExperimentConfig::parse(&bad), Err(CliError::Validation(_))));
}

#[test]
fn flat_circle_has_three_matched_peaks() {
    let dir = TempDir::new().unwrap();
    let out = run_in("wavetrace", &configs().join("flat_circle.toml"), dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let curve = fs::read_to_string(dir.path().join("curve.csv")).unwrap();
    let mut lines = curve.lines();
    assert_eq!(lines.next(), Some("t,re,im,abs"));
    assert_eq!(lines.count(), 2001);
    let peaks: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("peaks.json")).unwrap()).unwrap();
    let matched: Vec<f64> = peaks["peaks"]
        .as_array()
        .unwrap()
        .iter()
        .filter_map(|p| p["matched"].as_f64())
        .filter(|l| *l > 0.0)
        .collect();
    assert_eq!(matched.len(), 3);
    let manifest = read_manifest(&dir.path().join("manifest.json")).unwrap();
    assert!(manifest.passed);
    assert_eq!(manifest.kind, ExperimentKind::Wavetrace);
    assert_eq!(manifest.artifacts, vec!["curve.csv", "peaks.json"]);
}

#[test]
fn ledger_csv_rows() {
    let dir = TempDir::new().unwrap();
    let out = run_in("ledger", &configs().join("ledger.toml"), dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("ledger.csv")).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header = rdr.headers().unwrap().clone();
    for col in ["partition", "mu_d", "gamma", "log_flag"] {
        assert!(header.iter().any(|h| h == col), "{col}");
    }
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    // partitions of 2 with ν = (2, 2): (1)(1), (1+1), (2); two codims, v ∈ {0, 1, 2}
    assert_eq!(rows.len(), 3 * 2 * 3);
    let labels: std::collections::BTreeSet<&str> = rows.iter().map(|r| r.get(1).unwrap()).collect();
    assert_eq!(labels.into_iter().collect::<Vec<_>>(), vec!["(1)(1)", "(1+1)", "(2)"]);
}

#[test]
fn output_directory_precedence() {
    let dir = TempDir::new().unwrap();
    let cfg_path = write(dir.path(), "l.toml", &format!(
        "kind = \"ledger\"\noutput_dir = \"{}\"\n[ledger]\nq = 1\nm = 2\norders = [2]\nd = 1\ncodims = [0]\nv_max = 0\n",
        dir.path().join("from_config").display()
    ));
    let cfg_arg = cfg_path.to_str().unwrap();
    assert_eq!(fibertrace(&["ledger", cfg_arg]).status.code(), Some(0));
    assert!(dir.path().join("from_config/manifest.json").exists());

    let env_dir = dir.path().join("from_env");
    let out = Command::new(env!("CARGO_BIN_EXE_fibertrace")).args(["ledger", cfg_arg]).env(OUTPUT_DIR_ENV, &env_dir).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(env_dir.join("manifest.json").exists());

    let flag_dir = dir.path().join("from_flag");
    let out = Command::new(env!("CARGO_BIN_EXE_fibertrace"))
        .args(["ledger", cfg_arg, "-o", flag_dir.to_str().unwrap()])
        .env(OUTPUT_DIR_ENV, &env_dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(flag_dir.join("ledger.csv").exists());
}

#[test]
fn identical_seed_gives_identical_csvs() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "m.toml", SMALL_MATRIX);
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    assert_eq!(run_in("matrixmodel", &cfg, &a, &[]).status.code(), Some(0));
    assert_eq!(run_in("matrixmodel", &cfg, &b, &[]).status.code(), Some(0));
    assert_eq!(run_in("matrixmodel", &cfg, &c, &["--seed", "8"]).status.code(), Some(0));
    for name in ["operators.csv", "supertrace.csv", "dstr.csv"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
    assert_ne!(fs::read(a.join("operators.csv")).unwrap(), fs::read(c.join("operators.csv")).unwrap());
    assert_eq!(read_manifest(&c.join("manifest.json")).unwrap().seed, 8);
}

#[test]
fn echoed_config_reproduces_residuals() {
    let dir = TempDir::new().unwrap();
    let first = dir.path().join("first");
    assert_eq!(run_in("pushdown", &configs().join("pushdown.toml"), &first, &[]).status.code(), Some(0));
    let manifest = read_manifest(&first.join("manifest.json")).unwrap();
    let echoed = write(dir.path(), "echo.toml", &manifest.config);
    let second = dir.path().join("second");
    assert_eq!(run_in("pushdown", &echoed, &second, &[]).status.code(), Some(0));
    let again = read_manifest(&second.join("manifest.json")).unwrap();
    assert_eq!(again.residuals(), manifest.residuals());
    assert_eq!(again.config, manifest.config);
}

#[test]
fn compare_reports() {
    let dir = TempDir::new().unwrap();
    let exact = write(dir.path(), "exact.toml", SMALL_MATRIX);
    let quad = write(dir.path(), "quad.toml", &format!("{SMALL_MATRIX}wave_method = \"simplex-quadrature\"\n"));
    for (cfg, out) in [(&exact, "e1"), (&exact, "e2"), (&quad, "q")] {
        run_in("matrixmodel", cfg, &dir.path().join(out), &[]);
    }
    let m = |d: &str| dir.path().join(d).join("manifest.json").to_str().unwrap().to_string();

    let same = fibertrace(&["compare", &m("e1"), &m("e2"), "--tol", "0"]);
    assert_eq!(same.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&same.stdout).unwrap();
    assert!(report["diffs"].as_array().unwrap().is_empty());

    let routes = fibertrace(&["compare", &m("e1"), &m("q"), "--tol", "1e-6"]);
    let report: serde_json::Value = serde_json::from_slice(&routes.stdout).unwrap();
    let max = report["max_difference"].as_f64().unwrap();
    assert!(max > 0.0 && max < 1e-6, "{max}");
    assert!(report["diffs"].as_array().unwrap().iter().any(|d| d["name"] == "wave_duhamel"));
    assert_eq!(routes.status.code(), Some(0));

    run_in("ledger", &configs().join("ledger.toml"), &dir.path().join("l1"), &[]);
    run_in("ledger", &configs().join("ledger_degree_zero.toml"), &dir.path().join("l2"), &[]);
    assert_eq!(fibertrace(&["compare", &m("e1"), &m("l1")]).status.code(), Some(3));
    assert_eq!(fibertrace(&["compare", &m("l1"), &m("l2")]).status.code(), Some(3));
}

#[test]
fn failed_check_exits_one() {
    let dir = TempDir::new().unwrap();
    // a window too wide for σ = 0.5: peaks cannot be located to 1e-6
    let body = "kind = \"wavetrace\"\n[wavetrace]\nsigma = 0.5\ncutoff = 400\nt_min = 3.0\nt_max = 9.0\nt_step = 0.3\npeak_tolerance = 1e-6\n[wavetrace.geometry]\ntype = \"circle\"\nmetric = { constant = 1 }\n";
    let cfg = write(dir.path(), "w.toml", body);
    let out = run_in("wavetrace", &cfg, &dir.path().join("out"), &[]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL peak1"));
    assert!(!read_manifest(&dir.path().join("out/manifest.json")).unwrap().passed);
}
