//! End-to-end runs of the `betagas` binary on small configurations.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use betagas::harness::{ExperimentConfig, Manifest};

const GAUSSIAN: &str = r#"
[ensemble]
n = 50
beta = 2.0
field = { kind = "gaussian", coefficients = [1.0] }

[chain]
sampler = "tridiagonal"
seeds = [3]
samples_per_seed = 400

[statistics]
density_l1_tolerance = 0.08
"#;

const SMALL_CHAIN: &str = r#"
[ensemble]
n = 10
beta = 2.0
field = { kind = "gaussian", coefficients = [1.0] }
interaction = [{ amplitude = 0.5, width = 1.0 }]

[chain]
seeds = [5, 6]
samples_per_seed = 60
burn_in = 5000
thin = 50
checkpoint_every = 20
"#;

fn betagas(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_betagas"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("config.toml");
    fs::write(&path, text).unwrap();
    path
}

fn run(command: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![command, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    betagas(&args)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[track_caller]
fn assert_code(o: &Output, code: i32) {
    assert_eq!(o.status.code(), Some(code), "stdout:\n{}\nstderr:\n{}", stdout(o), stderr(o));
}

#[test]
fn malformed_config_exits_1_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[ensemble]\nn = 10\nbeta = 2.0\nfield = { kind = \"gaussian\" }\n\n[chain]\nbogus = 1\n",
    );
    let o = run("eqsolve", &cfg, dir.path(), &[]);
    assert_code(&o, 1);
    let err = stderr(&o);
    assert!(err.contains("line 7") && err.contains("bogus"), "{err}");

    let cfg = write_config(dir.path(), "[ensemble]\nn = 10\nbeta = -2.0\nfield = { kind = \"gaussian\" }\n");
    let o = run("eqsolve", &cfg, dir.path(), &[]);
    assert_code(&o, 1);
    assert!(stderr(&o).contains("ensemble"), "{}", stderr(&o));
}

#[test]
fn gaussian_eqsolve_reports_semicircle_support() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), GAUSSIAN);
    let o = run("eqsolve", &cfg, dir.path(), &[]);
    assert_code(&o, 0);
    let text = stdout(&o);
    let inner = text.split("support [").nth(1).unwrap().split(']').next().unwrap();
    let ends: Vec<f64> = inner.split(',').map(|s| s.trim().parse().unwrap()).collect();
    let cell = 6.0 * 2f64.sqrt() / 1024.0;
    assert!((ends[0] + 2f64.sqrt()).abs() <= cell && (ends[1] - 2f64.sqrt()).abs() <= cell, "{text}");
    assert!(dir.path().join("equilibrium.csv").exists());
    assert!(dir.path().join("eqsolve.manifest.json").exists());
}

#[test]
fn zero_interaction_self_consistent_equals_plain() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("sc"), dir.path().join("plain"));
    let cfg = write_config(dir.path(), GAUSSIAN);
    assert_code(&run("eqsolve", &cfg, &a, &[]), 0);
    let cfg = write_config(dir.path(), &format!("{GAUSSIAN}\n[solver]\nmode = \"plain\"\n"));
    assert_code(&run("eqsolve", &cfg, &b, &[]), 0);
    assert_eq!(fs::read(a.join("equilibrium.csv")).unwrap(), fs::read(b.join("equilibrium.csv")).unwrap());
}

#[test]
fn solver_failure_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{GAUSSIAN}\n[grid]\nhalf_width = 0.5\n"));
    let o = run("eqsolve", &cfg, dir.path(), &[]);
    assert_code(&o, 2);
}

#[test]
fn sampling_the_effective_ensemble_needs_eqsolve() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &SMALL_CHAIN.replace("[chain]", "[chain]\ntargets = [\"effective\"]"));
    let o = run("sample", &cfg, dir.path(), &[]);
    assert_code(&o, 3);
    assert!(stderr(&o).contains("eqsolve"), "{}", stderr(&o));

    assert_code(&run("eqsolve", &cfg, dir.path(), &[]), 0);
    assert_code(&run("sample", &cfg, dir.path(), &[]), 0);
    assert!(dir.path().join("samples/effective_seed5.csv").exists());
}

#[test]
fn compare_without_samples_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{GAUSSIAN}\n[reference]\n"));
    assert_code(&run("compare", &cfg, dir.path(), &[]), 3);
}

#[test]
fn mismatched_sizes_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{GAUSSIAN}\n[reference]\nn = 60\n"));
    assert_code(&run("sample", &cfg, dir.path(), &[]), 0);
    let o = run("compare", &cfg, dir.path(), &[]);
    assert_code(&o, 4);
    assert!(stderr(&o).contains("negative_control"), "{}", stderr(&o));
}

#[test]
fn identical_laws_pass_and_negative_control_fails() {
    let dir = tempfile::tempdir().unwrap();
    let same = dir.path().join("same");
    let cfg = write_config(dir.path(), &format!("{GAUSSIAN}\n[reference]\n"));
    for cmd in ["eqsolve", "sample", "stats"] {
        assert_code(&run(cmd, &cfg, &same, &["--threads", "1"]), 0);
    }
    let o = run("compare", &cfg, &same, &[]);
    assert_code(&o, 0);
    assert!(stdout(&o).contains("verdict: PASS"));
    for f in ["compare.csv", "compare_report.txt", "compare_spacing_cdf.svg", "stats.csv", "density_modified.svg"] {
        assert!(same.join(f).exists(), "{f}");
    }
    let stats = fs::read_to_string(same.join("stats.csv")).unwrap();
    assert!(stats.starts_with("statistic,target,n,spec_hash,value,std_error,n_samples\n"));

    let control = dir.path().join("control");
    // Small runs cannot tell the classes apart; this size separates the
    // two-point statistics clearly.
    let larger = GAUSSIAN.replace("n = 50", "n = 200").replace("samples_per_seed = 400", "samples_per_seed = 1000");
    let cfg = write_config(dir.path(), &format!("{larger}\n[reference]\nbeta = 4.0\nnegative_control = true\n"));
    for cmd in ["eqsolve", "sample"] {
        assert_code(&run(cmd, &cfg, &control, &[]), 0);
    }
    let o = run("compare", &cfg, &control, &[]);
    assert_code(&o, 5);
    assert!(stdout(&o).contains("verdict: FAIL (negative control)"));
}

#[test]
fn same_seed_gives_identical_sample_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_CHAIN);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_code(&run("sample", &cfg, &a, &["--seed", "17"]), 0);
    assert_code(&run("sample", &cfg, &b, &["--seed", "17", "--threads", "1"]), 0);
    for seed in [17, 18] {
        let f = format!("samples/modified_seed{seed}.csv");
        assert_eq!(fs::read(a.join(&f)).unwrap(), fs::read(b.join(&f)).unwrap());
    }
    let c = dir.path().join("c");
    assert_code(&run("sample", &cfg, &c, &["--seed", "99"]), 0);
    assert_ne!(
        fs::read(a.join("samples/modified_seed17.csv")).unwrap(),
        fs::read(c.join("samples/modified_seed99.csv")).unwrap()
    );
}

#[test]
fn resumed_run_equals_uninterrupted_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_CHAIN);
    let (full, split) = (dir.path().join("full"), dir.path().join("split"));
    assert_code(&run("sample", &cfg, &full, &[]), 0);

    let o = run("sample", &cfg, &split, &["--stop-after", "33"]);
    assert_code(&o, 0);
    assert!(stdout(&o).contains("interrupted"));
    assert!(split.join("samples/modified_seed5.state.json").exists());
    assert!(!split.join("samples/modified_seed5.csv").exists());
    assert_code(&run("sample", &cfg, &split, &["--resume", "--stop-after", "10"]), 0);
    assert_code(&run("sample", &cfg, &split, &["--resume"]), 0);
    assert!(!split.join("samples/modified_seed5.state.json").exists());
    for seed in [5, 6] {
        let f = format!("samples/modified_seed{seed}.csv");
        assert_eq!(fs::read(full.join(&f)).unwrap(), fs::read(split.join(&f)).unwrap());
    }
}

#[test]
fn manifest_reruns_reproduce_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_CHAIN);
    let first = dir.path().join("first");
    assert_code(&run("eqsolve", &cfg, &first, &["--seed", "8"]), 0);
    assert_code(&run("sample", &cfg, &first, &["--seed", "8"]), 0);

    let second = dir.path().join("second");
    for command in ["eqsolve", "sample"] {
        let manifest = Manifest::read(&first.join(Manifest::file_name(command))).unwrap();
        assert!(manifest.verify(&first).unwrap().is_empty());
        let replay = dir.path().join(format!("{command}.toml"));
        fs::write(&replay, &manifest.config_toml).unwrap();
        assert_code(&run(command, &replay, &second, &[]), 0);
        let again = Manifest::read(&second.join(Manifest::file_name(command))).unwrap();
        assert!(!manifest.artifacts.is_empty());
        assert_eq!(manifest.artifacts, again.artifacts);
        let strip = |mut c: ExperimentConfig| {
            c.output_dir = None;
            c
        };
        assert_eq!(strip(manifest.config().unwrap()), strip(ExperimentConfig::parse(&again.config_toml).unwrap()));
    }
}

#[test]
fn tridiagonal_second_moment_is_one_half() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &GAUSSIAN.replace("n = 50", "n = 200").replace("samples_per_seed = 400", "samples_per_seed = 1000"),
    );
    let o = run("sample", &cfg, dir.path(), &[]);
    assert_code(&o, 0);
    let text = stdout(&o);
    let tail = text.split("second moment ").nth(1).unwrap();
    let mut it = tail.split_whitespace();
    let mean: f64 = it.next().unwrap().parse().unwrap();
    it.next();
    let se: f64 = it.next().unwrap().trim_end_matches(',').parse().unwrap();
    assert!((mean - 0.5).abs() <= 3.0 * se, "{text}");
}

#[test]
fn validate_subcommand_prints_one_line_per_criterion() {
    let o = betagas(&["validate", "--quick", "--only", "1,10"]);
    assert_code(&o, 0);
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 2);
    assert!(text.lines().all(|l| l.starts_with("criterion") && l.contains("PASS")));
}

#[test]
fn uncertified_interactions_are_labelled() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &SMALL_CHAIN.replace("amplitude = 0.5", "amplitude = -0.2"));
    let o = run("sample", &cfg, dir.path(), &[]);
    assert_code(&o, 0);
    assert!(stdout(&o).lines().all(|l| l.contains("outside certified regime")), "{}", stdout(&o));

    let cfg = write_config(dir.path(), SMALL_CHAIN);
    let o = run("sample", &cfg, &dir.path().join("ok"), &[]);
    assert!(!stdout(&o).contains("outside certified regime"));
}
