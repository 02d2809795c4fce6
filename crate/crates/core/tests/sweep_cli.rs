use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use dtc::sweep::{emit_plotdata, run_sweep, Figure, RunOptions, SweepConfig};
use dtc::Error;
use tempfile::TempDir;

fn dtc(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_dtc"))
        .args(args)
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

/// Rows of a TSV table as header-keyed string maps.
fn table(path: &Path) -> Vec<std::collections::HashMap<String, String>> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<String> = lines
        .next()
        .unwrap()
        .split('\t')
        .map(String::from)
        .collect();
    lines
        .map(|l| {
            header
                .iter()
                .cloned()
                .zip(l.split('\t').map(String::from))
                .collect()
        })
        .collect()
}

fn num(row: &std::collections::HashMap<String, String>, k: &str) -> f64 {
    row[k].parse().unwrap()
}

const FREE: &str = r#"
[run]
seed = 7

[protocol]
variant = "z2"
n_cycles = 40
pulse_mode = "ideal"

[ensemble]
n_spins = 3
r0 = "8 nm"
r_min = "3 nm"
coupling = "0 kHz"
w = "0 MHz"

[sweep]
theta = ["1 pi"]
tau1 = ["0.5 us"]
seeds = 1

[analysis]
window = [10, 40]
stft_window = 10
threshold = 0.1
"#;

fn small(theta: &str, tau1: &str, seeds: usize) -> String {
    format!(
        r#"
[run]
seed = 3

[protocol]
variant = "z2"
n_cycles = 40
omega_x = "54.6 MHz"
omega_y = "41.7 MHz"
pulse_mode = "physical"

[ensemble]
n_spins = 4
r0 = "8 nm"
r_min = "3 nm"
coupling = "105 kHz"
w = "4 MHz"
coupling_scale = 20.0

[sweep]
theta = {theta}
tau1 = {tau1}
seeds = {seeds}

[analysis]
window = [10, 40]
stft_window = 10
threshold = 0.1
"#
    )
}

#[test]
fn free_spins_under_pi_pulses_are_fully_crystalline() {
    let dir = TempDir::new().unwrap();
    let cfg = SweepConfig::from_toml(FREE).unwrap();
    let out = dir.path().join("out");
    let rep = run_sweep(
        &cfg,
        &RunOptions {
            out: Some(out.clone()),
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!((rep.tasks, rep.failures), (1, 0));
    let rows = table(&out.join("fractions.tsv"));
    assert!((num(&rows[0], "f_mean") - 1.0).abs() < 1e-9);
}

#[test]
fn averaged_fraction_is_mean_over_seeds() {
    let dir = TempDir::new().unwrap();
    let cfg = SweepConfig::from_toml(&small(r#"["1.05 pi"]"#, r#"["0.79 us"]"#, 2)).unwrap();
    let out = dir.path().join("out");
    run_sweep(
        &cfg,
        &RunOptions {
            out: Some(out.clone()),
            ..Default::default()
        },
    )
    .unwrap();
    let per_seed: Vec<f64> = table(&out.join("fractions_by_seed.tsv"))
        .iter()
        .map(|r| num(r, "f"))
        .collect();
    assert_eq!(per_seed.len(), 2);
    let mean = num(&table(&out.join("fractions.tsv"))[0], "f_mean");
    assert!((mean - per_seed.iter().sum::<f64>() / 2.0).abs() < 1e-12);
}

#[test]
fn failed_task_does_not_poison_siblings() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "c.toml",
        &small(r#"["1 pi"]"#, r#"["0 us", "0.79 us"]"#, 1),
    );
    let out = dir.path().join("out");
    let o = dtc(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(1),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let rows = table(&out.join("fractions_by_seed.tsv"));
    assert_eq!(rows.len(), 2);
    let ok: Vec<_> = rows.iter().filter(|r| r["status"] == "ok").collect();
    assert_eq!(ok.len(), 1);
    assert!(num(ok[0], "tau1_us") > 0.0 && num(ok[0], "f").is_finite());
}

#[test]
fn example_configs_round_trip() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/configs");
    for entry in fs::read_dir(dir).unwrap() {
        let cfg = SweepConfig::load(&entry.unwrap().path()).unwrap();
        let text = cfg.to_canonical_string().unwrap();
        let again = SweepConfig::from_toml(&text).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(text, again.to_canonical_string().unwrap());
    }
}

#[test]
fn config_errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let unknown = write(
        dir.path(),
        "u.toml",
        &FREE.replace("seed = 7", "seed = 7\nbogus = 1"),
    );
    let unitless = write(
        dir.path(),
        "w.toml",
        &FREE.replace(r#"w = "0 MHz""#, "w = 4"),
    );
    let wrong_dim = write(
        dir.path(),
        "d.toml",
        &FREE.replace(r#"tau1 = ["0.5 us"]"#, r#"tau1 = ["0.5 MHz"]"#),
    );
    for cfg in [unknown, unitless, wrong_dim] {
        let o = dtc(&[
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(2), "{}", cfg.display());
    }
    assert_eq!(
        dtc(&["simulate", "--out", out.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        dtc(&[
            "plotdata",
            "--out",
            out.to_str().unwrap(),
            "--figure",
            "fig9"
        ])
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn single_coupling_meanfield_matches_linear_bound() {
    let dir = TempDir::new().unwrap();
    let cfg =
        Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/configs/meanfield_single_jbar.toml");
    let out = dir.path().join("out");
    let o = dtc(&[
        "meanfield",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    for row in table(&out.join("meanfield/boundary.tsv")) {
        assert_eq!(row["status"], "ok");
        let half = num(&row, "tau1_us") / 2.0;
        let pi = std::f64::consts::PI;
        assert!(((pi - num(&row, "theta_minus_rad")) / half - 1.0).abs() < 0.1);
        assert!(((num(&row, "theta_plus_rad") - pi) / half - 1.0).abs() < 0.1);
    }
}

#[test]
fn grid_outside_window_reports_no_dtc_window() {
    let dir = TempDir::new().unwrap();
    let text = fs::read_to_string(
        Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/configs/meanfield_single_jbar.toml"),
    )
    .unwrap()
    .replace(
        r#"start = "0.8 pi", stop = "1.2 pi""#,
        r#"start = "0.3 pi", stop = "0.6 pi""#,
    );
    let cfg = write(dir.path(), "c.toml", &text);
    let out = dir.path().join("out");
    let o = dtc(&[
        "meanfield",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(table(&out.join("meanfield/boundary.tsv"))
        .iter()
        .all(|r| r["status"] == "no_dtc_window"));
}

#[test]
fn plotdata_lists_missing_inputs() {
    let dir = TempDir::new().unwrap();
    match emit_plotdata(dir.path(), Figure::Fig2) {
        Err(Error::MissingInputs(files)) => assert!(!files.is_empty()),
        other => panic!("expected missing inputs, got {other:?}"),
    }
    let o = dtc(&[
        "plotdata",
        "--out",
        dir.path().to_str().unwrap(),
        "--figure",
        "fig3",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("fractions.tsv"));
}

#[test]
fn worker_count_does_not_change_outputs() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "c.toml",
        &small(r#"["0.95 pi", "1.05 pi"]"#, r#"["0.79 us"]"#, 2),
    );
    let mut trees = Vec::new();
    for w in ["1", "3"] {
        let out = dir.path().join(format!("out{w}"));
        let o = dtc(&[
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--workers",
            w,
        ]);
        assert_eq!(o.status.code(), Some(0));
        trees.push(out);
    }
    for name in [
        "fractions.tsv",
        "fractions_by_seed.tsv",
        "manifest.json",
        "config.toml",
    ] {
        assert_eq!(
            fs::read(trees[0].join(name)).unwrap(),
            fs::read(trees[1].join(name)).unwrap(),
            "{name}"
        );
    }
}
