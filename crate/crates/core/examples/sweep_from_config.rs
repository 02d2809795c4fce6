//! Drive a full sweep from a TOML config: simulate, solve the mean-field
//! theory, and emit plot tables.
//!
//! cargo run --release --example sweep_from_config -- [config.toml] [out_dir]

use std::path::PathBuf;

use dtc::sweep::{emit_plotdata, run_meanfield, run_sweep, Figure, RunOptions, SweepConfig};

fn main() -> dtc::Result<()> {
    let mut args = std::env::args().skip(1);
    let config = args.next().map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/configs/z2_small.toml")
    });
    let out = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("dtc_sweep_example"));
    let cfg = SweepConfig::load(&config)?;
    let opts = RunOptions {
        out: Some(out.clone()),
        ..Default::default()
    };

    let report = run_sweep(&cfg, &opts)?;
    println!(
        "simulate: {} tasks, {} failed",
        report.tasks, report.failures
    );
    if cfg.meanfield.is_some() {
        let mf = run_meanfield(&cfg, &opts)?;
        println!("meanfield: {} τ₁ rows, {} failed", mf.tasks, mf.failures);
    }
    for fig in [Figure::Fig1, Figure::Fig2, Figure::Fig3] {
        let files = emit_plotdata(&out, fig)?;
        println!("{fig}: {} tables", files.len());
    }
    println!("boundary table: {}", out.join("boundary.tsv").display());
    print!("{}", std::fs::read_to_string(out.join("boundary.tsv"))?);
    Ok(())
}
