use std::f64::consts::PI;
use std::fs;
use std::path::PathBuf;
use std::time::{Instant, SystemTime};

use super::config::SweepConfig;
use super::manifest::{RunManifest, TaskRecord, TaskStatus, Timing};
use super::simulate::{
    effective_config, resolve_out, resolve_workers, thread_pool, RunOptions, RunReport,
};
use super::tables::{fmt, write_table};
use crate::disorder::quantile;
use crate::error::Result;
use crate::meanfield::{
    linearized_half_width, phase_boundary, BoundaryOptions, MeanFieldEnsemble, PhaseBoundary,
};

/// Subdirectory of the output tree holding mean-field products.
pub const MEANFIELD_DIR: &str = "meanfield";

/// Classification of one boundary row.
pub fn boundary_status(
    row: &[f64],
    minus: Option<f64>,
    plus: Option<f64>,
    threshold: f64,
) -> &'static str {
    if row.iter().all(|&v| v < threshold) {
        "no_dtc_window"
    } else if minus.is_none() || plus.is_none() {
        "unbracketed"
    } else {
        "ok"
    }
}

/// Build the disorder samples described by the `[meanfield]` section.
pub fn build_ensemble(config: &SweepConfig) -> Result<MeanFieldEnsemble> {
    let res = config.resolve()?;
    let mf = config.resolve_meanfield()?;
    if let Some(j) = mf.single_jbar {
        return MeanFieldEnsemble::new(vec![j; mf.samples], vec![0.0; mf.samples], mf.omega_y);
    }
    let mut params = res.ensemble.clone();
    params.n_spins = mf.realization_spins;
    params.validate()?;
    let mut ens = MeanFieldEnsemble::from_disorder(&params, mf.samples, mf.omega_y)?;
    if res.coupling_scale != 1.0 {
        ens.jbar.iter_mut().for_each(|j| *j *= res.coupling_scale);
    }
    Ok(ens)
}

/// Disorder-averaged order-parameter map and phase boundary.
///
/// Each τ₁ is solved as an independent task so one failure leaves the other
/// rows intact.
pub fn run_meanfield(config: &SweepConfig, opts: &RunOptions) -> Result<RunReport> {
    let started = SystemTime::now();
    let clock = Instant::now();
    let cfg = effective_config(config, opts);
    let mf = cfg.resolve_meanfield()?;
    let threshold = cfg.analysis.threshold;
    let ens = build_ensemble(&cfg)?;
    let out = resolve_out(opts, config)?;
    let workers = resolve_workers(opts, config);
    let dir = out.join(MEANFIELD_DIR);
    fs::create_dir_all(&dir)?;
    let config_path = dir.join("config.toml");
    fs::write(&config_path, cfg.to_canonical_string()?)?;

    let bopts = BoundaryOptions {
        threshold,
        tolerance: mf.tolerance,
    };
    let pool = thread_pool(workers)?;
    let rows: Vec<(f64, Result<PhaseBoundary>, f64)> = pool.install(|| {
        mf.tau1s
            .iter()
            .map(|&tau| {
                let t0 = Instant::now();
                (
                    tau,
                    phase_boundary(&[tau], &mf.thetas, &ens, &bopts),
                    t0.elapsed().as_secs_f64(),
                )
            })
            .collect()
    });

    let mut manifest = RunManifest::new("meanfield", cfg.hash()?, cfg.run.seed);
    let mut timing = Timing::new("meanfield", started, clock.elapsed(), workers);
    let mut map_rows = Vec::new();
    let mut boundary_rows = Vec::new();
    for (i, (tau, result, secs)) in rows.iter().enumerate() {
        let id = format!("u{i:03}");
        timing.tasks.insert(id.clone(), *secs);
        let linear = mf.single_jbar.map(|j| linearized_half_width(j, *tau));
        let linear_cols = match linear {
            Some(h) => [fmt(PI - h), fmt(PI + h)],
            None => ["nan".into(), "nan".into()],
        };
        let (status, error) = match result {
            Ok(pb) => {
                let row = &pb.order_parameter_map[0];
                for (th, v) in pb.theta_grid.iter().zip(row) {
                    map_rows.push(vec![fmt(*tau), fmt(*th), fmt(*v)]);
                }
                let (m, p) = (pb.theta_minus[0], pb.theta_plus[0]);
                let opt = |v: Option<f64>| v.map_or_else(|| "nan".to_string(), fmt);
                let mut r = vec![fmt(*tau), opt(m), opt(p)];
                r.extend(linear_cols);
                r.push(boundary_status(row, m, p, threshold).into());
                boundary_rows.push(r);
                (TaskStatus::Ok, None)
            }
            Err(e) => {
                log::error!("meanfield τ₁={tau}: {e}");
                let mut r = vec![fmt(*tau), "nan".into(), "nan".into()];
                r.extend(linear_cols);
                r.push("failed".into());
                boundary_rows.push(r);
                (TaskStatus::Failed, Some(e.to_string()))
            }
        };
        manifest.tasks.push(TaskRecord {
            id,
            coords: [("tau1_us".to_string(), *tau)].into(),
            seeds: Default::default(),
            status,
            error,
            files: vec![],
        });
    }
    manifest.failures = manifest
        .tasks
        .iter()
        .filter(|t| t.status == TaskStatus::Failed)
        .count();

    let map_path = dir.join("order_parameter.tsv");
    write_table(
        &map_path,
        &["tau1_us", "theta_rad", "order_parameter"],
        map_rows,
    )?;
    let boundary_path = dir.join("boundary.tsv");
    write_table(
        &boundary_path,
        &[
            "tau1_us",
            "theta_minus_rad",
            "theta_plus_rad",
            "linear_minus_rad",
            "linear_plus_rad",
            "status",
        ],
        boundary_rows,
    )?;
    let mut sorted = ens.jbar.clone();
    sorted.sort_by(f64::total_cmp);
    let summary_path = dir.join("ensemble.tsv");
    write_table(
        &summary_path,
        &[
            "samples",
            "jbar_q05_rad_per_us",
            "jbar_median_rad_per_us",
            "jbar_q95_rad_per_us",
            "omega_y_rad_per_us",
        ],
        [vec![
            ens.len().to_string(),
            fmt(quantile(&sorted, 0.05)),
            fmt(quantile(&sorted, 0.5)),
            fmt(quantile(&sorted, 0.95)),
            ens.omega_y.map_or_else(|| "nan".to_string(), fmt),
        ]],
    )?;
    let files: Vec<PathBuf> = vec![config_path, map_path, boundary_path, summary_path];
    manifest.set_files(&dir, &files)?;
    manifest.write(&dir)?;
    timing.elapsed_s = clock.elapsed().as_secs_f64();
    timing.write(&dir)?;
    Ok(RunReport {
        out_dir: dir,
        tasks: manifest.tasks.len(),
        failures: manifest.failures,
    })
}
