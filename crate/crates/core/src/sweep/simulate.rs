use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime};

use rayon::prelude::*;

use super::config::{Resolved, SweepConfig};
use super::manifest::{RunManifest, TaskRecord, TaskStatus, Timing};
use super::tables::{fmt, write_table, Table};
use crate::analysis::{
    crystalline_fraction, fit_double_exponential, fit_super_gaussian, noise_floor, spectrum,
    stft_peak, CrystallineFraction,
};
use crate::disorder::DisorderRealization;
use crate::error::{Error, Result};
use crate::floquet::{commensurate_tau1, run_z2, run_z3, ProtocolVariant};
use crate::rng::derive_seed;

/// Overrides applied on top of a config file.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub out_dir: PathBuf,
    pub tasks: usize,
    pub failures: usize,
}

/// One `(θ, τ₁, replica)` simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct Task {
    pub theta_index: usize,
    pub tau1_index: usize,
    pub replica: usize,
    pub theta: f64,
    /// τ₁ after optional snapping to the spin-lock period (μs).
    pub tau1: f64,
    pub realization_seed: u64,
    pub protocol_seed: u64,
}

impl Task {
    pub fn cell_dir(&self) -> String {
        format!("t{:03}_u{:03}", self.theta_index, self.tau1_index)
    }

    pub fn id(&self) -> String {
        format!("{}_r{:03}", self.cell_dir(), self.replica)
    }

    pub fn trace_path(&self) -> String {
        format!("traces/{}/r{:03}.tsv", self.cell_dir(), self.replica)
    }

    pub fn spectrum_path(&self) -> String {
        format!("spectra/{}/r{:03}.tsv", self.cell_dir(), self.replica)
    }
}

/// Disorder realizations depend only on the replica, so every grid cell sees
/// the same samples. Protocol streams hash the grid coordinates, so adding
/// grid points leaves existing tasks unchanged.
pub fn plan_tasks(res: &Resolved, master_seed: u64, snap_tau1: bool) -> Vec<Task> {
    let mut tasks = Vec::with_capacity(res.thetas.len() * res.tau1s.len() * res.seeds);
    for (ti, &theta) in res.thetas.iter().enumerate() {
        for (ui, &raw_tau) in res.tau1s.iter().enumerate() {
            let tau1 = if snap_tau1 && res.protocol.omega_x > 0.0 && raw_tau > 0.0 {
                commensurate_tau1(res.protocol.omega_x, raw_tau)
            } else {
                raw_tau
            };
            for replica in 0..res.seeds {
                tasks.push(Task {
                    theta_index: ti,
                    tau1_index: ui,
                    replica,
                    theta,
                    tau1,
                    realization_seed: derive_seed(master_seed, "realization", &[], replica as u64),
                    protocol_seed: derive_seed(
                        master_seed,
                        "protocol",
                        &[theta, tau1],
                        replica as u64,
                    ),
                });
            }
        }
    }
    tasks
}

/// Simulated trace of one task, in memory.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskTrace {
    pub values: Vec<f64>,
    pub period_us: f64,
    /// `[P₊, P₀, P₋]` per cycle for the ℤ₃ protocol.
    pub populations: Option<Vec<[f64; 3]>>,
}

/// Execute one task without touching the file system.
pub fn simulate_task(res: &Resolved, task: &Task) -> Result<TaskTrace> {
    let mut params = res.ensemble.clone();
    params.seed = task.realization_seed;
    let mut realization = DisorderRealization::sample(&params)?;
    if res.coupling_scale != 1.0 {
        realization = realization.scaled_couplings(res.coupling_scale);
    }
    let mut cfg = res.protocol.clone();
    cfg.theta = task.theta;
    cfg.tau1 = task.tau1;
    cfg.seed = task.protocol_seed;
    match cfg.variant {
        ProtocolVariant::Z2 => {
            let tr = run_z2(&cfg, &realization)?;
            Ok(TaskTrace {
                values: tr.values,
                period_us: tr.period_us,
                populations: None,
            })
        }
        ProtocolVariant::Z3 => {
            let tr = run_z3(&cfg, &realization)?;
            Ok(TaskTrace {
                values: tr.polarization.values,
                period_us: tr.polarization.period_us,
                populations: Some(tr.populations),
            })
        }
    }
}

fn write_trace(path: &Path, trace: &TaskTrace) -> Result<()> {
    let mut header = vec!["n", "t_us", "P"];
    if trace.populations.is_some() {
        header.extend(["pop_plus", "pop_zero", "pop_minus"]);
    }
    let rows = trace.values.iter().enumerate().map(|(n, v)| {
        let mut row = vec![n.to_string(), fmt(n as f64 * trace.period_us), fmt(*v)];
        if let Some(p) = &trace.populations {
            row.extend(p[n].iter().map(|x| fmt(*x)));
        }
        row
    });
    write_table(path, &header, rows)
}

/// Read a trace written by [`run_sweep`].
pub fn read_trace(path: &Path) -> Result<TaskTrace> {
    let t = Table::read(path)?;
    let values = t.column_f64("P")?;
    let times = t.column_f64("t_us")?;
    let period_us = if times.len() > 1 {
        times[1] - times[0]
    } else {
        0.0
    };
    let populations = if t.index("pop_plus").is_ok() {
        let (a, b, c) = (
            t.column_f64("pop_plus")?,
            t.column_f64("pop_zero")?,
            t.column_f64("pop_minus")?,
        );
        Some((0..a.len()).map(|i| [a[i], b[i], c[i]]).collect())
    } else {
        None
    };
    Ok(TaskTrace {
        values,
        period_us,
        populations,
    })
}

pub(crate) fn thread_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("worker pool: {e}")))
}

pub(crate) fn resolve_workers(opts: &RunOptions, config: &SweepConfig) -> usize {
    opts.workers.or(config.run.workers).unwrap_or_else(|| {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    })
}

pub(crate) fn resolve_out(opts: &RunOptions, config: &SweepConfig) -> Result<PathBuf> {
    opts.out
        .clone()
        .or_else(|| config.run.output.clone())
        .ok_or_else(|| Error::Config("no output directory: pass --out or set run.output".into()))
}

/// Config with command-line overrides folded in.
pub(crate) fn effective_config(config: &SweepConfig, opts: &RunOptions) -> SweepConfig {
    let mut c = config.clone();
    if let Some(s) = opts.seed {
        c.run.seed = s;
    }
    c.run.workers = None;
    c.run.output = None;
    c
}

/// Run every task of the sweep, then analyze and persist the results.
pub fn run_sweep(config: &SweepConfig, opts: &RunOptions) -> Result<RunReport> {
    let started = SystemTime::now();
    let clock = Instant::now();
    let cfg = effective_config(config, opts);
    let res = cfg.resolve()?;
    let out = resolve_out(opts, config)?;
    let workers = resolve_workers(opts, config);
    fs::create_dir_all(&out)?;
    let config_path = out.join("config.toml");
    fs::write(&config_path, cfg.to_canonical_string()?)?;

    let tasks = plan_tasks(&res, cfg.run.seed, cfg.sweep.snap_tau1);
    let pool = thread_pool(workers)?;
    let outcomes: Vec<(Result<TaskTrace>, f64)> = pool.install(|| {
        tasks
            .par_iter()
            .map(|task| {
                let t0 = Instant::now();
                let result = simulate_task(&res, task).and_then(|tr| {
                    write_trace(&out.join(task.trace_path()), &tr)?;
                    Ok(tr)
                });
                (result, t0.elapsed().as_secs_f64())
            })
            .collect()
    });

    let mut manifest = RunManifest::new("simulate", cfg.hash()?, cfg.run.seed);
    let mut timing = Timing::new("simulate", started, clock.elapsed(), workers);
    let mut traces = Vec::with_capacity(tasks.len());
    let mut written = vec![config_path];
    for (task, (result, secs)) in tasks.iter().zip(outcomes) {
        timing.tasks.insert(task.id(), secs);
        let (status, error, files) = match &result {
            Ok(_) => {
                written.push(out.join(task.trace_path()));
                (TaskStatus::Ok, None, vec![task.trace_path()])
            }
            Err(e) => {
                log::error!("task {} failed: {e}", task.id());
                (TaskStatus::Failed, Some(e.to_string()), vec![])
            }
        };
        manifest.tasks.push(task_record(task, status, error, files));
        traces.push(result.ok());
    }
    manifest.failures = manifest
        .tasks
        .iter()
        .filter(|t| t.status == TaskStatus::Failed)
        .count();

    written.extend(analyze_traces(&res, &tasks, &traces, &out)?);
    manifest.set_files(&out, &written)?;
    manifest.write(&out)?;
    timing.elapsed_s = clock.elapsed().as_secs_f64();
    timing.write(&out)?;
    Ok(RunReport {
        out_dir: out,
        tasks: tasks.len(),
        failures: manifest.failures,
    })
}

fn task_record(
    task: &Task,
    status: TaskStatus,
    error: Option<String>,
    files: Vec<String>,
) -> TaskRecord {
    TaskRecord {
        id: task.id(),
        coords: BTreeMap::from([
            ("theta_rad".to_string(), task.theta),
            ("tau1_us".to_string(), task.tau1),
            ("replica".to_string(), task.replica as f64),
        ]),
        seeds: BTreeMap::from([
            ("realization".to_string(), task.realization_seed),
            ("protocol".to_string(), task.protocol_seed),
        ]),
        status,
        error,
        files,
    }
}

/// Re-run the analysis stage on the traces of an existing output tree.
///
/// The analysis block of `config` (or of the tree's own `config.toml`)
/// replaces the one used at simulation time.
pub fn analyze(out: &Path, config: Option<&SweepConfig>) -> Result<RunReport> {
    let started = SystemTime::now();
    let clock = Instant::now();
    let mut manifest = RunManifest::read(out)?;
    let stored = SweepConfig::load(&out.join("config.toml"))?;
    let mut cfg = stored.clone();
    if let Some(c) = config {
        cfg.analysis = c.analysis.clone();
    }
    let res = cfg.resolve()?;
    let tasks = plan_tasks(&res, cfg.run.seed, cfg.sweep.snap_tau1);
    let mut missing = Vec::new();
    let mut traces = Vec::with_capacity(tasks.len());
    for task in &tasks {
        let ok = manifest
            .tasks
            .iter()
            .any(|t| t.id == task.id() && t.status == TaskStatus::Ok);
        if !ok {
            traces.push(None);
            continue;
        }
        let path = out.join(task.trace_path());
        if !path.exists() {
            missing.push(path.display().to_string());
            traces.push(None);
            continue;
        }
        traces.push(Some(read_trace(&path)?));
    }
    if !missing.is_empty() {
        return Err(Error::MissingInputs(missing));
    }
    if cfg != stored {
        fs::write(out.join("config.toml"), cfg.to_canonical_string()?)?;
        manifest.config_hash = cfg.hash()?;
    }
    let mut written = vec![out.join("config.toml")];
    written.extend(
        tasks
            .iter()
            .zip(&traces)
            .filter(|(_, t)| t.is_some())
            .map(|(t, _)| out.join(t.trace_path())),
    );
    written.extend(analyze_traces(&res, &tasks, &traces, out)?);
    manifest.set_files(out, &written)?;
    manifest.write(out)?;
    Timing::new("analyze", started, clock.elapsed(), 1).write(out)?;
    Ok(RunReport {
        out_dir: out.to_path_buf(),
        tasks: tasks.len(),
        failures: manifest.failures,
    })
}

/// Seed-averaged fraction of one `(θ, τ₁)` cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellFraction {
    pub theta: f64,
    pub tau1: f64,
    pub n_seeds: usize,
    pub f_mean: f64,
    pub f_std: f64,
    /// Per-seed `δf` combined in quadrature and divided by the seed count.
    pub delta_f: f64,
}

/// Average the per-seed fractions of each cell.
pub fn aggregate_fractions(entries: &[(f64, f64, CrystallineFraction)]) -> Vec<CellFraction> {
    let mut cells: BTreeMap<(u64, u64), Vec<&CrystallineFraction>> = BTreeMap::new();
    let mut order = Vec::new();
    for (theta, tau1, fc) in entries {
        let key = (theta.to_bits(), tau1.to_bits());
        if !cells.contains_key(&key) {
            order.push((key, *theta, *tau1));
        }
        cells.entry(key).or_default().push(fc);
    }
    order
        .into_iter()
        .map(|(key, theta, tau1)| {
            let fs = &cells[&key];
            let n = fs.len() as f64;
            let mean = fs.iter().map(|f| f.f).sum::<f64>() / n;
            let var = fs.iter().map(|f| (f.f - mean).powi(2)).sum::<f64>() / n;
            let df = fs.iter().map(|f| f.delta_f * f.delta_f).sum::<f64>().sqrt() / n;
            CellFraction {
                theta,
                tau1,
                n_seeds: fs.len(),
                f_mean: mean,
                f_std: var.sqrt(),
                delta_f: df,
            }
        })
        .collect()
}

fn mean_trace(traces: &[&TaskTrace]) -> Vec<f64> {
    let len = traces.iter().map(|t| t.values.len()).min().unwrap_or(0);
    (0..len)
        .map(|n| traces.iter().map(|t| t.values[n]).sum::<f64>() / traces.len() as f64)
        .collect()
}

/// Spectra, fractions, lifetimes and boundary fits for a set of traces.
/// Returns the files written.
fn analyze_traces(
    res: &Resolved,
    tasks: &[Task],
    traces: &[Option<TaskTrace>],
    out: &Path,
) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let target = res.target_nu;
    let mut by_seed_rows = Vec::new();
    let mut entries = Vec::new();
    let nan_row = |task: &Task, power: String, status: String| {
        vec![
            fmt(task.theta),
            fmt(task.tau1),
            task.replica.to_string(),
            "nan".into(),
            "nan".into(),
            "nan".into(),
            power,
            status,
        ]
    };
    for (task, trace) in tasks.iter().zip(traces) {
        let Some(trace) = trace else {
            by_seed_rows.push(nan_row(task, "nan".into(), "task_failed".into()));
            continue;
        };
        let spec = match spectrum(&trace.values, res.window) {
            Ok(s) => s,
            Err(e) => {
                log::warn!("{}: {e}", task.id());
                continue;
            }
        };
        let path = out.join(task.spectrum_path());
        write_table(
            &path,
            &["k", "nu_per_period", "re_S", "im_S", "power"],
            (0..spec.len()).map(|k| {
                vec![
                    k.to_string(),
                    fmt(spec.nu_grid[k]),
                    fmt(spec.amplitudes[k].re),
                    fmt(spec.amplitudes[k].im),
                    fmt(spec.power[k]),
                ]
            }),
        )?;
        written.push(path);
        let fc = match crystalline_fraction(&spec, target) {
            Ok(fc) => fc.with_noise(noise_floor(&spec, target)?),
            Err(e) => {
                log::warn!("{}: {e}", task.id());
                by_seed_rows.push(nan_row(task, fmt(spec.total_power()), e.to_string()));
                continue;
            }
        };
        by_seed_rows.push(vec![
            fmt(task.theta),
            fmt(task.tau1),
            task.replica.to_string(),
            fmt(fc.f),
            fmt(fc.delta_f),
            fmt(fc.sigma_n),
            fmt(fc.total_power),
            "ok".into(),
        ]);
        entries.push((task.theta, task.tau1, fc));
    }
    let path = out.join("fractions_by_seed.tsv");
    write_table(
        &path,
        &[
            "theta_rad",
            "tau1_us",
            "replica",
            "f",
            "delta_f",
            "sigma_n",
            "total_power",
            "status",
        ],
        by_seed_rows,
    )?;
    written.push(path);

    let cells = aggregate_fractions(&entries);
    let path = out.join("fractions.tsv");
    write_table(
        &path,
        &[
            "theta_rad",
            "tau1_us",
            "n_seeds",
            "f_mean",
            "f_std",
            "delta_f",
        ],
        cells.iter().map(|c| {
            vec![
                fmt(c.theta),
                fmt(c.tau1),
                c.n_seeds.to_string(),
                fmt(c.f_mean),
                fmt(c.f_std),
                fmt(c.delta_f),
            ]
        }),
    )?;
    written.push(path);

    written.push(write_lifetimes(res, tasks, traces, out)?);
    written.push(write_boundaries(res, &cells, out)?);
    Ok(written)
}

/// Double-exponential fit of the STFT peak power of each cell's mean trace.
pub fn cell_lifetime(
    values: &[f64],
    m: usize,
    target: crate::analysis::TargetNu,
) -> Result<(Vec<(usize, f64)>, crate::analysis::DoubleExponentialFit)> {
    let stft = stft_peak(values, m, target)?;
    let xs: Vec<f64> = stft.iter().map(|p| p.0 as f64).collect();
    let ys: Vec<f64> = stft.iter().map(|p| p.1).collect();
    let fit = fit_double_exponential(&xs, &ys)?;
    Ok((stft, fit))
}

fn write_lifetimes(
    res: &Resolved,
    tasks: &[Task],
    traces: &[Option<TaskTrace>],
    out: &Path,
) -> Result<PathBuf> {
    let mut cells: BTreeMap<(usize, usize), Vec<(&Task, &TaskTrace)>> = BTreeMap::new();
    for (task, trace) in tasks.iter().zip(traces) {
        if let Some(tr) = trace {
            cells
                .entry((task.theta_index, task.tau1_index))
                .or_default()
                .push((task, tr));
        }
    }
    let mut rows = Vec::new();
    for members in cells.values() {
        let task = members[0].0;
        let period = members[0].1.period_us;
        let mean = mean_trace(&members.iter().map(|m| m.1).collect::<Vec<_>>());
        let mut row = vec![fmt(task.theta), fmt(task.tau1), fmt(period)];
        match cell_lifetime(&mean, res.stft_window, res.target_nu) {
            Ok((_, f)) => {
                row.extend([
                    fmt(f.a1),
                    fmt(f.n1),
                    fmt(f.a2),
                    fmt(f.n2),
                    f.single_exponential.to_string(),
                    fmt(f.dtc_lifetime(period)),
                    "ok".into(),
                ]);
            }
            Err(e) => {
                row.extend(std::iter::repeat_n("nan".to_string(), 4));
                row.extend(["false".into(), "nan".into(), e.to_string()]);
            }
        }
        rows.push(row);
    }
    let path = out.join("lifetimes.tsv");
    write_table(
        &path,
        &[
            "theta_rad",
            "tau1_us",
            "period_us",
            "a1",
            "n1_cycles",
            "a2",
            "n2_cycles",
            "single_exponential",
            "lifetime_us",
            "status",
        ],
        rows,
    )?;
    Ok(path)
}

fn write_boundaries(res: &Resolved, cells: &[CellFraction], out: &Path) -> Result<PathBuf> {
    let mut by_tau: BTreeMap<u64, (f64, Vec<(f64, f64, f64)>)> = BTreeMap::new();
    for c in cells {
        by_tau
            .entry(c.tau1.to_bits())
            .or_insert((c.tau1, Vec::new()))
            .1
            .push((c.theta, c.f_mean, c.delta_f));
    }
    let mut taus: Vec<_> = by_tau.into_values().collect();
    taus.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut rows = Vec::new();
    for (tau, mut pts) in taus {
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut row = vec![fmt(tau)];
        match fit_super_gaussian(&pts, res.threshold) {
            Ok(b) => {
                let m = b.model;
                row.extend(
                    [
                        m.theta0,
                        m.sigma_minus,
                        m.sigma_plus,
                        m.p,
                        m.f_max,
                        b.theta_minus,
                        b.theta_minus_error,
                        b.theta_plus,
                        b.theta_plus_error,
                    ]
                    .map(fmt),
                );
                row.push("ok".into());
            }
            Err(e) => {
                row.extend(std::iter::repeat_n("nan".to_string(), 9));
                row.push(match e {
                    Error::NoDtcWindow { .. } => "no_dtc_window".into(),
                    other => other.to_string(),
                });
            }
        }
        rows.push(row);
    }
    let path = out.join("boundary.tsv");
    write_table(
        &path,
        &[
            "tau1_us",
            "theta0_rad",
            "sigma_minus_rad",
            "sigma_plus_rad",
            "p",
            "f_max",
            "theta_minus_rad",
            "theta_minus_err_rad",
            "theta_plus_rad",
            "theta_plus_err_rad",
            "status",
        ],
        rows,
    )?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::TargetNu;

    fn fc(f: f64, df: f64) -> CrystallineFraction {
        CrystallineFraction {
            f,
            delta_f: df,
            sigma_n: 0.0,
            n_bins: 50,
            target_nu: TargetNu::Half,
            peak_power: f,
            total_power: 1.0,
        }
    }

    #[test]
    fn averaged_fraction_is_mean_of_seeds() {
        let entries = vec![
            (3.0, 0.5, fc(0.25, 0.03)),
            (3.0, 0.5, fc(0.75, 0.04)),
            (3.1, 0.5, fc(0.5, 0.0)),
        ];
        let cells = aggregate_fractions(&entries);
        assert_eq!(cells.len(), 2);
        assert!((cells[0].f_mean - 0.5).abs() < 1e-12);
        assert!((cells[0].delta_f - 0.025).abs() < 1e-12);
        assert_eq!(cells[1].n_seeds, 1);
    }
}
