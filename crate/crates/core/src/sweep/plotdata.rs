use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::config::SweepConfig;
use super::manifest::{RunManifest, TaskStatus, MANIFEST_FILE};
use super::meanfield_run::MEANFIELD_DIR;
use super::simulate::{cell_lifetime, plan_tasks, read_trace, Task, TaskTrace};
use super::tables::{fmt, write_table, Table};
use crate::analysis::{spectrum, SuperGaussian};
use crate::error::{Error, Result};

/// Subdirectory of the output tree holding plot tables.
pub const PLOTDATA_DIR: &str = "plotdata";

/// Samples per fitted curve.
const CURVE_POINTS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    /// Time traces and spectra.
    Fig1,
    /// STFT peak decay, double-exponential fit and lifetime.
    Fig2,
    /// Crystalline fraction vs θ per τ₁ and the fitted boundary.
    Fig3,
    /// ℤ₃ traces with level populations, and spectra.
    Fig4,
}

impl Figure {
    pub const ALL: [Figure; 4] = [Figure::Fig1, Figure::Fig2, Figure::Fig3, Figure::Fig4];
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Figure::Fig1 => "fig1",
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
        };
        f.write_str(s)
    }
}

impl FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Figure::ALL
            .into_iter()
            .find(|f| f.to_string() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown figure {s:?}; expected fig1, fig2, fig3 or fig4"
                ))
            })
    }
}

fn require(paths: &[PathBuf]) -> Result<()> {
    let missing: Vec<String> = paths
        .iter()
        .filter(|p| !p.exists())
        .map(|p| p.display().to_string())
        .collect();
    if missing.is_empty() {
        Ok(())
    } else {
        Err(Error::MissingInputs(missing))
    }
}

struct Loaded {
    config: SweepConfig,
    traces: Vec<(Task, TaskTrace)>,
}

fn load_traces(out: &Path) -> Result<Loaded> {
    require(&[out.join("config.toml"), out.join(MANIFEST_FILE)])?;
    let config = SweepConfig::load(&out.join("config.toml"))?;
    let manifest = RunManifest::read(out)?;
    let res = config.resolve()?;
    let tasks = plan_tasks(&res, config.run.seed, config.sweep.snap_tau1);
    let ok: Vec<Task> = tasks
        .into_iter()
        .filter(|t| {
            manifest
                .tasks
                .iter()
                .any(|m| m.id == t.id() && m.status == TaskStatus::Ok)
        })
        .collect();
    require(
        &ok.iter()
            .map(|t| out.join(t.trace_path()))
            .collect::<Vec<_>>(),
    )?;
    let traces = ok
        .into_iter()
        .map(|t| {
            let tr = read_trace(&out.join(t.trace_path()))?;
            Ok((t, tr))
        })
        .collect::<Result<_>>()?;
    Ok(Loaded { config, traces })
}

fn coords(t: &Task) -> Vec<String> {
    vec![fmt(t.theta), fmt(t.tau1), t.replica.to_string()]
}

fn frequency_rows(loaded: &Loaded) -> Result<Vec<Vec<String>>> {
    let window = (
        loaded.config.analysis.window[0],
        loaded.config.analysis.window[1],
    );
    let mut rows = Vec::new();
    for (t, tr) in &loaded.traces {
        let spec = spectrum(&tr.values, window)?;
        let total = spec.total_power();
        for k in 0..spec.len() {
            let mut r = coords(t);
            r.extend([
                fmt(spec.nu_grid[k]),
                fmt(spec.power[k]),
                fmt(if total > 0.0 {
                    spec.power[k] / total
                } else {
                    0.0
                }),
            ]);
            rows.push(r);
        }
    }
    Ok(rows)
}

const FREQ_HEADER: [&str; 6] = [
    "theta_rad",
    "tau1_us",
    "replica",
    "nu_per_period",
    "power",
    "power_normalized",
];

fn fig1(out: &Path, dir: &Path) -> Result<Vec<PathBuf>> {
    let loaded = load_traces(out)?;
    let time = dir.join("fig1_time.tsv");
    write_table(
        &time,
        &["theta_rad", "tau1_us", "replica", "n", "t_us", "P"],
        loaded.traces.iter().flat_map(|(t, tr)| {
            tr.values.iter().enumerate().map(move |(n, v)| {
                let mut r = coords(t);
                r.extend([n.to_string(), fmt(n as f64 * tr.period_us), fmt(*v)]);
                r
            })
        }),
    )?;
    let freq = dir.join("fig1_frequency.tsv");
    write_table(&freq, &FREQ_HEADER, frequency_rows(&loaded)?)?;
    Ok(vec![time, freq])
}

fn fig2(out: &Path, dir: &Path) -> Result<Vec<PathBuf>> {
    let loaded = load_traces(out)?;
    let res = loaded.config.resolve()?;
    let mut cells: std::collections::BTreeMap<(usize, usize), Vec<&(Task, TaskTrace)>> =
        Default::default();
    for item in &loaded.traces {
        cells
            .entry((item.0.theta_index, item.0.tau1_index))
            .or_default()
            .push(item);
    }
    let (mut stft_rows, mut fit_rows, mut life_rows) = (Vec::new(), Vec::new(), Vec::new());
    for members in cells.values() {
        let t = &members[0].0;
        let period = members[0].1.period_us;
        let len = members.iter().map(|m| m.1.values.len()).min().unwrap_or(0);
        let mean: Vec<f64> = (0..len)
            .map(|n| members.iter().map(|m| m.1.values[n]).sum::<f64>() / members.len() as f64)
            .collect();
        let (stft, fit) = match cell_lifetime(&mean, res.stft_window, res.target_nu) {
            Ok(v) => v,
            Err(e) => {
                log::warn!("fig2 θ={} τ₁={}: {e}", t.theta, t.tau1);
                life_rows.push(vec![
                    fmt(t.theta),
                    fmt(t.tau1),
                    "nan".into(),
                    "nan".into(),
                    e.to_string(),
                ]);
                continue;
            }
        };
        for &(n, p) in &stft {
            stft_rows.push(vec![
                fmt(t.theta),
                fmt(t.tau1),
                n.to_string(),
                fmt(n as f64 * period),
                fmt(p),
            ]);
        }
        let last = stft.last().map_or(0.0, |p| p.0 as f64);
        for k in 0..CURVE_POINTS {
            let x = last * k as f64 / (CURVE_POINTS - 1) as f64;
            fit_rows.push(vec![
                fmt(t.theta),
                fmt(t.tau1),
                fmt(x),
                fmt(x * period),
                fmt(fit.eval(x)),
            ]);
        }
        life_rows.push(vec![
            fmt(t.theta),
            fmt(t.tau1),
            fmt(fit.n2),
            fmt(fit.dtc_lifetime(period)),
            "ok".into(),
        ]);
    }
    let p1 = dir.join("fig2_stft.tsv");
    write_table(
        &p1,
        &["theta_rad", "tau1_us", "n_sweep", "t_us", "peak_power"],
        stft_rows,
    )?;
    let p2 = dir.join("fig2_fit.tsv");
    write_table(
        &p2,
        &["theta_rad", "tau1_us", "n_sweep", "t_us", "fitted_power"],
        fit_rows,
    )?;
    let p3 = dir.join("fig2_lifetime.tsv");
    write_table(
        &p3,
        &["theta_rad", "tau1_us", "n2_cycles", "lifetime_us", "status"],
        life_rows,
    )?;
    Ok(vec![p1, p2, p3])
}

fn fig3(out: &Path, dir: &Path) -> Result<Vec<PathBuf>> {
    let fractions = out.join("fractions.tsv");
    let boundary = out.join("boundary.tsv");
    require(&[fractions.clone(), boundary.clone()])?;
    let f = Table::read(&fractions)?;
    let (th, tau, fm, df) = (
        f.column_f64("theta_rad")?,
        f.column_f64("tau1_us")?,
        f.column_f64("f_mean")?,
        f.column_f64("delta_f")?,
    );
    let mut rows: Vec<Vec<String>> = (0..th.len())
        .map(|i| vec![fmt(tau[i]), fmt(th[i]), fmt(fm[i]), fmt(df[i])])
        .collect();
    rows.sort_by(|a, b| {
        let k = |r: &Vec<String>| {
            (
                r[0].parse::<f64>().unwrap_or(0.0),
                r[1].parse::<f64>().unwrap_or(0.0),
            )
        };
        let (x, y) = (k(a), k(b));
        x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1))
    });
    let p1 = dir.join("fig3_fraction.tsv");
    write_table(&p1, &["tau1_us", "theta_rad", "f", "delta_f"], rows)?;

    let b = Table::read(&boundary)?;
    let status = b.index("status")?;
    let cols = |name: &str| b.column_f64(name);
    let (btau, th0, sm, sp, pp, fmax) = (
        cols("tau1_us")?,
        cols("theta0_rad")?,
        cols("sigma_minus_rad")?,
        cols("sigma_plus_rad")?,
        cols("p")?,
        cols("f_max")?,
    );
    let (tm, tme, tp, tpe) = (
        cols("theta_minus_rad")?,
        cols("theta_minus_err_rad")?,
        cols("theta_plus_rad")?,
        cols("theta_plus_err_rad")?,
    );
    let mut brows = Vec::new();
    let mut curve = Vec::new();
    let (lo, hi) = th
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| {
            (a.min(x), b.max(x))
        });
    for i in 0..btau.len() {
        let st = b.rows[i][status].clone();
        brows.push(vec![
            fmt(btau[i]),
            fmt(tm[i]),
            fmt(tme[i]),
            fmt(tp[i]),
            fmt(tpe[i]),
            st.clone(),
        ]);
        if st != "ok" {
            continue;
        }
        let model = SuperGaussian {
            theta0: th0[i],
            sigma_minus: sm[i],
            sigma_plus: sp[i],
            p: pp[i],
            f_max: fmax[i],
        };
        for k in 0..CURVE_POINTS {
            let x = lo + (hi - lo) * k as f64 / (CURVE_POINTS - 1) as f64;
            curve.push(vec![fmt(btau[i]), fmt(x), fmt(model.eval(x))]);
        }
    }
    let p2 = dir.join("fig3_boundary.tsv");
    write_table(
        &p2,
        &[
            "tau1_us",
            "theta_minus_rad",
            "theta_minus_err_rad",
            "theta_plus_rad",
            "theta_plus_err_rad",
            "status",
        ],
        brows,
    )?;
    let p3 = dir.join("fig3_fit.tsv");
    write_table(&p3, &["tau1_us", "theta_rad", "fitted_f"], curve)?;
    let mut written = vec![p1, p2, p3];

    let theory = out.join(MEANFIELD_DIR).join("boundary.tsv");
    if theory.exists() {
        let t = Table::read(&theory)?;
        let st = t.index("status")?;
        let (tau, m, p) = (
            t.column_f64("tau1_us")?,
            t.column_f64("theta_minus_rad")?,
            t.column_f64("theta_plus_rad")?,
        );
        let p4 = dir.join("fig3_theory.tsv");
        write_table(
            &p4,
            &["tau1_us", "theta_minus_rad", "theta_plus_rad", "status"],
            (0..tau.len()).map(|i| vec![fmt(tau[i]), fmt(m[i]), fmt(p[i]), t.rows[i][st].clone()]),
        )?;
        written.push(p4);
    }
    Ok(written)
}

fn fig4(out: &Path, dir: &Path) -> Result<Vec<PathBuf>> {
    let loaded = load_traces(out)?;
    if loaded.traces.iter().any(|(_, tr)| tr.populations.is_none()) {
        return Err(Error::InvalidParameter(
            "fig4 needs traces from a z3 sweep".into(),
        ));
    }
    let time = dir.join("fig4_time.tsv");
    write_table(
        &time,
        &[
            "theta_rad",
            "tau1_us",
            "replica",
            "n",
            "t_us",
            "P",
            "pop_plus",
            "pop_zero",
            "pop_minus",
        ],
        loaded.traces.iter().flat_map(|(t, tr)| {
            let pops = tr.populations.as_ref().expect("checked above");
            tr.values.iter().enumerate().map(move |(n, v)| {
                let mut r = coords(t);
                r.extend([n.to_string(), fmt(n as f64 * tr.period_us), fmt(*v)]);
                r.extend(pops[n].iter().map(|x| fmt(*x)));
                r
            })
        }),
    )?;
    let freq = dir.join("fig4_frequency.tsv");
    write_table(&freq, &FREQ_HEADER, frequency_rows(&loaded)?)?;
    Ok(vec![time, freq])
}

/// Write the long-format tables for one figure under `out/plotdata/`.
pub fn emit_plotdata(out: &Path, figure: Figure) -> Result<Vec<PathBuf>> {
    let dir = out.join(PLOTDATA_DIR);
    match figure {
        Figure::Fig1 => fig1(out, &dir),
        Figure::Fig2 => fig2(out, &dir),
        Figure::Fig3 => fig3(out, &dir),
        Figure::Fig4 => fig4(out, &dir),
    }
}
