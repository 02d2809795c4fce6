use serde::{Deserialize, Serialize};

use super::fit::{levenberg_marquardt, LmOptions};
use super::spectrum::{spectrum, TargetNu};
use crate::error::{Error, Result};

pub const DEFAULT_STFT_WINDOW: usize = 20;

/// Target-bin power of the spectrum over `(n_sweep, n_sweep + m]`, for every
/// `n_sweep` whose window fits in the trace.
pub fn stft_peak(values: &[f64], m: usize, target: TargetNu) -> Result<Vec<(usize, f64)>> {
    if m < 2 || m >= values.len() {
        return Err(Error::Window {
            start: 0,
            end: m,
            len: values.len(),
        });
    }
    let bins = target.bins(m)?;
    (0..values.len() - m)
        .map(|s| {
            let spec = spectrum(values, (s, s + m))?;
            Ok((s, bins.iter().map(|&k| spec.power[k]).sum()))
        })
        .collect()
}

/// `A₁ e^{−x/n₁} + A₂ e^{−x/n₂}` with `n₁ ≤ n₂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoubleExponentialFit {
    pub a1: f64,
    pub n1: f64,
    pub a2: f64,
    pub n2: f64,
    /// Set when the data only supports one exponential; then `a1 = 0` and `n1 = n2`.
    pub single_exponential: bool,
    pub chi2: f64,
}

impl DoubleExponentialFit {
    pub fn eval(&self, x: f64) -> f64 {
        let term = |a: f64, n: f64| {
            if n.is_infinite() {
                a
            } else {
                a * (-x / n).exp()
            }
        };
        term(self.a1, self.n1) + term(self.a2, self.n2)
    }

    /// Polarization lifetime in μs. Peak power goes as P², so it decays at
    /// twice the polarization rate.
    pub fn dtc_lifetime(&self, period_us: f64) -> f64 {
        2.0 * self.n2 * period_us
    }
}

fn double_exp(p: &[f64], x: f64) -> f64 {
    if p[1] <= 0.0 || p[3] <= 0.0 {
        return f64::NAN;
    }
    p[0] * (-x / p[1]).exp() + p[2] * (-x / p[3]).exp()
}

fn single_exp(p: &[f64], x: f64) -> f64 {
    if p[1] <= 0.0 {
        return f64::NAN;
    }
    p[0] * (-x / p[1]).exp()
}

/// Least-squares line through `(x, ln y)`; returns `(intercept, slope)`.
fn log_linear(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(_, &y)| y > 0.0)
        .map(|(&x, &y)| (x, y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx;
    Some((my - slope * mx, slope))
}

fn fit_single(xs: &[f64], ys: &[f64]) -> Result<DoubleExponentialFit> {
    let (b, slope) =
        log_linear(xs, ys).ok_or_else(|| Error::InsufficientData("no positive points".into()))?;
    if slope >= 0.0 || !slope.is_finite() {
        let mean = ys.iter().sum::<f64>() / ys.len() as f64;
        let chi2 = ys.iter().map(|y| (y - mean).powi(2)).sum();
        return Ok(DoubleExponentialFit {
            a1: 0.0,
            n1: f64::INFINITY,
            a2: mean,
            n2: f64::INFINITY,
            single_exponential: true,
            chi2,
        });
    }
    let fit = levenberg_marquardt(
        single_exp,
        xs,
        ys,
        None,
        &[b.exp(), -1.0 / slope],
        &LmOptions::default(),
    )?;
    Ok(DoubleExponentialFit {
        a1: 0.0,
        n1: fit.params[1],
        a2: fit.params[0],
        n2: fit.params[1],
        single_exponential: true,
        chi2: fit.chi2,
    })
}

/// Fit `A₁e^{−x/n₁} + A₂e^{−x/n₂}` to positive data.
///
/// The slow component starts from a log-linear fit to the last third, the
/// fast one from a log-linear fit to the first-third residual. A flagged
/// single exponential is returned when the two components are not resolved.
pub fn fit_double_exponential(xs: &[f64], ys: &[f64]) -> Result<DoubleExponentialFit> {
    if xs.len() != ys.len() || xs.len() < 8 {
        return Err(Error::InsufficientData(format!(
            "{} points, need at least 8",
            xs.len()
        )));
    }
    if ys.iter().any(|&y| !(y > 0.0) || !y.is_finite()) {
        return Err(Error::InvalidParameter(
            "double-exponential fit needs positive values".into(),
        ));
    }
    let third = xs.len() / 3;
    let tail = xs.len() - third;
    let Some((b2, s2)) = log_linear(&xs[tail..], &ys[tail..]) else {
        return fit_single(xs, ys);
    };
    if s2 >= 0.0 {
        return fit_single(xs, ys);
    }
    let (a2, n2) = (b2.exp(), -1.0 / s2);
    let head_res: Vec<f64> = xs[..third]
        .iter()
        .zip(&ys[..third])
        .map(|(&x, &y)| y - a2 * (-x / n2).exp())
        .collect();
    let scale = ys.iter().cloned().fold(0.0, f64::max);
    if head_res.iter().filter(|&&r| r > 1e-9 * scale).count() < 2 {
        return fit_single(xs, ys);
    }
    let Some((b1, s1)) = log_linear(&xs[..third], &head_res) else {
        return fit_single(xs, ys);
    };
    let n1 = if s1 < 0.0 {
        (-1.0 / s1).min(n2 * 0.5)
    } else {
        n2 * 0.1
    };
    let fit = levenberg_marquardt(
        double_exp,
        xs,
        ys,
        None,
        &[b1.exp(), n1, a2, n2],
        &LmOptions::default(),
    )?;
    let mut p = fit.params.clone();
    if p[1] > p[3] {
        p.swap(0, 2);
        p.swap(1, 3);
    }
    let amp = p[0].abs().max(p[2].abs());
    let degenerate =
        (p[3] - p[1]).abs() <= 1e-3 * p[3] || p[0].abs() <= 1e-6 * amp || p[2].abs() <= 1e-6 * amp;
    if degenerate || p.iter().any(|v| !v.is_finite()) {
        return fit_single(xs, ys);
    }
    Ok(DoubleExponentialFit {
        a1: p[0],
        n1: p[1],
        a2: p[2],
        n2: p[3],
        single_exponential: false,
        chi2: fit.chi2,
    })
}
