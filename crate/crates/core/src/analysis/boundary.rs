use serde::{Deserialize, Serialize};

use super::fit::{levenberg_marquardt, LmOptions};
use crate::error::{Error, Result};

/// Asymmetric super-Gaussian
/// `F(θ) = f_max exp(−½ (|θ − θ₀| / σ_∓)^p)`, with σ₋ left of θ₀ and σ₊ right.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuperGaussian {
    pub theta0: f64,
    pub sigma_minus: f64,
    pub sigma_plus: f64,
    pub p: f64,
    pub f_max: f64,
}

impl SuperGaussian {
    pub fn eval(&self, theta: f64) -> f64 {
        let sigma = if theta <= self.theta0 {
            self.sigma_minus
        } else {
            self.sigma_plus
        };
        self.f_max * (-0.5 * ((theta - self.theta0).abs() / sigma).powf(self.p)).exp()
    }

    fn from_params(p: &[f64]) -> Self {
        Self {
            theta0: p[0],
            sigma_minus: p[1],
            sigma_plus: p[2],
            p: p[3],
            f_max: p[4],
        }
    }

    /// `θ± = θ₀ ± σ± [2 ln(f_max / threshold)]^{1/p}`.
    pub fn boundary(&self, threshold: f64) -> Result<(f64, f64)> {
        if self.f_max < threshold {
            return Err(Error::NoDtcWindow {
                f_max: self.f_max,
                threshold,
            });
        }
        let reach = (2.0 * (self.f_max / threshold).ln()).powf(1.0 / self.p);
        Ok((
            self.theta0 - self.sigma_minus * reach,
            self.theta0 + self.sigma_plus * reach,
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryFit {
    pub model: SuperGaussian,
    /// Standard errors in the order `(θ₀, σ₋, σ₊, p, f_max)`.
    pub param_errors: [f64; 5],
    pub theta_minus: f64,
    pub theta_plus: f64,
    pub theta_minus_error: f64,
    pub theta_plus_error: f64,
    pub threshold: f64,
    pub chi2: f64,
}

fn model(p: &[f64], theta: f64) -> f64 {
    if p[1] <= 0.0 || p[2] <= 0.0 || p[3] <= 0.0 {
        return f64::NAN;
    }
    SuperGaussian::from_params(p).eval(theta)
}

/// Width guess from the points on one side, assuming p = 2.
fn side_width(pts: &[(f64, f64)], theta0: f64, f_max: f64) -> Option<f64> {
    let ws: Vec<f64> = pts
        .iter()
        .filter(|(t, f)| *t != theta0 && *f > 0.05 * f_max && *f < 0.99 * f_max)
        .map(|(t, f)| (t - theta0).abs() / (2.0 * (f_max / f).ln()).sqrt())
        .collect();
    (!ws.is_empty()).then(|| ws.iter().sum::<f64>() / ws.len() as f64)
}

/// Weighted fit of [`SuperGaussian`] to `(θ, f, δf)` and the threshold crossings.
///
/// Points with `δf = 0` fall back to an unweighted fit for the whole set.
pub fn fit_super_gaussian(points: &[(f64, f64, f64)], threshold: f64) -> Result<BoundaryFit> {
    if points.len() < 6 {
        return Err(Error::InsufficientData(format!(
            "{} points, need at least 6",
            points.len()
        )));
    }
    let imax = (0..points.len())
        .max_by(|&a, &b| points[a].1.total_cmp(&points[b].1))
        .expect("non-empty");
    let (theta0, f_max) = (points[imax].0, points[imax].1);
    let left: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.0 < theta0)
        .map(|p| (p.0, p.1))
        .collect();
    let right: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.0 > theta0)
        .map(|p| (p.0, p.1))
        .collect();
    if left.is_empty() || right.is_empty() {
        return Err(Error::InsufficientData(
            "points must span both sides of the maximum".into(),
        ));
    }
    let span = |side: &[(f64, f64)]| {
        side.iter()
            .map(|p| (p.0 - theta0).abs())
            .fold(0.0, f64::max)
            / 2.0
    };
    let sm = side_width(&left, theta0, f_max).unwrap_or_else(|| span(&left));
    let sp = side_width(&right, theta0, f_max).unwrap_or_else(|| span(&right));

    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    let sig: Vec<f64> = points.iter().map(|p| p.2).collect();
    let weighted = sig.iter().all(|&s| s > 0.0 && s.is_finite());
    let fit = levenberg_marquardt(
        model,
        &xs,
        &ys,
        weighted.then_some(sig.as_slice()),
        &[theta0, sm, sp, 2.0, f_max],
        &LmOptions::default(),
    )?;
    let sg = SuperGaussian::from_params(&fit.params);
    if !(sg.sigma_minus > 0.0 && sg.sigma_plus > 0.0 && sg.p > 0.0) {
        return Err(Error::NonConvergence {
            iterations: fit.iterations,
        });
    }
    let (theta_minus, theta_plus) = sg.boundary(threshold)?;

    let cov = fit.covariance.clone();
    let mut param_errors = [f64::NAN; 5];
    if let Some(c) = &cov {
        for (k, e) in param_errors.iter_mut().enumerate() {
            *e = c[(k, k)].max(0.0).sqrt();
        }
    }
    // ∂θ±/∂(θ₀, σ₋, σ₊, p, f_max) for R = L^{1/p}, L = 2 ln(f_max/threshold).
    let l = 2.0 * (sg.f_max / threshold).ln();
    let (tm_err, tp_err) = match (&cov, l > 0.0) {
        (Some(c), true) => {
            let r = l.powf(1.0 / sg.p);
            let dr_dp = -r * l.ln() / (sg.p * sg.p);
            let dr_df = r / (sg.p * l) * 2.0 / sg.f_max;
            let gm = [
                1.0,
                -r,
                0.0,
                -sg.sigma_minus * dr_dp,
                -sg.sigma_minus * dr_df,
            ];
            let gp = [1.0, 0.0, r, sg.sigma_plus * dr_dp, sg.sigma_plus * dr_df];
            let quad = |g: &[f64; 5]| {
                let mut s = 0.0;
                for i in 0..5 {
                    for j in 0..5 {
                        s += g[i] * c[(i, j)] * g[j];
                    }
                }
                s.max(0.0).sqrt()
            };
            (quad(&gm), quad(&gp))
        }
        _ => (f64::NAN, f64::NAN),
    };
    Ok(BoundaryFit {
        model: sg,
        param_errors,
        theta_minus,
        theta_plus,
        theta_minus_error: tm_err,
        theta_plus_error: tp_err,
        threshold,
        chi2: fit.chi2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn synth(m: &SuperGaussian, n: usize, half: f64) -> Vec<(f64, f64, f64)> {
        (0..n)
            .map(|i| {
                let t = m.theta0 - half + 2.0 * half * i as f64 / (n - 1) as f64;
                (t, m.eval(t), 0.01)
            })
            .collect()
    }

    #[test]
    fn round_trip() {
        let truth = SuperGaussian {
            theta0: PI,
            sigma_minus: 0.1,
            sigma_plus: 0.1,
            p: 4.0,
            f_max: 0.9,
        };
        let fit = fit_super_gaussian(&synth(&truth, 41, 0.3), 0.1).unwrap();
        let m = fit.model;
        for (got, want) in [
            (m.theta0, PI),
            (m.sigma_minus, 0.1),
            (m.sigma_plus, 0.1),
            (m.p, 4.0),
            (m.f_max, 0.9),
        ] {
            assert_relative_eq!(got, want, max_relative = 1e-6);
        }
        let reach = 0.1 * (2.0 * 9f64.ln()).powf(0.25);
        assert_relative_eq!(fit.theta_minus, PI - reach, max_relative = 1e-6);
        assert_relative_eq!(fit.theta_plus, PI + reach, max_relative = 1e-6);
    }

    #[test]
    fn asymmetric_round_trip() {
        let truth = SuperGaussian {
            theta0: 3.1,
            sigma_minus: 0.08,
            sigma_plus: 0.15,
            p: 3.0,
            f_max: 0.7,
        };
        let fit = fit_super_gaussian(&synth(&truth, 31, 0.45), 0.1).unwrap();
        assert_relative_eq!(fit.model.sigma_minus, 0.08, max_relative = 1e-4);
        assert_relative_eq!(fit.model.sigma_plus, 0.15, max_relative = 1e-4);
        let (a, b) = fit.model.boundary(0.1).unwrap();
        assert!((a - fit.theta_minus).abs() < 1e-10 && (b - fit.theta_plus).abs() < 1e-10);
    }

    #[test]
    fn threshold_coincidence() {
        let m = SuperGaussian {
            theta0: 3.0,
            sigma_minus: 0.1,
            sigma_plus: 0.2,
            p: 2.0,
            f_max: 0.1,
        };
        assert_eq!(m.boundary(0.1).unwrap(), (3.0, 3.0));
        let low = SuperGaussian { f_max: 0.05, ..m };
        assert!(matches!(low.boundary(0.1), Err(Error::NoDtcWindow { .. })));
    }

    #[test]
    fn needs_both_sides() {
        let pts: Vec<(f64, f64, f64)> = (0..8)
            .map(|i| (i as f64, 1.0 / (1.0 + i as f64), 0.01))
            .collect();
        assert!(fit_super_gaussian(&pts, 0.1).is_err());
        assert!(fit_super_gaussian(&pts[..4], 0.1).is_err());
    }
}
