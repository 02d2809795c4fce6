//! Levenberg–Marquardt least squares with finite-difference Jacobians.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmOptions {
    pub max_iterations: usize,
    pub initial_lambda: f64,
    /// Relative finite-difference step.
    pub fd_step: f64,
    /// Stop once an accepted step changes every parameter by less than this (relative).
    pub step_tolerance: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            initial_lambda: 1e-3,
            fd_step: 1e-6,
            step_tolerance: 1e-14,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmFit {
    pub params: Vec<f64>,
    /// Parameter covariance `(JᵀWJ)⁻¹`, rescaled by the reduced χ² when no
    /// uncertainties were given. `None` when `JᵀWJ` is singular.
    pub covariance: Option<DMatrix<f64>>,
    pub chi2: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn residuals<F: Fn(&[f64], f64) -> f64>(
    model: &F,
    p: &[f64],
    xs: &[f64],
    ys: &[f64],
    w: &[f64],
) -> DVector<f64> {
    DVector::from_iterator(
        xs.len(),
        xs.iter()
            .zip(ys)
            .zip(w)
            .map(|((&x, &y), &wi)| (y - model(p, x)) * wi),
    )
}

fn jacobian<F: Fn(&[f64], f64) -> f64>(
    model: &F,
    p: &[f64],
    xs: &[f64],
    w: &[f64],
    rel: f64,
) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(xs.len(), p.len());
    let mut q = p.to_vec();
    for c in 0..p.len() {
        let h = rel * p[c].abs().max(1e-3);
        q[c] = p[c] + h;
        let up: Vec<f64> = xs.iter().map(|&x| model(&q, x)).collect();
        q[c] = p[c] - h;
        for (r, (&x, u)) in xs.iter().zip(up).enumerate() {
            j[(r, c)] = (u - model(&q, x)) / (2.0 * h) * w[r];
        }
        q[c] = p[c];
    }
    j
}

/// Minimize `Σ ((y_i − model(p, x_i)) / σ_i)²` from `p0`.
///
/// Non-finite model values reject the trial step, so models may return NaN
/// outside their domain.
pub fn levenberg_marquardt<F: Fn(&[f64], f64) -> f64>(
    model: F,
    xs: &[f64],
    ys: &[f64],
    sigmas: Option<&[f64]>,
    p0: &[f64],
    opts: &LmOptions,
) -> Result<LmFit> {
    if xs.len() != ys.len() || xs.len() < p0.len() {
        return Err(Error::InsufficientData(format!(
            "{} points for {} parameters",
            xs.len(),
            p0.len()
        )));
    }
    let weights: Vec<f64> = match sigmas {
        Some(s) if s.len() == xs.len() && s.iter().all(|&v| v > 0.0 && v.is_finite()) => {
            s.iter().map(|v| 1.0 / v).collect()
        }
        Some(s) if s.len() != xs.len() => {
            return Err(Error::InvalidParameter(format!(
                "{} uncertainties for {} points",
                s.len(),
                xs.len()
            )))
        }
        _ => vec![1.0; xs.len()],
    };
    let absolute = sigmas.is_some_and(|s| s.iter().all(|&v| v > 0.0 && v.is_finite()));
    let mut p = p0.to_vec();
    let mut r = residuals(&model, &p, xs, ys, &weights);
    let mut cost = r.norm_squared();
    if !cost.is_finite() {
        return Err(Error::InvalidParameter(
            "model is not finite at the initial parameters".into(),
        ));
    }
    let mut lambda = opts.initial_lambda;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iterations {
        iterations += 1;
        if cost == 0.0 {
            converged = true;
            break;
        }
        let j = jacobian(&model, &p, xs, &weights, opts.fd_step);
        let jtj = j.transpose() * &j;
        let g = j.transpose() * &r;
        let mut accepted = false;
        while lambda < 1e16 {
            let mut a = jtj.clone();
            for d in 0..p.len() {
                a[(d, d)] += lambda * jtj[(d, d)].max(1e-12);
            }
            let Some(delta) = a
                .clone()
                .cholesky()
                .map(|c| c.solve(&g))
                .or_else(|| a.lu().solve(&g))
            else {
                lambda *= 10.0;
                continue;
            };
            let trial: Vec<f64> = p.iter().zip(delta.iter()).map(|(a, d)| a + d).collect();
            let tr = residuals(&model, &trial, xs, ys, &weights);
            let tc = tr.norm_squared();
            if tc.is_finite() && tc <= cost {
                let small = p
                    .iter()
                    .zip(delta.iter())
                    .all(|(a, d)| d.abs() <= opts.step_tolerance * a.abs().max(1e-300));
                p = trial;
                r = tr;
                cost = tc;
                lambda = (lambda / 10.0).max(1e-15);
                accepted = true;
                if small {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            // No downhill step at any damping: a (local) minimum.
            converged = true;
        }
        if converged {
            break;
        }
    }
    let j = jacobian(&model, &p, xs, &weights, opts.fd_step);
    let covariance = (j.transpose() * &j).try_inverse().map(|c| {
        if absolute {
            c
        } else {
            let dof = (xs.len() - p.len()).max(1) as f64;
            c * (cost / dof)
        }
    });
    Ok(LmFit {
        params: p,
        covariance,
        chi2: cost,
        iterations,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_line() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x - 1.0).collect();
        let fit = levenberg_marquardt(
            |p, x| p[0] * x + p[1],
            &xs,
            &ys,
            None,
            &[0.5, 0.5],
            &LmOptions::default(),
        )
        .unwrap();
        assert!((fit.params[0] - 2.0).abs() < 1e-10 && (fit.params[1] + 1.0).abs() < 1e-10);
        assert!(fit.converged);
    }

    #[test]
    fn absolute_sigma_covariance() {
        // Constant model: variance of the weighted mean is σ²/n.
        let xs = vec![0.0; 25];
        let ys: Vec<f64> = (0..25)
            .map(|i| if i % 2 == 0 { 1.1 } else { 0.9 })
            .collect();
        let sig = vec![0.2; 25];
        let fit = levenberg_marquardt(
            |p, _| p[0],
            &xs,
            &ys,
            Some(&sig),
            &[0.0],
            &LmOptions::default(),
        )
        .unwrap();
        let var = fit.covariance.unwrap()[(0, 0)];
        assert!((var - 0.04 / 25.0).abs() < 1e-12);
    }

    #[test]
    fn too_few_points() {
        assert!(levenberg_marquardt(
            |p, x| p[0] * x,
            &[1.0],
            &[1.0, 2.0],
            None,
            &[1.0],
            &LmOptions::default()
        )
        .is_err());
    }
}
