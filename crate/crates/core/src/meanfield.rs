//! Single-spin mean-field theory of the 2T-periodic orbit.
//!
//! A spin is pulsed by θ about y and then rotated by the interaction angle φ
//! about x, with φ set self-consistently by its own x-polarization:
//! `φ = J̄ τ₁ ⟨S^x⟩ = J̄ τ₁ cos θ₀ / 2`. The sign of φ flips in the second
//! period, and the orbit closes when
//!
//! ```text
//! cos²θ₀ = tan²(θ/2) sin²(φ/2) / (1 + tan²(θ/2) sin²(φ/2)).
//! ```
//!
//! A nonzero solution exists exactly when `|tan(θ/2) J̄ τ₁ / 4| > 1`. Disorder
//! enters through a distribution of `J̄_i` and detunings `Δ_i`. The detunings
//! shift each spin's rotation angle when the pulse Rabi frequency is finite.

use std::f64::consts::PI;

use nalgebra::Matrix2;
use num_complex::Complex64;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::disorder::{DisorderRealization, EnsembleParams};
use crate::error::{Error, Result};
use crate::floquet::rotation_angle_offset;
use crate::rng::{derive_seed, stream, stream_rng};

/// Order-parameter threshold that separates the DTC from the paramagnet.
pub const THRESHOLD: f64 = 0.1;
/// Below this |cos θ₀| a converged fixed point counts as the trivial orbit.
pub const TRIVIAL_POLARIZATION: f64 = 1e-4;
/// Overlap below which the product-state ansatz is declared broken.
pub const ANSATZ_OVERLAP_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub damping: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            damping: 0.5,
            tolerance: 1e-10,
            max_iterations: 10_000,
        }
    }
}

pub const INITIAL_GUESSES: [f64; 6] = [1.0, -1.0, 0.5, -0.5, 0.1, -0.1];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelfConsistentSolution {
    pub cos_theta0: f64,
    /// Interaction rotation angle `φ = J̄ τ₁ cos θ₀ / 2` (rad).
    pub phi: f64,
    pub exists: bool,
    /// Parity of `m` in `φ₀ = mπ − φ/2`.
    pub branch: u8,
    /// Pulse angle including the detuning shift.
    pub theta_eff: f64,
    pub iterations: usize,
}

/// `a / √(1 + a²)` without overflow at the divergent tangent.
fn saturate(a: f64) -> f64 {
    let a = a.abs();
    if a <= 1.0 {
        a / (1.0 + a * a).sqrt()
    } else {
        1.0 / (1.0 + 1.0 / (a * a)).sqrt()
    }
}

/// Closed-form `cos²θ₀` for a given pulse angle and interaction angle.
pub fn closed_form_cos2(theta_eff: f64, phi: f64) -> f64 {
    saturate((theta_eff / 2.0).tan() * (phi / 2.0).sin()).powi(2)
}

/// Interaction angle for a polarization `c = cos θ₀`.
pub fn interaction_angle(jbar: f64, tau1: f64, c: f64) -> f64 {
    jbar * tau1 * c / 2.0
}

/// The self-consistency map `g(c) = sign(c) √(cos²θ₀(φ(c)))`.
pub fn consistency_map(c: f64, theta_eff: f64, jbar_tau1: f64) -> f64 {
    let phi = jbar_tau1 * c / 2.0;
    c.signum() * saturate((theta_eff / 2.0).tan() * (phi / 2.0).sin())
}

/// Pulse angle after the off-resonance shift `θ(√(1 + ((Δ+J̄)/Ω_y)²) − 1)`.
pub fn effective_theta(theta: f64, jbar: f64, delta: f64, omega_y: Option<f64>) -> f64 {
    match omega_y {
        Some(wy) if wy.is_finite() && wy > 0.0 => {
            theta + rotation_angle_offset(theta, wy, delta + jbar)
        }
        _ => theta,
    }
}

/// `|tan(θ/2) J̄ τ₁ / 4| > 1`.
pub fn existence_condition(theta: f64, tau1: f64, jbar: f64) -> bool {
    ((theta / 2.0).tan() * jbar * tau1 / 4.0).abs() > 1.0
}

/// Half-width `|J̄ τ₁| / 2` of the window around θ = π to leading order.
pub fn linearized_half_width(jbar: f64, tau1: f64) -> f64 {
    (jbar * tau1).abs() / 2.0
}

fn branch_parity(c: f64, theta_eff: f64, phi: f64) -> u8 {
    // cot θ₀ = −(−1)^m tan(θ/2) sin(φ/2) must carry the sign of cos θ₀.
    if -(theta_eff / 2.0).tan() * (phi / 2.0).sin() * c >= 0.0 {
        0
    } else {
        1
    }
}

/// Damped fixed-point iteration of [`consistency_map`] from every initial guess.
pub fn solve_self_consistent(
    theta: f64,
    tau1: f64,
    jbar: f64,
    delta: f64,
    omega_y: Option<f64>,
) -> Result<SelfConsistentSolution> {
    solve_with(theta, tau1, jbar, delta, omega_y, &SolverOptions::default())
}

pub fn solve_with(
    theta: f64,
    tau1: f64,
    jbar: f64,
    delta: f64,
    omega_y: Option<f64>,
    opts: &SolverOptions,
) -> Result<SelfConsistentSolution> {
    if !(tau1 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tau1 must be positive, got {tau1}"
        )));
    }
    let theta_eff = effective_theta(theta, jbar, delta, omega_y);
    let jt = jbar * tau1;
    let lambda = opts.damping;
    let mut best: Option<(f64, usize)> = None;
    let mut stalled = None;
    let mut iterations = 0;
    for &guess in &INITIAL_GUESSES {
        let mut c = guess;
        let mut used = None;
        for k in 1..=opts.max_iterations {
            let next = (1.0 - lambda) * c + lambda * consistency_map(c, theta_eff, jt);
            let step = (next - c).abs();
            c = next;
            if step < opts.tolerance {
                used = Some(k);
                break;
            }
        }
        let Some(k) = used else {
            stalled = Some(opts.max_iterations);
            continue;
        };
        iterations = iterations.max(k);
        if c.abs() > TRIVIAL_POLARIZATION && best.is_none_or(|(b, _)| c.abs() > b.abs() + 1e-12) {
            best = Some((c, k));
        }
    }
    match (best, stalled) {
        (Some((c, it)), _) => {
            let phi = interaction_angle(jbar, tau1, c);
            Ok(SelfConsistentSolution {
                cos_theta0: c,
                phi,
                exists: true,
                branch: branch_parity(c, theta_eff, phi),
                theta_eff,
                iterations: it,
            })
        }
        (None, Some(iterations)) => Err(Error::NonConvergence { iterations }),
        (None, None) => Ok(SelfConsistentSolution {
            cos_theta0: 0.0,
            phi: 0.0,
            exists: false,
            branch: 0,
            theta_eff,
            iterations,
        }),
    }
}

/// Spin-1/2 state with the given Bloch vector in the `[m_s=0, m_s=-1]` basis.
fn coherent_state(n: [f64; 3]) -> [Complex64; 2] {
    let beta = n[2].clamp(-1.0, 1.0).acos();
    let alpha = n[1].atan2(n[0]);
    [
        Complex64::new((beta / 2.0).cos(), 0.0),
        Complex64::from_polar((beta / 2.0).sin(), alpha),
    ]
}

/// `exp(-i α S^axis)` for axis x (`true`) or y (`false`).
fn rotation(x_axis: bool, alpha: f64) -> Matrix2<Complex64> {
    let c = Complex64::new((alpha / 2.0).cos(), 0.0);
    let s = (alpha / 2.0).sin();
    if x_axis {
        Matrix2::new(c, Complex64::new(0.0, -s), Complex64::new(0.0, -s), c)
    } else {
        Matrix2::new(c, Complex64::new(-s, 0.0), Complex64::new(s, 0.0), c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasiEnergy {
    /// ε with `e^{i2ε} = ⟨ψ₀|U_{2T}|ψ₀⟩`, in `(−π/2, π/2]`.
    pub epsilon: f64,
    pub overlap: f64,
    pub psi0: [Complex64; 2],
    pub even: [Complex64; 2],
    pub odd: [Complex64; 2],
}

/// The orbit state `ψ₀` on the Bloch sphere with x as the polar axis.
pub fn orbit_state(solution: &SelfConsistentSolution) -> [Complex64; 2] {
    let c = solution.cos_theta0.clamp(-1.0, 1.0);
    let s = (1.0 - c * c).sqrt();
    let phi0 = solution.branch as f64 * PI - solution.phi / 2.0;
    coherent_state([c, s * phi0.cos(), s * phi0.sin()])
}

/// One-period unitary `e^{-iθS^y} e^{-iφS^x}`.
pub fn period_unitary(theta: f64, phi: f64) -> Matrix2<Complex64> {
    rotation(false, theta) * rotation(true, phi)
}

/// Two-period unitary with the interaction angle flipped in the second period.
pub fn two_period_unitary(theta: f64, phi: f64) -> Matrix2<Complex64> {
    period_unitary(theta, -phi) * period_unitary(theta, phi)
}

/// Quasi-energy and even/odd one-period combinations of the orbit state.
pub fn quasi_energy(solution: &SelfConsistentSolution) -> Result<QuasiEnergy> {
    if !solution.exists {
        return Err(Error::InvalidParameter(
            "quasi-energy needs an existing solution".into(),
        ));
    }
    let psi = orbit_state(solution);
    let v = nalgebra::Vector2::new(psi[0], psi[1]);
    let u2 = two_period_unitary(solution.theta_eff, solution.phi);
    let amp = v.dotc(&(u2 * v));
    let overlap = amp.norm();
    if overlap < ANSATZ_OVERLAP_FLOOR {
        return Err(Error::AnsatzBreakdown { overlap });
    }
    let mut epsilon = amp.arg() / 2.0;
    if epsilon <= -PI / 2.0 {
        epsilon += PI;
    }
    let u1v = period_unitary(solution.theta_eff, solution.phi) * v;
    let rot = Complex64::from_polar(1.0, -epsilon);
    let combine = |sign: f64| {
        let w = v + u1v * (rot * sign);
        let n = w.norm();
        [w[0] / n, w[1] / n]
    };
    Ok(QuasiEnergy {
        epsilon,
        overlap,
        psi0: psi,
        even: combine(1.0),
        odd: combine(-1.0),
    })
}

/// Disorder samples for the ensemble-averaged theory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldEnsemble {
    pub jbar: Vec<f64>,
    pub delta: Vec<f64>,
    /// Pulse Rabi frequency; `None` means instantaneous pulses.
    pub omega_y: Option<f64>,
}

impl MeanFieldEnsemble {
    pub fn new(jbar: Vec<f64>, delta: Vec<f64>, omega_y: Option<f64>) -> Result<Self> {
        if jbar.is_empty() {
            return Err(Error::EmptyEnsemble);
        }
        if jbar.len() != delta.len() {
            return Err(Error::InvalidParameter(format!(
                "{} couplings but {} detunings",
                jbar.len(),
                delta.len()
            )));
        }
        Ok(Self {
            jbar,
            delta,
            omega_y,
        })
    }

    /// A clean ensemble: every sample has the same `J̄` and no detuning.
    pub fn uniform(jbar: f64, samples: usize) -> Result<Self> {
        Self::new(vec![jbar; samples], vec![0.0; samples], None)
    }

    /// `J̄_i` from independent realizations of `params`, and Gaussian `Δ_i`
    /// of width `params.w`, until `samples` values are collected.
    pub fn from_disorder(
        params: &EnsembleParams,
        samples: usize,
        omega_y: Option<f64>,
    ) -> Result<Self> {
        if samples == 0 {
            return Err(Error::EmptyEnsemble);
        }
        let mut jbar = Vec::with_capacity(samples);
        let mut replica = 0u64;
        while jbar.len() < samples {
            let mut p = params.clone();
            p.seed = derive_seed(params.seed, "meanfield-jbar", &[], replica);
            p.w = 0.0;
            let r = DisorderRealization::sample(&p)?;
            jbar.extend(r.jbar.iter().take(samples - jbar.len()));
            replica += 1;
        }
        let delta = if params.w > 0.0 {
            let normal =
                Normal::new(0.0, params.w).map_err(|e| Error::InvalidParameter(e.to_string()))?;
            let mut rng = stream_rng(
                derive_seed(params.seed, "meanfield-delta", &[], 0),
                stream::ONSITE,
            );
            (0..samples).map(|_| normal.sample(&mut rng)).collect()
        } else {
            vec![0.0; samples]
        };
        Self::new(jbar, delta, omega_y)
    }

    pub fn len(&self) -> usize {
        self.jbar.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jbar.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSolution {
    /// Self-consistent mean polarization `c̄ = 2⟨S^x⟩`.
    pub mean_cos: f64,
    /// `⟨cos²θ₀⟩`, zero for the trivial orbit.
    pub order_parameter: f64,
    pub exists: bool,
}

/// Population map: each sample responds to the ensemble-mean polarization.
fn population_map(c: f64, tau1: f64, thetas: &[f64], jbar: &[f64]) -> (f64, f64) {
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for (&th, &j) in thetas.iter().zip(jbar) {
        let ci = consistency_map(c, th, j * tau1);
        sum += ci;
        sum_sq += ci * ci;
    }
    let n = thetas.len() as f64;
    (sum / n, sum_sq / n)
}

/// Largest root of `h(c) = 0` on `(0, 1]` with `h(1) ≤ 0`, by scan and bisection.
/// Zero when no sign change is found.
fn largest_root(h: impl Fn(f64) -> f64) -> f64 {
    const SCAN: usize = 400;
    let mut hi = 1.0;
    let mut h_hi = h(hi);
    for k in (1..SCAN).rev() {
        let lo = k as f64 / SCAN as f64;
        let h_lo = h(lo);
        if h_lo >= 0.0 && h_hi <= 0.0 {
            let (mut a, mut b) = (lo, hi);
            for _ in 0..100 {
                let m = 0.5 * (a + b);
                if h(m) >= 0.0 {
                    a = m;
                } else {
                    b = m;
                }
            }
            return 0.5 * (a + b);
        }
        hi = lo;
        h_hi = h_lo;
    }
    0.0
}

/// Ensemble order parameter at one `(θ, τ₁)` point.
///
/// The mean polarization is iterated to a fixed point from `c̄ = 1` (tolerance
/// 1e-6). The map is odd in `c̄`, so the negative branch mirrors this one.
pub fn ensemble_order_parameter(
    theta: f64,
    tau1: f64,
    ensemble: &MeanFieldEnsemble,
) -> Result<EnsembleSolution> {
    if ensemble.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    if !(tau1 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tau1 must be positive, got {tau1}"
        )));
    }
    let thetas: Vec<f64> = ensemble
        .jbar
        .iter()
        .zip(&ensemble.delta)
        .map(|(&j, &d)| effective_theta(theta, j, d, ensemble.omega_y))
        .collect();
    let opts = SolverOptions::default();
    let mut c = 1.0;
    let mut converged = false;
    for _ in 0..opts.max_iterations {
        let next = (1.0 - opts.damping) * c
            + opts.damping * population_map(c, tau1, &thetas, &ensemble.jbar).0;
        let step = (next - c).abs();
        c = next;
        if step < 1e-6 {
            converged = true;
            break;
        }
    }
    if !converged {
        log::debug!("population iteration stalled at θ={theta:.6}, τ₁={tau1}; using bisection");
        c = largest_root(|c| population_map(c, tau1, &thetas, &ensemble.jbar).0 - c);
    }
    if c.abs() <= TRIVIAL_POLARIZATION {
        return Ok(EnsembleSolution {
            mean_cos: 0.0,
            order_parameter: 0.0,
            exists: false,
        });
    }
    let (_, order) = population_map(c, tau1, &thetas, &ensemble.jbar);
    Ok(EnsembleSolution {
        mean_cos: c,
        order_parameter: order.clamp(0.0, 1.0),
        exists: true,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryOptions {
    pub threshold: f64,
    /// Bisection stops once the bracket is narrower than this (rad).
    pub tolerance: f64,
}

impl Default for BoundaryOptions {
    fn default() -> Self {
        Self {
            threshold: THRESHOLD,
            tolerance: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseBoundary {
    pub tau1_grid: Vec<f64>,
    pub theta_grid: Vec<f64>,
    /// `None` where no threshold crossing is bracketed by the grid.
    pub theta_minus: Vec<Option<f64>>,
    pub theta_plus: Vec<Option<f64>>,
    /// `order_parameter_map[i][k]` at `(tau1_grid[i], theta_grid[k])`.
    pub order_parameter_map: Vec<Vec<f64>>,
}

fn bisect_crossing(
    mut below: f64,
    mut above: f64,
    tau1: f64,
    ensemble: &MeanFieldEnsemble,
    opts: &BoundaryOptions,
) -> Result<f64> {
    while (above - below).abs() > opts.tolerance {
        let mid = 0.5 * (below + above);
        if ensemble_order_parameter(mid, tau1, ensemble)?.order_parameter >= opts.threshold {
            above = mid;
        } else {
            below = mid;
        }
    }
    Ok(0.5 * (below + above))
}

/// θ± for one τ₁ from a row of the order-parameter map.
fn row_boundary(
    thetas: &[f64],
    row: &[f64],
    tau1: f64,
    ensemble: &MeanFieldEnsemble,
    opts: &BoundaryOptions,
) -> Result<(Option<f64>, Option<f64>)> {
    let Some(peak) = (0..row.len())
        .filter(|&k| row[k] >= opts.threshold)
        .min_by(|&a, &b| (thetas[a] - PI).abs().total_cmp(&(thetas[b] - PI).abs()))
    else {
        return Ok((None, None));
    };
    let mut lo = peak;
    while lo > 0 && row[lo - 1] >= opts.threshold {
        lo -= 1;
    }
    let mut hi = peak;
    while hi + 1 < row.len() && row[hi + 1] >= opts.threshold {
        hi += 1;
    }
    let minus = if lo > 0 {
        Some(bisect_crossing(
            thetas[lo - 1],
            thetas[lo],
            tau1,
            ensemble,
            opts,
        )?)
    } else {
        None
    };
    let plus = if hi + 1 < row.len() {
        Some(bisect_crossing(
            thetas[hi + 1],
            thetas[hi],
            tau1,
            ensemble,
            opts,
        )?)
    } else {
        None
    };
    Ok((minus, plus))
}

/// Order-parameter map and threshold boundary over a `(τ₁, θ)` grid.
///
/// `theta_grid` must be increasing. Grid points run in parallel.
pub fn phase_boundary(
    tau1_grid: &[f64],
    theta_grid: &[f64],
    ensemble: &MeanFieldEnsemble,
    opts: &BoundaryOptions,
) -> Result<PhaseBoundary> {
    if ensemble.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    if tau1_grid.is_empty() || theta_grid.is_empty() {
        return Err(Error::InvalidParameter("empty τ₁ or θ grid".into()));
    }
    if theta_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "θ grid must be strictly increasing".into(),
        ));
    }
    if !(opts.threshold > 0.0 && opts.threshold < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "threshold {} outside (0, 1)",
            opts.threshold
        )));
    }
    let rows: Vec<(Vec<f64>, Option<f64>, Option<f64>)> = tau1_grid
        .par_iter()
        .map(|&tau1| -> Result<_> {
            let row = theta_grid
                .par_iter()
                .map(|&th| ensemble_order_parameter(th, tau1, ensemble).map(|s| s.order_parameter))
                .collect::<Result<Vec<f64>>>()?;
            let (m, p) = row_boundary(theta_grid, &row, tau1, ensemble, opts)?;
            Ok((row, m, p))
        })
        .collect::<Result<_>>()?;
    let mut out = PhaseBoundary {
        tau1_grid: tau1_grid.to_vec(),
        theta_grid: theta_grid.to_vec(),
        theta_minus: Vec::with_capacity(rows.len()),
        theta_plus: Vec::with_capacity(rows.len()),
        order_parameter_map: Vec::with_capacity(rows.len()),
    };
    for (row, m, p) in rows {
        out.order_parameter_map.push(row);
        out.theta_minus.push(m);
        out.theta_plus.push(p);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Independent oracle: a nonzero root of `g(c) = c` on a dense c grid.
    fn root_scan_has_nonzero_root(theta: f64, jt: f64) -> bool {
        let n = 100_000;
        let t = (theta / 2.0).tan();
        let f = |c: f64| {
            let a = t * (jt * c / 4.0).sin();
            (a * a / (1.0 + a * a)).sqrt() - c
        };
        (1..=n).any(|k| f(k as f64 / n as f64) >= 0.0)
    }

    #[test]
    fn pi_pulse_fully_polarized() {
        for jt in [0.05, 0.4, 2.0] {
            let s = solve_self_consistent(PI, jt, 1.0, 0.0, None).unwrap();
            assert!(s.exists);
            assert_abs_diff_eq!(s.cos_theta0.abs(), 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn existence_examples() {
        assert!(existence_condition(PI, 1.0, 1e-3));
        assert!(!existence_condition(PI + 0.3, 1.0, 0.4));
        assert!(!existence_condition(PI + 0.3, 1.0, 0.0));
        let s = solve_self_consistent(PI + 0.3, 1.0, 0.4, 0.0, None).unwrap();
        assert!(!s.exists);
    }

    #[test]
    fn window_matches_root_scan() {
        // J̄τ₁ = 0.4: existence window half-width near 0.2 rad.
        let jt = 0.4;
        let mut edge = 0.0;
        for k in 0..400 {
            let d = k as f64 * 0.001;
            let oracle = root_scan_has_nonzero_root(PI + d, jt);
            if let Ok(s) = solve_self_consistent(PI + d, 1.0, jt, 0.0, None) {
                if oracle && s.exists {
                    edge = d;
                }
            }
        }
        assert!((edge - 0.2).abs() < 0.02, "edge {edge}");
    }

    #[test]
    fn residual_and_phi_relation() {
        for &(theta, jt) in &[(0.9 * PI, 1.5), (1.05 * PI, 0.6), (1.1 * PI, 2.5)] {
            let s = solve_self_consistent(theta, 1.0, jt, 0.0, None).unwrap();
            assert!(s.exists);
            assert_abs_diff_eq!(s.phi, jt * s.cos_theta0 / 2.0, epsilon = 1e-12);
            assert_abs_diff_eq!(
                s.cos_theta0.powi(2),
                closed_form_cos2(theta, s.phi),
                epsilon = 1e-8
            );
        }
    }

    #[test]
    fn orbit_is_two_period_eigenstate() {
        for &(theta, jt) in &[
            (0.9 * PI, 1.5),
            (1.05 * PI, 0.6),
            (1.2 * PI, 3.0),
            (PI, 0.01),
        ] {
            let s = solve_self_consistent(theta, 1.0, jt, 0.0, None).unwrap();
            let q = quasi_energy(&s).unwrap();
            assert!((q.overlap - 1.0).abs() < 1e-10, "overlap {}", q.overlap);
            for v in [q.even, q.odd] {
                assert_abs_diff_eq!(v[0].norm_sqr() + v[1].norm_sqr(), 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn spinor_phase_at_pi() {
        let s = SelfConsistentSolution {
            cos_theta0: 1.0,
            phi: 0.0,
            exists: true,
            branch: 0,
            theta_eff: PI,
            iterations: 0,
        };
        let q = quasi_energy(&s).unwrap();
        assert_abs_diff_eq!(q.epsilon.abs(), PI / 2.0, epsilon = 1e-12);
        let nope = SelfConsistentSolution { exists: false, ..s };
        assert!(quasi_energy(&nope).is_err());
    }

    #[test]
    fn symmetric_window_without_detuning() {
        let e = MeanFieldEnsemble::uniform(1.0, 10).unwrap();
        let thetas: Vec<f64> = (0..=40).map(|k| PI - 0.4 + 0.02 * k as f64).collect();
        let b = phase_boundary(&[0.4], &thetas, &e, &BoundaryOptions::default()).unwrap();
        let (m, p) = (b.theta_minus[0].unwrap(), b.theta_plus[0].unwrap());
        assert!((p - PI - (PI - m)).abs() < 2e-3);
        assert!((p - PI - 0.2).abs() < 0.02, "θ₊ − π = {}", p - PI);
    }

    #[test]
    fn empty_ensemble_rejected() {
        assert!(matches!(
            MeanFieldEnsemble::new(vec![], vec![], None),
            Err(Error::EmptyEnsemble)
        ));
        assert!(MeanFieldEnsemble::new(vec![1.0], vec![], None).is_err());
    }

    #[test]
    fn order_parameter_at_pi_is_one() {
        let e = MeanFieldEnsemble::uniform(0.7, 5).unwrap();
        for tau in [0.1, 1.0, 3.0] {
            let s = ensemble_order_parameter(PI, tau, &e).unwrap();
            assert_abs_diff_eq!(s.order_parameter, 1.0, epsilon = 1e-9);
        }
    }
}
