//! ℤ₂ and ℤ₃ drive protocols.
//!
//! ℤ₂: spin-lock along x for τ₁ under the full rotating-frame Hamiltonian,
//! then a θ-pulse about y, repeated `n_cycles` times with x-polarization
//! recorded after every complete cycle. ℤ₃: free dipolar evolution of the
//! spin-1 ensemble for τ₁, then θ-pulses on `0↔-1` and on `0↔+1`.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::disorder::DisorderRealization;
use crate::error::{Error, Result};
use crate::hilbert::{
    build_hamiltonian, measure, populations, rotation_pulse, z3_pulse, Axis, HamiltonianSpec,
    Observable, Propagator, QuantumState, SpinLevel, Transition,
};
use crate::rng::{stream, stream_rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProtocolVariant {
    Z2,
    Z3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PulseMode {
    /// Instantaneous rotation, with per-spin angle offsets from the disorder.
    Ideal,
    /// Evolve under the full Hamiltonian with Ω_y on for τ₂ = θ/Ω_y.
    #[default]
    Physical,
}

/// Hamiltonian used during the spin-lock interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EvolutionMode {
    #[default]
    Full,
    /// Polarization-conserving `Ω_x ΣS^x + Σ J S^x S^x`.
    Effective,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "kind", content = "angle")]
pub enum InitialState {
    #[default]
    PlusX,
    /// Bloch vector rotated from +x toward +z by the given angle (rad).
    Tilted(f64),
    /// Every spin in `m_s = 0`.
    Ms0,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub variant: ProtocolVariant,
    /// Rotation angle θ (rad).
    pub theta: f64,
    /// Interaction time τ₁ (μs).
    pub tau1: f64,
    /// Spin-lock Rabi frequency Ω_x (rad/μs).
    pub omega_x: f64,
    /// Pulse Rabi frequency Ω_y (rad/μs).
    pub omega_y: f64,
    pub n_cycles: usize,
    pub pulse_mode: PulseMode,
    pub evolution: EvolutionMode,
    pub initial_state: InitialState,
    /// Optional T₁^ρ (μs) for the multiplicative decay envelope.
    pub envelope_t1rho: Option<f64>,
    /// Optional relative std of a static per-spin pulse-angle error.
    pub angle_jitter: Option<f64>,
    pub seed: u64,
}

impl ProtocolConfig {
    pub fn z2(theta: f64, tau1: f64, omega_x: f64, omega_y: f64, n_cycles: usize) -> Self {
        Self {
            variant: ProtocolVariant::Z2,
            theta,
            tau1,
            omega_x,
            omega_y,
            n_cycles,
            pulse_mode: PulseMode::Physical,
            evolution: EvolutionMode::Full,
            initial_state: InitialState::PlusX,
            envelope_t1rho: None,
            angle_jitter: None,
            seed: 0,
        }
    }

    pub fn z3(theta: f64, tau1: f64, n_cycles: usize) -> Self {
        Self {
            variant: ProtocolVariant::Z3,
            theta,
            tau1,
            omega_x: 0.0,
            omega_y: 0.0,
            n_cycles,
            pulse_mode: PulseMode::Ideal,
            evolution: EvolutionMode::Full,
            initial_state: InitialState::Ms0,
            envelope_t1rho: None,
            angle_jitter: None,
            seed: 0,
        }
    }

    /// Pulse duration τ₂ = θ/Ω_y, zero when Ω_y is not set.
    pub fn tau2(&self) -> f64 {
        if self.omega_y > 0.0 {
            self.theta.abs() / self.omega_y
        } else {
            0.0
        }
    }

    /// Floquet period: τ₁ + τ₂ (ℤ₂) or τ₁ + 2τ₂ (ℤ₃).
    pub fn period(&self) -> f64 {
        match self.variant {
            ProtocolVariant::Z2 => self.tau1 + self.tau2(),
            ProtocolVariant::Z3 => self.tau1 + 2.0 * self.tau2(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.tau1 > 0.0) || !self.tau1.is_finite() {
            return bad(format!("tau1 must be positive, got {}", self.tau1));
        }
        if self.n_cycles == 0 {
            return bad("n_cycles must be at least 1".into());
        }
        if !self.theta.is_finite() {
            return bad("theta must be finite".into());
        }
        if let Some(t) = self.envelope_t1rho {
            if !(t > 0.0) {
                return bad(format!("T1rho must be positive, got {t}"));
            }
        }
        if let Some(j) = self.angle_jitter {
            if !(j >= 0.0) || !j.is_finite() {
                return bad(format!("angle jitter must be non-negative, got {j}"));
            }
        }
        match self.variant {
            ProtocolVariant::Z2 => {
                if self.pulse_mode == PulseMode::Physical && !(self.omega_y > 0.0) {
                    return bad("physical pulses need Ω_y > 0".into());
                }
                if matches!(self.initial_state, InitialState::Ms0) {
                    log::info!("Z2 run starting from m_s=0 (z-polarized) state");
                }
            }
            ProtocolVariant::Z3 => {
                if self.initial_state != InitialState::Ms0 {
                    return bad("Z3 protocol starts from the m_s=0 state".into());
                }
            }
        }
        Ok(())
    }

    /// Warnings about drive settings that are reported rather than enforced.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.variant == ProtocolVariant::Z2 {
            if self.omega_x > 0.0 && !is_commensurate(self.omega_x, self.tau1, 1e-6) {
                out.push(format!(
                    "Ω_x·τ₁ = {:.6} rad is not an integer multiple of 2π",
                    self.omega_x * self.tau1
                ));
            }
            let t2 = self.tau2();
            if t2 > 0.0 && t2 > 0.1 * self.tau1 {
                out.push(format!(
                    "τ₂ = {t2:.4} μs is not much shorter than τ₁ = {:.4} μs",
                    self.tau1
                ));
            }
        }
        out
    }
}

/// Whether `omega · tau` is within `tol` (relative) of a nonzero multiple of 2π.
pub fn is_commensurate(omega: f64, tau: f64, tol: f64) -> bool {
    let turns = omega * tau / (2.0 * PI);
    turns >= 0.5 && (turns - turns.round()).abs() <= tol * turns.max(1.0)
}

/// The τ₁ nearest `approx` for which Ω_x·τ₁ is a nonzero multiple of 2π.
pub fn commensurate_tau1(omega_x: f64, approx: f64) -> f64 {
    let period = 2.0 * PI / omega_x;
    (approx / period).round().max(1.0) * period
}

/// `θ(√(1 + (δ/Ω_y)²) − 1)`: extra rotation for a pulse detuned by `detuning`.
pub fn rotation_angle_offset(theta: f64, omega_y: f64, detuning: f64) -> f64 {
    let x = detuning / omega_y;
    let x2 = x * x;
    theta * x2 / ((1.0 + x2).sqrt() + 1.0)
}

/// Per-spin `θ_i − θ` with `θ_i = τ₂√(Ω_y² + (Δ_i + J̄_i)²)` and `τ₂ = θ/Ω_y`.
pub fn pulse_error_offsets(
    realization: &DisorderRealization,
    omega_y: f64,
    theta: f64,
) -> Vec<f64> {
    realization
        .onsite_fields
        .iter()
        .zip(&realization.jbar)
        .map(|(d, j)| rotation_angle_offset(theta, omega_y, d + j))
        .collect()
}

/// Spin-1 fields `(Δ⁺_i, Δ⁻_i)` derived from the two-level fields: a
/// magnetic-type shift moves `m_s=±1` in opposite directions.
pub fn z3_fields_from_realization(realization: &DisorderRealization) -> Vec<(f64, f64)> {
    realization.onsite_fields.iter().map(|&d| (d, -d)).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolarizationTrace {
    /// `P(nT)` for `n = 0..=n_cycles`.
    pub values: Vec<f64>,
    pub period_us: f64,
    pub config: ProtocolConfig,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl PolarizationTrace {
    pub fn times_us(&self) -> Vec<f64> {
        (0..self.values.len())
            .map(|n| n as f64 * self.period_us)
            .collect()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Z3Trace {
    pub polarization: PolarizationTrace,
    /// Per-cycle `[P₊, P₀, P₋]` site-averaged populations.
    pub populations: Vec<[f64; 3]>,
}

fn apply_envelope(values: &mut [f64], period: f64, t1rho: Option<f64>) {
    if let Some(t1) = t1rho {
        for (n, v) in values.iter_mut().enumerate() {
            *v *= (-(n as f64) * period / t1).exp();
        }
    }
}

fn jitter_offsets(config: &ProtocolConfig, n: usize) -> Vec<f64> {
    match config.angle_jitter {
        Some(sigma) if sigma > 0.0 => {
            let normal = Normal::new(0.0, sigma * config.theta.abs()).expect("validated jitter");
            let mut rng = stream_rng(config.seed, stream::JITTER);
            (0..n).map(|_| normal.sample(&mut rng)).collect()
        }
        _ => vec![0.0; n],
    }
}

fn initial_z2_state(config: &ProtocolConfig, n: usize) -> Result<QuantumState> {
    match config.initial_state {
        InitialState::PlusX => QuantumState::plus_x(n),
        InitialState::Tilted(a) => QuantumState::tilted(a, n),
        InitialState::Ms0 => QuantumState::basis(SpinLevel::Zero, 2, n),
    }
}

/// Run the ℤ₂ protocol on one disorder realization.
pub fn run_z2(
    config: &ProtocolConfig,
    realization: &DisorderRealization,
) -> Result<PolarizationTrace> {
    if config.variant != ProtocolVariant::Z2 {
        return Err(Error::InvalidParameter("run_z2 needs a Z2 config".into()));
    }
    config.validate()?;
    for w in config.warnings() {
        log::warn!("{w}");
    }
    let start = Instant::now();
    let n = realization.n_spins();
    let mut state = initial_z2_state(config, n)?;

    let lock_spec = match config.evolution {
        EvolutionMode::Full => HamiltonianSpec::full_z2(realization, config.omega_x, 0.0),
        EvolutionMode::Effective => HamiltonianSpec::eff_z2(realization, config.omega_x),
    };
    let lock = Propagator::new(&build_hamiltonian(&lock_spec)?)?;

    let jitter = jitter_offsets(config, n);
    let has_jitter = jitter.iter().any(|&j| j != 0.0);
    let (pulse, ideal_offsets) = match config.pulse_mode {
        PulseMode::Physical => {
            let h = build_hamiltonian(&HamiltonianSpec::full_z2(realization, 0.0, config.omega_y))?;
            (Some(Propagator::new(&h)?), None)
        }
        PulseMode::Ideal => {
            let mut off = if config.omega_y > 0.0 {
                pulse_error_offsets(realization, config.omega_y, config.theta)
            } else {
                vec![0.0; n]
            };
            off.iter_mut().zip(&jitter).for_each(|(o, j)| *o += j);
            (None, Some(off))
        }
    };
    let tau2 = config.tau2();

    let mut values = Vec::with_capacity(config.n_cycles + 1);
    values.push(measure(&state, Observable::XPolarization)?);
    for _ in 0..config.n_cycles {
        state = lock.evolve(&state, config.tau1)?;
        state = match (&pulse, &ideal_offsets) {
            (Some(p), _) => {
                let s = p.evolve(&state, tau2)?;
                if has_jitter {
                    rotation_pulse(&s, Axis::Y, 0.0, Some(&jitter))?
                } else {
                    s
                }
            }
            (None, Some(off)) => rotation_pulse(&state, Axis::Y, config.theta, Some(off))?,
            (None, None) => unreachable!("pulse mode selects one branch"),
        };
        values.push(measure(&state, Observable::XPolarization)?);
    }
    let period = config.period();
    apply_envelope(&mut values, period, config.envelope_t1rho);
    Ok(PolarizationTrace {
        values,
        period_us: period,
        config: config.clone(),
        elapsed: start.elapsed(),
    })
}

/// Run the ℤ₃ protocol on one disorder realization.
pub fn run_z3(config: &ProtocolConfig, realization: &DisorderRealization) -> Result<Z3Trace> {
    if config.variant != ProtocolVariant::Z3 {
        return Err(Error::InvalidParameter("run_z3 needs a Z3 config".into()));
    }
    config.validate()?;
    let start = Instant::now();
    let n = realization.n_spins();
    let fields = z3_fields_from_realization(realization);
    let h = build_hamiltonian(&HamiltonianSpec::bare_z3(realization, fields))?;
    let free = Propagator::new(&h)?;
    let jitter = jitter_offsets(config, 1)[0];
    let angle = config.theta + jitter;

    let mut state = QuantumState::basis(SpinLevel::Zero, 3, n)?;
    let record = |s: &QuantumState| -> Result<(f64, [f64; 3])> {
        let p = populations(s)?;
        Ok((
            measure(s, Observable::Z3Polarization)?,
            [
                p[&SpinLevel::Plus],
                p[&SpinLevel::Zero],
                p[&SpinLevel::Minus],
            ],
        ))
    };
    let mut values = Vec::with_capacity(config.n_cycles + 1);
    let mut pops = Vec::with_capacity(config.n_cycles + 1);
    let (p0, q0) = record(&state)?;
    values.push(p0);
    pops.push(q0);
    for _ in 0..config.n_cycles {
        state = free.evolve(&state, config.tau1)?;
        state = z3_pulse(&state, Transition::ZeroMinus, angle)?;
        state = z3_pulse(&state, Transition::ZeroPlus, angle)?;
        let (p, q) = record(&state)?;
        values.push(p);
        pops.push(q);
    }
    let period = config.period();
    apply_envelope(&mut values, period, config.envelope_t1rho);
    Ok(Z3Trace {
        polarization: PolarizationTrace {
            values,
            period_us: period,
            config: config.clone(),
            elapsed: start.elapsed(),
        },
        populations: pops,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn noninteracting_pi_pulses_alternate() {
        let r = DisorderRealization::noninteracting(3);
        let mut cfg = ProtocolConfig::z2(PI, 0.3, 2.0 * PI * 10.0, 0.0, 12);
        cfg.pulse_mode = PulseMode::Ideal;
        let tr = run_z2(&cfg, &r).unwrap();
        for (n, v) in tr.values.iter().enumerate() {
            let expected = if n % 2 == 0 { 1.0 } else { -1.0 };
            assert!((v - expected).abs() < 1e-12, "n={n} v={v}");
        }
    }

    #[test]
    fn z3_cycle_is_period_three() {
        let r = DisorderRealization::noninteracting(2);
        let tr = run_z3(&ProtocolConfig::z3(PI, 0.2, 9), &r).unwrap();
        let expected = [1.0, -1.0, 0.0];
        for (n, v) in tr.polarization.values.iter().enumerate() {
            assert!((v - expected[n % 3]).abs() < 1e-12);
        }
        // |0⟩ → |−1⟩ → |+1⟩ → |0⟩
        let p = &tr.populations;
        assert!((p[1][2] - 1.0).abs() < 1e-12);
        assert!((p[2][0] - 1.0).abs() < 1e-12);
        assert!((p[3][1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn offsets_formula() {
        let r = DisorderRealization::noninteracting(4);
        assert!(pulse_error_offsets(&r, 10.0, PI).iter().all(|&o| o == 0.0));
        let theta = 1.1 * PI;
        assert_relative_eq!(
            rotation_angle_offset(theta, 7.0, 7.0),
            theta * (2f64.sqrt() - 1.0),
            epsilon = 1e-14
        );
        // Sign of the detuning does not matter.
        assert_eq!(
            rotation_angle_offset(theta, 7.0, -3.0),
            rotation_angle_offset(theta, 7.0, 3.0)
        );
    }

    #[test]
    fn commensurate_tau() {
        let wx = 2.0 * PI * 54.6;
        let t = commensurate_tau1(wx, 0.79);
        assert!(is_commensurate(wx, t, 1e-9));
        assert!((t - 0.79).abs() <= 0.5 * 2.0 * PI / wx + 1e-12);
        assert!(!is_commensurate(wx, t * 1.01, 1e-6));
        let cfg = ProtocolConfig::z2(PI, t * 1.01, wx, 2.0 * PI * 41.7, 1);
        assert!(!cfg.warnings().is_empty());
    }

    #[test]
    fn config_validation() {
        let r = DisorderRealization::noninteracting(1);
        let mut cfg = ProtocolConfig::z2(PI, 0.0, 1.0, 1.0, 4);
        assert!(run_z2(&cfg, &r).is_err());
        cfg.tau1 = 1.0;
        cfg.n_cycles = 0;
        assert!(run_z2(&cfg, &r).is_err());
        cfg.n_cycles = 1;
        cfg.omega_y = 0.0;
        assert!(run_z2(&cfg, &r).is_err());
        let mut z3 = ProtocolConfig::z3(PI, 1.0, 2);
        z3.initial_state = InitialState::PlusX;
        assert!(run_z3(&z3, &r).is_err());
        assert!(run_z3(&ProtocolConfig::z2(PI, 1.0, 1.0, 1.0, 1), &r).is_err());
    }

    #[test]
    fn envelope_bounds_trace() {
        let r = DisorderRealization::noninteracting(2);
        let mut cfg = ProtocolConfig::z2(PI, 0.5, 0.0, 0.0, 40);
        cfg.pulse_mode = PulseMode::Ideal;
        cfg.envelope_t1rho = Some(5.0);
        let tr = run_z2(&cfg, &r).unwrap();
        for (n, v) in tr.values.iter().enumerate() {
            assert!(v.abs() <= (-(n as f64) * 0.5 / 5.0).exp() + 1e-9);
        }
    }
}
