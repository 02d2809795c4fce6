use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::operators::{apply_local, level_index, SpinLevel};
use super::state::QuantumState;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    X,
    Y,
}

/// Spin-1 transition driven by a microwave pulse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transition {
    /// `|m_s=0⟩ ↔ |m_s=-1⟩`
    ZeroMinus,
    /// `|m_s=0⟩ ↔ |m_s=+1⟩`
    ZeroPlus,
}

/// `exp(-i α σ_axis / 2)`.
fn spin_half_rotation(axis: Axis, angle: f64) -> DMatrix<Complex64> {
    let c = Complex64::new((angle / 2.0).cos(), 0.0);
    let s = (angle / 2.0).sin();
    match axis {
        Axis::X => DMatrix::from_row_slice(
            2,
            2,
            &[c, Complex64::new(0.0, -s), Complex64::new(0.0, -s), c],
        ),
        Axis::Y => DMatrix::from_row_slice(
            2,
            2,
            &[c, Complex64::new(-s, 0.0), Complex64::new(s, 0.0), c],
        ),
    }
}

/// `⊗_i exp(-i (angle + offset_i) S_i^axis)` on a spin-1/2 state.
pub fn rotation_pulse(
    state: &QuantumState,
    axis: Axis,
    angle: f64,
    per_spin_offsets: Option<&[f64]>,
) -> Result<QuantumState> {
    if state.local_dim() != 2 {
        return Err(Error::LocalDimMismatch {
            expected: 2,
            got: state.local_dim(),
        });
    }
    let n = state.n_spins();
    if let Some(off) = per_spin_offsets {
        if off.len() != n {
            return Err(Error::InvalidParameter(format!(
                "{} offsets for {n} spins",
                off.len()
            )));
        }
    }
    let mut out = state.clone();
    let uniform = spin_half_rotation(axis, angle);
    for site in 0..n {
        match per_spin_offsets {
            Some(off) if off[site] != 0.0 => apply_local(
                out.amplitudes_mut(),
                2,
                site,
                &spin_half_rotation(axis, angle + off[site]),
            ),
            _ => apply_local(out.amplitudes_mut(), 2, site, &uniform),
        }
    }
    Ok(out)
}

/// Local 3×3 unitary `exp(-i (σ_{a,0} + σ_{0,a}) θ/2)` for the transition.
pub fn z3_pulse_matrix(transition: Transition, angle: f64) -> DMatrix<Complex64> {
    let other = match transition {
        Transition::ZeroMinus => SpinLevel::Minus,
        Transition::ZeroPlus => SpinLevel::Plus,
    };
    let a = level_index(SpinLevel::Zero, 3).expect("spin-1");
    let b = level_index(other, 3).expect("spin-1");
    let mut m = DMatrix::<Complex64>::identity(3, 3);
    let c = Complex64::new((angle / 2.0).cos(), 0.0);
    let s = Complex64::new(0.0, -(angle / 2.0).sin());
    m[(a, a)] = c;
    m[(b, b)] = c;
    m[(a, b)] = s;
    m[(b, a)] = s;
    m
}

/// Apply the two-level rotation on `transition` to every spin-1 site.
pub fn z3_pulse(state: &QuantumState, transition: Transition, angle: f64) -> Result<QuantumState> {
    if state.local_dim() != 3 {
        return Err(Error::LocalDimMismatch {
            expected: 3,
            got: state.local_dim(),
        });
    }
    let op = z3_pulse_matrix(transition, angle);
    let mut out = state.clone();
    for site in 0..state.n_spins() {
        apply_local(out.amplitudes_mut(), 3, site, &op);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{measure, populations, Observable};
    use std::f64::consts::PI;

    #[test]
    fn pi_about_y_flips_x_polarization() {
        let s = QuantumState::plus_x(3).unwrap();
        let r = rotation_pulse(&s, Axis::Y, PI, None).unwrap();
        assert!((measure(&r, Observable::XPolarization).unwrap() + 1.0).abs() < 1e-14);
    }

    #[test]
    fn two_pi_is_minus_one_per_spin() {
        for n in 1..=4 {
            let s = QuantumState::tilted(0.4, n).unwrap();
            let r = rotation_pulse(&s, Axis::X, 2.0 * PI, None).unwrap();
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let diff = (r.amplitudes() - s.amplitudes() * Complex64::new(sign, 0.0)).norm();
            assert!(diff < 1e-14);
        }
    }

    #[test]
    fn single_spin_off_pi_rotation() {
        // R_y(θ) maps +x to (cos θ, 0, -sin θ): ⟨S^x⟩ = cos(θ)/2.
        let theta = 1.034 * PI;
        let s = QuantumState::plus_x(1).unwrap();
        let r = rotation_pulse(&s, Axis::Y, theta, None).unwrap();
        let sx = measure(&r, Observable::XPolarization).unwrap() / 2.0;
        assert!((sx - theta.cos() / 2.0).abs() < 1e-14);
        assert!((sx + 0.5 * (0.034 * PI).cos()).abs() < 1e-14);
        assert!((sx + 0.4972).abs() < 1e-4);
    }

    #[test]
    fn offsets_apply_per_spin() {
        let s = QuantumState::plus_x(2).unwrap();
        let r = rotation_pulse(&s, Axis::Y, PI, Some(&[0.0, PI])).unwrap();
        // Spin 1 gets a 2π rotation: polarization (−1 + 1)/2.
        assert!(measure(&r, Observable::XPolarization).unwrap().abs() < 1e-14);
        assert!(rotation_pulse(&s, Axis::Y, PI, Some(&[0.0])).is_err());
    }

    #[test]
    fn z3_pi_pulses() {
        let s = QuantumState::basis(SpinLevel::Zero, 3, 1).unwrap();
        let r = z3_pulse(&s, Transition::ZeroMinus, PI).unwrap();
        let m = level_index(SpinLevel::Minus, 3).unwrap();
        assert!((r.amplitudes()[m] - Complex64::new(0.0, -1.0)).norm() < 1e-15);

        let s = QuantumState::basis(SpinLevel::Minus, 3, 1).unwrap();
        let r = z3_pulse(&s, Transition::ZeroPlus, PI).unwrap();
        assert_eq!(r, s);

        assert!(z3_pulse(&QuantumState::plus_x(1).unwrap(), Transition::ZeroPlus, PI).is_err());
    }

    #[test]
    fn z3_general_angle_matches_embedded_rotation() {
        let theta = 1.17 * PI;
        let s = QuantumState::basis(SpinLevel::Zero, 3, 2).unwrap();
        let r = z3_pulse(&s, Transition::ZeroMinus, theta).unwrap();
        let p = populations(&r).unwrap();
        assert!((p[&SpinLevel::Zero] - (theta / 2.0).cos().powi(2)).abs() < 1e-14);
        assert!((p[&SpinLevel::Minus] - (theta / 2.0).sin().powi(2)).abs() < 1e-14);
        assert!(p[&SpinLevel::Plus].abs() < 1e-15);
    }
}
