use nalgebra::DVector;
use num_complex::Complex64;

use super::{hilbert_dim, level_index, SpinLevel};
use crate::error::{Error, Result};

/// Normalized pure state over `d^N` basis states.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    amplitudes: DVector<Complex64>,
    local_dim: usize,
    n_spins: usize,
}

pub const NORM_TOLERANCE: f64 = 1e-9;

impl QuantumState {
    pub fn new(amplitudes: DVector<Complex64>, local_dim: usize, n_spins: usize) -> Result<Self> {
        let dim = hilbert_dim(local_dim, n_spins)?;
        if amplitudes.len() != dim {
            return Err(Error::InvalidParameter(format!(
                "amplitude length {} != {local_dim}^{n_spins}",
                amplitudes.len()
            )));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidParameter(format!(
                "state norm {norm} is not 1"
            )));
        }
        Ok(Self {
            amplitudes,
            local_dim,
            n_spins,
        })
    }

    /// Normalize arbitrary amplitudes.
    pub fn normalized(
        amplitudes: DVector<Complex64>,
        local_dim: usize,
        n_spins: usize,
    ) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidParameter(
                "cannot normalize a zero vector".into(),
            ));
        }
        Self::new(amplitudes / Complex64::new(norm, 0.0), local_dim, n_spins)
    }

    /// Unchecked constructor for results of unitary maps.
    pub(crate) fn from_parts(
        amplitudes: DVector<Complex64>,
        local_dim: usize,
        n_spins: usize,
    ) -> Self {
        Self {
            amplitudes,
            local_dim,
            n_spins,
        }
    }

    /// `|local⟩^{⊗N}` for a single-site state (normalized on input).
    pub fn product(local: &[Complex64], n_spins: usize) -> Result<Self> {
        let d = local.len();
        let dim = hilbert_dim(d, n_spins)?;
        let norm: f64 = local.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidParameter("zero local state".into()));
        }
        let local: Vec<Complex64> = local.iter().map(|c| c / norm).collect();
        let amps = DVector::from_fn(dim, |mut idx, _| {
            let mut amp = Complex64::new(1.0, 0.0);
            for _ in 0..n_spins {
                amp *= local[idx % d];
                idx /= d;
            }
            amp
        });
        Ok(Self::from_parts(amps, d, n_spins))
    }

    /// Every spin in `level`.
    pub fn basis(level: SpinLevel, local_dim: usize, n_spins: usize) -> Result<Self> {
        let mut local = vec![Complex64::new(0.0, 0.0); local_dim];
        local[level_index(level, local_dim)?] = Complex64::new(1.0, 0.0);
        Self::product(&local, n_spins)
    }

    /// `|+⟩^{⊗N}` with `|+⟩ = (|m_s=0⟩ + |m_s=-1⟩)/√2`, the +x eigenstate.
    pub fn plus_x(n_spins: usize) -> Result<Self> {
        Self::tilted(0.0, n_spins)
    }

    /// Product of spin-1/2 states whose Bloch vector is rotated from +x
    /// toward +z by `angle`.
    pub fn tilted(angle: f64, n_spins: usize) -> Result<Self> {
        // Bloch vector (cos a, 0, sin a): polar angle from z is π/2 - a, azimuth 0.
        let polar = std::f64::consts::FRAC_PI_2 - angle;
        let local = [
            Complex64::new((polar / 2.0).cos(), 0.0),
            Complex64::new((polar / 2.0).sin(), 0.0),
        ];
        Self::product(&local, n_spins)
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut DVector<Complex64> {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> DVector<Complex64> {
        self.amplitudes
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// `|⟨self|other⟩|`, insensitive to global phase.
    pub fn overlap_abs(&self, other: &Self) -> f64 {
        self.amplitudes.dotc(&other.amplitudes).norm()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_state_is_normalized_and_indexed() {
        let s = QuantumState::basis(SpinLevel::Minus, 3, 2).unwrap();
        assert_eq!(s.dim(), 9);
        // Both sites in local index 2: 2 + 2·3.
        assert_eq!(s.amplitudes()[8], Complex64::new(1.0, 0.0));
        assert!((QuantumState::plus_x(5).unwrap().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_norm_and_length() {
        let v = DVector::from_element(4, Complex64::new(1.0, 0.0));
        assert!(QuantumState::new(v.clone(), 2, 2).is_err());
        assert!(QuantumState::normalized(v, 2, 3).is_err());
        assert!(QuantumState::basis(SpinLevel::Plus, 2, 1).is_err());
    }

    #[test]
    fn dimension_guard() {
        assert!(QuantumState::plus_x(15).is_err());
    }
}
