use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::hamiltonian::{OperatorKind, OperatorMatrix};
use super::state::QuantumState;
use crate::error::{Error, Result};

/// Relative Hermiticity tolerance, scaled by the largest matrix entry.
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone)]
enum Eigenbasis {
    Real(DMatrix<f64>),
    Complex(DMatrix<Complex64>),
}

/// Cached spectral decomposition `H = V diag(E) V†`.
///
/// Real-symmetric Hamiltonians (no Ω_y term) take the faster real path.
#[derive(Debug, Clone)]
pub struct Propagator {
    energies: Vec<f64>,
    basis: Eigenbasis,
    local_dim: usize,
    n_spins: usize,
}

impl Propagator {
    pub fn new(h: &OperatorMatrix) -> Result<Self> {
        if h.kind != OperatorKind::Hermitian {
            return Err(Error::InvalidParameter(
                "propagator needs a Hermitian generator".into(),
            ));
        }
        let scale = h.matrix.iter().fold(1.0_f64, |m, c| m.max(c.norm()));
        let deviation = h.hermiticity_deviation();
        if deviation > HERMITIAN_TOLERANCE * scale {
            return Err(Error::NotHermitian { deviation });
        }
        let (energies, basis) = if h.is_real() {
            let m = h.matrix.map(|c| c.re);
            let eig = m.symmetric_eigen();
            (
                eig.eigenvalues.iter().copied().collect::<Vec<_>>(),
                Eigenbasis::Real(eig.eigenvectors),
            )
        } else {
            let eig = h.matrix.clone().symmetric_eigen();
            (
                eig.eigenvalues.iter().copied().collect::<Vec<_>>(),
                Eigenbasis::Complex(eig.eigenvectors),
            )
        };
        if energies.iter().any(|e| !e.is_finite()) {
            return Err(Error::Diagonalization);
        }
        Ok(Self {
            energies,
            basis,
            local_dim: h.local_dim,
            n_spins: h.n_spins,
        })
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    fn phases(&self, t: f64) -> Vec<Complex64> {
        self.energies
            .iter()
            .map(|&e| Complex64::from_polar(1.0, -e * t))
            .collect()
    }

    /// `exp(-iHt) |ψ⟩`.
    pub fn evolve(&self, state: &QuantumState, t: f64) -> Result<QuantumState> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "evolution time {t} must be >= 0"
            )));
        }
        if state.local_dim() != self.local_dim || state.n_spins() != self.n_spins {
            return Err(Error::LocalDimMismatch {
                expected: self.local_dim,
                got: state.local_dim(),
            });
        }
        if t == 0.0 {
            return Ok(state.clone());
        }
        let phases = self.phases(t);
        let psi = state.amplitudes();
        let out = match &self.basis {
            Eigenbasis::Real(v) => {
                let re = psi.map(|c| c.re);
                let im = psi.map(|c| c.im);
                let c_re = v.tr_mul(&re);
                let c_im = v.tr_mul(&im);
                let mut r = DVector::<f64>::zeros(c_re.len());
                let mut i = DVector::<f64>::zeros(c_re.len());
                for k in 0..phases.len() {
                    let c = Complex64::new(c_re[k], c_im[k]) * phases[k];
                    r[k] = c.re;
                    i[k] = c.im;
                }
                let out_re = v * r;
                let out_im = v * i;
                DVector::from_fn(out_re.len(), |k, _| Complex64::new(out_re[k], out_im[k]))
            }
            Eigenbasis::Complex(v) => {
                let mut c = v.ad_mul(psi);
                for (ck, p) in c.iter_mut().zip(&phases) {
                    *ck *= p;
                }
                v * c
            }
        };
        Ok(QuantumState::from_parts(out, self.local_dim, self.n_spins))
    }

    /// The dense unitary `exp(-iHt)`.
    pub fn unitary(&self, t: f64) -> OperatorMatrix {
        let phases = self.phases(t);
        let matrix = match &self.basis {
            Eigenbasis::Real(v) => {
                let cos = DMatrix::from_fn(v.nrows(), v.ncols(), |i, k| v[(i, k)] * phases[k].re);
                let sin = DMatrix::from_fn(v.nrows(), v.ncols(), |i, k| v[(i, k)] * phases[k].im);
                let re = &cos * v.transpose();
                let im = &sin * v.transpose();
                DMatrix::from_fn(re.nrows(), re.ncols(), |i, j| {
                    Complex64::new(re[(i, j)], im[(i, j)])
                })
            }
            Eigenbasis::Complex(v) => {
                let scaled = DMatrix::from_fn(v.nrows(), v.ncols(), |i, k| v[(i, k)] * phases[k]);
                scaled * v.adjoint()
            }
        };
        OperatorMatrix {
            matrix,
            kind: OperatorKind::Unitary,
            local_dim: self.local_dim,
            n_spins: self.n_spins,
        }
    }
}

/// One-shot `exp(-iHt)|ψ⟩`; build a [`Propagator`] to reuse the decomposition.
pub fn evolve(state: &QuantumState, h: &OperatorMatrix, t: f64) -> Result<QuantumState> {
    Propagator::new(h)?.evolve(state, t)
}
