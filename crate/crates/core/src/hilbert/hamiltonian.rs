use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::hilbert_dim;
use super::operators::{add_one_body, add_two_body, sigma, spin_half, SpinComponent, SpinLevel};
use crate::disorder::DisorderRealization;
use crate::error::{Error, Result};

/// Which Hamiltonian to assemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Rotating-frame spin-1/2 Hamiltonian with drive, disorder and
    /// `XX + YY - ZZ` dipolar couplings.
    FullZ2,
    /// Spin-locked effective Hamiltonian `Ω_x ΣS^x + Σ J S^x S^x`.
    EffZ2,
    /// Spin-1 disorder plus secular dipolar interaction.
    BareZ3,
}

impl Variant {
    pub fn local_dim(self) -> usize {
        match self {
            Variant::FullZ2 | Variant::EffZ2 => 2,
            Variant::BareZ3 => 3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct HamiltonianSpec<'a> {
    pub variant: Variant,
    /// Ω_x (rad/μs).
    pub omega_x: f64,
    /// Ω_y (rad/μs).
    pub omega_y: f64,
    pub realization: &'a DisorderRealization,
    /// Per-spin `(Δ⁺, Δ⁻)` (rad/μs), required for [`Variant::BareZ3`].
    pub z3_fields: Option<Vec<(f64, f64)>>,
}

impl<'a> HamiltonianSpec<'a> {
    pub fn full_z2(realization: &'a DisorderRealization, omega_x: f64, omega_y: f64) -> Self {
        Self {
            variant: Variant::FullZ2,
            omega_x,
            omega_y,
            realization,
            z3_fields: None,
        }
    }

    pub fn eff_z2(realization: &'a DisorderRealization, omega_x: f64) -> Self {
        Self {
            variant: Variant::EffZ2,
            omega_x,
            omega_y: 0.0,
            realization,
            z3_fields: None,
        }
    }

    pub fn bare_z3(realization: &'a DisorderRealization, z3_fields: Vec<(f64, f64)>) -> Self {
        Self {
            variant: Variant::BareZ3,
            omega_x: 0.0,
            omega_y: 0.0,
            realization,
            z3_fields: Some(z3_fields),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    Hermitian,
    Unitary,
}

/// A dense operator over the full many-body space.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    pub matrix: DMatrix<Complex64>,
    pub kind: OperatorKind,
    pub local_dim: usize,
    pub n_spins: usize,
}

impl OperatorMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `max |M - M†|`.
    pub fn hermiticity_deviation(&self) -> f64 {
        let m = &self.matrix;
        let mut worst: f64 = 0.0;
        for i in 0..m.nrows() {
            for j in i..m.ncols() {
                worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// `max |U†U - 1|`.
    pub fn unitarity_deviation(&self) -> f64 {
        let p = self.matrix.adjoint() * &self.matrix;
        let id = DMatrix::<Complex64>::identity(p.nrows(), p.ncols());
        (p - id).iter().fold(0.0, |w, c| w.max(c.norm()))
    }

    pub fn is_real(&self) -> bool {
        self.matrix.iter().all(|c| c.im == 0.0)
    }
}

/// Assemble the dense Hamiltonian described by `spec`.
///
/// Pair sums run over unordered pairs `i < j`, so `J̄_i` is exactly the
/// mean-field coefficient felt by spin `i`.
pub fn build_hamiltonian(spec: &HamiltonianSpec<'_>) -> Result<OperatorMatrix> {
    let real = spec.realization;
    let n = real.n_spins();
    let d = spec.variant.local_dim();
    let dim = hilbert_dim(d, n)?;
    let mut h = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));

    match spec.variant {
        Variant::FullZ2 | Variant::EffZ2 => {
            if spec.z3_fields.is_some() {
                return Err(Error::LocalDimMismatch {
                    expected: 3,
                    got: 2,
                });
            }
            let sx = spin_half(SpinComponent::X);
            let sy = spin_half(SpinComponent::Y);
            let sz = spin_half(SpinComponent::Z);
            let full = spec.variant == Variant::FullZ2;
            if !full && spec.omega_y != 0.0 {
                return Err(Error::InvalidParameter("eff_z2 has no Ω_y term".into()));
            }
            for i in 0..n {
                add_one_body(&mut h, d, i, &sx, spec.omega_x);
                if full {
                    add_one_body(&mut h, d, i, &sy, spec.omega_y);
                    add_one_body(&mut h, d, i, &sz, real.onsite_fields[i]);
                }
            }
            for (i, j, c) in real.pairs() {
                add_two_body(&mut h, d, i, j, &sx, &sx, c);
                if full {
                    add_two_body(&mut h, d, i, j, &sy, &sy, c);
                    add_two_body(&mut h, d, i, j, &sz, &sz, -c);
                }
            }
        }
        Variant::BareZ3 => {
            if spec.omega_x != 0.0 || spec.omega_y != 0.0 {
                return Err(Error::InvalidParameter(
                    "bare_z3 free evolution has no drive".into(),
                ));
            }
            let fields = spec
                .z3_fields
                .as_ref()
                .ok_or_else(|| Error::InvalidParameter("bare_z3 needs (Δ⁺, Δ⁻) fields".into()))?;
            if fields.len() != n {
                return Err(Error::InvalidParameter(format!(
                    "{} spin-1 field pairs for {n} spins",
                    fields.len()
                )));
            }
            use SpinLevel::{Minus, Plus, Zero};
            let pp = sigma(Plus, Plus);
            let mm = sigma(Minus, Minus);
            for (i, &(dp, dm)) in fields.iter().enumerate() {
                add_one_body(&mut h, d, i, &pp, dp);
                add_one_body(&mut h, d, i, &mm, dm);
            }
            let (p0, zp) = (sigma(Plus, Zero), sigma(Zero, Plus));
            let (m0, zm) = (sigma(Minus, Zero), sigma(Zero, Minus));
            let sz1 = &pp - &mm;
            for (i, j, c) in real.pairs() {
                // -(σ⁺⁰σ⁰⁺ + σ⁻⁰σ⁰⁻ + h.c.)/2
                add_two_body(&mut h, d, i, j, &p0, &zp, -0.5 * c);
                add_two_body(&mut h, d, i, j, &zp, &p0, -0.5 * c);
                add_two_body(&mut h, d, i, j, &m0, &zm, -0.5 * c);
                add_two_body(&mut h, d, i, j, &zm, &m0, -0.5 * c);
                add_two_body(&mut h, d, i, j, &sz1, &sz1, c);
            }
        }
    }

    Ok(OperatorMatrix {
        matrix: h,
        kind: OperatorKind::Hermitian,
        local_dim: d,
        n_spins: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn eigenvalues(op: &OperatorMatrix) -> Vec<f64> {
        let mut e: Vec<f64> = op
            .matrix
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .collect();
        e.sort_by(f64::total_cmp);
        e
    }

    #[test]
    fn single_spin_full_z2_eigenvalues() {
        let (omega, delta) = (3.0, 1.2);
        let r = DisorderRealization::from_couplings(vec![vec![0.0]], vec![delta]).unwrap();
        let h = build_hamiltonian(&HamiltonianSpec::full_z2(&r, omega, 0.0)).unwrap();
        let e = eigenvalues(&h);
        let expected = (omega * omega + delta * delta).sqrt() / 2.0;
        assert_relative_eq!(e[0], -expected, epsilon = 1e-12);
        assert_relative_eq!(e[1], expected, epsilon = 1e-12);
    }

    #[test]
    fn single_spin_bare_z3_is_diagonal() {
        let r = DisorderRealization::noninteracting(1);
        let h = build_hamiltonian(&HamiltonianSpec::bare_z3(&r, vec![(0.7, -1.9)])).unwrap();
        let expected = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::new(0.7, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(-1.9, 0.0),
        ]));
        assert!((h.matrix - expected).norm() < 1e-15);
    }

    #[test]
    fn variant_mismatches_rejected() {
        let r = DisorderRealization::noninteracting(2);
        let mut spec = HamiltonianSpec::full_z2(&r, 1.0, 0.0);
        spec.z3_fields = Some(vec![(0.0, 0.0); 2]);
        assert!(matches!(
            build_hamiltonian(&spec),
            Err(Error::LocalDimMismatch { .. })
        ));
        let mut spec = HamiltonianSpec::bare_z3(&r, vec![(0.0, 0.0); 2]);
        spec.omega_x = 1.0;
        assert!(build_hamiltonian(&spec).is_err());
        assert!(build_hamiltonian(&HamiltonianSpec::bare_z3(&r, vec![(0.0, 0.0)])).is_err());
        let big = DisorderRealization::noninteracting(15);
        assert!(matches!(
            build_hamiltonian(&HamiltonianSpec::eff_z2(&big, 1.0)),
            Err(Error::DimensionGuard { .. })
        ));
    }
}
