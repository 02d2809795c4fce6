use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpinComponent {
    X,
    Y,
    Z,
}

/// An `m_s` level of the NV spin.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum SpinLevel {
    Plus,
    Zero,
    Minus,
}

impl SpinLevel {
    pub const ALL: [SpinLevel; 3] = [SpinLevel::Plus, SpinLevel::Zero, SpinLevel::Minus];

    pub fn label(self) -> &'static str {
        match self {
            SpinLevel::Plus => "+1",
            SpinLevel::Zero => "0",
            SpinLevel::Minus => "-1",
        }
    }
}

/// Local basis index of `level` for local dimension 2 or 3.
pub fn level_index(level: SpinLevel, local_dim: usize) -> Result<usize> {
    match (local_dim, level) {
        (2, SpinLevel::Zero) => Ok(0),
        (2, SpinLevel::Minus) => Ok(1),
        (2, SpinLevel::Plus) => Err(Error::IncompatibleObservable(
            "m_s=+1 level in a two-level system",
        )),
        (3, SpinLevel::Plus) => Ok(0),
        (3, SpinLevel::Zero) => Ok(1),
        (3, SpinLevel::Minus) => Ok(2),
        (d, _) => Err(Error::LocalDimMismatch {
            expected: 3,
            got: d,
        }),
    }
}

/// Spin-1/2 operator `S^μ = σ^μ / 2` in the `[m_s=0, m_s=-1]` basis.
pub fn spin_half(component: SpinComponent) -> DMatrix<Complex64> {
    let h = 0.5;
    match component {
        SpinComponent::X => DMatrix::from_row_slice(
            2,
            2,
            &[ZERO, Complex64::new(h, 0.0), Complex64::new(h, 0.0), ZERO],
        ),
        SpinComponent::Y => DMatrix::from_row_slice(
            2,
            2,
            &[ZERO, Complex64::new(0.0, -h), Complex64::new(0.0, h), ZERO],
        ),
        SpinComponent::Z => DMatrix::from_row_slice(
            2,
            2,
            &[Complex64::new(h, 0.0), ZERO, ZERO, Complex64::new(-h, 0.0)],
        ),
    }
}

/// Spin-1 transition operator `σ_{a,b} = |a⟩⟨b|`.
pub fn sigma(a: SpinLevel, b: SpinLevel) -> DMatrix<Complex64> {
    let mut m = DMatrix::from_element(3, 3, ZERO);
    let i = level_index(a, 3).expect("spin-1 level");
    let j = level_index(b, 3).expect("spin-1 level");
    m[(i, j)] = Complex64::new(1.0, 0.0);
    m
}

/// Calls `f(indices)` for every group of `d` basis indices that differ only in
/// the digit of `site`, with `indices[a]` holding local value `a`.
pub(crate) fn for_each_site_group(
    dim: usize,
    local_dim: usize,
    site: usize,
    mut f: impl FnMut(&[usize]),
) {
    let stride = local_dim.pow(site as u32);
    let block = stride * local_dim;
    let mut idx = vec![0usize; local_dim];
    for hi in (0..dim).step_by(block) {
        for lo in 0..stride {
            let base = hi + lo;
            for (a, slot) in idx.iter_mut().enumerate() {
                *slot = base + a * stride;
            }
            f(&idx);
        }
    }
}

/// Apply a `d × d` operator on one site in place.
pub fn apply_local(
    amplitudes: &mut DVector<Complex64>,
    local_dim: usize,
    site: usize,
    op: &DMatrix<Complex64>,
) {
    let dim = amplitudes.len();
    let mut buf = vec![ZERO; local_dim];
    for_each_site_group(dim, local_dim, site, |idx| {
        for (a, slot) in buf.iter_mut().enumerate() {
            *slot = (0..local_dim)
                .map(|b| op[(a, b)] * amplitudes[idx[b]])
                .sum();
        }
        for (a, &i) in idx.iter().enumerate() {
            amplitudes[i] = buf[a];
        }
    });
}

/// `⟨ψ| A_site |ψ⟩` for a local operator.
pub fn expect_local(
    amplitudes: &DVector<Complex64>,
    local_dim: usize,
    site: usize,
    op: &DMatrix<Complex64>,
) -> Complex64 {
    let mut acc = ZERO;
    for_each_site_group(amplitudes.len(), local_dim, site, |idx| {
        for a in 0..local_dim {
            for b in 0..local_dim {
                let m = op[(a, b)];
                if m != ZERO {
                    acc += amplitudes[idx[a]].conj() * m * amplitudes[idx[b]];
                }
            }
        }
    });
    acc
}

/// Add `coeff · A_site` to a dense many-body matrix.
pub(crate) fn add_one_body(
    h: &mut DMatrix<Complex64>,
    local_dim: usize,
    site: usize,
    op: &DMatrix<Complex64>,
    coeff: f64,
) {
    if coeff == 0.0 {
        return;
    }
    let dim = h.nrows();
    for_each_site_group(dim, local_dim, site, |idx| {
        for a in 0..local_dim {
            for b in 0..local_dim {
                let m = op[(a, b)];
                if m != ZERO {
                    h[(idx[a], idx[b])] += m * coeff;
                }
            }
        }
    });
}

/// Add `coeff · A_i B_j` (i ≠ j) to a dense many-body matrix.
pub(crate) fn add_two_body(
    h: &mut DMatrix<Complex64>,
    local_dim: usize,
    i: usize,
    j: usize,
    a_op: &DMatrix<Complex64>,
    b_op: &DMatrix<Complex64>,
    coeff: f64,
) {
    if coeff == 0.0 {
        return;
    }
    debug_assert_ne!(i, j);
    let dim = h.nrows();
    let si = local_dim.pow(i as u32);
    let sj = local_dim.pow(j as u32);
    for col in 0..dim {
        let ci = (col / si) % local_dim;
        let cj = (col / sj) % local_dim;
        let rest = col - ci * si - cj * sj;
        for ri in 0..local_dim {
            let ma = a_op[(ri, ci)];
            if ma == ZERO {
                continue;
            }
            for rj in 0..local_dim {
                let mb = b_op[(rj, cj)];
                if mb == ZERO {
                    continue;
                }
                let row = rest + ri * si + rj * sj;
                h[(row, col)] += ma * mb * coeff;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spin_half_commutator() {
        let sx = spin_half(SpinComponent::X);
        let sy = spin_half(SpinComponent::Y);
        let sz = spin_half(SpinComponent::Z);
        let comm = &sx * &sy - &sy * &sx;
        let expected = sz * Complex64::new(0.0, 1.0);
        assert!((comm - expected).norm() < 1e-15);
    }

    #[test]
    fn two_body_matches_kronecker_product() {
        let sx = spin_half(SpinComponent::X);
        let sy = spin_half(SpinComponent::Y);
        let mut h = DMatrix::from_element(8, 8, ZERO);
        add_two_body(&mut h, 2, 0, 2, &sx, &sy, 1.0);
        // Site 0 is the fastest digit, so the full operator is 1 ⊗ ... reversed:
        // sy (site 2) ⊗ 1 (site 1) ⊗ sx (site 0).
        let id = DMatrix::<Complex64>::identity(2, 2);
        let full = sy.kronecker(&id).kronecker(&sx);
        assert!((h - full).norm() < 1e-15);
    }
}
