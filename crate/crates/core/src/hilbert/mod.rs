//! Dense Hilbert-space engine for spin-1/2 and spin-1 ensembles.
//!
//! Basis states of `N` sites with local dimension `d` are indexed by
//! `Σ_i s_i d^i` (site 0 is the fastest digit). Local orderings:
//!
//! * spin-1/2: `[m_s=0, m_s=-1]`, with `S^z = diag(1/2, -1/2)`;
//! * spin-1: `[m_s=+1, m_s=0, m_s=-1]`.
//!
//! Spin-1/2 operators are half the Pauli matrices.

mod evolve;
mod hamiltonian;
mod measure;
mod operators;
mod pulse;
mod state;

pub use evolve::{evolve, Propagator};
pub use hamiltonian::{build_hamiltonian, HamiltonianSpec, OperatorKind, OperatorMatrix, Variant};
pub use measure::{measure, populations, Observable};
pub use operators::{
    apply_local, expect_local, level_index, sigma, spin_half, SpinComponent, SpinLevel,
};
pub use pulse::{rotation_pulse, z3_pulse, Axis, Transition};
pub use state::QuantumState;

/// Largest Hilbert-space dimension the dense engine accepts.
pub const DIM_LIMIT: usize = 1 << 14;

/// `d^n`, or an error when it exceeds [`DIM_LIMIT`].
pub fn hilbert_dim(local_dim: usize, n_spins: usize) -> crate::Result<usize> {
    let mut dim: usize = 1;
    for _ in 0..n_spins {
        dim = dim.saturating_mul(local_dim);
        if dim > DIM_LIMIT {
            return Err(crate::Error::DimensionGuard {
                dim,
                limit: DIM_LIMIT,
            });
        }
    }
    Ok(dim)
}
