use std::collections::BTreeMap;

use super::operators::{expect_local, level_index, spin_half, SpinComponent, SpinLevel};
use super::state::QuantumState;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observable {
    /// `(2/N) Σ_i ⟨S_i^x⟩` (spin-1/2 only).
    XPolarization,
    /// `(1/N) Σ_i ⟨σ_00 - σ_{-1,-1}⟩` (spin-1 only).
    Z3Polarization,
    /// `(1/N) Σ_i ⟨σ_aa⟩`.
    Population(SpinLevel),
}

/// Probability that a site is in local index `a`, averaged over sites.
fn mean_population(state: &QuantumState, a: usize) -> f64 {
    let d = state.local_dim();
    let n = state.n_spins();
    let amps = state.amplitudes();
    let mut total = 0.0;
    for (idx, amp) in amps.iter().enumerate() {
        let p = amp.norm_sqr();
        if p == 0.0 {
            continue;
        }
        let mut rest = idx;
        let mut count = 0usize;
        for _ in 0..n {
            if rest % d == a {
                count += 1;
            }
            rest /= d;
        }
        total += p * count as f64;
    }
    total / n as f64
}

pub fn measure(state: &QuantumState, observable: Observable) -> Result<f64> {
    match observable {
        Observable::XPolarization => {
            if state.local_dim() != 2 {
                return Err(Error::IncompatibleObservable("x_polarization"));
            }
            let sx = spin_half(SpinComponent::X);
            let n = state.n_spins();
            let sum: f64 = (0..n)
                .map(|i| expect_local(state.amplitudes(), 2, i, &sx).re)
                .sum();
            Ok(2.0 * sum / n as f64)
        }
        Observable::Z3Polarization => {
            if state.local_dim() != 3 {
                return Err(Error::IncompatibleObservable("z3_polarization"));
            }
            let zero = mean_population(state, level_index(SpinLevel::Zero, 3)?);
            let minus = mean_population(state, level_index(SpinLevel::Minus, 3)?);
            Ok(zero - minus)
        }
        Observable::Population(level) => {
            let a = level_index(level, state.local_dim())
                .map_err(|_| Error::IncompatibleObservable("population"))?;
            Ok(mean_population(state, a))
        }
    }
}

/// Per-level site-averaged populations for a spin-1 state.
pub fn populations(state: &QuantumState) -> Result<BTreeMap<SpinLevel, f64>> {
    if state.local_dim() != 3 {
        return Err(Error::IncompatibleObservable("spin-1 populations"));
    }
    SpinLevel::ALL
        .iter()
        .map(|&l| Ok((l, measure(state, Observable::Population(l))?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};

    #[test]
    fn eigenstate_values() {
        let s = QuantumState::plus_x(4).unwrap();
        assert!((measure(&s, Observable::XPolarization).unwrap() - 1.0).abs() < 1e-14);
        let s = QuantumState::basis(SpinLevel::Minus, 3, 3).unwrap();
        assert!((measure(&s, Observable::Z3Polarization).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn populations_complete() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for d in [2usize, 3] {
            let dim = d.pow(3);
            let v = DVector::from_fn(dim, |_, _| {
                Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
            });
            let s = QuantumState::normalized(v, d, 3).unwrap();
            let levels: &[SpinLevel] = if d == 2 {
                &[SpinLevel::Zero, SpinLevel::Minus]
            } else {
                &SpinLevel::ALL
            };
            let total: f64 = levels
                .iter()
                .map(|&l| measure(&s, Observable::Population(l)).unwrap())
                .sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn incompatible_observables() {
        let half = QuantumState::plus_x(2).unwrap();
        let one = QuantumState::basis(SpinLevel::Zero, 3, 2).unwrap();
        assert!(measure(&half, Observable::Z3Polarization).is_err());
        assert!(measure(&one, Observable::XPolarization).is_err());
        assert!(measure(&half, Observable::Population(SpinLevel::Plus)).is_err());
    }
}
