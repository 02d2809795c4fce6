use dtc::disorder::DisorderRealization;
use dtc::floquet::z3_fields_from_realization;
use dtc::hilbert::{
    build_hamiltonian, evolve, measure, populations, HamiltonianSpec, Observable, OperatorKind,
    Propagator, QuantumState,
};
use nalgebra::DVector;
use num_complex::Complex64;
use proptest::prelude::*;

/// Random realization on `n` spins with couplings and fields in [-5, 5] rad/μs.
fn realization(n: usize, vals: &[f64]) -> DisorderRealization {
    let mut k = 0;
    let mut next = || {
        let v = vals[k % vals.len()];
        k += 1;
        v
    };
    let mut c = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v = next();
            c[i][j] = v;
            c[j][i] = v;
        }
    }
    let fields = (0..n).map(|_| next()).collect();
    DisorderRealization::from_couplings(c, fields).unwrap()
}

fn random_state(local_dim: usize, n: usize, vals: &[f64]) -> QuantumState {
    let dim = local_dim.pow(n as u32);
    let amps = DVector::from_fn(dim, |i, _| {
        Complex64::new(
            vals[(2 * i) % vals.len()] + 0.01,
            vals[(2 * i + 1) % vals.len()],
        )
    });
    QuantumState::normalized(amps, local_dim, n).unwrap()
}

fn coeffs() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0f64..5.0, 16..40)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn generators_hermitian_and_propagators_unitary(vals in coeffs(), wx in -10.0f64..10.0, wy in -10.0f64..10.0, t in 0.0f64..3.0) {
        let r = realization(3, &vals);
        for spec in [
            HamiltonianSpec::full_z2(&r, wx, wy),
            HamiltonianSpec::eff_z2(&r, wx),
            HamiltonianSpec::bare_z3(&r, z3_fields_from_realization(&r)),
        ] {
            let h = build_hamiltonian(&spec).unwrap();
            prop_assert_eq!(h.kind, OperatorKind::Hermitian);
            prop_assert!(h.hermiticity_deviation() < 1e-12);
            let u = Propagator::new(&h).unwrap().unitary(t);
            prop_assert!(u.unitarity_deviation() < 1e-10);
        }
    }

    #[test]
    fn evolution_is_a_semigroup(vals in coeffs(), t1 in 0.0f64..2.0, t2 in 0.0f64..2.0) {
        let r = realization(3, &vals);
        let h = build_hamiltonian(&HamiltonianSpec::full_z2(&r, 2.0, 1.5)).unwrap();
        let s = random_state(2, 3, &vals);
        let a = evolve(&s, &h, t1 + t2).unwrap();
        let b = evolve(&evolve(&s, &h, t1).unwrap(), &h, t2).unwrap();
        prop_assert!((a.amplitudes() - b.amplitudes()).norm() < 1e-9);
        prop_assert!((a.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn ising_limit_conserves_x_polarization(vals in coeffs(), t in 0.0f64..5.0) {
        let r = realization(4, &vals);
        let h = build_hamiltonian(&HamiltonianSpec::eff_z2(&r, 0.0)).unwrap();
        let s = random_state(2, 4, &vals);
        let before = measure(&s, Observable::XPolarization).unwrap();
        let after = measure(&evolve(&s, &h, t).unwrap(), Observable::XPolarization).unwrap();
        prop_assert!((before - after).abs() < 1e-10);
    }

    #[test]
    fn spin_one_dynamics_conserve_level_populations(vals in coeffs(), t in 0.0f64..5.0) {
        let r = realization(3, &vals);
        let h = build_hamiltonian(&HamiltonianSpec::bare_z3(&r, z3_fields_from_realization(&r))).unwrap();
        let s = random_state(3, 3, &vals);
        let p0 = populations(&s).unwrap();
        let p1 = populations(&evolve(&s, &h, t).unwrap()).unwrap();
        for (l, v) in p0 {
            prop_assert!((v - p1[&l]).abs() < 1e-10);
        }
    }
}

/// Two spins under `J' S^x S^x`: in the x basis the diagonal is `±J'/4`.
#[test]
fn two_spin_ising_matrix_elements() {
    let jp = 1.7;
    let r = DisorderRealization::from_couplings(vec![vec![0.0, jp], vec![jp, 0.0]], vec![0.0, 0.0])
        .unwrap();
    let h = build_hamiltonian(&HamiltonianSpec::eff_z2(&r, 0.0)).unwrap();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let plus = [Complex64::new(s, 0.0), Complex64::new(s, 0.0)];
    let minus = [Complex64::new(s, 0.0), Complex64::new(-s, 0.0)];
    for (a, b, expected) in [
        (plus, plus, 0.25),
        (plus, minus, -0.25),
        (minus, plus, -0.25),
        (minus, minus, 0.25),
    ] {
        // Site 0 is the fastest digit.
        let v = DVector::from_fn(4, |i, _| a[i % 2] * b[i / 2]);
        let e = (v.adjoint() * &h.matrix * &v)[(0, 0)];
        assert!((e.re - expected * jp).abs() < 1e-14 && e.im.abs() < 1e-14);
    }
}
