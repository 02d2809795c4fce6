use std::f64::consts::PI;

use dtc::meanfield::{
    existence_condition, phase_boundary, quasi_energy, solve_self_consistent, BoundaryOptions,
    MeanFieldEnsemble,
};

#[test]
fn window_width_grows_with_interaction() {
    let thetas: Vec<f64> = (0..=600)
        .map(|k| 0.4 * PI + 1.2 * PI * k as f64 / 600.0)
        .collect();
    let taus: Vec<f64> = (1..=12).map(|k| 0.1 * k as f64).collect();
    let pb = phase_boundary(
        &taus,
        &thetas,
        &MeanFieldEnsemble::uniform(1.0, 1).unwrap(),
        &BoundaryOptions::default(),
    )
    .unwrap();
    let widths: Vec<f64> = (0..taus.len())
        .map(|i| pb.theta_plus[i].unwrap() - pb.theta_minus[i].unwrap())
        .collect();
    assert!(widths.windows(2).all(|w| w[1] >= w[0]), "{widths:?}");
    // Exact existence window, dense grid, no solver involved.
    let exact = |jt: f64| {
        thetas
            .iter()
            .filter(|&&t| existence_condition(t, jt, 1.0))
            .count()
    };
    assert!(taus.windows(2).all(|w| exact(w[1]) >= exact(w[0])));
}

#[test]
fn generic_orbits_are_two_period_eigenstates() {
    for (theta, jt) in [
        (1.05 * PI, 0.5),
        (0.93 * PI, 0.8),
        (1.2 * PI, 2.0),
        (0.7 * PI, 3.5),
    ] {
        let s = solve_self_consistent(theta, jt, 1.0, 0.0, None).unwrap();
        assert!(s.exists, "θ={theta} jt={jt}");
        let q = quasi_energy(&s).unwrap();
        assert!(q.overlap > 0.999, "overlap {}", q.overlap);
    }
}

#[test]
fn existence_matches_printed_condition() {
    assert!(!existence_condition(PI + 0.3, 0.4, 1.0));
    assert!(!existence_condition(1.1 * PI, 1.0, 0.0));
    let s = solve_self_consistent(PI + 0.3, 0.4, 1.0, 0.0, None).unwrap();
    assert!(!s.exists);
}

/// A realistic ensemble spends many samples far from threshold; the averaged
/// order parameter still peaks at θ = π and vanishes far from it.
#[test]
fn ensemble_map_peaks_at_pi() {
    let ens = MeanFieldEnsemble::new(vec![0.5, 1.0, 2.0, -1.0], vec![0.0; 4], None).unwrap();
    let thetas: Vec<f64> = (0..=40).map(|k| 0.5 * PI + PI * k as f64 / 40.0).collect();
    let pb = phase_boundary(&[1.0], &thetas, &ens, &BoundaryOptions::default()).unwrap();
    let row = &pb.order_parameter_map[0];
    assert!((row[20] - 1.0).abs() < 1e-9);
    assert_eq!(row[0], 0.0);
    assert_eq!(row[40], 0.0);
}
