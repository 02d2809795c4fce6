use std::f64::consts::PI;

use dtc::analysis::{spectrum, TargetNu};
use dtc::disorder::{sample_onsite_fields, DisorderRealization, EnsembleParams};
use dtc::floquet::{
    commensurate_tau1, pulse_error_offsets, rotation_angle_offset, run_z2, run_z3, EvolutionMode,
    ProtocolConfig, PulseMode,
};
use dtc::units::mhz;

fn median_abs_jbar(r: &DisorderRealization) -> f64 {
    let mut a: Vec<f64> = r.jbar.iter().map(|j| j.abs()).collect();
    a.sort_by(f64::total_cmp);
    let n = a.len();
    if n % 2 == 1 {
        a[n / 2]
    } else {
        0.5 * (a[n / 2 - 1] + a[n / 2])
    }
}

#[test]
fn pulse_offsets_match_monte_carlo_of_the_formula() {
    let (w, wy, theta) = (mhz(4.0), mhz(41.7), PI);
    let s2 = (w / wy).powi(2);
    let fields = sample_onsite_fields(200_000, w, 77);
    let frac: Vec<f64> = fields
        .iter()
        .map(|&d| rotation_angle_offset(theta, wy, d) / theta)
        .collect();
    let mean = frac.iter().sum::<f64>() / frac.len() as f64;
    let rms = (frac.iter().map(|x| x * x).sum::<f64>() / frac.len() as f64).sqrt();
    // E[x²]/2 and √(E[x⁴])/2 for Gaussian x = Δ/Ω_y, to leading order.
    assert!(
        (mean - 0.5 * s2).abs() / (0.5 * s2) < 0.02,
        "mean {mean} vs {}",
        0.5 * s2
    );
    assert!(
        (rms - 3f64.sqrt() / 2.0 * s2).abs() / s2 < 0.03,
        "rms {rms}"
    );

    let r = DisorderRealization::noninteracting(3)
        .with_onsite_fields(vec![0.0, wy, -2.0 * wy])
        .unwrap();
    let off = pulse_error_offsets(&r, wy, theta);
    assert_eq!(off[0], 0.0);
    assert!((off[1] - theta * (2f64.sqrt() - 1.0)).abs() < 1e-12);
    assert!((off[2] - theta * (5f64.sqrt() - 1.0)).abs() < 1e-12);
}

/// One-cycle deviation between the full Hamiltonian with finite pulses and the
/// effective Hamiltonian with ideal pulses, driven only by on-site fields.
fn one_cycle_deviation(w_scale: f64) -> f64 {
    let base = [0.3, 0.5, 0.8, 0.2];
    let r = DisorderRealization::noninteracting(4)
        .with_onsite_fields(base.iter().map(|x| x * w_scale).collect())
        .unwrap();
    let mut full = ProtocolConfig::z2(1.034 * PI, 0.79, mhz(54.6), mhz(41.7), 1);
    full.pulse_mode = PulseMode::Physical;
    let mut eff = ProtocolConfig::z2(1.034 * PI, 0.79, mhz(54.6), 0.0, 1);
    eff.pulse_mode = PulseMode::Ideal;
    eff.evolution = EvolutionMode::Effective;
    (run_z2(&full, &r).unwrap().values[1] - run_z2(&eff, &r).unwrap().values[1]).abs()
}

/// For θ ≠ π the field tilts the spin out of the lock axis at first order,
/// and the pulse maps that tilt onto x: halving W halves the deviation.
/// Fields share a sign so the linear terms of different spins add up.
#[test]
fn field_induced_deviation_is_first_order() {
    let d1 = one_cycle_deviation(mhz(0.5));
    let d2 = one_cycle_deviation(mhz(0.25));
    let d3 = one_cycle_deviation(mhz(0.125));
    println!("deviation at W = 0.5, 0.25, 0.125 MHz: {d1:.3e} {d2:.3e} {d3:.3e}");
    assert!(d3 > 1e-8);
    for ratio in [d1 / d2, d2 / d3] {
        assert!((ratio - 2.0).abs() / 2.0 < 0.2, "ratio {ratio}");
    }
}

#[test]
fn detuned_free_spin_beats_at_theta_over_two_pi() {
    let r = DisorderRealization::noninteracting(1);
    let mut cfg = ProtocolConfig::z2(1.034 * PI, 0.5, mhz(54.6), 0.0, 100);
    cfg.pulse_mode = PulseMode::Ideal;
    let tr = run_z2(&cfg, &r).unwrap();
    let s = spectrum(&tr.values, (50, 100)).unwrap();
    let mut idx: Vec<usize> = (0..s.len()).collect();
    idx.sort_by(|&a, &b| s.power[b].total_cmp(&s.power[a]));
    let mut top = [idx[0], idx[1]];
    top.sort();
    assert_eq!(top, [s.nearest_bin(1.0 - 0.517), s.nearest_bin(0.517)]);
}

#[test]
fn envelope_bounds_the_trace() {
    let r = DisorderRealization::sample(&EnsembleParams::new(
        5,
        8.0,
        3.0,
        mhz(0.105) * 512.0,
        mhz(4.0),
        4,
    ))
    .unwrap();
    let mut cfg = ProtocolConfig::z2(
        1.034 * PI,
        commensurate_tau1(mhz(54.6), 0.79),
        mhz(54.6),
        mhz(41.7),
        60,
    );
    let plain = run_z2(&cfg, &r).unwrap();
    assert!(plain.values.iter().all(|v| v.abs() <= 1.0 + 1e-9));
    cfg.envelope_t1rho = Some(10.0);
    let damped = run_z2(&cfg, &r).unwrap();
    for (n, v) in damped.values.iter().enumerate() {
        assert!(v.abs() <= (-(n as f64) * damped.period_us / 10.0).exp() + 1e-9);
    }
    assert_eq!(run_z2(&cfg, &r).unwrap().values, damped.values);
}

/// Disorder-averaged spectrum, as measured on an ensemble.
#[test]
fn interacting_z3_locks_to_one_third() {
    let tau1 = 0.5;
    let mut power = vec![0.0; 96];
    for seed in 0..6 {
        let r = DisorderRealization::sample(&EnsembleParams::new(
            6,
            8.0,
            3.0,
            mhz(0.105) * 512.0,
            mhz(4.0),
            seed,
        ))
        .unwrap();
        let r = r.scaled_couplings(2.0 / (median_abs_jbar(&r) * tau1));
        let tr = run_z3(&ProtocolConfig::z3(1.17 * PI, tau1, 99), &r).unwrap();
        let s = spectrum(&tr.polarization.values, (3, 99)).unwrap();
        power.iter_mut().zip(&s.power).for_each(|(a, p)| *a += p);
    }
    let third = TargetNu::Third.bins(96).unwrap();
    let best = (1..96)
        .max_by(|&a, &b| power[a].total_cmp(&power[b]))
        .unwrap();
    assert!(
        third.contains(&best),
        "dominant nonzero bin {best}, expected one of {third:?}"
    );
}
