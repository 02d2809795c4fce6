//! Mean-field DTC window: single-spin self-consistency and quasi-energy, the
//! clean single-J̄ boundary against |θ − π| = J̄τ₁/2, and the disorder-averaged
//! boundary with finite pulses.
//!
//! cargo run --release --example meanfield_boundary

use std::f64::consts::PI;

use dtc::disorder::EnsembleParams;
use dtc::meanfield::{
    linearized_half_width, phase_boundary, quasi_energy, solve_self_consistent, BoundaryOptions,
    MeanFieldEnsemble,
};
use dtc::units::mhz;

fn main() -> dtc::Result<()> {
    let s = solve_self_consistent(1.05 * PI, 0.4, 1.0, 0.0, None)?;
    let q = quasi_energy(&s)?;
    println!(
        "θ = 1.05π, J̄τ₁ = 0.4: cosθ₀ = {:.4}, φ = {:.4}, ε = {:.4}, overlap {:.3}",
        s.cos_theta0, s.phi, q.epsilon, q.overlap
    );

    let thetas: Vec<f64> = (0..=400)
        .map(|k| 0.7 * PI + 0.6 * PI * k as f64 / 400.0)
        .collect();
    let taus = [0.1, 0.2, 0.4];
    let clean = phase_boundary(
        &taus,
        &thetas,
        &MeanFieldEnsemble::uniform(1.0, 1)?,
        &BoundaryOptions::default(),
    )?;
    println!("single J̄ = 1 rad/μs:");
    for (i, tau) in taus.iter().enumerate() {
        let h = linearized_half_width(1.0, *tau);
        println!(
            "  τ₁ = {tau}: π − θ₋ = {:.4}, θ₊ − π = {:.4}, J̄τ₁/2 = {h:.4}",
            clean.theta_minus[i].map_or(f64::NAN, |t| PI - t),
            clean.theta_plus[i].map_or(f64::NAN, |t| t - PI)
        );
    }

    let params = EnsembleParams::new(1000, 8.0, 3.0, mhz(0.105) * 512.0, mhz(4.0), 1);
    let ens = MeanFieldEnsemble::from_disorder(&params, 2000, Some(mhz(41.7)))?;
    let taus = [0.1, 0.2, 0.4, 0.8, 1.6];
    let thetas: Vec<f64> = (0..=200)
        .map(|k| 0.5 * PI + PI * k as f64 / 200.0)
        .collect();
    let pb = phase_boundary(&taus, &thetas, &ens, &BoundaryOptions::default())?;
    println!("disordered ensemble, Ω_y = 2π × 41.7 MHz:");
    for (i, tau) in taus.iter().enumerate() {
        let f = |v: Option<f64>| v.map_or("none".to_string(), |t| format!("{:.3}π", t / PI));
        println!(
            "  τ₁ = {tau} μs: θ₋ = {}, θ₊ = {}",
            f(pb.theta_minus[i]),
            f(pb.theta_plus[i])
        );
    }
    Ok(())
}
