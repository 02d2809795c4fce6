//! Crystalline fraction across θ at fixed τ₁, averaged over disorder, and the
//! super-Gaussian fit that locates the phase boundary θ±.
//!
//! cargo run --release --example phase_diagram_fit

use std::f64::consts::PI;

use dtc::analysis::{crystalline_fraction, fit_super_gaussian, noise_floor, spectrum, TargetNu};
use dtc::disorder::{DisorderRealization, EnsembleParams};
use dtc::floquet::{commensurate_tau1, run_z2, ProtocolConfig};
use dtc::units::mhz;

fn main() -> dtc::Result<()> {
    let tau1 = commensurate_tau1(mhz(54.6), 0.79);
    let seeds = 6u64;
    let realizations: Vec<DisorderRealization> = (0..seeds)
        .map(|s| {
            DisorderRealization::sample(&EnsembleParams::new(
                6,
                8.0,
                3.0,
                mhz(0.105) * 512.0,
                mhz(4.0),
                s,
            ))
            .map(|r| r.scaled_couplings(20.0))
        })
        .collect::<dtc::Result<_>>()?;
    let mut points = Vec::new();
    for k in 0..=16 {
        let theta = (0.6 + 0.05 * k as f64) * PI;
        let (mut f, mut df2) = (0.0, 0.0);
        for r in &realizations {
            let tr = run_z2(
                &ProtocolConfig::z2(theta, tau1, mhz(54.6), mhz(41.7), 100),
                r,
            )?;
            let spec = spectrum(&tr.values, (50, 100))?;
            let fc = crystalline_fraction(&spec, TargetNu::Half)?
                .with_noise(noise_floor(&spec, TargetNu::Half)?);
            f += fc.f / seeds as f64;
            df2 += fc.delta_f * fc.delta_f;
        }
        let df = df2.sqrt() / seeds as f64;
        println!("θ = {:.2}π  f = {f:.3} ± {df:.3}", theta / PI);
        points.push((theta, f, df));
    }
    match fit_super_gaussian(&points, 0.1) {
        Ok(b) => {
            println!(
                "θ₀ = {:.3}π, σ₋ = {:.3}, σ₊ = {:.3}, p = {:.2}",
                b.model.theta0 / PI,
                b.model.sigma_minus,
                b.model.sigma_plus,
                b.model.p
            );
            println!(
                "θ₋ = {:.3}π ± {:.3}",
                b.theta_minus / PI,
                b.theta_minus_error / PI
            );
            println!(
                "θ₊ = {:.3}π ± {:.3}",
                b.theta_plus / PI,
                b.theta_plus_error / PI
            );
        }
        Err(e) => println!("no boundary: {e}"),
    }
    Ok(())
}
