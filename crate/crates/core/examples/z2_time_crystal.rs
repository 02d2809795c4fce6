//! Subharmonic rigidity: a slightly detuned pulse (θ = 1.034π) gives a beat
//! at θ/2π for weak interactions and a locked ν = 1/2 response for strong ones.
//!
//! cargo run --release --example z2_time_crystal

use std::f64::consts::PI;

use dtc::analysis::{crystalline_fraction, noise_floor, spectrum, TargetNu};
use dtc::disorder::{DisorderRealization, EnsembleParams};
use dtc::floquet::{commensurate_tau1, run_z2, ProtocolConfig};
use dtc::units::mhz;

fn main() -> dtc::Result<()> {
    let (omega_x, omega_y) = (mhz(54.6), mhz(41.7));
    let tau1 = commensurate_tau1(omega_x, 0.79);
    let theta = 1.034 * PI;
    let base = DisorderRealization::sample(&EnsembleParams::new(
        8,
        8.0,
        3.0,
        mhz(0.105) * 512.0,
        mhz(4.0),
        3,
    ))?;
    let median_jbar = {
        let mut a: Vec<f64> = base.jbar.iter().map(|j| j.abs()).collect();
        a.sort_by(f64::total_cmp);
        0.5 * (a[3] + a[4])
    };

    for target in [0.06, 1.0] {
        let r = base.scaled_couplings(target / (median_jbar * tau1));
        let cfg = ProtocolConfig::z2(theta, tau1, omega_x, omega_y, 100);
        let trace = run_z2(&cfg, &r)?;
        let spec = spectrum(&trace.values, (50, 100))?;
        let fc = crystalline_fraction(&spec, TargetNu::Half)?
            .with_noise(noise_floor(&spec, TargetNu::Half)?);
        println!(
            "median J̄τ₁ = {target} rad  (T = {:.3} μs, {:.2?})",
            trace.period_us, trace.elapsed
        );
        println!(
            "  P(nT), n = 0..12: {:?}",
            trace.values[..12]
                .iter()
                .map(|v| (v * 100.0).round() / 100.0)
                .collect::<Vec<_>>()
        );
        println!(
            "  spectral argmax ν = {:.2}  (θ/2π = {:.3})",
            spec.nu_grid[spec.argmax()],
            theta / (2.0 * PI)
        );
        println!("  f = {:.3} ± {:.3}", fc.f, fc.delta_f);
    }
    Ok(())
}
