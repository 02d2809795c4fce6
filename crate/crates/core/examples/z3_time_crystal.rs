//! ℤ₃ protocol on spin-1: cyclic 0 → −1 → +1 population transfer and the
//! ν = 1/3 response, with and without interactions.
//!
//! cargo run --release --example z3_time_crystal

use std::f64::consts::PI;

use dtc::analysis::{crystalline_fraction, spectrum, TargetNu};
use dtc::disorder::{DisorderRealization, EnsembleParams};
use dtc::floquet::{run_z3, ProtocolConfig};
use dtc::units::mhz;

fn main() -> dtc::Result<()> {
    let interacting = DisorderRealization::sample(&EnsembleParams::new(
        5,
        8.0,
        3.0,
        mhz(0.105) * 512.0,
        mhz(4.0),
        9,
    ))?
    .scaled_couplings(10.0);
    for (label, r) in [
        ("free", DisorderRealization::noninteracting(5)),
        ("interacting", interacting),
    ] {
        for theta in [PI, 0.95 * PI] {
            let tr = run_z3(&ProtocolConfig::z3(theta, 0.5, 99), &r)?;
            let fc = crystalline_fraction(
                &spectrum(&tr.polarization.values, (3, 99))?,
                TargetNu::Third,
            )?;
            let p = tr.populations[1];
            println!("{label:>11}, θ = {:.2}π: f(1/3) = {:.3}; after one cycle P₊ {:.2}, P₀ {:.2}, P₋ {:.2}", theta / PI, fc.f, p[0], p[1], p[2]);
        }
    }
    Ok(())
}
