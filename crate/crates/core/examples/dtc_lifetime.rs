//! DTC lifetime from the decay of the short-time ν = 1/2 power, with a
//! phenomenological T₁^ρ envelope of 60 μs.
//!
//! cargo run --release --example dtc_lifetime

use std::f64::consts::PI;

use dtc::analysis::{fit_double_exponential, stft_peak, TargetNu, DEFAULT_STFT_WINDOW};
use dtc::disorder::{DisorderRealization, EnsembleParams};
use dtc::floquet::{commensurate_tau1, run_z2, ProtocolConfig};
use dtc::units::mhz;

fn main() -> dtc::Result<()> {
    let tau1 = commensurate_tau1(mhz(54.6), 0.79);
    let n_cycles = 400;
    let mut mean = vec![0.0; n_cycles + 1];
    let mut period = 0.0;
    let seeds = 6;
    for seed in 0..seeds {
        let r = DisorderRealization::sample(&EnsembleParams::new(
            8,
            8.0,
            3.0,
            mhz(0.105) * 512.0,
            mhz(4.0),
            seed,
        ))?;
        let mut a: Vec<f64> = r.jbar.iter().map(|j| j.abs()).collect();
        a.sort_by(f64::total_cmp);
        let r = r.scaled_couplings(2.0 / (0.5 * (a[3] + a[4]) * tau1));
        let mut cfg = ProtocolConfig::z2(1.034 * PI, tau1, mhz(54.6), mhz(41.7), n_cycles);
        cfg.envelope_t1rho = Some(60.0);
        let tr = run_z2(&cfg, &r)?;
        period = tr.period_us;
        mean.iter_mut()
            .zip(&tr.values)
            .for_each(|(m, v)| *m += v / seeds as f64);
    }
    let stft = stft_peak(&mean, DEFAULT_STFT_WINDOW, TargetNu::Half)?;
    let xs: Vec<f64> = stft.iter().map(|p| p.0 as f64).collect();
    let ys: Vec<f64> = stft.iter().map(|p| p.1).collect();
    let fit = fit_double_exponential(&xs, &ys)?;
    println!("STFT windows: {}", stft.len());
    println!("fast: A₁ = {:.3}, n₁ = {:.1} cycles", fit.a1, fit.n1);
    println!("slow: A₂ = {:.3}, n₂ = {:.1} cycles", fit.a2, fit.n2);
    println!(
        "DTC lifetime: {:.1} μs (envelope 60 μs)",
        fit.dtc_lifetime(period)
    );
    Ok(())
}
