//! Sample disorder realizations at the reference density and summarize the
//! nearest-neighbor distances and the per-spin coupling sums J̄_i.
//!
//! cargo run --release --example disorder_statistics

use std::f64::consts::PI;

use dtc::disorder::{jbar_distribution, DisorderRealization, EnsembleParams, POISSON_NN_FACTOR};

fn main() -> dtc::Result<()> {
    let j0 = 2.0 * PI * 0.105 * 8f64.powi(3);
    let w = 2.0 * PI * 4.0;
    let realizations: Vec<DisorderRealization> = (0..5)
        .map(|seed| DisorderRealization::sample(&EnsembleParams::new(1000, 8.0, 3.0, j0, w, seed)))
        .collect::<dtc::Result<_>>()?;

    let r = &realizations[0];
    let nn: Vec<f64> = r
        .positions
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            r.positions
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &q)| dtc::disorder::distance(p, q))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let mean_nn = nn.iter().sum::<f64>() / nn.len() as f64;
    println!(
        "box side for r0 = 8 nm: {:.2} nm (Poisson factor {POISSON_NN_FACTOR})",
        1000f64.cbrt() * 8.0 / POISSON_NN_FACTOR
    );
    println!("mean nearest-neighbor distance: {mean_nn:.3} nm");
    println!(
        "closest pair: {:.3} nm",
        r.min_pair_distance().unwrap_or(f64::NAN)
    );
    println!(
        "mean |J_ij| / r0^3: 2π × {:.1} kHz",
        r.mean_coupling_scale(8.0) / (2.0 * PI) * 1e3
    );

    let d = jbar_distribution(&realizations)?;
    let khz = |x: f64| x / (2.0 * PI) * 1e3;
    println!("J̄ over {} spins (2π × kHz):", d.values.len());
    println!(
        "  min {:.1}  q25 {:.1}  median {:.1}  q75 {:.1}  max {:.1}",
        khz(d.min),
        khz(d.q25),
        khz(d.median),
        khz(d.q75),
        khz(d.max)
    );
    println!(
        "  median |J̄| {:.1}, mean |J̄| {:.1}",
        khz(d.median_abs),
        khz(d.mean_abs)
    );
    let sd =
        (r.onsite_fields.iter().map(|x| x * x).sum::<f64>() / r.onsite_fields.len() as f64).sqrt();
    println!("on-site field rms: 2π × {:.2} MHz", sd / (2.0 * PI));
    Ok(())
}
