use serde::{Deserialize, Serialize};

use super::spectrum::{Spectrum, TargetNu};
use crate::error::{Error, Result};

/// Share of spectral power at the subharmonic response frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrystallineFraction {
    pub f: f64,
    pub delta_f: f64,
    pub sigma_n: f64,
    /// Number of spectral bins `N`.
    pub n_bins: usize,
    pub target_nu: TargetNu,
    /// `|S(ν_target)|²`, summed over the conjugate pair for ν = 1/3.
    pub peak_power: f64,
    pub total_power: f64,
}

/// `f = |S(ν)|² / Σ|S|²`. The noise floor and `δf` start at zero.
pub fn crystalline_fraction(spec: &Spectrum, target: TargetNu) -> Result<CrystallineFraction> {
    let bins = target.bins(spec.len())?;
    let total = spec.total_power();
    if !(total > 0.0) {
        return Err(Error::ZeroPower);
    }
    let peak: f64 = bins.iter().map(|&k| spec.power[k]).sum();
    Ok(CrystallineFraction {
        f: (peak / total).clamp(0.0, 1.0),
        delta_f: 0.0,
        sigma_n: 0.0,
        n_bins: spec.len(),
        target_nu: target,
        peak_power: peak,
        total_power: total,
    })
}

/// `δf = f √((σ/A)² + (Nσ/B)² − 2Nσ²/(AB))` with `A` the peak power and
/// `B` the total power.
pub fn fraction_error(fc: &CrystallineFraction, sigma_n: f64) -> f64 {
    if sigma_n == 0.0 || fc.f == 0.0 {
        return 0.0;
    }
    let a = fc.peak_power;
    let b = fc.total_power;
    let n = fc.n_bins as f64;
    let radicand =
        (sigma_n / a).powi(2) + (n * sigma_n / b).powi(2) - 2.0 * n * sigma_n * sigma_n / (a * b);
    // The radicand is a perfect square and may round just below zero.
    fc.f * radicand.max(0.0).sqrt()
}

impl CrystallineFraction {
    /// Attach a noise floor and the matching `δf`.
    pub fn with_noise(mut self, sigma_n: f64) -> Self {
        self.sigma_n = sigma_n;
        self.delta_f = fraction_error(&self, sigma_n);
        self
    }
}

/// Mean plus one (population) standard deviation of the bin powers,
/// excluding the target bins and ν = 0.
pub fn noise_floor(spec: &Spectrum, exclude: TargetNu) -> Result<f64> {
    let skip = exclude.bins(spec.len())?;
    let rest: Vec<f64> = spec
        .power
        .iter()
        .enumerate()
        .filter(|(k, _)| *k != 0 && !skip.contains(k))
        .map(|(_, &p)| p)
        .collect();
    if rest.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} background bins, need 3",
            rest.len()
        )));
    }
    let n = rest.len() as f64;
    let mean = rest.iter().sum::<f64>() / n;
    let var = rest.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / n;
    Ok(mean + var.sqrt())
}
