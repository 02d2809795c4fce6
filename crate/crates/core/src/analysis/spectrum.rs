use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Subharmonic response frequency, in cycles per drive period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub enum TargetNu {
    Half,
    Third,
}

impl TargetNu {
    pub fn value(self) -> f64 {
        match self {
            TargetNu::Half => 0.5,
            TargetNu::Third => 1.0 / 3.0,
        }
    }

    /// Bins carrying the target response for an `n`-point spectrum.
    ///
    /// ν = 1/3 uses the conjugate pair `N/3`, `2N/3`.
    pub fn bins(self, n: usize) -> Result<Vec<usize>> {
        match self {
            TargetNu::Half if n.is_multiple_of(2) => Ok(vec![n / 2]),
            TargetNu::Third if n.is_multiple_of(3) => Ok(vec![n / 3, 2 * n / 3]),
            _ => Err(Error::OffGrid {
                nu: self.value(),
                n,
            }),
        }
    }
}

impl TryFrom<f64> for TargetNu {
    type Error = Error;

    fn try_from(v: f64) -> Result<Self> {
        if (v - 0.5).abs() < 1e-9 {
            Ok(TargetNu::Half)
        } else if (v - 1.0 / 3.0).abs() < 1e-9 {
            Ok(TargetNu::Third)
        } else {
            Err(Error::InvalidParameter(format!(
                "target ν must be 1/2 or 1/3, got {v}"
            )))
        }
    }
}

impl From<TargetNu> for f64 {
    fn from(t: TargetNu) -> f64 {
        t.value()
    }
}

/// `S(k/N) = Σ_{n ∈ (a, b]} P(nT) e^{+i2πnk/N}` with `N = b − a`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub nu_grid: Vec<f64>,
    pub amplitudes: Vec<Complex64>,
    pub power: Vec<f64>,
    /// Half-open `(n_start, n_end]` in cycle indices.
    pub window: (usize, usize),
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.power.len()
    }

    pub fn is_empty(&self) -> bool {
        self.power.is_empty()
    }

    pub fn total_power(&self) -> f64 {
        self.power.iter().sum()
    }

    /// Bin index nearest `nu`, folded into `[0, N)`.
    pub fn nearest_bin(&self, nu: f64) -> usize {
        let n = self.len() as f64;
        ((nu * n).round().rem_euclid(n)) as usize
    }

    /// Index of the largest power, lowest index on ties.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (k, &p) in self.power.iter().enumerate() {
            if p > self.power[best] {
                best = k;
            }
        }
        best
    }

    /// Power divided by the total, so the bins sum to one.
    pub fn normalized(&self) -> Result<Spectrum> {
        let total = self.total_power();
        if !(total > 0.0) {
            return Err(Error::ZeroPower);
        }
        let scale = total.sqrt();
        Ok(Spectrum {
            nu_grid: self.nu_grid.clone(),
            amplitudes: self.amplitudes.iter().map(|a| a / scale).collect(),
            power: self.power.iter().map(|p| p / total).collect(),
            window: self.window,
        })
    }
}

/// Spectrum of `values[n]` over the window `(n_start, n_end]`.
pub fn spectrum(values: &[f64], window: (usize, usize)) -> Result<Spectrum> {
    let (a, b) = window;
    if b <= a || b >= values.len() || b - a < 2 {
        return Err(Error::Window {
            start: a,
            end: b,
            len: values.len(),
        });
    }
    let n = b - a;
    let mut buf: Vec<Complex64> = values[a + 1..=b]
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    // rustfft's inverse transform is the unnormalized e^{+i2πjk/N} sum.
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    // Shift the time origin from n = a+1 back to n = 0.
    let offset = (a + 1) % n;
    let amplitudes: Vec<Complex64> = buf
        .iter()
        .enumerate()
        .map(|(k, s)| {
            s * Complex64::from_polar(1.0, 2.0 * PI * ((offset * k) % n) as f64 / n as f64)
        })
        .collect();
    Ok(Spectrum {
        nu_grid: (0..n).map(|k| k as f64 / n as f64).collect(),
        power: amplitudes.iter().map(|s| s.norm_sqr()).collect(),
        amplitudes,
        window,
    })
}
