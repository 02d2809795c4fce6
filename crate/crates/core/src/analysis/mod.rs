//! Spectra, crystalline fractions, lifetimes and phase-boundary fits.
//!
//! Spectra use the positive-exponent convention `S(ν) = Σ_n P(nT) e^{i2πnν}`
//! on the raw bin grid `k/N` of a window `(n_start, n_end]`, with no taper.

mod boundary;
pub mod fit;
mod fraction;
mod lifetime;
mod spectrum;

pub use boundary::{fit_super_gaussian, BoundaryFit, SuperGaussian};
pub use fraction::{crystalline_fraction, fraction_error, noise_floor, CrystallineFraction};
pub use lifetime::{fit_double_exponential, stft_peak, DoubleExponentialFit, DEFAULT_STFT_WINDOW};
pub use spectrum::{spectrum, Spectrum, TargetNu};
