use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::TargetNu;
use crate::disorder::{AngularModel, EnsembleParams};
use crate::error::{Error, Result};
use crate::floquet::{EvolutionMode, InitialState, ProtocolConfig, ProtocolVariant, PulseMode};
use crate::hilbert::{hilbert_dim, DIM_LIMIT};
use crate::units::{Dimension, Quantity};

fn cfg_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

/// Declarative sweep description. Every physical number carries a unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub run: RunSection,
    pub protocol: ProtocolSection,
    pub ensemble: EnsembleSection,
    pub sweep: SweepAxes,
    #[serde(default)]
    pub analysis: AnalysisSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meanfield: Option<MeanFieldSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InitialStateSpec {
    #[default]
    PlusX,
    Ms0,
    Tilted(#[serde(with = "quantity_inline")] f64),
}

/// Angles inside the initial-state table are written with units too.
mod quantity_inline {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
        Quantity {
            value: *v,
            unit: "rad".into(),
        }
        .to_string()
        .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
        let q = Quantity::deserialize(d)?;
        q.radians().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolSection {
    pub variant: ProtocolVariant,
    pub n_cycles: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_x: Option<Quantity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_y: Option<Quantity>,
    #[serde(default)]
    pub pulse_mode: PulseMode,
    #[serde(default)]
    pub evolution: EvolutionMode,
    #[serde(default)]
    pub initial_state: InitialStateSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub envelope_t1rho: Option<Quantity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle_jitter: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSection {
    pub n_spins: usize,
    pub r0: Quantity,
    pub r_min: Quantity,
    /// Either `J₀` itself ("… kHz nm^3") or the coupling at `r0` ("105 kHz").
    pub coupling: Quantity,
    pub w: Quantity,
    #[serde(default)]
    pub angular: AngularModel,
    /// Dimensionless multiplier applied to every coupling.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling_scale: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxes {
    pub theta: Vec<Quantity>,
    pub tau1: Vec<Quantity>,
    pub seeds: usize,
    /// Round each τ₁ to the nearest multiple of 2π/Ω_x.
    #[serde(default)]
    pub snap_tau1: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    /// Spectral window `(start, end]` in cycles.
    pub window: [usize; 2],
    pub stft_window: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_nu: Option<TargetNu>,
    pub threshold: f64,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        Self {
            window: [50, 100],
            stft_window: 20,
            target_nu: None,
            threshold: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub start: Quantity,
    pub stop: Quantity,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeanFieldSection {
    pub theta: GridSpec,
    pub tau1: Vec<Quantity>,
    pub samples: usize,
    /// Spins per realization used to build the J̄ distribution.
    #[serde(default = "default_realization_spins")]
    pub realization_spins: usize,
    /// Include the detuning-dependent pulse-angle shift (needs `omega_y`).
    #[serde(default)]
    pub finite_pulse: bool,
    /// Replace the J̄ distribution with one value and drop the detunings.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub single_jbar: Option<Quantity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<Quantity>,
}

fn default_realization_spins() -> usize {
    1000
}

/// Numeric view of a validated config, in internal units.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub protocol: ProtocolConfig,
    pub ensemble: EnsembleParams,
    pub coupling_scale: f64,
    pub thetas: Vec<f64>,
    pub tau1s: Vec<f64>,
    pub seeds: usize,
    pub window: (usize, usize),
    pub stft_window: usize,
    pub target_nu: TargetNu,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedMeanField {
    pub thetas: Vec<f64>,
    pub tau1s: Vec<f64>,
    pub samples: usize,
    pub realization_spins: usize,
    pub omega_y: Option<f64>,
    pub single_jbar: Option<f64>,
    pub tolerance: f64,
}

fn convert(q: &Quantity, dim: Dimension, field: &str) -> Result<f64> {
    q.to_internal(dim)
        .map_err(|e| cfg_err(format!("{field}: {e}")))
}

impl SweepConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| cfg_err(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| cfg_err(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Canonical serialization; parsing it back gives an equal config.
    pub fn to_canonical_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| cfg_err(e.to_string()))
    }

    /// Hex SHA-256 of the canonical serialization.
    pub fn hash(&self) -> Result<String> {
        Ok(hex::encode(Sha256::digest(
            self.to_canonical_string()?.as_bytes(),
        )))
    }

    pub fn target_nu(&self) -> TargetNu {
        self.analysis
            .target_nu
            .unwrap_or(match self.protocol.variant {
                ProtocolVariant::Z2 => TargetNu::Half,
                ProtocolVariant::Z3 => TargetNu::Third,
            })
    }

    pub fn resolve(&self) -> Result<Resolved> {
        let p = &self.protocol;
        let e = &self.ensemble;
        let a = &self.analysis;
        if self.sweep.theta.is_empty() || self.sweep.tau1.is_empty() {
            return Err(cfg_err("sweep axes θ and τ₁ must be non-empty"));
        }
        if self.sweep.seeds == 0 {
            return Err(cfg_err("sweep.seeds must be at least 1"));
        }
        if !(a.threshold > 0.0 && a.threshold < 1.0) {
            return Err(cfg_err(format!(
                "analysis.threshold {} must lie in (0, 1)",
                a.threshold
            )));
        }
        if p.n_cycles == 0 {
            return Err(cfg_err("protocol.n_cycles must be at least 1"));
        }
        let (w0, w1) = (a.window[0], a.window[1]);
        if w1 <= w0 + 1 || w1 > p.n_cycles {
            return Err(cfg_err(format!(
                "analysis.window ({w0}, {w1}] must hold ≥2 cycles within n_cycles = {}",
                p.n_cycles
            )));
        }
        let target = self.target_nu();
        target
            .bins(w1 - w0)
            .map_err(|e| cfg_err(format!("analysis.window: {e}")))?;
        if a.stft_window > p.n_cycles {
            return Err(cfg_err("analysis.stft_window exceeds n_cycles"));
        }
        target
            .bins(a.stft_window)
            .map_err(|e| cfg_err(format!("analysis.stft_window: {e}")))?;

        let local_dim = match p.variant {
            ProtocolVariant::Z2 => 2,
            ProtocolVariant::Z3 => 3,
        };
        if e.n_spins == 0 || hilbert_dim(local_dim, e.n_spins).is_err() {
            return Err(cfg_err(format!(
                "ensemble.n_spins = {} exceeds the dense limit {DIM_LIMIT} for local dimension {local_dim}",
                e.n_spins
            )));
        }

        let omega_x = p
            .omega_x
            .as_ref()
            .map(|q| convert(q, Dimension::Frequency, "protocol.omega_x"))
            .transpose()?;
        let omega_y = p
            .omega_y
            .as_ref()
            .map(|q| convert(q, Dimension::Frequency, "protocol.omega_y"))
            .transpose()?;
        let t1rho = p
            .envelope_t1rho
            .as_ref()
            .map(|q| convert(q, Dimension::Time, "protocol.envelope_t1rho"))
            .transpose()?;
        if p.variant == ProtocolVariant::Z2
            && p.pulse_mode == PulseMode::Physical
            && omega_y.is_none_or(|w| w <= 0.0)
        {
            return Err(cfg_err("physical pulses need protocol.omega_y > 0"));
        }
        let initial_state = match (p.variant, p.initial_state) {
            (ProtocolVariant::Z3, InitialStateSpec::PlusX) => InitialState::Ms0,
            (_, InitialStateSpec::PlusX) => InitialState::PlusX,
            (_, InitialStateSpec::Ms0) => InitialState::Ms0,
            (_, InitialStateSpec::Tilted(a)) => InitialState::Tilted(a),
        };
        if p.variant == ProtocolVariant::Z3 && initial_state != InitialState::Ms0 {
            return Err(cfg_err("the Z3 protocol starts from m_s = 0"));
        }

        let r0 = convert(&e.r0, Dimension::Length, "ensemble.r0")?;
        let r_min = convert(&e.r_min, Dimension::Length, "ensemble.r_min")?;
        let j0 = match e.coupling.dimension() {
            Dimension::CouplingScale => e.coupling.coupling()?,
            Dimension::Frequency => e.coupling.rad_per_us()? * r0.powi(3),
            d => {
                return Err(cfg_err(format!(
                    "ensemble.coupling must be a coupling scale or frequency, got {d:?}"
                )))
            }
        };
        let w = convert(&e.w, Dimension::Frequency, "ensemble.w")?;
        let mut ensemble = EnsembleParams::new(e.n_spins, r0, r_min, j0, w, self.run.seed);
        ensemble.angular = e.angular;
        ensemble
            .validate()
            .map_err(|err| cfg_err(format!("ensemble: {err}")))?;

        let thetas = self
            .sweep
            .theta
            .iter()
            .map(|q| convert(q, Dimension::Angle, "sweep.theta"))
            .collect::<Result<Vec<_>>>()?;
        let tau1s = self
            .sweep
            .tau1
            .iter()
            .map(|q| convert(q, Dimension::Time, "sweep.tau1"))
            .collect::<Result<Vec<_>>>()?;

        let protocol = ProtocolConfig {
            variant: p.variant,
            theta: thetas[0],
            tau1: tau1s[0],
            omega_x: omega_x.unwrap_or(0.0),
            omega_y: omega_y.unwrap_or(0.0),
            n_cycles: p.n_cycles,
            pulse_mode: p.pulse_mode,
            evolution: p.evolution,
            initial_state,
            envelope_t1rho: t1rho,
            angle_jitter: p.angle_jitter,
            seed: self.run.seed,
        };
        Ok(Resolved {
            protocol,
            ensemble,
            coupling_scale: e.coupling_scale.unwrap_or(1.0),
            thetas,
            tau1s,
            seeds: self.sweep.seeds,
            window: (w0, w1),
            stft_window: a.stft_window,
            target_nu: target,
            threshold: a.threshold,
        })
    }

    pub fn resolve_meanfield(&self) -> Result<ResolvedMeanField> {
        let m = self
            .meanfield
            .as_ref()
            .ok_or_else(|| cfg_err("missing [meanfield] section"))?;
        let start = convert(&m.theta.start, Dimension::Angle, "meanfield.theta.start")?;
        let stop = convert(&m.theta.stop, Dimension::Angle, "meanfield.theta.stop")?;
        if m.theta.points < 2 || !(stop > start) {
            return Err(cfg_err(
                "meanfield.theta needs start < stop and at least 2 points",
            ));
        }
        if m.tau1.is_empty() {
            return Err(cfg_err("meanfield.tau1 must be non-empty"));
        }
        if m.samples == 0 {
            return Err(cfg_err("meanfield.samples must be at least 1"));
        }
        let thetas = (0..m.theta.points)
            .map(|k| start + (stop - start) * k as f64 / (m.theta.points - 1) as f64)
            .collect();
        let tau1s = m
            .tau1
            .iter()
            .map(|q| convert(q, Dimension::Time, "meanfield.tau1"))
            .collect::<Result<Vec<_>>>()?;
        let omega_y = if m.finite_pulse {
            let q = self
                .protocol
                .omega_y
                .as_ref()
                .ok_or_else(|| cfg_err("meanfield.finite_pulse needs protocol.omega_y"))?;
            Some(convert(q, Dimension::Frequency, "protocol.omega_y")?)
        } else {
            None
        };
        let single_jbar = m
            .single_jbar
            .as_ref()
            .map(|q| convert(q, Dimension::Frequency, "meanfield.single_jbar"))
            .transpose()?;
        let tolerance = m
            .tolerance
            .as_ref()
            .map(|q| convert(q, Dimension::Angle, "meanfield.tolerance"))
            .transpose()?
            .unwrap_or(1e-3);
        Ok(ResolvedMeanField {
            thetas,
            tau1s,
            samples: m.samples,
            realization_spins: m.realization_spins,
            omega_y,
            single_jbar,
            tolerance,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    pub(crate) const EXAMPLE: &str = r#"
[run]
seed = 7

[protocol]
variant = "z2"
n_cycles = 100
omega_x = "54.6 MHz"
omega_y = "41.7 MHz"
initial_state = { tilted = "30 deg" }

[ensemble]
n_spins = 4
r0 = "8 nm"
r_min = "3 nm"
coupling = "105 kHz"
w = "4 MHz"

[sweep]
theta = ["1 pi", "1.034 pi"]
tau1 = ["790 ns"]
seeds = 2

[meanfield]
theta = { start = "0.8 pi", stop = "1.2 pi", points = 41 }
tau1 = ["0.2 us"]
samples = 100
"#;

    #[test]
    fn resolves_units() {
        let c = SweepConfig::from_toml(EXAMPLE).unwrap();
        let r = c.resolve().unwrap();
        assert!((r.protocol.omega_x - 2.0 * PI * 54.6).abs() < 1e-9);
        assert!((r.tau1s[0] - 0.79).abs() < 1e-12);
        assert!((r.thetas[1] - 1.034 * PI).abs() < 1e-12);
        assert!((r.ensemble.j0 - 2.0 * PI * 0.105 * 512.0).abs() < 1e-9);
        assert_eq!(r.target_nu, TargetNu::Half);
        match r.protocol.initial_state {
            InitialState::Tilted(a) => assert!((a - PI / 6.0).abs() < 1e-12),
            s => panic!("unexpected {s:?}"),
        }
        let m = c.resolve_meanfield().unwrap();
        assert_eq!(m.thetas.len(), 41);
        assert!((m.thetas[20] - PI).abs() < 1e-12);
    }

    #[test]
    fn canonical_round_trip() {
        let c = SweepConfig::from_toml(EXAMPLE).unwrap();
        let s1 = c.to_canonical_string().unwrap();
        let c2 = SweepConfig::from_toml(&s1).unwrap();
        assert_eq!(c, c2);
        assert_eq!(s1, c2.to_canonical_string().unwrap());
        assert_eq!(c.hash().unwrap(), c2.hash().unwrap());
    }

    #[test]
    fn config_errors() {
        let bad = |from: &str, to: &str| {
            SweepConfig::from_toml(&EXAMPLE.replace(from, to)).and_then(|c| c.resolve())
        };
        assert!(matches!(
            bad("seeds = 2", "seeds = 0"),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            bad(r#"theta = ["1 pi", "1.034 pi"]"#, "theta = []"),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            bad(r#"w = "4 MHz""#, r#"w = "4 nm""#),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            bad("n_spins = 4", "n_spins = 15"),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            bad("n_cycles = 100", "n_cycles = 60"),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            bad(r#"r0 = "8 nm""#, r#"r0 = "8 parsecs""#),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            bad("seed = 7", "seed = 7\nbogus = 1"),
            Err(Error::Config(_))
        ));
    }
}
