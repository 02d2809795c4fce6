//! Disorder realizations of a dipolar spin ensemble.
//!
//! Spins are scattered uniformly in an open-boundary cube with a hard-core
//! cutoff, couple through the secular dipolar factor `(1 - 3cos²θ)/r³`, and
//! carry Gaussian on-site fields.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{stream, stream_rng};

/// Mean nearest-neighbor distance of a unit-density Poisson process.
pub const POISSON_NN_FACTOR: f64 = 0.55396;

/// Attempts allowed per spin before the hard-core placement gives up.
pub const MAX_PLACEMENT_ATTEMPTS: usize = 100_000;

pub type Vec3 = [f64; 3];

/// Angular dependence of the pair coupling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AngularModel {
    /// Secular dipolar factor `1 - 3cos²θ`.
    #[default]
    Dipolar,
    /// Unit magnitude with a random sign per pair (ablation mode).
    Isotropic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleParams {
    pub n_spins: usize,
    /// Mean nearest-neighbor separation (nm).
    pub r0: f64,
    /// Hard-core cutoff (nm).
    pub r_min: f64,
    /// Coupling scale (rad/μs·nm³).
    pub j0: f64,
    /// On-site disorder standard deviation (rad/μs).
    pub w: f64,
    pub seed: u64,
    pub angular: AngularModel,
    pub quantization_axis: Vec3,
}

impl EnsembleParams {
    pub fn new(n_spins: usize, r0: f64, r_min: f64, j0: f64, w: f64, seed: u64) -> Self {
        Self {
            n_spins,
            r0,
            r_min,
            j0,
            w,
            seed,
            angular: AngularModel::Dipolar,
            quantization_axis: [0.0, 0.0, 1.0],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if self.n_spins == 0 {
            return bad("n_spins must be at least 1");
        }
        if !(self.r_min > 0.0 && self.r_min < self.r0) {
            return bad("need 0 < r_min < r0");
        }
        if !(self.w >= 0.0) || !self.w.is_finite() {
            return bad("W must be finite and non-negative");
        }
        if !self.j0.is_finite() {
            return bad("J0 must be finite");
        }
        let norm = norm(self.quantization_axis);
        if !(norm > 0.0) || !norm.is_finite() {
            return bad("quantization axis must be a nonzero vector");
        }
        Ok(())
    }

    /// Side of the cube whose Poisson mean nearest-neighbor distance is `r0`.
    pub fn box_side(&self) -> f64 {
        (self.n_spins as f64).cbrt() * self.r0 / POISSON_NN_FACTOR
    }
}

/// One random instance of the ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisorderRealization {
    pub positions: Vec<Vec3>,
    /// Row-major `n × n` matrix of `J_ij / r_ij³` (rad/μs).
    couplings: Vec<f64>,
    /// Per-spin on-site field Δ_i (rad/μs).
    pub onsite_fields: Vec<f64>,
    /// Per-spin total coupling `J̄_i = Σ_j J_ij / r_ij³` (rad/μs).
    pub jbar: Vec<f64>,
}

impl DisorderRealization {
    /// Draw positions, couplings and fields for `params`.
    pub fn sample(params: &EnsembleParams) -> Result<Self> {
        params.validate()?;
        let positions = sample_positions(params)?;
        let onsite = sample_onsite_fields(params.n_spins, params.w, params.seed);
        Self::from_positions(positions, onsite, params)
    }

    /// Build a realization from explicit geometry and fields.
    pub fn from_positions(
        positions: Vec<Vec3>,
        onsite_fields: Vec<f64>,
        params: &EnsembleParams,
    ) -> Result<Self> {
        let n = positions.len();
        if onsite_fields.len() != n {
            return Err(Error::InvalidParameter(format!(
                "{} on-site fields for {n} spins",
                onsite_fields.len()
            )));
        }
        let mut signs = stream_rng(params.seed, stream::SIGNS);
        let mut couplings = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let c = match params.angular {
                    AngularModel::Dipolar => dipolar_coupling(
                        positions[i],
                        positions[j],
                        params.j0,
                        params.quantization_axis,
                    )?,
                    AngularModel::Isotropic => {
                        let r = distance(positions[i], positions[j]);
                        if r == 0.0 {
                            return Err(Error::CoincidentPositions);
                        }
                        let sign = if signs.random::<bool>() { 1.0 } else { -1.0 };
                        sign * params.j0 / (r * r * r)
                    }
                };
                couplings[i * n + j] = c;
                couplings[j * n + i] = c;
            }
        }
        let jbar = (0..n)
            .map(|i| couplings[i * n..(i + 1) * n].iter().sum())
            .collect();
        Ok(Self {
            positions,
            couplings,
            onsite_fields,
            jbar,
        })
    }

    /// Build a realization directly from a coupling matrix (no geometry).
    pub fn from_couplings(couplings: Vec<Vec<f64>>, onsite_fields: Vec<f64>) -> Result<Self> {
        let n = couplings.len();
        if onsite_fields.len() != n || couplings.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidParameter(
                "coupling matrix must be n × n".into(),
            ));
        }
        let mut flat = vec![0.0; n * n];
        for i in 0..n {
            if couplings[i][i] != 0.0 {
                return Err(Error::InvalidParameter(
                    "couplings must have zero diagonal".into(),
                ));
            }
            for j in 0..n {
                if couplings[i][j] != couplings[j][i] {
                    return Err(Error::InvalidParameter(
                        "couplings must be symmetric".into(),
                    ));
                }
                flat[i * n + j] = couplings[i][j];
            }
        }
        let jbar = (0..n)
            .map(|i| flat[i * n..(i + 1) * n].iter().sum())
            .collect();
        Ok(Self {
            positions: vec![[0.0; 3]; n],
            couplings: flat,
            onsite_fields,
            jbar,
        })
    }

    /// A realization of `n` uncoupled spins with zero fields.
    pub fn noninteracting(n: usize) -> Self {
        Self::from_couplings(vec![vec![0.0; n]; n], vec![0.0; n])
            .expect("zero matrix is a valid coupling matrix")
    }

    pub fn n_spins(&self) -> usize {
        self.onsite_fields.len()
    }

    /// `J_ij / r_ij³` in rad/μs.
    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        self.couplings[i * self.n_spins() + j]
    }

    /// Iterator over `(i, j, J_ij / r_ij³)` for `i < j`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.n_spins();
        (0..n).flat_map(move |i| ((i + 1)..n).map(move |j| (i, j, self.coupling(i, j))))
    }

    /// Scale every coupling (and hence J̄) by `factor`.
    pub fn scaled_couplings(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.couplings.iter_mut().for_each(|c| *c *= factor);
        out.jbar.iter_mut().for_each(|c| *c *= factor);
        out
    }

    /// Replace on-site fields, keeping the geometry.
    pub fn with_onsite_fields(&self, fields: Vec<f64>) -> Result<Self> {
        if fields.len() != self.n_spins() {
            return Err(Error::InvalidParameter(
                "field count must equal spin count".into(),
            ));
        }
        let mut out = self.clone();
        out.onsite_fields = fields;
        Ok(out)
    }

    /// Mean `|J_ij| / r0³` over pairs, for calibrating `J0` against a target
    /// interaction scale.
    pub fn mean_coupling_scale(&self, r0: f64) -> f64 {
        let mut sum = 0.0;
        let mut count = 0usize;
        for (i, j, c) in self.pairs() {
            let r = distance(self.positions[i], self.positions[j]);
            sum += (c * r * r * r).abs() / (r0 * r0 * r0);
            count += 1;
        }
        if count == 0 {
            0.0
        } else {
            sum / count as f64
        }
    }

    pub fn min_pair_distance(&self) -> Option<f64> {
        min_pair_distance(&self.positions)
    }
}

fn norm(v: Vec3) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

pub fn distance(a: Vec3, b: Vec3) -> f64 {
    norm([a[0] - b[0], a[1] - b[1], a[2] - b[2]])
}

pub fn min_pair_distance(points: &[Vec3]) -> Option<f64> {
    let mut best: Option<f64> = None;
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            let d = distance(points[i], points[j]);
            best = Some(best.map_or(d, |b: f64| b.min(d)));
        }
    }
    best
}

/// Uniform positions in the cube of [`EnsembleParams::box_side`], resampling any
/// point that lands within `r_min` of an already placed one.
pub fn sample_positions(params: &EnsembleParams) -> Result<Vec<Vec3>> {
    params.validate()?;
    let mut rng = stream_rng(params.seed, stream::POSITIONS);
    place_in_cube(params.n_spins, params.box_side(), params.r_min, &mut rng)
}

pub(crate) fn place_in_cube<R: Rng>(
    n: usize,
    side: f64,
    r_min: f64,
    rng: &mut R,
) -> Result<Vec<Vec3>> {
    let mut points: Vec<Vec3> = Vec::with_capacity(n);
    let r_min2 = r_min * r_min;
    for index in 0..n {
        let mut placed = false;
        for _ in 0..MAX_PLACEMENT_ATTEMPTS {
            let p = [
                rng.random::<f64>() * side,
                rng.random::<f64>() * side,
                rng.random::<f64>() * side,
            ];
            let clash = points.iter().any(|q| {
                let d = [p[0] - q[0], p[1] - q[1], p[2] - q[2]];
                d[0] * d[0] + d[1] * d[1] + d[2] * d[2] < r_min2
            });
            if !clash {
                points.push(p);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(Error::Capacity {
                index,
                attempts: MAX_PLACEMENT_ATTEMPTS,
            });
        }
    }
    Ok(points)
}

/// `J0 (1 - 3cos²θ) / r³` with θ the angle between the separation and the axis.
pub fn dipolar_coupling(pos_i: Vec3, pos_j: Vec3, j0: f64, quantization_axis: Vec3) -> Result<f64> {
    let d = [
        pos_j[0] - pos_i[0],
        pos_j[1] - pos_i[1],
        pos_j[2] - pos_i[2],
    ];
    let r = norm(d);
    if r == 0.0 {
        return Err(Error::CoincidentPositions);
    }
    let a = norm(quantization_axis);
    let cos =
        (d[0] * quantization_axis[0] + d[1] * quantization_axis[1] + d[2] * quantization_axis[2])
            / (r * a);
    Ok(j0 * (1.0 - 3.0 * cos * cos) / (r * r * r))
}

/// `n` i.i.d. draws from N(0, W²).
pub fn sample_onsite_fields(n: usize, w: f64, seed: u64) -> Vec<f64> {
    if w == 0.0 {
        return vec![0.0; n];
    }
    let normal = Normal::new(0.0, w).expect("W validated non-negative and finite");
    let mut rng = stream_rng(seed, stream::ONSITE);
    (0..n).map(|_| normal.sample(&mut rng)).collect()
}

/// Pooled per-spin J̄ values with summary quantiles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JbarDistribution {
    /// Pooled values in realization order.
    pub values: Vec<f64>,
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub max: f64,
    pub median_abs: f64,
    pub mean_abs: f64,
}

pub fn jbar_distribution(realizations: &[DisorderRealization]) -> Result<JbarDistribution> {
    if realizations.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    let values: Vec<f64> = realizations
        .iter()
        .flat_map(|r| r.jbar.iter().copied())
        .collect();
    let mut sorted = values.clone();
    sorted.sort_by(f64::total_cmp);
    let mut abs: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    abs.sort_by(f64::total_cmp);
    let mean_abs = abs.iter().sum::<f64>() / abs.len() as f64;
    Ok(JbarDistribution {
        min: sorted[0],
        q25: quantile(&sorted, 0.25),
        median: quantile(&sorted, 0.5),
        q75: quantile(&sorted, 0.75),
        max: sorted[sorted.len() - 1],
        median_abs: quantile(&abs, 0.5),
        mean_abs,
        values,
    })
}

/// Linear-interpolated quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}
