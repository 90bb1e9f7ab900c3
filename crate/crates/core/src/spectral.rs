//! Magnon spectral density `J(ω)` seen by a circularly polarized spin
//! transition, and field sweeps of it.
//!
//! `J` is the Lorentzian mode sum
//!
//! ```text
//!   J(ω) = Σ_n g_n² (Γ/2π) / ((ω − ω_n)² + (Γ/2)²)
//! ```
//!
//! normalized so that each peak integrates to `g_n²` and the golden-rule decay
//! rate is `2πJ(ω0)`. [`dipole_green_density`] evaluates the same quantity for
//! the dipolar response alone directly from the sphere's dyadic reflection, as
//! an independent check of the quantized-mode weights.

use std::f64::consts::PI;

use nalgebra::Matrix3;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::SI;
use crate::dynamics::EmitterConfig;
use crate::error::{Error, Result};
use crate::material::susceptibility;
use crate::modes::{coupling_strength, quantize_mode, CavityConfig};
use crate::Vector3;

/// One Lorentzian line of the mode sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralLine {
    pub n: u32,
    /// ω_n (rad/s).
    pub omega: f64,
    /// Γ (rad/s).
    pub linewidth: f64,
    /// g_n (rad/s).
    pub coupling: f64,
}

impl SpectralLine {
    pub fn evaluate(&self, omega: f64) -> f64 {
        let half = 0.5 * self.linewidth;
        let d = omega - self.omega;
        self.coupling * self.coupling * (self.linewidth / (2.0 * PI)) / (d * d + half * half)
    }

    /// Peak value `2g²/(πΓ)`.
    pub fn peak(&self) -> f64 {
        2.0 * self.coupling * self.coupling / (PI * self.linewidth)
    }
}

/// The mode sum for one emitter position and cavity, with the couplings
/// computed once.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralModel {
    pub lines: Vec<SpectralLine>,
}

impl SpectralModel {
    pub fn new(emitter: &EmitterConfig, cavity: &CavityConfig) -> Result<Self> {
        if !(cavity.linewidth() > 0.0) {
            return Err(Error::domain(
                "spectral density needs a positive magnon linewidth (Γ = 0 gives delta peaks)",
            ));
        }
        let lines = (1..=cavity.n_max)
            .map(|n| {
                let mode = quantize_mode(n, cavity)?;
                Ok(SpectralLine {
                    n,
                    omega: mode.omega,
                    linewidth: mode.linewidth,
                    coupling: coupling_strength(&mode, emitter)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SpectralModel { lines })
    }

    pub fn evaluate(&self, omega: f64) -> f64 {
        self.lines.iter().map(|l| l.evaluate(omega)).sum()
    }

    /// Golden-rule decay rate `2πJ(ω0)`.
    pub fn markov_rate(&self, omega0: f64) -> f64 {
        2.0 * PI * self.evaluate(omega0)
    }
}

/// `J(ω)` in rad/s. Builds the mode sum on every call; use [`SpectralModel`]
/// for repeated evaluation.
pub fn spectral_density(omega: f64, emitter: &EmitterConfig, cavity: &CavityConfig) -> Result<f64> {
    Ok(SpectralModel::new(emitter, cavity)?.evaluate(omega))
}

/// Sampled `J(ω)` with the configuration it was computed for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralGrid {
    /// Strictly increasing angular frequencies (rad/s).
    pub omegas: Vec<f64>,
    /// J(ω) (rad/s).
    pub values: Vec<f64>,
    pub cavity: CavityConfig,
    pub emitter_position: Vector3,
    pub n_max: u32,
    pub lines: Vec<SpectralLine>,
}

fn check_axis(values: &[f64], what: &str) -> Result<()> {
    if values.is_empty() {
        return Err(Error::domain(format!("{what} axis is empty")));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain(format!("{what} axis contains non-finite values")));
    }
    if values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain(format!("{what} axis must be strictly increasing")));
    }
    Ok(())
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
    }
}

/// Line scan of `J` over `omegas`, evaluated in parallel.
pub fn spectral_scan(omegas: &[f64], emitter: &EmitterConfig, cavity: &CavityConfig) -> Result<SpectralGrid> {
    check_axis(omegas, "frequency")?;
    let model = SpectralModel::new(emitter, cavity)?;
    let values = omegas.par_iter().map(|&w| model.evaluate(w)).collect();
    Ok(SpectralGrid {
        omegas: omegas.to_vec(),
        values,
        cavity: *cavity,
        emitter_position: emitter.position,
        n_max: cavity.n_max,
        lines: model.lines,
    })
}

/// Frequency axis of a field sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "values", rename_all = "snake_case")]
pub enum FrequencyAxis {
    /// Angular frequencies (rad/s), shared by every column.
    Absolute(Vec<f64>),
    /// Ratios ω/ω_K(H0), rescaled per column.
    Normalized(Vec<f64>),
}

impl FrequencyAxis {
    pub fn values(&self) -> &[f64] {
        match self {
            FrequencyAxis::Absolute(v) | FrequencyAxis::Normalized(v) => v,
        }
    }

    pub fn omega(&self, j: usize, kittel: f64) -> f64 {
        match self {
            FrequencyAxis::Absolute(v) => v[j],
            FrequencyAxis::Normalized(v) => v[j] * kittel,
        }
    }
}

/// `J` on an (H0, ω) grid. `values[i][j]` belongs to `h0[i]` and frequency
/// index `j`. Peak heights span orders of magnitude across the map, so a
/// logarithmic or power-law colour scale is needed to see the higher modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSweepMap {
    /// Internal fields H0 (A/m).
    pub h0: Vec<f64>,
    pub axis: FrequencyAxis,
    /// ω_K(H0) per column (rad/s).
    pub kittel: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    pub emitter_position: Vector3,
    pub n_max: u32,
}

impl FieldSweepMap {
    pub fn omega(&self, i: usize, j: usize) -> f64 {
        self.axis.omega(j, self.kittel[i])
    }

    /// Column `i` as a list of `(ω, J)` pairs.
    pub fn column(&self, i: usize) -> Vec<(f64, f64)> {
        (0..self.values[i].len()).map(|j| (self.omega(i, j), self.values[i][j])).collect()
    }
}

/// Sweeps the internal field over `h0` (A/m) with everything else taken from
/// `template`, evaluating `J` on `axis` for each column. Columns are computed
/// in parallel and returned in input order.
pub fn field_sweep_map(
    h0: &[f64],
    axis: FrequencyAxis,
    emitter: &EmitterConfig,
    template: &CavityConfig,
) -> Result<FieldSweepMap> {
    if h0.is_empty() {
        return Err(Error::domain("field axis is empty"));
    }
    if let Some(bad) = h0.iter().find(|&&h| !(h > 0.0 && h.is_finite())) {
        return Err(Error::domain(format!("internal field must be positive, got {bad} A/m")));
    }
    check_axis(axis.values(), "frequency")?;
    let columns = h0
        .par_iter()
        .map(|&h| {
            let cavity = template.with_internal_field(h)?;
            let model = SpectralModel::new(emitter, &cavity)?;
            let kittel = cavity.kittel_frequency();
            let col = (0..axis.values().len()).map(|j| model.evaluate(axis.omega(j, kittel))).collect();
            Ok((kittel, col))
        })
        .collect::<Result<Vec<(f64, Vec<f64>)>>>()?;
    let (kittel, values) = columns.into_iter().unzip();
    Ok(FieldSweepMap {
        h0: h0.to_vec(),
        axis,
        kittel,
        values,
        emitter_position: emitter.position,
        n_max: template.n_max,
    })
}

/// Indices of strict local maxima of `values`.
pub fn local_maxima(values: &[f64]) -> Vec<usize> {
    (1..values.len().saturating_sub(1))
        .filter(|&i| values[i] > values[i - 1] && values[i] > values[i + 1])
        .collect()
}

/// Parabolic refinement of a sampled peak at index `i` on a uniform grid.
pub fn refine_peak(xs: &[f64], ys: &[f64], i: usize) -> f64 {
    if i == 0 || i + 1 >= ys.len() {
        return xs[i];
    }
    let denom = ys[i - 1] - 2.0 * ys[i] + ys[i + 1];
    if denom == 0.0 {
        return xs[i];
    }
    xs[i] + 0.5 * (ys[i - 1] - ys[i + 1]) / denom * (xs[i + 1] - xs[i])
}

/// Magnetic field reflected back to `r` by the sphere, per unit source dipole
/// at `r`, in the dipolar (uniformly magnetized) approximation:
/// `G = V·T·P·T / (16π²)` with `T = (3r̂r̂ − I)/r³` and `P = (I + χ/3)⁻¹χ`
/// the polarizability per volume of a sphere.
pub fn dipole_reflection(omega: f64, r: &Vector3, cavity: &CavityConfig) -> Result<Matrix3<Complex64>> {
    let dist = r.norm();
    if dist < cavity.radius * (1.0 - crate::modes::BOUNDARY_TOLERANCE) {
        return Err(Error::domain("observation point lies inside the sphere"));
    }
    let chi = susceptibility(omega, cavity.fields.internal, &cavity.material)?.tensor();
    let local = Matrix3::<Complex64>::identity() + chi / Complex64::new(3.0, 0.0);
    let inv = local
        .try_inverse()
        .ok_or_else(|| Error::Singularity(format!("sphere polarizability is singular at ω = {omega:e} rad/s")))?;
    let pol = inv * chi;
    let rhat = r / dist;
    let t = (rhat * rhat.transpose() * 3.0 - nalgebra::Matrix3::<f64>::identity()) / dist.powi(3);
    let t = t.map(|v| Complex64::new(v, 0.0));
    Ok(t * pol * t * Complex64::new(cavity.volume() / (16.0 * PI * PI), 0.0))
}

/// Dipolar-mode spectral density from the dyadic reflection,
/// `J = μ0μB²s²/(ħπ)·[Im(G_xx + G_yy) + Re(G_xy − G_yx)]`, for a transition
/// of `s` Bohr magnetons. Independent of the mode quantization; its spectral
/// weight equals g₁² of the Kittel mode.
pub fn dipole_green_density(omega: f64, emitter: &EmitterConfig, cavity: &CavityConfig) -> Result<f64> {
    let g = dipole_reflection(omega, &emitter.position, cavity)?;
    let proj = (g[(0, 0)] + g[(1, 1)]).im + (g[(0, 1)] - g[(1, 0)]).re;
    Ok(SI.mu0 * (SI.mu_b * emitter.dipole_scale).powi(2) / (SI.hbar * PI) * proj)
}
