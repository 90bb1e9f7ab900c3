//! Two spins coupled through the Kittel mode.
//!
//! Placed on opposite sides of the sphere and detuned by `Δ = ω0 − ω_K`, the
//! spins exchange their excitation through virtual magnons at the rate
//! `g_eff ≈ g²/Δ`, which for nanometre gaps exceeds their direct magnetic
//! dipole–dipole coupling by about three orders of magnitude. Only the Kittel
//! mode is retained; the higher modes are checked to be far enough detuned.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::SI;
use crate::dynamics::{EmitterConfig, KernelTerm, MemoryKernel, TimeGrid};
use crate::error::{Error, Result};
use crate::modes::{coupling_strength, mode_frequency, quantize_mode, CavityConfig};
use crate::ode::{AdaptiveOptions, SingleExcitationSystem};
use crate::Vector3;

/// Relative tolerance on the equality of the two antipodal couplings.
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;

/// `g_eff = g²/Δ`.
pub fn effective_coupling(g: f64, delta: f64) -> Result<f64> {
    if delta == 0.0 || !delta.is_finite() {
        return Err(Error::domain(
            "dispersive coupling g²/Δ needs a finite, non-zero detuning",
        ));
    }
    Ok(g * g / delta)
}

/// Direct magnetic dipole–dipole coupling of two one-Bohr-magneton spins at
/// `separation` (m), `μ0μB²/(2πħ d³)` in rad/s.
pub fn dipole_dipole_coupling(separation: f64) -> Result<f64> {
    if !(separation > 0.0 && separation.is_finite()) {
        return Err(Error::domain(format!("separation must be positive, got {separation} m")));
    }
    Ok(SI.mu0 * SI.mu_b * SI.mu_b / (2.0 * PI * SI.hbar * separation.powi(3)))
}

/// How the common spin transition frequency is set relative to ω_K.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Detuning {
    /// Δ in rad/s.
    Absolute(f64),
    /// Δ as a multiple of the Kittel coupling g.
    OverCoupling(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoEmitterConfig {
    pub cavity: CavityConfig,
    pub emitters: [EmitterConfig; 2],
    /// Δ = ω0 − ω_K (rad/s).
    pub detuning: f64,
}

impl TwoEmitterConfig {
    /// Spins at `±a·direction`, both tuned to `ω_K + Δ`.
    pub fn antipodal(
        cavity: CavityConfig,
        a: f64,
        direction: Vector3,
        detuning: Detuning,
        dipole_scale: f64,
    ) -> Result<Self> {
        let wk = cavity.kittel_frequency();
        let e1 = EmitterConfig::at_distance(a, direction, wk)?.with_dipole_scale(dipole_scale);
        let e2 = EmitterConfig::at_distance(a, -direction, wk)?.with_dipole_scale(dipole_scale);
        let delta = match detuning {
            Detuning::Absolute(d) => d,
            Detuning::OverCoupling(k) => {
                let kittel = quantize_mode(1, &cavity)?;
                k * coupling_strength(&kittel, &e1)?
            }
        };
        let cfg = TwoEmitterConfig {
            emitters: [e1.with_omega0(wk + delta), e2.with_omega0(wk + delta)],
            cavity,
            detuning: delta,
        };
        cfg.couplings()?;
        Ok(cfg)
    }

    /// Gap `G = a − R` of the first emitter.
    pub fn gap(&self) -> f64 {
        self.emitters[0].position.norm() - self.cavity.radius
    }

    pub fn separation(&self) -> f64 {
        (self.emitters[0].position - self.emitters[1].position).norm()
    }

    /// Kittel couplings of both spins, each computed from its own position.
    /// Antipodal spins must come out equal; a mismatch beyond
    /// [`SYMMETRY_TOLERANCE`] is reported as a numerical error.
    pub fn couplings(&self) -> Result<[f64; 2]> {
        let kittel = quantize_mode(1, &self.cavity)?;
        let g1 = coupling_strength(&kittel, &self.emitters[0])?;
        let g2 = coupling_strength(&kittel, &self.emitters[1])?;
        let antipodal = (self.emitters[0].position + self.emitters[1].position).norm()
            <= 1e-12 * self.emitters[0].position.norm()
            && self.emitters[0].dipole_scale == self.emitters[1].dipole_scale;
        if antipodal && (g1 - g2).abs() > SYMMETRY_TOLERANCE * g1.abs().max(g2.abs()) {
            return Err(Error::Numerical(format!(
                "antipodal couplings differ: {g1:e} vs {g2:e} rad/s"
            )));
        }
        Ok([g1, g2])
    }

    /// `g_eff = g²/Δ`, valid only in the dispersive window `|Δ| > max(g, Γ)`.
    pub fn dispersive_coupling(&self) -> Result<f64> {
        let [g1, g2] = self.couplings()?;
        let g = g1.max(g2);
        let gamma = self.cavity.linewidth();
        if self.detuning.abs() <= g.max(gamma) {
            return Err(Error::domain(format!(
                "|Δ| = {:.3e} rad/s is not in the dispersive window (> max(g, Γ) = {:.3e} rad/s)",
                self.detuning.abs(),
                g.max(gamma)
            )));
        }
        effective_coupling((g1 * g2).sqrt(), self.detuning)
    }

    /// True when every retained higher mode is detuned from the spins by
    /// more than ten times the Kittel detuning. Logs a warning otherwise.
    pub fn higher_modes_detuned(&self) -> bool {
        let omega0 = self.emitters[0].omega0;
        for n in 2..=self.cavity.n_max.max(2) {
            let wn = match mode_frequency(n, &self.cavity.fields, &self.cavity.material) {
                Ok(w) => w,
                Err(_) => continue,
            };
            if (omega0 - wn).abs() <= 10.0 * self.detuning.abs() {
                log::warn!(
                    "mode n = {n} at {:.4} GHz is within 10|Δ| of the spins; the single-mode model may be inaccurate",
                    wn / (2.0 * PI * 1e9)
                );
                return false;
            }
        }
        true
    }

    pub fn model(&self) -> Result<TransferModel> {
        Ok(TransferModel {
            couplings: self.couplings()?,
            detuning: self.detuning,
            linewidth: self.cavity.linewidth(),
        })
    }
}

/// Spins 1, 2 and one damped mode in the single-excitation subspace, in the
/// frame rotating at ω0:
///
/// ```text
///   ċ_j = −i g_j b,    ḃ = −i(g₁c₁ + g₂c₂) + (iΔ − Γ/2) b
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferModel {
    pub couplings: [f64; 2],
    pub detuning: f64,
    pub linewidth: f64,
}

impl TransferModel {
    /// Largest output step that still resolves the fast ripples, with the
    /// binding constraint; same rule as the single-spin solver.
    pub fn step_limit(&self) -> (f64, &'static str) {
        let g = self.couplings[0].abs().max(self.couplings[1].abs());
        MemoryKernel::new(vec![KernelTerm::new(g, self.detuning, self.linewidth)]).step_limit()
    }

    /// Integrates from spin `excited` (0 or 1) fully excited. `grid.dt` is
    /// held to the same resolution limit as the single-spin solver so that
    /// the fast ripples are sampled.
    pub fn evolve(&self, grid: &TimeGrid, excited: usize) -> Result<TransferResult> {
        assert!(excited < 2, "emitter index must be 0 or 1");
        let (limit, constraint) = self.step_limit();
        if grid.dt > limit {
            return Err(Error::Resolution {
                dt: grid.dt,
                limit,
                constraint,
            });
        }
        let system = SingleExcitationSystem {
            couplings: vec![vec![self.couplings[0]], vec![self.couplings[1]]],
            mode_rates: vec![Complex64::new(-0.5 * self.linewidth, self.detuning)],
        };
        let mut init = [Complex64::new(0.0, 0.0); 2];
        init[excited] = Complex64::new(1.0, 0.0);
        let times = grid.output_times();
        let states = system.evolve(&init, &times, &AdaptiveOptions::default())?;
        let p1: Vec<f64> = states.iter().map(|s| s[0].norm_sqr()).collect();
        let p2: Vec<f64> = states.iter().map(|s| s[1].norm_sqr()).collect();
        let pb: Vec<f64> = states.iter().map(|s| s[2].norm_sqr()).collect();
        let (from, to) = if excited == 0 { (&p1, &p2) } else { (&p2, &p1) };
        let t_cross = first_crossing(&times, from, to);
        let fidelity = t_cross.map(|tc| {
            times
                .iter()
                .zip(to)
                .filter(|(&t, _)| t >= tc && t <= 3.0 * tc)
                .map(|(_, &p)| p)
                .fold(0.0, f64::max)
        });
        Ok(TransferResult {
            times,
            p1,
            p2,
            pb,
            swap_frequency: t_cross.map(|tc| PI / (4.0 * tc)),
            crossing_time: t_cross,
            fidelity,
            couplings: self.couplings,
            detuning: self.detuning,
        })
    }
}

/// First time the receiving population reaches the sending one, linearly
/// interpolated between samples.
fn first_crossing(times: &[f64], from: &[f64], to: &[f64]) -> Option<f64> {
    let d: Vec<f64> = from.iter().zip(to).map(|(a, b)| a - b).collect();
    let k = d.iter().position(|&x| x <= 0.0)?;
    if k == 0 {
        return Some(times[0]);
    }
    let frac = d[k - 1] / (d[k - 1] - d[k]);
    Some(times[k - 1] + frac * (times[k] - times[k - 1]))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferResult {
    pub times: Vec<f64>,
    pub p1: Vec<f64>,
    pub p2: Vec<f64>,
    /// Magnon population.
    pub pb: Vec<f64>,
    /// Slow exchange frequency `π/(4 t×)` from the first time `t×` at which
    /// the receiving spin overtakes the sending one (rad/s). For a clean
    /// `cos²/sin²` swap at rate `g_eff` this is exactly `g_eff`.
    pub swap_frequency: Option<f64>,
    pub crossing_time: Option<f64>,
    /// Largest receiving-spin population within `[t×, 3t×]`, i.e. around the
    /// first complete transfer.
    pub fidelity: Option<f64>,
    pub couplings: [f64; 2],
    pub detuning: f64,
}

/// Single-excitation transfer from spin 1 to spin 2.
pub fn transfer_dynamics(cfg: &TwoEmitterConfig, grid: &TimeGrid) -> Result<TransferResult> {
    cfg.higher_modes_detuned();
    cfg.model()?.evolve(grid, 0)
}

/// One row of [`coupling_vs_separation_sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparationRow {
    pub radius: f64,
    /// 2a (m).
    pub separation: f64,
    /// Kittel coupling g (rad/s).
    pub coupling: f64,
    /// g²/Δ with Δ = `delta_over_g`·g (rad/s).
    pub g_eff: f64,
    /// Direct dipole–dipole coupling at 2a (rad/s).
    pub g_dip: f64,
}

/// For each radius, spins at `a = R + gap` on opposite sides and `Δ =
/// delta_over_g·g`: Kittel coupling, `g_eff` and the dipole–dipole baseline.
/// Parallel over radii, output in input order.
pub fn coupling_vs_separation_sweep(
    template: &CavityConfig,
    radii: &[f64],
    gap: f64,
    delta_over_g: f64,
    direction: Vector3,
    dipole_scale: f64,
) -> Result<Vec<SeparationRow>> {
    if !(gap >= 0.0 && gap.is_finite()) {
        return Err(Error::domain(format!("gap must be non-negative, got {gap} m")));
    }
    radii
        .par_iter()
        .map(|&radius| {
            let cavity = template.with_radius(radius)?;
            let cfg = TwoEmitterConfig::antipodal(
                cavity,
                radius + gap,
                direction,
                Detuning::OverCoupling(delta_over_g),
                dipole_scale,
            )?;
            let [g, _] = cfg.couplings()?;
            Ok(SeparationRow {
                radius,
                separation: cfg.separation(),
                coupling: g,
                g_eff: effective_coupling(g, cfg.detuning)?,
                g_dip: dipole_dipole_coupling(cfg.separation())?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::{Linewidth, MaterialParams};

    fn cavity(gamma: f64) -> CavityConfig {
        let mat = MaterialParams::yig().with_linewidth(Linewidth::Fixed { gamma });
        CavityConfig::with_internal_tesla(30e-9, 0.5, mat, 1).unwrap()
    }

    #[test]
    fn effective_coupling_examples() {
        assert!((effective_coupling(3.0, 30.0).unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(effective_coupling(2.0, 5.0).unwrap(), 4.0 * effective_coupling(1.0, 5.0).unwrap());
        assert!(matches!(effective_coupling(1.0, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn dipole_baseline() {
        let g = dipole_dipole_coupling(72e-9).unwrap() / (2.0 * PI);
        assert!((g - 69.55).abs() < 0.1, "{g}");
        let ratio = dipole_dipole_coupling(72e-9).unwrap() / dipole_dipole_coupling(144e-9).unwrap();
        assert!((ratio - 8.0).abs() < 1e-12);
    }

    #[test]
    fn antipodal_couplings_equal() {
        let cfg = TwoEmitterConfig::antipodal(cavity(0.0), 36e-9, Vector3::x(), Detuning::OverCoupling(10.0), 1.0)
            .unwrap();
        let [g1, g2] = cfg.couplings().unwrap();
        assert!((g1 - g2).abs() <= 1e-10 * g1);
        assert!((cfg.detuning - 10.0 * g1).abs() < 1e-6 * g1);
        assert!((cfg.separation() - 72e-9).abs() < 1e-20);
        assert!((cfg.gap() - 6e-9).abs() < 1e-20);
    }

    #[test]
    fn resonant_bright_state_exchange() {
        let g = 1e6;
        let model = TransferModel {
            couplings: [g, g],
            detuning: 0.0,
            linewidth: 0.0,
        };
        let period = 2.0 * PI / (2f64.sqrt() * g);
        let grid = TimeGrid::new(period, period / 4000.0).unwrap();
        let r = model.evolve(&grid, 0).unwrap();
        let w = 2f64.sqrt() * g;
        for (k, &t) in r.times.iter().enumerate() {
            let c = (w * t).cos();
            assert!((r.p1[k] - (0.5 * (1.0 + c)).powi(2)).abs() < 1e-8);
            assert!((r.p2[k] - (0.5 * (1.0 - c)).powi(2)).abs() < 1e-8);
            assert!((r.p1[k] + r.p2[k] + r.pb[k] - 1.0).abs() < 1e-9);
        }
        assert!((r.p1.last().unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn label_swap_is_exact() {
        let model = TransferModel {
            couplings: [2e6, 2e6],
            detuning: 2e7,
            linewidth: 3e5,
        };
        let grid = TimeGrid::new(2e-6, 1e-9).unwrap();
        let a = model.evolve(&grid, 0).unwrap();
        let b = model.evolve(&grid, 1).unwrap();
        assert_eq!(a.p1, b.p2);
        assert_eq!(a.p2, b.p1);
        assert_eq!(a.pb, b.pb);
    }

    #[test]
    fn dispersive_window_enforced() {
        let cfg = TwoEmitterConfig::antipodal(cavity(0.0), 36e-9, Vector3::x(), Detuning::OverCoupling(0.5), 1.0)
            .unwrap();
        assert!(matches!(cfg.dispersive_coupling(), Err(Error::Domain(_))));
    }

    #[test]
    fn coarse_grid_rejected() {
        let model = TransferModel {
            couplings: [1e7, 1e7],
            detuning: 1e8,
            linewidth: 0.0,
        };
        let grid = TimeGrid::new(1e-6, 1e-8).unwrap();
        assert!(matches!(model.evolve(&grid, 0), Err(Error::Resolution { .. })));
    }
}
