//! Non-Markovian decay of a spin emitter into the magnon modes of the sphere.
//!
//! In the frame rotating at the transition frequency ω0 the excited-state
//! amplitude obeys the Weisskopf–Wigner equation
//!
//! ```text
//!   dc̃/dt = −∫₀ᵗ K(t − t′) c̃(t′) dt′,    K(τ) = ∫ J(ω) e^{i(ω0−ω)τ} dω
//! ```
//!
//! For the Lorentzian mode sum of [`crate::spectral`] the kernel is a finite
//! sum of damped exponentials, `K(τ) = Σ g_ν² exp[(i(ω0 − ω_ν) − Γ_ν/2)τ]`.
//! Two independent solvers are provided: [`evolve_volterra`] discretizes the
//! history integral with the trapezoidal rule, [`evolve_pseudomode`] integrates
//! the equivalent emitter + damped-mode ODE system adaptively.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::SI;
use crate::error::{Error, Result};
use crate::modes::{coupling_strength, e_plus, quantize_mode, CavityConfig};
use crate::ode::{AdaptiveOptions, SingleExcitationSystem};
use crate::{CVector3, Vector3};

/// A point spin emitter with a circularly polarized transition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmitterConfig {
    /// Position relative to the sphere centre (m).
    pub position: Vector3,
    /// Transition angular frequency ω0 (rad/s).
    pub omega0: f64,
    /// Transition dipole magnitude in units of μB.
    pub dipole_scale: f64,
}

impl EmitterConfig {
    pub fn new(position: Vector3, omega0: f64) -> Self {
        EmitterConfig {
            position,
            omega0,
            dipole_scale: 1.0,
        }
    }

    /// Emitter at distance `a` along `direction` (normalized here).
    pub fn at_distance(a: f64, direction: Vector3, omega0: f64) -> Result<Self> {
        let norm = direction.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::domain("emitter direction must be a non-zero vector"));
        }
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::domain(format!("emitter distance must be positive, got {a} m")));
        }
        Ok(Self::new(direction * (a / norm), omega0))
    }

    pub fn with_dipole_scale(self, dipole_scale: f64) -> Self {
        EmitterConfig { dipole_scale, ..self }
    }

    pub fn with_omega0(self, omega0: f64) -> Self {
        EmitterConfig { omega0, ..self }
    }

    /// `m_xy = −√2 μB e^(+)` scaled by `dipole_scale`.
    pub fn transition_dipole(&self) -> CVector3 {
        e_plus() * Complex64::new(-std::f64::consts::SQRT_2 * SI.mu_b * self.dipole_scale, 0.0)
    }
}

/// One damped-exponential term `g² exp(rate·τ)` of the memory kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelTerm {
    /// Coupling g (rad/s).
    pub coupling: f64,
    /// `i(ω0 − ω_ν) − Γ_ν/2` (1/s).
    pub rate: Complex64,
}

impl KernelTerm {
    pub fn new(coupling: f64, detuning: f64, linewidth: f64) -> Self {
        KernelTerm {
            coupling,
            rate: Complex64::new(-0.5 * linewidth, detuning),
        }
    }

    pub fn weight(&self) -> f64 {
        self.coupling * self.coupling
    }

    /// ω0 − ω_ν.
    pub fn detuning(&self) -> f64 {
        self.rate.im
    }

    /// Γ_ν.
    pub fn linewidth(&self) -> f64 {
        -2.0 * self.rate.re
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MemoryKernel {
    pub terms: Vec<KernelTerm>,
}

impl MemoryKernel {
    pub fn new(terms: Vec<KernelTerm>) -> Self {
        MemoryKernel { terms }
    }

    /// K(τ).
    pub fn evaluate(&self, tau: f64) -> Complex64 {
        self.terms.iter().map(|t| (t.rate * tau).exp() * t.weight()).sum()
    }

    /// K(0) = Σ g².
    pub fn total_weight(&self) -> f64 {
        self.terms.iter().map(KernelTerm::weight).sum()
    }

    pub fn max_coupling(&self) -> f64 {
        self.terms.iter().map(|t| t.coupling.abs()).fold(0.0, f64::max)
    }

    /// Every coupling multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        MemoryKernel {
            terms: self
                .terms
                .iter()
                .map(|t| KernelTerm {
                    coupling: t.coupling * factor,
                    ..*t
                })
                .collect(),
        }
    }

    /// Largest step the fixed-step solver accepts, and the constraint that sets it:
    /// `min(2π/max|ω0 − ω_ν|, 1/Γ, 1/(10·max g)) / 10`.
    pub fn step_limit(&self) -> (f64, &'static str) {
        let max_detuning = self.terms.iter().map(|t| t.detuning().abs()).fold(0.0, f64::max);
        let max_linewidth = self.terms.iter().map(|t| t.linewidth()).fold(0.0, f64::max);
        let g = self.max_coupling();
        let mut limit = (f64::INFINITY, "no dynamics");
        let candidates = [
            (2.0 * PI / max_detuning, "largest detuning (2π/max|ω0 − ω_n|)"),
            (1.0 / max_linewidth, "magnon linewidth (1/Γ)"),
            (1.0 / (10.0 * g), "coupling strength (1/(10·g))"),
        ];
        for (v, name) in candidates {
            if v.is_finite() && v < limit.0 {
                limit = (v, name);
            }
        }
        (limit.0 / 10.0, limit.1)
    }

    fn check_step(&self, dt: f64) -> Result<()> {
        let (limit, constraint) = self.step_limit();
        if dt > limit {
            return Err(Error::Resolution { dt, limit, constraint });
        }
        Ok(())
    }
}

/// One kernel term per retained mode: weight g_n², rate i(ω0 − ω_n) − Γ/2.
pub fn build_kernel(emitter: &EmitterConfig, cavity: &CavityConfig) -> Result<MemoryKernel> {
    let terms = (1..=cavity.n_max)
        .map(|n| {
            let mode = quantize_mode(n, cavity)?;
            let g = coupling_strength(&mode, emitter)?;
            Ok(KernelTerm::new(g, emitter.omega0 - mode.omega, mode.linewidth))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MemoryKernel::new(terms))
}

/// Uniform time grid: integration step `dt`, output every `stride` steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t_end: f64,
    pub dt: f64,
    pub stride: usize,
}

impl TimeGrid {
    pub fn new(t_end: f64, dt: f64) -> Result<Self> {
        if !(t_end > 0.0 && t_end.is_finite()) {
            return Err(Error::domain(format!("time horizon must be positive, got {t_end} s")));
        }
        if !(dt > 0.0 && dt <= t_end) {
            return Err(Error::domain(format!("time step must lie in (0, t_end], got {dt} s")));
        }
        Ok(TimeGrid { t_end, dt, stride: 1 })
    }

    pub fn with_stride(self, stride: usize) -> Self {
        TimeGrid {
            stride: stride.max(1),
            ..self
        }
    }

    /// `samples` output intervals over `t_end`, each split into the fewest
    /// integration steps that respect `max_dt`.
    pub fn with_samples(t_end: f64, samples: usize, max_dt: f64) -> Result<Self> {
        if samples == 0 {
            return Err(Error::domain("sample count must be positive"));
        }
        let sample_dt = t_end / samples as f64;
        let stride = if max_dt.is_finite() {
            (sample_dt / max_dt).ceil().max(1.0) as usize
        } else {
            1
        };
        Ok(TimeGrid::new(t_end, sample_dt / stride as f64)?.with_stride(stride))
    }

    /// Grid resolving `kernel` with `samples` output points.
    pub fn for_kernel(kernel: &MemoryKernel, t_end: f64, samples: usize) -> Result<Self> {
        Self::with_samples(t_end, samples, kernel.step_limit().0)
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    pub fn output_times(&self) -> Vec<f64> {
        (0..=self.steps() / self.stride)
            .map(|k| (k * self.stride) as f64 * self.dt)
            .collect()
    }
}

/// Sampled excited-state population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    /// Times (s).
    pub times: Vec<f64>,
    /// |c_e(t)|².
    pub populations: Vec<f64>,
    /// Σ_ν |b_ν(t)|², when the solver tracks mode amplitudes.
    pub mode_population: Option<Vec<f64>>,
}

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn max_abs_difference(&self, other: &TimeSeries) -> f64 {
        assert_eq!(self.len(), other.len(), "series must share a time grid");
        self.populations
            .iter()
            .zip(&other.populations)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// First Rabi minimum: the first local minimum after the population has
    /// dropped below `1/2`, refined by a parabola through its neighbours.
    /// Small ripples near full population are ignored.
    pub fn first_minimum(&self) -> Option<(f64, f64)> {
        let p = &self.populations;
        let down = p.iter().position(|&x| x < 0.5)?;
        // first local minimum once the population has dropped below 1/2; a
        // damped revival need not climb back above 1/2
        let k = (down.max(1)..p.len().saturating_sub(1)).find(|&i| p[i] <= p[i - 1] && p[i] < p[i + 1])?;
        Some(self.refine_extremum(k))
    }

    /// First revival: the first local maximum after the first minimum.
    pub fn first_revival(&self) -> Option<(f64, f64)> {
        let p = &self.populations;
        let (t_min, _) = self.first_minimum()?;
        let start = self.times.iter().position(|&t| t > t_min)?.max(1);
        let k = (start..p.len().saturating_sub(1)).find(|&i| p[i] >= p[i - 1] && p[i] > p[i + 1])?;
        Some(self.refine_extremum(k))
    }

    /// Vacuum Rabi frequency Ω = π / t_min, i.e. 2g for a resonant mode.
    pub fn rabi_frequency(&self) -> Option<f64> {
        self.first_minimum().map(|(t, _)| PI / t)
    }

    fn refine_extremum(&self, k: usize) -> (f64, f64) {
        let p = &self.populations;
        let t = &self.times;
        if k == 0 || k + 1 >= p.len() {
            return (t[k], p[k]);
        }
        let (y0, y1, y2) = (p[k - 1], p[k], p[k + 1]);
        let denom = y0 - 2.0 * y1 + y2;
        if denom == 0.0 {
            return (t[k], y1);
        }
        let h = t[k + 1] - t[k];
        let off = 0.5 * (y0 - y2) / denom;
        (t[k] + off * h, y1 - 0.25 * (y0 - y2) * off)
    }

    /// Least-squares rate λ of `P ≈ P0·e^{−λt}` over samples with `t ∈ [t0, t1]`.
    pub fn fit_decay_rate(&self, t0: f64, t1: f64) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .times
            .iter()
            .zip(&self.populations)
            .filter(|(&t, &p)| t >= t0 && t <= t1 && p > 0.0)
            .map(|(&t, &p)| (t, p.ln()))
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let n = pts.len() as f64;
        let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
        Some(-sxy / sxx)
    }
}

/// Trapezoidal Volterra integration of the memory equation.
///
/// The history integral `∫₀ᵗ K(t−t′)c̃(t′)dt′` uses the trapezoidal rule on the
/// grid, and `c̃` itself is advanced with the trapezoidal rule, which makes each
/// step a scalar linear solve. For the exponential kernel the trapezoidal
/// history sum obeys `H_{k+1} = e^{s·dt}·H_k + dt/2·(e^{s·dt}c̃_k + c̃_{k+1})` per
/// term, so the cost is linear in the number of steps; the sum is the same one
/// [`evolve_volterra_sampled`] forms explicitly.
pub fn evolve_volterra(kernel: &MemoryKernel, grid: &TimeGrid) -> Result<TimeSeries> {
    kernel.check_step(grid.dt)?;
    let dt = grid.dt;
    let half = 0.5 * dt;
    let props: Vec<Complex64> = kernel.terms.iter().map(|t| (t.rate * dt).exp()).collect();
    let weights: Vec<f64> = kernel.terms.iter().map(KernelTerm::weight).collect();
    let q = half * kernel.total_weight();

    let mut hist = vec![Complex64::new(0.0, 0.0); kernel.terms.len()];
    let mut c = Complex64::new(1.0, 0.0);
    let mut integral = Complex64::new(0.0, 0.0);

    let steps = grid.steps();
    let mut times = Vec::with_capacity(steps / grid.stride + 1);
    let mut pops = Vec::with_capacity(steps / grid.stride + 1);
    times.push(0.0);
    pops.push(1.0);
    for k in 1..=steps {
        let mut partial = Complex64::new(0.0, 0.0);
        for ((h, e), w) in hist.iter_mut().zip(&props).zip(&weights) {
            *h = *e * (*h + c * half);
            partial += *h * *w;
        }
        let c_new = (c - (integral + partial) * half) / (1.0 + half * q);
        for h in hist.iter_mut() {
            *h += c_new * half;
        }
        integral = partial + c_new * q;
        c = c_new;
        if k % grid.stride == 0 {
            times.push(k as f64 * dt);
            pops.push(c.norm_sqr());
        }
    }
    if !c.is_finite() {
        return Err(Error::Numerical("Volterra integration produced a non-finite amplitude".into()));
    }
    Ok(TimeSeries {
        times,
        populations: pops,
        mode_population: None,
    })
}

/// Same trapezoidal scheme as [`evolve_volterra`] for an arbitrary kernel
/// `K(τ)`, forming the history sum explicitly. Cost is quadratic in the number
/// of steps.
pub fn evolve_volterra_sampled<K>(kernel: K, grid: &TimeGrid) -> Result<TimeSeries>
where
    K: Fn(f64) -> Complex64,
{
    let dt = grid.dt;
    let steps = grid.steps();
    let samples: Vec<Complex64> = (0..=steps).map(|k| kernel(k as f64 * dt)).collect();
    let half = 0.5 * dt;
    let mut c = vec![Complex64::new(0.0, 0.0); steps + 1];
    c[0] = Complex64::new(1.0, 0.0);
    let mut integral_prev = Complex64::new(0.0, 0.0);

    let mut times = vec![0.0];
    let mut pops = vec![1.0];
    for n in 1..=steps {
        // I_n = dt[½K_n c_0 + Σ_{j=1}^{n−1} K_{n−j} c_j + ½K_0 c_n]
        let mut known = samples[n] * c[0] * 0.5;
        for j in 1..n {
            known += samples[n - j] * c[j];
        }
        known *= dt;
        let self_term = samples[0] * (half);
        c[n] = (c[n - 1] - (integral_prev + known) * half) / (Complex64::new(1.0, 0.0) + self_term * half);
        integral_prev = known + self_term * c[n];
        if n % grid.stride == 0 {
            times.push(n as f64 * dt);
            pops.push(c[n].norm_sqr());
        }
    }
    Ok(TimeSeries {
        times,
        populations: pops,
        mode_population: None,
    })
}

/// Pseudo-mode system equivalent to `kernel` for a single emitter.
pub fn pseudomode_system(kernel: &MemoryKernel) -> SingleExcitationSystem {
    SingleExcitationSystem {
        couplings: vec![kernel.terms.iter().map(|t| t.coupling).collect()],
        mode_rates: kernel.terms.iter().map(|t| t.rate).collect(),
    }
}

/// Integrates the emitter + pseudo-mode ODEs with the adaptive Dormand–Prince
/// integrator and samples on `grid`'s output times. The integrator chooses its
/// own steps, so `grid.dt` only fixes the output spacing.
pub fn evolve_pseudomode(kernel: &MemoryKernel, grid: &TimeGrid) -> Result<TimeSeries> {
    evolve_pseudomode_with(kernel, grid, &AdaptiveOptions::default())
}

pub fn evolve_pseudomode_with(kernel: &MemoryKernel, grid: &TimeGrid, opts: &AdaptiveOptions) -> Result<TimeSeries> {
    let system = pseudomode_system(kernel);
    let times = grid.output_times();
    let states = system.evolve(&[Complex64::new(1.0, 0.0)], &times, opts)?;
    let populations = states.iter().map(|s| s[0].norm_sqr()).collect();
    let modes = states.iter().map(|s| s[1..].iter().map(|b| b.norm_sqr()).sum()).collect();
    Ok(TimeSeries {
        times,
        populations,
        mode_population: Some(modes),
    })
}

/// Output of one radius in [`radius_sweep_dynamics`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusRun {
    pub radius: f64,
    pub emitter: EmitterConfig,
    pub kernel: MemoryKernel,
    pub series: TimeSeries,
}

/// Radii accepted by [`radius_sweep_dynamics`] (m).
pub const SWEEP_RADIUS_RANGE: (f64, f64) = (10e-9, 500e-9);

/// Decay dynamics for each radius with the emitter at `a = a_over_r·R` along
/// `direction` and tuned to the Kittel frequency. Runs in parallel; output
/// order follows `radii`.
pub fn radius_sweep_dynamics(
    radii: &[f64],
    template: &CavityConfig,
    a_over_r: f64,
    direction: Vector3,
    t_end: f64,
    samples: usize,
    dipole_scale: f64,
) -> Result<Vec<RadiusRun>> {
    for &r in radii {
        if !(SWEEP_RADIUS_RANGE.0..=SWEEP_RADIUS_RANGE.1).contains(&r) {
            return Err(Error::domain(format!(
                "sweep radius {:.1} nm outside [{:.0}, {:.0}] nm",
                r * 1e9,
                SWEEP_RADIUS_RANGE.0 * 1e9,
                SWEEP_RADIUS_RANGE.1 * 1e9
            )));
        }
    }
    radii
        .par_iter()
        .map(|&radius| {
            let cavity = template.with_radius(radius)?;
            let emitter = EmitterConfig::at_distance(a_over_r * radius, direction, cavity.kittel_frequency())?
                .with_dipole_scale(dipole_scale);
            let kernel = build_kernel(&emitter, &cavity)?;
            let grid = TimeGrid::with_samples(t_end, samples, f64::INFINITY)?;
            let series = evolve_pseudomode(&kernel, &grid)?;
            Ok(RadiusRun {
                radius,
                emitter,
                kernel,
                series,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::{Linewidth, MaterialParams};

    fn single(g: f64, detuning: f64, linewidth: f64) -> MemoryKernel {
        MemoryKernel::new(vec![KernelTerm::new(g, detuning, linewidth)])
    }

    #[test]
    fn empty_bath_keeps_excitation() {
        let grid = TimeGrid::new(1e-6, 1e-8).unwrap();
        let k = MemoryKernel::default();
        for s in [evolve_volterra(&k, &grid).unwrap(), evolve_pseudomode(&k, &grid).unwrap()] {
            assert!(s.populations.iter().all(|&p| (p - 1.0).abs() < 1e-15));
        }
    }

    #[test]
    fn resonant_lossless_kernel_is_constant() {
        let k = single(3.0, 0.0, 0.0);
        for tau in [0.0, 0.7, 12.0] {
            assert!((k.evaluate(tau) - Complex64::new(9.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn lossy_kernel_envelope() {
        let k = MemoryKernel::new(vec![KernelTerm::new(2.0, 5.0, 0.4), KernelTerm::new(1.0, -3.0, 0.4)]);
        assert_eq!(k.evaluate(0.0), Complex64::new(5.0, 0.0));
        for i in 0..200 {
            let tau = i as f64 * 0.1;
            assert!(k.evaluate(tau).norm() <= k.total_weight() * (-0.2 * tau).exp() + 1e-12);
        }
    }

    #[test]
    fn vacuum_rabi_cosine_both_solvers() {
        let g = 2.0 * PI * 1e6;
        let k = single(g, 0.0, 0.0);
        let grid = TimeGrid::for_kernel(&k, 1e-6, 2000).unwrap();
        let v = evolve_volterra(&k, &grid).unwrap();
        let p = evolve_pseudomode(&k, &grid).unwrap();
        for ((t, a), b) in v.times.iter().zip(&v.populations).zip(&p.populations) {
            let exact = (g * t).cos().powi(2);
            assert!((a - exact).abs() < 1e-5, "volterra at {t}");
            assert!((b - exact).abs() < 1e-8, "pseudomode at {t}");
        }
        let (t_min, _) = p.first_minimum().unwrap();
        assert!((t_min - PI / (2.0 * g)).abs() / t_min < 1e-4);
        let (t_rev, p_rev) = p.first_revival().unwrap();
        assert!((t_rev - PI / g).abs() / t_rev < 1e-4);
        assert!((p_rev - 1.0).abs() < 1e-6);
    }

    #[test]
    fn norm_conserved_without_loss() {
        let k = MemoryKernel::new(vec![KernelTerm::new(1e6, 0.0, 0.0), KernelTerm::new(3e6, 4e7, 0.0)]);
        let grid = TimeGrid::new(5e-6, 1e-8).unwrap();
        let s = evolve_pseudomode(&k, &grid).unwrap();
        let modes = s.mode_population.as_ref().unwrap();
        for (p, b) in s.populations.iter().zip(modes) {
            assert!((p + b - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn detuned_dip_depth() {
        let g = 1e6;
        let delta = 10.0 * g;
        let k = single(g, delta, 0.0);
        let grid = TimeGrid::new(2e-6, 1e-10).unwrap();
        let s = evolve_pseudomode(&k, &grid).unwrap();
        let depth = 1.0 - s.populations.iter().cloned().fold(1.0, f64::min);
        let expected = 4.0 * g * g / (4.0 * g * g + delta * delta);
        assert!((depth - expected).abs() / expected < 1e-3);
        assert!((expected - 0.0385).abs() < 1e-3);
    }

    #[test]
    fn sampled_and_recursive_volterra_agree() {
        let k = MemoryKernel::new(vec![KernelTerm::new(1e6, 2e6, 3e5), KernelTerm::new(2e6, -8e6, 1e6)]);
        let grid = TimeGrid::new(1e-6, 2e-10).unwrap().with_stride(10);
        let a = evolve_volterra(&k, &grid).unwrap();
        let b = evolve_volterra_sampled(|t| k.evaluate(t), &grid).unwrap();
        assert!(a.max_abs_difference(&b) < 1e-12);
    }

    #[test]
    fn resolution_guard_names_constraint() {
        let k = single(1e6, 0.0, 0.0);
        let grid = TimeGrid::new(1e-6, 1e-7).unwrap();
        match evolve_volterra(&k, &grid) {
            Err(Error::Resolution { constraint, .. }) => assert!(constraint.contains("coupling")),
            other => panic!("expected resolution error, got {other:?}"),
        }
        let k = single(1e3, 1e9, 0.0);
        match evolve_volterra(&k, &grid) {
            Err(Error::Resolution { constraint, .. }) => assert!(constraint.contains("detuning")),
            other => panic!("expected resolution error, got {other:?}"),
        }
    }

    #[test]
    fn populations_bounded_and_decay_with_loss() {
        let g = 2.0 * PI * 1e6;
        let gamma = 4e7;
        let k = single(g, 0.0, gamma);
        let grid = TimeGrid::new(2e-6, 1e-9).unwrap();
        let s = evolve_pseudomode(&k, &grid).unwrap();
        assert!(s.populations.iter().all(|&p| (0.0..=1.0 + 1e-9).contains(&p)));
        assert!(*s.populations.last().unwrap() < 1e-3);
    }

    #[test]
    fn sweep_rejects_radius_out_of_range() {
        let c = CavityConfig::with_internal_tesla(30e-9, 0.5, MaterialParams::yig(), 1).unwrap();
        let err = radius_sweep_dynamics(&[5e-9], &c, 1.2, Vector3::x(), 1e-6, 10, 1.0).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn kernel_from_cavity() {
        let mat = MaterialParams::yig().with_linewidth(Linewidth::Fixed { gamma: 1e6 });
        let c = CavityConfig::with_internal_tesla(30e-9, 0.5, mat, 4).unwrap();
        let e = EmitterConfig::at_distance(36e-9, Vector3::x(), c.kittel_frequency()).unwrap();
        let k = build_kernel(&e, &c).unwrap();
        assert_eq!(k.terms.len(), 4);
        assert_eq!(k.terms[0].detuning(), 0.0);
        assert!(k.terms[1..].iter().all(|t| t.detuning() < 0.0));
        assert!(k.terms.iter().all(|t| (t.linewidth() - 1e6).abs() < 1e-6));
    }
}
