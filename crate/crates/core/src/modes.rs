//! Magnetostatic modes of a gyrotropic sphere on the `(n, m = n)` Walker branch.
//!
//! Inside the sphere the scalar potential is the regular solid harmonic
//! `ψ = (x − iy)ⁿ`, whose gradient is everywhere parallel to
//! `e^(−) = (x̂ − iŷ)/√2` and therefore sees only the resonant eigenvalue
//! `χ + κ` of the susceptibility. Outside it continues as the decaying harmonic
//! `(x − iy)ⁿ R²ⁿ⁺¹ / r²ⁿ⁺¹`. Continuity of the normal induction at `r = R`
//! then requires `χ + κ = −(2n + 1)/n`, i.e.
//!
//! ```text
//!   ω_n = γμ0 (H0 + Ms·n/(2n + 1))
//! ```
//!
//! which is the Kittel frequency for `n = 1`.
//!
//! Positions are handled in units of the radius internally (`s = r/R`) so that
//! high orders do not underflow.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::SI;
use crate::dynamics::EmitterConfig;
use crate::error::{Error, Result};
use crate::material::{energy_tensor, MaterialParams, StaticFieldState};
use crate::quadrature::{sin_power_integral, GaussLegendre};
use crate::{CVector3, Vector3};

/// Points closer than this fraction of `R` to the surface count as exterior.
pub const BOUNDARY_TOLERANCE: f64 = 1e-12;

/// e^(+) = (x̂ + iŷ)/√2.
pub fn e_plus() -> CVector3 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CVector3::new(Complex64::new(s, 0.0), Complex64::new(0.0, s), Complex64::new(0.0, 0.0))
}

/// e^(−) = (x̂ − iŷ)/√2.
pub fn e_minus() -> CVector3 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CVector3::new(Complex64::new(s, 0.0), Complex64::new(0.0, -s), Complex64::new(0.0, 0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityConfig {
    /// Sphere radius (m).
    pub radius: f64,
    pub material: MaterialParams,
    pub fields: StaticFieldState,
    /// Highest multipole order retained.
    pub n_max: u32,
}

impl CavityConfig {
    pub fn new(radius: f64, material: MaterialParams, fields: StaticFieldState, n_max: u32) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::domain(format!("sphere radius must be positive, got {radius} m")));
        }
        if n_max < 1 {
            return Err(Error::domain("n_max must be at least 1"));
        }
        if !(fields.internal > 0.0) {
            return Err(Error::domain(format!(
                "internal field must be positive, got {} A/m",
                fields.internal
            )));
        }
        Ok(CavityConfig {
            radius,
            material,
            fields,
            n_max,
        })
    }

    /// Cavity at internal field `μ0·H0 = mu0_h0` tesla.
    pub fn with_internal_tesla(radius: f64, mu0_h0: f64, material: MaterialParams, n_max: u32) -> Result<Self> {
        let fields = StaticFieldState::from_internal(mu0_h0 / SI.mu0, &material)?;
        Self::new(radius, material, fields, n_max)
    }

    /// Physical volume 4πR³/3.
    pub fn volume(&self) -> f64 {
        4.0 / 3.0 * PI * self.radius.powi(3)
    }

    /// Magnon linewidth Γ at the current internal field.
    pub fn linewidth(&self) -> f64 {
        self.material.linewidth_at(self.fields.internal)
    }

    pub fn kittel_frequency(&self) -> f64 {
        kittel_frequency(&self.fields, &self.material)
    }

    pub fn with_radius(&self, radius: f64) -> Result<Self> {
        Self::new(radius, self.material, self.fields, self.n_max)
    }

    pub fn with_internal_field(&self, h0: f64) -> Result<Self> {
        let fields = StaticFieldState::from_internal(h0, &self.material)?;
        Self::new(self.radius, self.material, fields, self.n_max)
    }

    pub fn with_material(&self, material: MaterialParams) -> Result<Self> {
        let fields = StaticFieldState::from_internal(self.fields.internal, &material)?;
        Self::new(self.radius, material, fields, self.n_max)
    }

    /// Quantized modes `n = 1..=n_max`.
    pub fn modes(&self) -> Result<Vec<MagnonMode>> {
        (1..=self.n_max).map(|n| quantize_mode(n, self)).collect()
    }

    pub(crate) fn is_exterior(&self, r: &Vector3) -> bool {
        r.norm() >= self.radius * (1.0 - BOUNDARY_TOLERANCE)
    }
}

fn branch_frequency(n: u32, fields: &StaticFieldState, mat: &MaterialParams) -> f64 {
    let nf = n as f64;
    mat.gamma_tilde() * (fields.internal + mat.ms * nf / (2.0 * nf + 1.0))
}

/// ω_K = γμ0(H0 + Ms/3).
pub fn kittel_frequency(fields: &StaticFieldState, mat: &MaterialParams) -> f64 {
    branch_frequency(1, fields, mat)
}

/// ω_n = γμ0(H0 + Ms·n/(2n+1)) on the `(n, n)` branch.
pub fn mode_frequency(n: u32, fields: &StaticFieldState, mat: &MaterialParams) -> Result<f64> {
    if n < 1 {
        return Err(Error::domain("multipole order must be at least 1"));
    }
    Ok(branch_frequency(n, fields, mat))
}

/// Potential `(x − iy)ⁿ` in radius units; valid for `|s| ≤ 1`.
pub fn interior_potential(n: u32, s: &Vector3) -> Complex64 {
    Complex64::new(s.x, -s.y).powu(n)
}

/// Matched exterior potential `(x − iy)ⁿ / |s|²ⁿ⁺¹` in radius units.
pub fn exterior_potential(n: u32, s: &Vector3) -> Complex64 {
    interior_potential(n, s) / s.norm().powi(2 * n as i32 + 1)
}

/// Unnormalized field shape `−∇ψ` of mode `n` at `r` (m), with the gradient
/// taken in radius units. The interior peak magnitude is `n·√2`.
pub fn mode_field(n: u32, r: &Vector3, cavity: &CavityConfig) -> Result<CVector3> {
    if n < 1 {
        return Err(Error::domain("multipole order must be at least 1"));
    }
    if !(r.x.is_finite() && r.y.is_finite() && r.z.is_finite()) {
        return Err(Error::domain("field position must be finite"));
    }
    let s = r / cavity.radius;
    Ok(if cavity.is_exterior(r) {
        exterior_shape(n, &s)
    } else {
        interior_shape(n, &s)
    })
}

/// Scalar potential shape of mode `n`, consistent with [`mode_field`].
pub fn mode_potential(n: u32, r: &Vector3, cavity: &CavityConfig) -> Complex64 {
    let s = r / cavity.radius;
    if cavity.is_exterior(r) {
        exterior_potential(n, &s)
    } else {
        interior_potential(n, &s)
    }
}

fn minus_direction() -> CVector3 {
    CVector3::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, -1.0), Complex64::new(0.0, 0.0))
}

fn interior_shape(n: u32, s: &Vector3) -> CVector3 {
    let u = Complex64::new(s.x, -s.y);
    let coeff = -(n as f64) * u.powu(n - 1);
    minus_direction() * coeff
}

fn exterior_shape(n: u32, s: &Vector3) -> CVector3 {
    let u = Complex64::new(s.x, -s.y);
    let nf = n as f64;
    let rho = s.norm();
    let un1 = u.powu(n - 1);
    let un = un1 * u;
    let transverse = un1 * nf / rho.powi(2 * n as i32 + 1);
    let radial = un * (2.0 * nf + 1.0) / rho.powi(2 * n as i32 + 3);
    let sc = s.map(|c| Complex64::new(c, 0.0));
    // H = −∇ψ
    sc * radial - minus_direction() * transverse
}

/// A quantized magnon mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MagnonMode {
    pub n: u32,
    pub m: i32,
    /// Resonance frequency (rad/s).
    pub omega: f64,
    /// Linewidth Γ (rad/s).
    pub linewidth: f64,
    /// Effective mode volume referred to the peak interior field (m³).
    pub veff: f64,
    /// Zero-point field amplitude `H̃ = √(ħω/(μ0 V_eff))` (A/m).
    pub hzp: f64,
    /// Scale (A/m) turning the unit shape of [`mode_field`] into the
    /// single-quantum field.
    pub amplitude: f64,
    pub radius: f64,
}

impl MagnonMode {
    /// Single-quantum field `H̃(r)` (A/m).
    pub fn field(&self, r: &Vector3) -> CVector3 {
        let s = r / self.radius;
        let shape = if r.norm() >= self.radius * (1.0 - BOUNDARY_TOLERANCE) {
            exterior_shape(self.n, &s)
        } else {
            interior_shape(self.n, &s)
        };
        shape * Complex64::new(self.amplitude, 0.0)
    }
}

/// Radial, polar and azimuthal node counts used for the normalization integral.
fn normalization_rule(n: u32) -> (GaussLegendre, usize) {
    (GaussLegendre::new(n as usize + 8), 4)
}

/// Quantizes mode `n`: scales the field shape so that the dispersive field
/// energy over all space equals ħω_n.
///
/// The interior integrand uses `∂(ω[I + χ])/∂ω` of the lossless medium; the
/// exterior is vacuum. Both regions are integrated with tensor Gauss–Legendre
/// rules, exterior after the substitution `t = R/r`, so the polynomial
/// integrands are captured exactly.
pub fn quantize_mode(n: u32, cavity: &CavityConfig) -> Result<MagnonMode> {
    let omega = mode_frequency(n, &cavity.fields, &cavity.material)?;
    let weight = energy_tensor(omega, cavity.fields.internal, &cavity.material)?;
    let (gl, n_phi) = normalization_rule(n);

    let mut interior = 0.0;
    let mut exterior = 0.0;
    for (mu, w_mu) in gl.mapped(-1.0, 1.0) {
        let sin_t = (1.0 - mu * mu).max(0.0).sqrt();
        for k in 0..n_phi {
            let phi = 2.0 * PI * k as f64 / n_phi as f64;
            let w_phi = 2.0 * PI / n_phi as f64;
            let dir = Vector3::new(sin_t * phi.cos(), sin_t * phi.sin(), mu);
            for (x, w_x) in gl.mapped(0.0, 1.0) {
                let h = interior_shape(n, &(dir * x));
                let e = h.dotc(&(weight * h)).re;
                interior += w_mu * w_phi * w_x * x * x * e;

                // exterior, s = 1/x, d³s = x⁻⁴ dx dΩ
                let h = exterior_shape(n, &(dir / x));
                exterior += w_mu * w_phi * w_x * h.norm_squared() / x.powi(4);
            }
        }
    }
    let total = interior + exterior;
    if !(total.is_finite() && total > 0.0) {
        return Err(Error::Numerical(format!(
            "mode normalization integral for n = {n} is not positive and finite ({total:e})"
        )));
    }

    let r3 = cavity.radius.powi(3);
    let energy = SI.hbar * omega;
    let amplitude = (energy / (SI.mu0 * r3 * total)).sqrt();
    let peak_shape = n as f64 * std::f64::consts::SQRT_2;
    let hzp = amplitude * peak_shape;
    let veff = energy / (SI.mu0 * hzp * hzp);
    if !(veff.is_finite() && veff > 0.0 && hzp.is_finite() && hzp > 0.0) {
        return Err(Error::Numerical(format!(
            "mode n = {n}: quantization overflowed (V_eff = {veff:e} m³, zero-point field {hzp:e} A/m)"
        )));
    }
    Ok(MagnonMode {
        n,
        m: n as i32,
        omega,
        linewidth: cavity.linewidth(),
        veff,
        hzp,
        amplitude,
        radius: cavity.radius,
    })
}

/// Closed-form effective volume of mode `n`,
/// `π·S_{2n+1}·ω_n·(2n+1)²·R³ / (γμ0·Ms·n³)` with `S_k = ∫₀^π sinᵏθ dθ`.
pub fn analytic_mode_volume(n: u32, cavity: &CavityConfig) -> Result<f64> {
    let omega = mode_frequency(n, &cavity.fields, &cavity.material)?;
    let nf = n as f64;
    let s = sin_power_integral(2 * n + 1);
    Ok(PI * s * omega * (2.0 * nf + 1.0).powi(2) * cavity.radius.powi(3)
        / (cavity.material.gamma_tilde() * cavity.material.ms * nf.powi(3)))
}

/// Kittel-mode volume `3V(Ms + 3H0)/Ms`.
pub fn kittel_mode_volume(cavity: &CavityConfig) -> f64 {
    let ms = cavity.material.ms;
    3.0 * cavity.volume() * (ms + 3.0 * cavity.fields.internal) / ms
}

/// Spin–magnon coupling `g` (rad/s) of `mode` to `emitter`.
///
/// `ħg = |μ0 H̃*(r)·m_xy|` with `m_xy = −√2 μB e^(+)`: the transition couples
/// to the component of the mode field that the circular projection of the
/// dyadic response selects, so the on-axis Kittel field (pure e^(−)) does not
/// couple while the equatorial field does.
pub fn coupling_strength(mode: &MagnonMode, emitter: &EmitterConfig) -> Result<f64> {
    if emitter.position.norm() < mode.radius * (1.0 - BOUNDARY_TOLERANCE) {
        return Err(Error::domain(format!(
            "emitter at |r| = {:.4e} m lies inside the sphere of radius {:.4e} m",
            emitter.position.norm(),
            mode.radius
        )));
    }
    let h = mode.field(&emitter.position);
    let m = emitter.transition_dipole();
    Ok(SI.mu0 * h.dotc(&m).norm() / SI.hbar)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::tesla_to_field;
    use crate::material::Linewidth;

    fn cavity(r_nm: f64, n_max: u32) -> CavityConfig {
        CavityConfig::with_internal_tesla(r_nm * 1e-9, 0.5, MaterialParams::yig(), n_max).unwrap()
    }

    #[test]
    fn kittel_frequency_at_half_tesla() {
        let c = cavity(30.0, 1);
        let f = c.kittel_frequency() / (2.0 * PI * 1e9);
        assert!((f - 28.0 * (0.5 + 0.178 / 3.0)).abs() < 1e-9);
        assert!((f - 15.66).abs() < 0.01);
    }

    #[test]
    fn kittel_without_magnetization_is_larmor() {
        let mat = MaterialParams {
            ms: 0.0,
            ..MaterialParams::yig()
        };
        let fields = StaticFieldState {
            external: 1e5,
            demagnetizing: 0.0,
            internal: 1e5,
        };
        assert_eq!(kittel_frequency(&fields, &mat), mat.gamma_tilde() * 1e5);
    }

    #[test]
    fn kittel_scales_with_gyromagnetic_ratio() {
        let c = cavity(30.0, 1);
        let mut mat = c.material;
        mat.gyromagnetic_ratio *= 2.0;
        let w2 = kittel_frequency(&c.fields, &mat);
        assert!((w2 / c.kittel_frequency() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn mode_one_is_kittel_bitwise() {
        let c = cavity(30.0, 1);
        assert_eq!(mode_frequency(1, &c.fields, &c.material).unwrap(), c.kittel_frequency());
        assert!(mode_frequency(0, &c.fields, &c.material).is_err());
    }

    #[test]
    fn branch_is_increasing_and_bounded() {
        let c = cavity(30.0, 25);
        let upper = c.material.gamma_tilde() * (c.fields.internal + c.material.ms / 2.0);
        let mut prev = 0.0;
        for n in 1..=25 {
            let w = mode_frequency(n, &c.fields, &c.material).unwrap();
            assert!(w > prev);
            assert!(w >= c.kittel_frequency() && w < upper);
            prev = w;
        }
        let far = mode_frequency(1_000_000, &c.fields, &c.material).unwrap();
        assert!((upper - far) / upper < 1e-7);
    }

    #[test]
    fn dipole_interior_is_uniform_and_circular() {
        let c = cavity(30.0, 1);
        let a = mode_field(1, &Vector3::new(1e-9, 2e-9, -3e-9), &c).unwrap();
        let b = mode_field(1, &Vector3::new(-1.5e-8, 0.0, 1e-8), &c).unwrap();
        assert!((a - b).norm() < 1e-15);
        // parallel to e^(−)
        let proj = e_minus().dotc(&a);
        assert!((proj.norm() - a.norm()).abs() < 1e-14);
    }

    #[test]
    fn every_interior_field_is_minus_polarized() {
        let c = cavity(30.0, 6);
        let p = Vector3::new(7e-9, -4e-9, 9e-9);
        for n in 1..=6 {
            let h = mode_field(n, &p, &c).unwrap();
            assert!(e_plus().dotc(&h).norm() < 1e-14 * h.norm().max(1e-300));
        }
    }

    #[test]
    fn dipole_exterior_matches_tensor_formula() {
        let c = cavity(30.0, 1);
        let r = Vector3::new(36e-9, 0.0, 0.0);
        let h = mode_field(1, &r, &c).unwrap();
        // √2 R³ (3 r̂r̂ − I)/r³ · e^(−), with the shape scaled so |H_in| = √2
        let rr = r.norm();
        let rhat = r / rr;
        let t = (rhat * rhat.transpose() * 3.0 - nalgebra::Matrix3::identity()) / (rr / c.radius).powi(3);
        let expected = t.map(|x| Complex64::new(x, 0.0)) * e_minus() * Complex64::new(std::f64::consts::SQRT_2, 0.0);
        assert!((h - expected).norm() < 1e-13);
    }

    #[test]
    fn exterior_decay_power_law() {
        let c = cavity(30.0, 2);
        let dir = Vector3::new(0.6, 0.0, 0.8);
        let near = mode_field(2, &(dir * c.radius), &c).unwrap().norm();
        let far = mode_field(2, &(dir * 2.0 * c.radius), &c).unwrap().norm();
        assert!((far / near - 1.0 / 16.0).abs() < 1e-12);
    }

    #[test]
    fn boundary_shell_evaluates_as_exterior() {
        let c = cavity(30.0, 3);
        let r = Vector3::new(c.radius * (1.0 - 1e-13), 0.0, 0.0);
        let s = r / c.radius;
        let got = mode_field(3, &r, &c).unwrap();
        assert_eq!(got, exterior_shape(3, &s));
    }

    #[test]
    fn potentials_continuous_on_surface() {
        for n in 1..=8 {
            for k in 0..20 {
                let th = 0.1 + 0.147 * k as f64;
                let ph = 0.31 * k as f64;
                let s = Vector3::new(th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos());
                let a = interior_potential(n, &s);
                let b = exterior_potential(n, &s);
                assert!((a - b).norm() <= 1e-10 * a.norm().max(1e-12));
            }
        }
    }

    #[test]
    fn mode_volume_closed_forms_agree() {
        let c = cavity(30.0, 10);
        let kittel = kittel_mode_volume(&c);
        let general = analytic_mode_volume(1, &c).unwrap();
        assert!((kittel - general).abs() / kittel < 1e-13);
        for n in 1..=10 {
            let q = quantize_mode(n, &c).unwrap();
            let a = analytic_mode_volume(n, &c).unwrap();
            assert!((q.veff - a).abs() / a < 1e-10, "n = {n}: {} vs {a}", q.veff);
        }
    }

    #[test]
    fn mode_volume_scales_with_particle_volume() {
        let a = quantize_mode(1, &cavity(30.0, 1)).unwrap();
        let b = quantize_mode(1, &cavity(60.0, 1)).unwrap();
        assert!((b.veff / a.veff - 8.0).abs() < 1e-10);
    }

    #[test]
    fn zero_point_field_definition() {
        let c = cavity(45.0, 5);
        for m in c.modes().unwrap() {
            let lhs = m.hzp * m.hzp * m.veff * SI.mu0;
            let rhs = SI.hbar * m.omega;
            assert!((lhs - rhs).abs() / rhs < 1e-12);
        }
    }

    #[test]
    fn quantization_ignores_loss() {
        let lossy = cavity(30.0, 1);
        let lossless = lossy
            .with_material(lossy.material.with_linewidth(Linewidth::Fixed { gamma: 0.0 }))
            .unwrap();
        let a = quantize_mode(1, &lossy).unwrap();
        let b = quantize_mode(1, &lossless).unwrap();
        assert_eq!(a.veff, b.veff);
        assert_eq!(a.linewidth, 1e7);
    }

    #[test]
    fn coupling_dipolar_falloff() {
        let c = cavity(30.0, 1);
        let mode = quantize_mode(1, &c).unwrap();
        let w = c.kittel_frequency();
        let near = EmitterConfig::new(Vector3::new(36e-9, 0.0, 0.0), w);
        let far = EmitterConfig::new(Vector3::new(72e-9, 0.0, 0.0), w);
        let g1 = coupling_strength(&mode, &near).unwrap();
        let g2 = coupling_strength(&mode, &far).unwrap();
        assert!((g1 / g2 - 8.0).abs() < 1e-10);
    }

    #[test]
    fn coupling_rejects_interior_emitter() {
        let c = cavity(30.0, 1);
        let mode = quantize_mode(1, &c).unwrap();
        let e = EmitterConfig::new(Vector3::new(10e-9, 0.0, 0.0), 1e11);
        assert!(matches!(coupling_strength(&mode, &e), Err(Error::Domain(_))));
    }

    #[test]
    fn coupling_scales_with_dipole() {
        let c = cavity(30.0, 1);
        let mode = quantize_mode(1, &c).unwrap();
        let e = EmitterConfig::new(Vector3::new(36e-9, 0.0, 0.0), 1e11);
        let g1 = coupling_strength(&mode, &e).unwrap();
        let g2 = coupling_strength(&mode, &e.with_dipole_scale(2.0)).unwrap();
        assert!((g2 / g1 - 2.0).abs() < 1e-14);
    }

    #[test]
    fn field_evaluator_is_shareable() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<MagnonMode>();
        assert_send_sync::<CavityConfig>();
    }

    #[test]
    fn invalid_cavity_rejected() {
        let mat = MaterialParams::yig();
        let f = StaticFieldState::from_internal(tesla_to_field(0.5).unwrap(), &mat).unwrap();
        assert!(CavityConfig::new(0.0, mat, f, 3).is_err());
        assert!(CavityConfig::new(1e-8, mat, f, 0).is_err());
    }
}
