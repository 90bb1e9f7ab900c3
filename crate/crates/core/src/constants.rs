//! Physical constants and the handful of unit conversions used across the crate.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// SI constants. `gyromagnetic_ratio` is the positive γ in rad/(s·T).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constants {
    /// Vacuum permeability μ0 (T·m/A).
    pub mu0: f64,
    /// Bohr magneton μB (J/T).
    pub mu_b: f64,
    /// Reduced Planck constant ħ (J·s).
    pub hbar: f64,
    /// Speed of light (m/s).
    pub c_light: f64,
    /// γ in rad/(s·T), i.e. 2π × 28 GHz/T by default.
    pub gyromagnetic_ratio: f64,
}

/// Default constant set; μ0 uses the classical 4π×10⁻⁷ value.
pub const SI: Constants = Constants {
    mu0: 4.0e-7 * PI,
    mu_b: 9.274_010_078_3e-24,
    hbar: 1.054_571_817e-34,
    c_light: 299_792_458.0,
    gyromagnetic_ratio: 2.0 * PI * 28.0e9,
};

impl Default for Constants {
    fn default() -> Self {
        SI
    }
}

impl Constants {
    /// γ/(2π) in Hz/T.
    pub fn gamma_over_2pi(&self) -> f64 {
        self.gyromagnetic_ratio / (2.0 * PI)
    }

    /// Constant set with γ given as γ/(2π) in GHz/T.
    pub fn with_gamma_ghz_per_tesla(self, gamma_ghz: f64) -> Self {
        Constants {
            gyromagnetic_ratio: 2.0 * PI * gamma_ghz * 1e9,
            ..self
        }
    }
}

/// μ0·H in tesla → H in A/m.
pub fn tesla_to_field(mu0_h: f64) -> Result<f64> {
    if !mu0_h.is_finite() {
        return Err(Error::domain(format!("field {mu0_h} T is not finite")));
    }
    Ok(mu0_h / SI.mu0)
}

/// H in A/m → μ0·H in tesla.
pub fn field_to_tesla(h: f64) -> f64 {
    h * SI.mu0
}

/// Angular frequency (rad/s) → ordinary frequency in GHz.
pub fn angular_to_ghz(omega: f64) -> f64 {
    omega / (2.0 * PI * 1e9)
}

/// Ordinary frequency in GHz → angular frequency (rad/s).
pub fn ghz_to_angular(f_ghz: f64) -> f64 {
    f_ghz * 2.0 * PI * 1e9
}

/// Volume in m³ → mm³ (1 mm³ = 10⁻⁹ m³).
pub fn cubic_metres_to_mm3(v: f64) -> f64 {
    v * 1e9
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_field_maps_to_zero() {
        assert_eq!(tesla_to_field(0.0).unwrap(), 0.0);
    }

    #[test]
    fn yig_magnetization_in_amperes_per_metre() {
        let h = tesla_to_field(0.178).unwrap();
        let expected = 0.178 / (4.0e-7 * PI);
        assert!((h - expected).abs() / expected < 1e-15);
        assert!((h - 1.4165e5).abs() / 1.4165e5 < 1e-4);
    }

    #[test]
    fn tesla_round_trip() {
        for &b in &[0.5, 1e-6, 3.2, -0.7] {
            let back = field_to_tesla(tesla_to_field(b).unwrap());
            assert!((back - b).abs() <= 1e-12 * b.abs());
        }
    }

    #[test]
    fn non_finite_field_rejected() {
        assert!(matches!(tesla_to_field(f64::NAN), Err(Error::Domain(_))));
        assert!(tesla_to_field(f64::INFINITY).is_err());
    }

    #[test]
    fn gamma_exposed_both_ways() {
        assert!((SI.gamma_over_2pi() - 28e9).abs() < 1e-3);
        let c = SI.with_gamma_ghz_per_tesla(56.0);
        assert!((c.gyromagnetic_ratio - 2.0 * SI.gyromagnetic_ratio).abs() < 1e-3);
        assert!(c.gyromagnetic_ratio > 0.0);
    }
}
