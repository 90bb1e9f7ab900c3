//! Gyrotropic magnetic response of a saturated ferrimagnet.
//!
//! With the static magnetization along `z`, the linearized Landau–Lifshitz–Gilbert
//! equation gives `M = χ(ω)·H` with
//!
//! ```text
//!        ⎡  χ   iκ  0 ⎤        γ̃²H0·Ms                    γ̃·ω·Ms
//!   χ =  ⎢ -iκ   χ  0 ⎥ ,  χ = ───────────────── ,  κ = ─────────────────
//!        ⎣  0    0  0 ⎦        γ̃²H0² − ω² − iΓω          γ̃²H0² − ω² − iΓω
//! ```
//!
//! where `γ̃ = γ·μ0` turns fields in A/m into angular frequencies.

use nalgebra::Matrix3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::SI;
use crate::error::{Error, Result};

/// Magnon linewidth model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Linewidth {
    /// Fixed Γ in rad/s.
    Fixed { gamma: f64 },
    /// Γ = 2·α·γ·μ0·H0, recomputed for every internal field.
    Gilbert { alpha: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialParams {
    /// Saturation magnetization Ms (A/m).
    pub ms: f64,
    /// Gyromagnetic ratio γ (rad/(s·T)), positive.
    pub gyromagnetic_ratio: f64,
    pub linewidth: Linewidth,
}

impl MaterialParams {
    pub fn new(ms: f64, gyromagnetic_ratio: f64, linewidth: Linewidth) -> Result<Self> {
        if !(ms > 0.0 && ms.is_finite()) {
            return Err(Error::domain(format!("saturation magnetization must be positive, got {ms} A/m")));
        }
        if !(gyromagnetic_ratio > 0.0 && gyromagnetic_ratio.is_finite()) {
            return Err(Error::domain(format!(
                "gyromagnetic ratio must be positive, got {gyromagnetic_ratio} rad/(s·T)"
            )));
        }
        match linewidth {
            Linewidth::Fixed { gamma } if !(gamma >= 0.0 && gamma.is_finite()) => {
                return Err(Error::domain(format!("linewidth must be non-negative, got {gamma} rad/s")));
            }
            Linewidth::Gilbert { alpha } if !(alpha >= 0.0 && alpha.is_finite()) => {
                return Err(Error::domain(format!("Gilbert damping must be non-negative, got {alpha}")));
            }
            _ => {}
        }
        Ok(MaterialParams {
            ms,
            gyromagnetic_ratio,
            linewidth,
        })
    }

    /// YIG: μ0Ms = 0.178 T, γ/(2π) = 28 GHz/T, Γ = 10⁷ rad/s.
    pub fn yig() -> Self {
        MaterialParams {
            ms: 0.178 / SI.mu0,
            gyromagnetic_ratio: SI.gyromagnetic_ratio,
            linewidth: Linewidth::Fixed { gamma: 1e7 },
        }
    }

    pub fn with_linewidth(self, linewidth: Linewidth) -> Self {
        MaterialParams { linewidth, ..self }
    }

    /// γ̃ = γ·μ0, in rad/s per (A/m).
    pub fn gamma_tilde(&self) -> f64 {
        self.gyromagnetic_ratio * SI.mu0
    }

    /// Γ (rad/s) at internal field `h0` (A/m).
    pub fn linewidth_at(&self, h0: f64) -> f64 {
        match self.linewidth {
            Linewidth::Fixed { gamma } => gamma,
            Linewidth::Gilbert { alpha } => 2.0 * alpha * self.gamma_tilde() * h0,
        }
    }
}

/// Static fields inside a uniformly magnetized sphere, all along `z` (A/m).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StaticFieldState {
    pub external: f64,
    pub demagnetizing: f64,
    pub internal: f64,
}

impl StaticFieldState {
    /// Back-computes the external field that produces internal field `h0`.
    pub fn from_internal(h0: f64, mat: &MaterialParams) -> Result<Self> {
        if !(h0 > 0.0 && h0.is_finite()) {
            return Err(Error::domain(format!(
                "internal field must be positive for a saturated sphere, got {h0} A/m"
            )));
        }
        let demagnetizing = -mat.ms / 3.0;
        Ok(StaticFieldState {
            external: h0 - demagnetizing,
            demagnetizing,
            internal: h0,
        })
    }
}

/// Internal field `H0 = He − Ms/3` of a sphere in external field `he`.
pub fn internal_field(he: f64, mat: &MaterialParams) -> Result<StaticFieldState> {
    let demagnetizing = -mat.ms / 3.0;
    let internal = he + demagnetizing;
    if !(internal > 0.0) || !he.is_finite() {
        return Err(Error::domain(format!(
            "external field {he:.6e} A/m does not exceed Ms/3 = {:.6e} A/m: sphere is not saturated",
            mat.ms / 3.0
        )));
    }
    Ok(StaticFieldState {
        external: he,
        demagnetizing,
        internal,
    })
}

/// Diagonal and off-diagonal elements of the gyrotropic susceptibility.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SusceptibilityTensor {
    pub chi: Complex64,
    pub kappa: Complex64,
}

impl SusceptibilityTensor {
    /// Full 3×3 tensor with χ_xy = iκ, χ_yx = −iκ, χ_zz = 0.
    pub fn tensor(&self) -> Matrix3<Complex64> {
        let i = Complex64::i();
        let z = Complex64::new(0.0, 0.0);
        Matrix3::new(
            self.chi, i * self.kappa, z, //
            -i * self.kappa, self.chi, z, //
            z, z, z,
        )
    }

    /// Eigenvalue on e^(−) = (x̂ − iŷ)/√2. This is the resonant polarization.
    pub fn minus_eigenvalue(&self) -> Complex64 {
        self.chi + self.kappa
    }

    /// Eigenvalue on e^(+) = (x̂ + iŷ)/√2.
    pub fn plus_eigenvalue(&self) -> Complex64 {
        self.chi - self.kappa
    }
}

fn check_internal(h0: f64) -> Result<()> {
    if !(h0 > 0.0 && h0.is_finite()) {
        return Err(Error::domain(format!("internal field must be positive, got {h0} A/m")));
    }
    Ok(())
}

/// χ(ω) and κ(ω) at internal field `h0`, with Γ taken from the material.
pub fn susceptibility(omega: f64, h0: f64, mat: &MaterialParams) -> Result<SusceptibilityTensor> {
    check_internal(h0)?;
    let gt = mat.gamma_tilde();
    let damping = mat.linewidth_at(h0);
    let wh = gt * h0;
    // factored so that the lossless pole ω = γ̃H0 gives an exact zero
    let denom = Complex64::new((wh - omega) * (wh + omega), -damping * omega);
    if denom.norm() == 0.0 {
        return Err(Error::Singularity(format!(
            "lossless susceptibility evaluated exactly at resonance ω = {omega:.6e} rad/s"
        )));
    }
    Ok(SusceptibilityTensor {
        chi: gt * gt * h0 * mat.ms / denom,
        kappa: gt * omega * mat.ms / denom,
    })
}

/// ∂(ω[I + χ(ω)])/∂ω for the lossless medium, the weight of the field energy
/// in a dispersive magnet.
pub fn energy_tensor(omega: f64, h0: f64, mat: &MaterialParams) -> Result<Matrix3<Complex64>> {
    check_internal(h0)?;
    let gt = mat.gamma_tilde();
    let wh = gt * h0;
    let d = (wh - omega) * (wh + omega);
    if d == 0.0 {
        return Err(Error::Singularity(format!(
            "energy tensor evaluated exactly at the bulk resonance ω = {omega:.6e} rad/s"
        )));
    }
    // d(ωχ)/dω = γ̃²H0·Ms·(D + 2ω²)/D²,  d(ωκ)/dω = 2γ̃·ω·Ms·(γ̃H0)²/D²
    let d_chi = gt * wh * mat.ms * (d + 2.0 * omega * omega) / (d * d);
    let d_kappa = 2.0 * gt * omega * mat.ms * wh * wh / (d * d);
    let one = Complex64::new(1.0, 0.0);
    let z = Complex64::new(0.0, 0.0);
    let i = Complex64::i();
    Ok(Matrix3::new(
        one + d_chi, i * d_kappa, z, //
        -i * d_kappa, one + d_chi, z, //
        z, z, one,
    ))
}
