//! Ferrimagnetic nanospheres as microwave nanomagnonic cavities.
//!
//! The crate models a saturated YIG-like sphere in the quasi-static limit:
//!
//! * [`material`] holds the gyrotropic (LLG) susceptibility and the static
//!   field bookkeeping of a uniformly magnetized sphere.
//! * [`modes`] builds the magnetostatic `(n, m = n)` Walker modes, quantizes
//!   them and evaluates their coupling to a point spin emitter.
//! * [`spectral`] assembles the magnon spectral density `J(ω)` seen by the
//!   emitter, including field sweeps.
//! * [`dynamics`] integrates the non-Markovian single-emitter decay by two
//!   independent routes (Volterra history quadrature and pseudo-modes).
//! * [`network`] covers two emitters dispersively coupled through the Kittel
//!   mode.
//! * [`runner`] is the batch front end used by the `nanomag` binary.
//!
//! All quantities are SI internally, with angular frequencies in rad/s and
//! fields `H` in A/m.

pub mod constants;
pub mod dynamics;
pub mod error;
pub mod material;
pub mod modes;
pub mod network;
pub mod ode;
pub mod quadrature;
pub mod runner;
pub mod spectral;

pub use constants::{Constants, SI};
pub use dynamics::{EmitterConfig, MemoryKernel, TimeGrid, TimeSeries};
pub use error::{Error, Result};
pub use material::{Linewidth, MaterialParams, StaticFieldState, SusceptibilityTensor};
pub use modes::{CavityConfig, MagnonMode};
pub use network::{TransferResult, TwoEmitterConfig};
pub use spectral::{FieldSweepMap, SpectralGrid};

/// Complex 3-vector used for mode fields and transition dipoles.
pub type CVector3 = nalgebra::Vector3<num_complex::Complex64>;
/// Real 3-vector used for positions.
pub type Vector3 = nalgebra::Vector3<f64>;
