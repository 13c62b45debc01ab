//! Spontaneous-emission dynamics of a two-level emitter coupled to the
//! band-edge modes of a lossy inverse-opal photonic crystal.
//!
//! The pipeline has four stages:
//!
//! * [`crystal`] — FCC inverse-opal geometry, reciprocal lattice, permittivity
//!   Fourier coefficients, Brillouin-zone meshes, named Wigner-Seitz positions.
//! * [`pwe`] — plane-wave expansion of the Maxwell eigenproblem (transverse
//!   H-field formulation) and reconstruction of normalized electric-field modes.
//! * [`ldos`] — projected local density of states by k-space summation, the
//!   band-edge model `rho_BE = K_BE * sqrt(omega - omega_BE)`, and absorptive
//!   Lorentzian broadening.
//! * [`dynamics`] — the emitter spectrum, its dominant pole and residual,
//!   time-domain inversion, and the degree-of-fractional-decay figure of merit.
//!
//! Internal units: lengths in `a` (lattice constant), wavevectors in `2*pi/a`,
//! frequencies in `2*pi*c/a`, so `c = 1` and the vacuum dispersion is
//! `omega = |k|`. In these units the primitive-cell volume is 1/4, the
//! Brillouin-zone volume is 4 and the vacuum LDOS is `rho0 = (8*pi/3) omega^2`.

pub mod config;
pub mod crystal;
pub mod dynamics;
pub mod ldos;
pub mod pwe;
pub mod quad;

pub mod cli;

use thiserror::Error;

/// Crate-wide error type. The CLI maps `Config` to exit code 2 and
/// `Numerical` to exit code 3.
#[derive(Debug, Error)]
pub enum Error {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Primitive-cell volume in units of `a^3` (FCC).
pub const V_CELL: f64 = 0.25;

/// Brillouin-zone volume in wavevector units of `(2*pi/a)^3` (FCC).
pub const V_BZ: f64 = 4.0;

/// Vacuum LDOS `rho0(omega)` in program units (`omega` in `2*pi*c/a`).
pub fn rho0(omega: f64) -> f64 {
    8.0 * std::f64::consts::PI / 3.0 * omega * omega
}
