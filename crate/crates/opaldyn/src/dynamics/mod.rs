//! Spontaneous-emission dynamics of a two-level emitter coupled to a
//! structured electromagnetic environment, in units scaled by the emitter
//! transition frequency.
//!
//! The chain is: a relative LDOS model ([`spectrum::SpectralDensity`],
//! selectable by name through [`spectrum::spectrum_by_name`]) defines the
//! memory kernel `G(w)` ([`gfun`]); the transformed amplitude `1/D(w)` with
//! `D(w) = beta G(w) - i (w - 1)` has a pole carrying the long-time behavior
//! ([`pole`]); the full time-dependent population comes from a Filon
//! inversion of the pole-subtracted remainder ([`inversion`]).

pub mod gfun;
pub mod inversion;
pub mod pole;
pub mod spectrum;

pub use gfun::{
    analytic_continuation, g_function, g_physical, g_physical_prime, g_pv_quadrature,
};
pub use inversion::{decay_curve, DecayCurve};
pub use pole::{find_pole, fractional_strength, optimize_detuning, EmitterSpec, PoleResult};
pub use spectrum::{
    spectrum_by_name, CompositeDensity, EdgeParams, SpectralDensity, VacuumDensity, ZeroDensity,
    CUTOFF, WINDOW_HI, WINDOW_LO,
};
