//! Numerics for the m-adic Chan continued fraction
//!
//! ```text
//! x = m^-a1 / (1 + (m-1) m^-a2 / (1 + (m-1) m^-a3 / (1 + ...)))
//! ```
//!
//! * [`expansion`]: digit map, shift map, encoding and exact decoding.
//! * [`measure`]: the invariant measure `gamma_m` and its digit law.
//! * [`gauss_kuzmin`]: Gauss-Kuzmin iteration of distribution functions
//!   and densities, with sup-norm convergence diagnostics.
//! * [`contraction`]: the contraction constant `q_m` and an audit of its
//!   closed-form bound.
//! * [`digits`]: Monte Carlo digit frequencies and a chi-square test.
//!
//! Floating-point routines are generic over [`Real`] (`f32`, `f64`); the
//! `*64` aliases below fix the scalar to `f64`. Exact work uses
//! [`Rational`].

pub mod contraction;
pub mod digits;
pub mod error;
pub mod expansion;
pub mod gauss_kuzmin;
mod interp;
pub mod measure;
pub mod scalar;

pub use contraction::{audit_final_chain, contraction_audit, delta, qm, ChainAudit, ContractionStep, QmBound};
pub use digits::{digit_law_test, sample_orbit, ChiSquareTest, DigitLawReport};
pub use error::{Error, Result};
pub use expansion::{
    convergents, decode, digit_of, digit_of_exact, encode, encode_exact, step, step_exact, tau, Decoded,
    DigitSequence, ExpansionParams, Rational,
};
pub use gauss_kuzmin::{
    apply_gk, density_transfer, derivative_max, iterate, pf_coefficient, rate_estimate, sup_error, DensityGrid,
    GridFunction, IterationReport, RateFit,
};
pub use measure::{digit_probability, gamma_cdf, gamma_density, k_const, MeasureParams};
pub use scalar::Real;

pub type MeasureParams64 = MeasureParams<f64>;
pub type GridFunction64 = GridFunction<f64>;
pub type DensityGrid64 = DensityGrid<f64>;
pub type IterationReport64 = IterationReport<f64>;
pub type RateFit64 = RateFit<f64>;
pub type QmBound64 = QmBound<f64>;
pub type ChainAudit64 = ChainAudit<f64>;
pub type ContractionStep64 = ContractionStep<f64>;

pub type MeasureParams32 = MeasureParams<f32>;
pub type GridFunction32 = GridFunction<f32>;
pub type DensityGrid32 = DensityGrid<f32>;
