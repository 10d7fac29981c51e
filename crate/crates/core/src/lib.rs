//! Numerics for the fourth-order Neumann problem
//!
//! ```text
//! Δ²u − Δu + αu = |u|^{8/(N−4)} u   in Ω ⊂ ℝᴺ,   ∂ν u = ∂ν(Δu) = 0 on ∂Ω,   N ≥ 5
//! ```
//!
//! The crate is organised bottom-up:
//!
//! - [`special`]: Gamma/Beta functions and every closed-form constant of the problem
//!   (critical exponent, bubble normaliser γ_N, sharp Sobolev constant S, d_N, ᾱ).
//! - [`bubble`]: the extremal family u_ε, its derivatives, and the compactly
//!   supported glued family z_ε.
//! - [`quadrature`]: adaptive Gauss–Kronrod radial quadrature, half-sphere angular
//!   moments, the J-integrals and the curvature I-terms.
//! - [`chart`]: the boundary-straightening chart Φ of a quadratic osculating boundary.
//! - [`rayleigh`]: discrete radial fields, the Rayleigh quotient, half-space quotients
//!   and asymptotic slope extraction.
//! - [`minimizer`]: the radial Neumann discretisation on a ball, a preconditioned
//!   normalized gradient flow, the linear-stability threshold and α-bisection.

// reference values keep every digit they were computed with; `!(x > 0.0)` is used to reject NaN
#![allow(
    clippy::excessive_precision,
    clippy::inconsistent_digit_grouping,
    clippy::neg_cmp_op_on_partial_ord,
    clippy::needless_range_loop
)]

pub mod bubble;
pub mod chart;
pub mod error;
pub mod minimizer;
pub mod quadrature;
pub mod rayleigh;
pub mod special;

pub use error::{Error, Result};
pub use special::DimensionParams;
