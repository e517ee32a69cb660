//! Bifurcating solitonic vortices of the stationary Gross-Pitaevskii equation
//! `ΔΨ + Ψ(1 − |Ψ|²) = 0` on the strip `ℝ × (0, d)` with Neumann conditions in `y`.
//!
//! Fields are stored as cosine-sector coefficients `ψ_j(x)`, `j = 0..=K`, on a
//! uniform `x` grid. The crate provides the one-dimensional reference objects
//! (soliton, kernel profile, critical widths), the linear operators and their
//! spectra, the Lyapunov–Schmidt reduction with its bifurcation function, a
//! branch continuation driver for the full discrete problem, and vortex
//! detection on computed branches.
//!
//! ```
//! use strip_vortex::analytic;
//!
//! let d1 = analytic::critical_width(1).unwrap();
//! assert!((d1 - std::f64::consts::SQRT_2 * std::f64::consts::PI).abs() < 1e-14);
//! ```

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod analytic;
pub mod banded;
pub mod continuation;
pub mod error;
pub mod exec;
pub mod fit;
pub mod layout;
pub mod operators;
pub mod reduction;
pub mod strip;
pub mod vortices;

pub use error::{Error, Result};
pub use exec::ExecMode;
pub use strip::{SectorField, StripDomain, XGrid};
