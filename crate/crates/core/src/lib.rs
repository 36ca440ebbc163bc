//! Numerical operators around a small moving ball on a periodic grid.
//!
//! The crate provides the pieces needed to study how a small rigid ball
//! interacts with fields defined on the surrounding box:
//!
//! * [`field`] — grids, scalar/vector fields, differential operators,
//!   region-restricted `L^p` norms and ball-average quadrature;
//! * [`cutoff`] — the smooth radial transition profile used by the
//!   restriction operators;
//! * [`restriction`] — the cutoff restriction operator that replaces a field
//!   by its ball average near the ball and leaves it untouched far away;
//! * [`spectral`] — FFT-backed inverse Laplacian and Riesz-type operators,
//!   plus stencil-matched variants whose divergence identities close at the
//!   discrete level;
//! * [`bogovskii`] — a discrete right inverse of the divergence on the
//!   annulus between the ball and its dilation, with zero boundary trace;
//! * [`div_restriction`] — the divergence-preserving restriction operator
//!   built from the two previous pieces;
//! * [`pressure`] — the pressure-estimate harness: density truncation,
//!   synthetic fluid states, and the momentum-equation integrals.
//!
//! All fields are immutable after construction and every operation is a pure
//! function, so values can be shared freely across threads.

pub mod bogovskii;
pub mod cutoff;
pub mod div_restriction;
pub mod error;
pub mod field;
pub mod interp;
pub mod pressure;
pub mod restriction;
pub mod slope;
pub mod snapshot;
pub mod spectral;

mod fft;

pub use error::CoreError;
pub use field::{Ball, DiffScheme, Grid, Region, ScalarField, VectorField};
