//! Numerics for the exponential family `E_κ(z) = e^z + κ`.
//!
//! The crate is organised bottom-up:
//!
//! * [`family`] evaluates the maps, iterates the singular orbit with its
//!   κ-derivative and provides the potential-growth function `F(t) = e^t - t`.
//! * [`address`] holds external addresses `s = s_1 s_2 s_3 …` with a finite
//!   prefix and a zero or periodic tail.
//! * [`dynray`] builds dynamic rays `g_{κ,s}(t)` by composing logarithm
//!   branches from the inside out, together with their `t`- and
//!   κ-derivatives.
//! * [`pararay`] solves `g_{κ,s}(t) = κ` for parameter rays by Newton
//!   continuation and profiles the singular orbit along them.
//! * [`fractaldim`] contains standard squares, parabola domains, the
//!   standard-square covering simulation and box-counting estimates.
//!
//! Every routine works in double precision. Real parts above
//! [`OVERFLOW_GUARD`] are never exponentiated; the affected routines report
//! the truncation instead of producing non-finite values.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod address;
pub mod dynray;
mod error;
pub mod family;
pub mod fractaldim;
pub mod pararay;
mod polyline;

pub use address::{ExternalAddress, Tail};
pub use error::{Error, Result};
pub use polyline::{RayEntry, RayKind, RayPolyline, SampleFailure};

/// A point of the complex plane (parameters κ, dynamic points z, ray values).
pub type ComplexPoint = num_complex::Complex64;

/// Largest real part that is ever passed to `exp`. `e^709.78` is the
/// largest finite double.
pub const OVERFLOW_GUARD: f64 = 700.0;
