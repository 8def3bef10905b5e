//! Octonions, exterior calculus and curvature of the Cayley hyperbolic plane `OH²`,
//! and the sharp Kato-type constants for the Bochner technique derived from them.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod curvature;
pub mod exterior;
pub mod forms;
pub mod geodesy;
pub mod kernels;
pub mod numeric;
pub mod octonion;
pub mod rational;

pub use octonion::{MultiplicationTable, OctPair, Octonion};
