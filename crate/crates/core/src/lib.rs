//! Constructive feedforward approximators built from rectifier linear units
//! and binary step units.
//!
//! The crate builds explicit networks whose sizes and sup-norm errors carry
//! closed-form guarantees: squares, polynomials and smooth univariate
//! functions through a binary-expansion decoder and a bit-multiplication
//! gadget; sums, products, compositions, ridge and Gaussian specials;
//! products of linear forms and general multivariate polynomials. The
//! analysis module provides the matching lower-bound machinery
//! (break-point counting, size bounds, shallow baselines) and the
//! deep-vs-shallow gap experiment.

pub mod analysis;
pub mod cheb;
pub mod combinators;
pub mod decoder;
pub mod error;
pub mod grid;
pub mod multivariate;
pub mod net;
pub mod report;
pub mod serial;
pub mod target;
pub mod univariate;
mod util;

pub use error::{Error, Result};
pub use net::{Activation, Affine, Counts, NetBuilder, Network, Neuron, NodeRef};
pub use report::BuildReport;
pub use target::ApproxTarget;
