//! Low-degree polynomial estimators for sparse stochastic block models.
//!
//! The crate covers the two-community and mixed-membership block models and
//! the spiked Wigner model. Estimators are self-avoiding-walk and long-armed
//! star polynomials evaluated by color coding, followed by convex projection,
//! rounding and (for the tensor route) a small sum-of-squares decomposition.
//! [`spectrum`] computes exact low-degree Fourier mass of the block-model
//! likelihood ratio on tiny instances.

#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod io;
pub mod linalg;
pub mod model;
pub mod pipeline;
pub mod projection;
pub mod rng;
pub mod rounding;
pub mod sawpoly;
pub mod spectrum;
pub mod tensor;
pub mod tensordecomp;
pub mod xvalid;

pub use error::{Error, Result};
