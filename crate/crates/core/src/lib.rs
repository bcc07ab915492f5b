//! Partitioned linear multistep methods for Hamiltonian PDEs.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boussinesq;
pub mod error;
pub mod experiment;
pub mod integrator;
pub mod lmm;
pub mod poly;
pub mod nls;
pub mod spectral;
pub mod stability;
pub mod system;

pub use error::{Error, Result};
