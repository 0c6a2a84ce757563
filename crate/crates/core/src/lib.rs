//! Simulation of spin-boson qubit dynamics and classification of the bath's
//! Ohmicity from observable trajectories.
//!
//! The pipeline is: [`spectral`] kernels feed the exact pure-dephasing
//! solution in [`dephasing`] and the second-order time-convolutionless Bloch
//! equations in [`damping`]; [`dataset`] turns parameter draws into labeled
//! trajectories; [`fourier`] converts them to network inputs; [`nn`] trains
//! the classifier; [`selection`] ranks time points; [`experiment`] wires the
//! published experiments together.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

#[cfg(feature = "blas")]
extern crate blas_src;

pub mod damping;
pub mod dataset;
pub mod dephasing;
pub mod error;
pub mod experiment;
pub mod fourier;
pub mod nn;
pub mod quadrature;
pub mod rng;
pub mod selection;
pub mod spectral;
pub mod timeseries;

pub use error::{Error, Result};
