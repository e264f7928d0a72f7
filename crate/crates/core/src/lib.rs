//! Numerical construction of radial solutions of `u_t = Δu + u u_r³` on a
//! ball that keep an interior gradient singularity for all time, together
//! with the property checks that certify them.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod config;
pub mod error;
pub mod initdata;
pub mod pipeline;
pub mod report;
pub mod solver;
pub mod specfn;
pub mod verify;

pub use error::{Error, Result};
