//! Stable polynomial approximation of explicit graph spectral filters and
//! the spectral GCNs that propagate with them.
//!
//! The crate is `no_std` and only needs `alloc`. File formats and the
//! command-line front end live in the `arnoldi-gcn` crate.
#![no_std]

extern crate alloc;

pub mod approx;
pub mod dense;
pub mod error;
pub mod filters;
pub mod gcn;
pub mod graph;
pub mod rng;
pub mod sampling;

pub use error::{Error, Result};
