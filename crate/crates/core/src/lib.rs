//! Numerical laboratory for abstract Szegedy quantum walks on finite graphs.
//!
//! The evolution `U = S (2 d_A^* d_A - 1)` is built from a coisometry `d_A`
//! and a unitary involution `S`. The crate computes the discriminant
//! `T = d_A S d_A^*`, predicts the spectrum of `U` from that of `T`, builds the
//! Hermitian generator `H` with `e^{iH} = U` and spectrum in `[0, 2pi)`, and
//! simulates walker dynamics with time-averaged localization diagnostics.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod fixtures;
pub mod generator;
pub mod graph;
pub mod linop;
pub mod report;
pub mod sim;
pub mod spectral_map;
pub mod szegedy;

pub use error::{Error, Result};
pub use report::{ValidationReport, Violation};
