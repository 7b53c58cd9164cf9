//! Numerical laboratory for shock formation in planar elastic waves.

pub mod error;
pub mod characteristics;
pub mod evolve1d;
pub mod grid;
pub mod harness;
pub mod initial_data;
pub mod model_eigen;
pub mod shock_analysis;
pub mod snapshot_io;
pub mod sobolev;

pub use error::{Error, Result};
