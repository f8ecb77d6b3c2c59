//! Few-boson simulations of cat-state preparation by merging and splitting
//! Gaussian optical tweezers, and of the interferometric readout.

pub mod basis;
pub mod config;
pub mod dynamics;
pub mod eigen;
pub mod error;
pub mod grid;
pub mod io;
pub mod linalg;
pub mod operator;
pub mod potential;
pub mod protocol;
pub mod units;

pub use error::{Error, Result};
