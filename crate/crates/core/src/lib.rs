//! Dense forests, Danzer-type point sets and the diagnostics that measure them.
//!
//! The [`generators`] module enumerates explicit point sets inside finite
//! windows, [`analysis`] measures dispersion, discrepancy, visibility and
//! related quantities on them, and [`epsnet`] builds and checks ε-nets for
//! boxes in the unit cube.

pub mod analysis;
pub mod calibrate;
pub mod cli;
pub mod epsnet;
pub mod error;
pub mod generators;
pub mod geometry;
pub mod io;
pub mod stats;

pub use error::{Error, Result};
