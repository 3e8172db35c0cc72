//! Two-dimensional partial-wave scattering off potentials with inverse-square
//! cores and tails: phase shifts, bound states, Darboux partners and the
//! Levinson relation.

pub mod analysis;
pub mod cylfun;
pub mod error;
pub mod potential;
pub mod solver;

pub use error::{Error, Result};
