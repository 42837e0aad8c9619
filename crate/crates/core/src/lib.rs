//! Construction and verification of nonspreading wave packets for the
//! one-dimensional time-dependent Schrödinger equation.

pub mod analysis;
pub mod constructor;
pub mod error;
pub mod grid;
pub mod specfun;
pub mod numerov;
pub mod propagator;
pub mod quadrature;
pub mod specs;
pub mod tridiag;

pub use error::{Error, Result};
pub use grid::{Grid, TimeLattice, UnitSystem, WaveFunction};
