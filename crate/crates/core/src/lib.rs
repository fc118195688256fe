//! Simulation and verification laboratory for one-dimensional bosonic
//! Fokker–Planck equations written in pseudo-inverse (mass) variables.

pub mod equilibria;
pub mod error;
pub mod harness;
pub mod diagnostics;
pub mod numerics;
pub mod solver;
pub mod transform;

pub use error::{Error, Result};
