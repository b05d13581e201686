//! Exact and numerical experiments on hyperbolic toral automorphisms.

pub mod ball;
pub mod cli;
pub mod cocycle;
pub mod conjugacy;
pub mod error;
pub mod dynamics;
pub mod exact;
pub mod genericity;
pub mod linalg;
pub mod spectral;

pub use error::{Error, Result};
