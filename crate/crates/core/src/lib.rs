//! Fréchet means on non-Euclidean spaces and Monte Carlo tools for studying
//! their estimation rates.

pub mod circle;
pub mod error;
pub mod frechet;
pub mod harness;
pub mod io;
pub mod lowerbound;
pub mod quad;
pub mod rng;
pub mod shapes;
pub mod sphere;
pub mod stats;
pub mod wasserstein;

pub use error::{Error, Result};
