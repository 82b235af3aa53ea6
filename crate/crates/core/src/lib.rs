//! LEGGM face descriptor: derivative-of-Gaussian structural patterns
//! expressed through a Gabor magnitude bank, followed by linear subspace
//! learning, nearest-neighbour matching and biometric evaluation.

pub mod config;
pub mod descriptor;
pub mod error;
pub mod evaluation;
pub mod gabor;
pub mod imaging;
pub mod io;
pub mod pisp;
pub mod recognition;
pub mod spectral;
pub mod subspace;

pub use error::{Error, ErrorClass, Result};
