//! Exact and Monte Carlo free energies for the Hopfield model with many
//! patterns and the Sherrington–Kirkpatrick model, plus experiment drivers
//! comparing the two.

pub mod cli;
pub mod error;
pub mod exact;
pub mod experiments;
pub mod io;
pub mod mc;
pub mod model;
pub mod observable;
pub mod patterns;
pub mod stats;

pub use error::{Error, Result};
