pub mod delay;
pub mod cli;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod network;
pub mod output;
pub mod params;
pub mod presets;
pub mod quadrature;
pub mod refractory;
pub mod spatial;
pub mod steady;
pub mod stepper;

pub use error::{Error, Result};
