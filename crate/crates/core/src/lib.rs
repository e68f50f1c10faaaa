pub mod coupled;
pub mod diagnostics;
pub mod error;
pub mod forcing;
pub mod grid;
pub mod harness;
pub mod linalg;
pub mod potential;
pub mod sharp;
pub mod snapshot;
pub mod solver;

pub use error::{Error, Result};
