//! Dataset files, checkpoints, reports and parallel runners around
//! `hamn_core`.

pub mod checkpoint;
pub mod cli;
pub mod error;
pub mod io;
pub mod report;
pub mod runner;

pub use error::{Error, Result};
pub use hamn_core;
