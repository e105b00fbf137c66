//! Configuration files, CSV output and the command line for
//! [`laneflow_core`].

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod output;

pub use config::{load_config, parse_config, RunConfig};
pub use error::AppError;
pub use laneflow_core as core;
