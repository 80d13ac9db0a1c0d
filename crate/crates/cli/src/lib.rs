//! Sweeps, critical-point search, self-verification and circuit mapping on
//! top of `crossover-core`, with JSON configuration and CSV output.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod output;
pub mod verify;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Model(#[from] crossover_core::Error),

    #[error("cannot write {path}: {message}")]
    Output { path: String, message: String },

    #[error("verification failed")]
    VerifyFailed,
}

impl CliError {
    /// 1 verification failure, 2 configuration or I/O, 3 model constraint.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::VerifyFailed => 1,
            Self::Config(_) | Self::Output { .. } => 2,
            Self::Model(_) => 3,
        }
    }
}
