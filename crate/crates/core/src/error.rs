// SPDX-License-Identifier: MIT OR Apache-2.0

//! Error type shared by every module of the crate.

use std::io;

use thiserror::Error;

/// Errors raised by the engine, probes, analyses and interventions.
#[derive(Debug, Error)]
pub enum Error {
    #[error("illegal move {0}")]
    IllegalMove(String),

    #[error("no valid target board after {attempts} attempts")]
    NoValidTarget { attempts: usize },

    #[error("dimension mismatch: expected {expected}, got {actual} ({context})")]
    DimensionMismatch {
        expected: usize,
        actual: usize,
        context: &'static str,
    },

    #[error("format error: {0}")]
    Format(String),

    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("intervention direction has zero norm")]
    ZeroDirection,

    #[error("mean-centered row for square {square} color {color} has zero norm")]
    ZeroVector { square: usize, color: usize },

    #[error("row {0} has zero norm")]
    ZeroRow(usize),

    #[error("total variance is degenerate ({0:e})")]
    DegenerateVariance(f64),

    #[error("k-nearest-neighbor graph is disconnected")]
    DisconnectedGraph,

    #[error("d_model {d_model} is below the required minimum {required}")]
    InsufficientDimension { d_model: usize, required: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dims(expected: usize, actual: usize, context: &'static str) -> Self {
        Error::DimensionMismatch {
            expected,
            actual,
            context,
        }
    }
}
