// SPDX-License-Identifier: MIT OR Apache-2.0

pub mod analysis;
pub mod cli;
pub mod encodings;
pub mod error;
pub mod interventions;
pub mod linalg;
pub mod othello;
pub mod persist;
pub mod probes;

pub use error::{Error, Result};
