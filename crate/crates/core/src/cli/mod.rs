// SPDX-License-Identifier: MIT OR Apache-2.0

//! The `tprlab` command line.
//!
//! Exit codes: 0 success, 1 other failure, 2 usage, 3 I/O or malformed
//! file, 4 shape mismatch. `TPR_THREADS` caps the worker pool.

mod args;
mod commands;

use std::ffi::OsString;

use clap::Parser;

pub use args::*;

use crate::error::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_SHAPE: i32 = 4;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) | Error::Format(_) => EXIT_IO,
        Error::DimensionMismatch { .. } | Error::InsufficientDimension { .. } => EXIT_SHAPE,
        Error::InvalidArgument(_) | Error::IllegalMove(_) => EXIT_USAGE,
        _ => EXIT_FAILURE,
    }
}

fn configure_threads() -> Result<(), Error> {
    let Ok(v) = std::env::var("TPR_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::InvalidArgument(format!("TPR_THREADS={v:?} is not a positive integer")))?;
    // A pool may already exist when running in-process more than once.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Parses `argv` and runs the command, returning the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = configure_threads().and_then(|_| commands::dispatch(cli.command));
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("tprlab: {e}");
            exit_code(&e)
        }
    }
}
