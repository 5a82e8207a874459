// SPDX-License-Identifier: MIT OR Apache-2.0

//! CSV and JSON outputs shared by the analyses.
//!
//! Matrices are written as `row,col,value` triplets with a header line;
//! undefined cells are written as `NA`.

use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::persist::atomic_write;

pub fn write_csv_cells<W, F>(w: &mut W, rows: usize, cols: usize, cell: F) -> Result<()>
where
    W: Write + ?Sized,
    F: Fn(usize, usize) -> Option<f64>,
{
    writeln!(w, "row,col,value")?;
    for r in 0..rows {
        for c in 0..cols {
            match cell(r, c) {
                Some(v) => writeln!(w, "{r},{c},{v}")?,
                None => writeln!(w, "{r},{c},NA")?,
            }
        }
    }
    Ok(())
}

pub fn write_matrix_csv(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    atomic_write(path, |w| write_csv_cells(w, m.nrows(), m.ncols(), |r, c| Some(m[(r, c)])))
}

/// `{metric, value, config}` summary document.
#[derive(Debug, Serialize)]
pub struct Summary<'a, V: Serialize, C: Serialize> {
    pub metric: &'a str,
    pub value: V,
    pub config: C,
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, v: &T) -> Result<()> {
    atomic_write(path, |w| {
        serde_json::to_writer_pretty(&mut *w, v).map_err(|e| Error::Format(e.to_string()))?;
        w.write_all(b"\n")?;
        Ok(())
    })
}

pub fn write_summary<V: Serialize, C: Serialize>(path: &Path, metric: &str, value: V, config: C) -> Result<()> {
    write_json(path, &Summary { metric, value, config })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_with_missing_cells() {
        let mut buf = Vec::new();
        write_csv_cells(&mut buf, 2, 2, |r, c| (r + c > 0).then(|| (r * 2 + c) as f64 * 0.5)).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "row,col,value\n0,0,NA\n0,1,0.5\n1,0,1\n1,1,1.5\n");
    }
}
