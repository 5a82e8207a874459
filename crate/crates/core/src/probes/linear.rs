// SPDX-License-Identifier: MIT OR Apache-2.0

use nalgebra::{DMatrix, DMatrixView};

use super::{board_loss_grad, check_len, init_rng, init_tensor, Batch, Grads, Logits, Probe, ProbeKind};
use crate::error::{Error, Result};
use crate::othello::CellColor;

/// One 3 x d_model readout per square, stacked into a 192 x d_model matrix.
///
/// Row `3 * s + c` is the readout for square `s`, color `c`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProbe {
    d_model: usize,
    w: Vec<f64>,
}

impl LinearProbe {
    pub fn zeros(d_model: usize) -> Self {
        LinearProbe {
            d_model,
            w: vec![0.0; 192 * d_model],
        }
    }

    pub fn random(d_model: usize, seed: u64) -> Self {
        let mut rng = init_rng(seed);
        LinearProbe {
            d_model,
            w: init_tensor(&mut rng, 192 * d_model),
        }
    }

    /// From a row-major 192 x d_model buffer.
    pub fn from_rows(d_model: usize, w: Vec<f64>) -> Result<Self> {
        if w.len() != 192 * d_model {
            return Err(Error::dims(192 * d_model, w.len(), "linear probe weights"));
        }
        Ok(LinearProbe { d_model, w })
    }

    /// From a 192 x d_model matrix.
    pub fn from_matrix(m: &DMatrix<f64>) -> Result<Self> {
        if m.nrows() != 192 {
            return Err(Error::dims(192, m.nrows(), "linear probe rows"));
        }
        let d = m.ncols();
        let mut w = Vec::with_capacity(192 * d);
        for r in 0..192 {
            w.extend(m.row(r).iter());
        }
        Ok(LinearProbe { d_model: d, w })
    }

    pub fn row(&self, square: usize, color: CellColor) -> &[f64] {
        let r = 3 * square + color.idx();
        &self.w[r * self.d_model..(r + 1) * self.d_model]
    }

    pub fn row_mut(&mut self, square: usize, color: CellColor) -> &mut [f64] {
        let r = 3 * square + color.idx();
        &mut self.w[r * self.d_model..(r + 1) * self.d_model]
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    /// The stacked 192 x d_model matrix.
    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(192, self.d_model, &self.w)
    }

    /// Column-major d_model x 192 view of the row-major buffer (i.e. `W^T`).
    fn wt(&self) -> DMatrixView<'_, f64> {
        DMatrixView::from_slice(&self.w, self.d_model, 192)
    }
}

fn column_logits(col: &[f64]) -> Logits {
    let mut out = [[0.0; 3]; 64];
    for (s, l) in out.iter_mut().enumerate() {
        l.copy_from_slice(&col[3 * s..3 * s + 3]);
    }
    out
}

impl Probe for LinearProbe {
    fn kind(&self) -> ProbeKind {
        ProbeKind::Linear
    }

    fn d_model(&self) -> usize {
        self.d_model
    }

    fn param_count(&self) -> usize {
        self.w.len()
    }

    fn forward(&self, h: &[f64]) -> Result<Logits> {
        check_len(h, self.d_model)?;
        let mut out = [[0.0; 3]; 64];
        for (r, row) in self.w.chunks_exact(self.d_model).enumerate() {
            out[r / 3][r % 3] = row.iter().zip(h).map(|(a, b)| a * b).sum();
        }
        Ok(out)
    }

    fn forward_batch(&self, batch: &Batch) -> Vec<Logits> {
        let logits = self.wt().tr_mul(&batch.h); // 192 x n
        logits
            .column_iter()
            .map(|c| column_logits(c.as_slice()))
            .collect()
    }

    fn loss_and_grad(&self, batch: &Batch) -> (f64, Grads) {
        let n = batch.len();
        let logits = self.wt().tr_mul(&batch.h);
        let mut g = DMatrix::zeros(192, n);
        let mut loss = 0.0;
        for (j, y) in batch.labels.iter().enumerate() {
            let (l, gl) = board_loss_grad(&column_logits(logits.column(j).as_slice()), y);
            loss += l;
            for s in 0..64 {
                for c in 0..3 {
                    g[(3 * s + c, j)] = gl[s][c] / n as f64;
                }
            }
        }
        // dW (192 x d, row-major) == (H G^T) as a column-major d x 192.
        let gw = &batch.h * g.transpose();
        (loss / n as f64, vec![gw.as_slice().to_vec()])
    }

    fn params(&self) -> Vec<&[f64]> {
        vec![&self.w]
    }

    fn params_mut(&mut self) -> Vec<&mut [f64]> {
        vec![&mut self.w]
    }
}
