// SPDX-License-Identifier: MIT OR Apache-2.0

use nalgebra::{DMatrix, DMatrixView};

use super::{board_loss_grad, check_len, init_rng, init_tensor, Batch, Grads, Logits, Probe, ProbeKind};
use crate::error::{Error, Result};

/// Role/filler probe: `B = M(h)` is a d_r x d_f binding matrix and square `s`
/// scores color `c` as `r_s^T B f_c`.
///
/// `M` is stored as its (d_r * d_f) x d_model flattening, row `a * d_f + b`
/// producing `B[a][b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BilinearTprProbe {
    d_r: usize,
    d_f: usize,
    d_model: usize,
    r: Vec<f64>,
    f: Vec<f64>,
    m: Vec<f64>,
}

impl BilinearTprProbe {
    pub fn random(d_r: usize, d_f: usize, d_model: usize, seed: u64) -> Self {
        let mut rng = init_rng(seed);
        let r = init_tensor(&mut rng, 64 * d_r);
        let f = init_tensor(&mut rng, 3 * d_f);
        let m = init_tensor(&mut rng, d_r * d_f * d_model);
        BilinearTprProbe {
            d_r,
            d_f,
            d_model,
            r,
            f,
            m,
        }
    }

    /// From row-major buffers: roles 64 x d_r, fillers 3 x d_f, binding map
    /// (d_r * d_f) x d_model.
    pub fn from_parts(
        d_r: usize,
        d_f: usize,
        d_model: usize,
        r: Vec<f64>,
        f: Vec<f64>,
        m: Vec<f64>,
    ) -> Result<Self> {
        if d_r == 0 || d_f == 0 {
            return Err(Error::InvalidArgument("probe dims must be positive".into()));
        }
        if r.len() != 64 * d_r {
            return Err(Error::dims(64 * d_r, r.len(), "role embeddings"));
        }
        if f.len() != 3 * d_f {
            return Err(Error::dims(3 * d_f, f.len(), "filler embeddings"));
        }
        if m.len() != d_r * d_f * d_model {
            return Err(Error::dims(d_r * d_f * d_model, m.len(), "binding map"));
        }
        Ok(BilinearTprProbe {
            d_r,
            d_f,
            d_model,
            r,
            f,
            m,
        })
    }

    pub fn d_r(&self) -> usize {
        self.d_r
    }

    pub fn d_f(&self) -> usize {
        self.d_f
    }

    pub fn role(&self, s: usize) -> &[f64] {
        &self.r[s * self.d_r..(s + 1) * self.d_r]
    }

    pub fn filler(&self, c: usize) -> &[f64] {
        &self.f[c * self.d_f..(c + 1) * self.d_f]
    }

    /// Roles as a 64 x d_r matrix.
    pub fn roles(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(64, self.d_r, &self.r)
    }

    /// Fillers as a 3 x d_f matrix.
    pub fn fillers(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(3, self.d_f, &self.f)
    }

    /// The (d_r * d_f) x d_model flattening of the binding map.
    pub fn m_flat(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.d_r * self.d_f, self.d_model, &self.m)
    }

    pub fn m_raw(&self) -> &[f64] {
        &self.m
    }

    fn mt(&self) -> DMatrixView<'_, f64> {
        DMatrixView::from_slice(&self.m, self.d_model, self.d_r * self.d_f)
    }

    /// Binding matrix `M(h)`, row-major d_r x d_f.
    pub fn binding(&self, h: &[f64]) -> Result<Vec<f64>> {
        check_len(h, self.d_model)?;
        Ok(self
            .m
            .chunks_exact(self.d_model)
            .map(|row| row.iter().zip(h).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// Logits from a binding matrix; also returns `R B` (64 x d_f).
    fn unbind(&self, b: &[f64]) -> (Logits, Vec<f64>) {
        let (dr, df) = (self.d_r, self.d_f);
        let mut rb = vec![0.0; 64 * df];
        for s in 0..64 {
            let rs = &self.r[s * dr..(s + 1) * dr];
            let out = &mut rb[s * df..(s + 1) * df];
            for (a, &ra) in rs.iter().enumerate() {
                for (o, &bv) in out.iter_mut().zip(&b[a * df..(a + 1) * df]) {
                    *o += ra * bv;
                }
            }
        }
        let mut logits = [[0.0; 3]; 64];
        for (row, rbs) in logits.iter_mut().zip(rb.chunks_exact(df)) {
            for (l, fc) in row.iter_mut().zip(self.f.chunks_exact(df)) {
                *l = rbs.iter().zip(fc).map(|(x, y)| x * y).sum();
            }
        }
        (logits, rb)
    }

    pub fn forward_binding(&self, b: &[f64]) -> Logits {
        self.unbind(b).0
    }
}

impl Probe for BilinearTprProbe {
    fn kind(&self) -> ProbeKind {
        ProbeKind::Bilinear
    }

    fn d_model(&self) -> usize {
        self.d_model
    }

    fn param_count(&self) -> usize {
        self.r.len() + self.f.len() + self.m.len()
    }

    fn forward(&self, h: &[f64]) -> Result<Logits> {
        Ok(self.unbind(&self.binding(h)?).0)
    }

    fn forward_batch(&self, batch: &Batch) -> Vec<Logits> {
        let bs = self.mt().tr_mul(&batch.h);
        bs.column_iter()
            .map(|b| self.unbind(b.as_slice()).0)
            .collect()
    }

    fn loss_and_grad(&self, batch: &Batch) -> (f64, Grads) {
        let (dr, df) = (self.d_r, self.d_f);
        let n = batch.len();
        let scale = 1.0 / n as f64;
        let bs = self.mt().tr_mul(&batch.h); // k x n
        let mut dbs = DMatrix::zeros(dr * df, n);
        let mut dr_acc = vec![0.0; 64 * dr];
        let mut df_acc = vec![0.0; 3 * df];
        let mut loss = 0.0;
        let mut gf = vec![0.0; 64 * df];

        for (j, y) in batch.labels.iter().enumerate() {
            let b = bs.column(j);
            let b = b.as_slice();
            let (logits, rb) = self.unbind(b);
            let (l, g) = board_loss_grad(&logits, y);
            loss += l;

            // GF = G F  (64 x d_f)
            for s in 0..64 {
                for e in 0..df {
                    gf[s * df + e] = (0..3).map(|c| g[s][c] * self.f[c * df + e]).sum::<f64>() * scale;
                }
            }
            // dF += G^T (R B)
            for c in 0..3 {
                for e in 0..df {
                    df_acc[c * df + e] +=
                        (0..64).map(|s| g[s][c] * rb[s * df + e]).sum::<f64>() * scale;
                }
            }
            // dR += GF B^T ; dB = R^T GF
            let mut db = dbs.column_mut(j);
            for s in 0..64 {
                let gfs = &gf[s * df..(s + 1) * df];
                for a in 0..dr {
                    let ba = &b[a * df..(a + 1) * df];
                    dr_acc[s * dr + a] += gfs.iter().zip(ba).map(|(x, y)| x * y).sum::<f64>();
                    let rsa = self.r[s * dr + a];
                    for e in 0..df {
                        db[a * df + e] += rsa * gfs[e];
                    }
                }
            }
        }
        // dM (k x d, row-major) == H dBs^T as a column-major d x k.
        let dm = &batch.h * dbs.transpose();
        (loss * scale, vec![dr_acc, df_acc, dm.as_slice().to_vec()])
    }

    fn params(&self) -> Vec<&[f64]> {
        vec![&self.r, &self.f, &self.m]
    }

    fn params_mut(&mut self) -> Vec<&mut [f64]> {
        vec![&mut self.r, &mut self.f, &mut self.m]
    }
}
