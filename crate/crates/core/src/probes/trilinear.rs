// SPDX-License-Identifier: MIT OR Apache-2.0

use nalgebra::{DMatrix, DMatrixView};

use super::{board_loss_grad, check_len, init_rng, init_tensor, Batch, Grads, Logits, Probe, ProbeKind};
use crate::error::{Error, Result};

/// Row/column/filler probe: `T = M(h)` is a d_u x d_v x d_f binding tensor
/// and square `(i, j)` scores color `c` as `<T, u_i (x) v_j (x) f_c>`.
///
/// `M` is stored flattened to (d_u * d_v * d_f) x d_model, row
/// `(a * d_v + b) * d_f + e` producing `T[a][b][e]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrilinearTprProbe {
    d_u: usize,
    d_v: usize,
    d_f: usize,
    d_model: usize,
    u: Vec<f64>,
    v: Vec<f64>,
    f: Vec<f64>,
    m: Vec<f64>,
}

struct Cache {
    p: Vec<f64>, // 8 x d_v x d_f
    q: Vec<f64>, // 8 x 8 x d_f
}

impl TrilinearTprProbe {
    pub fn random(d_u: usize, d_v: usize, d_f: usize, d_model: usize, seed: u64) -> Self {
        let mut rng = init_rng(seed);
        let u = init_tensor(&mut rng, 8 * d_u);
        let v = init_tensor(&mut rng, 8 * d_v);
        let f = init_tensor(&mut rng, 3 * d_f);
        let m = init_tensor(&mut rng, d_u * d_v * d_f * d_model);
        TrilinearTprProbe {
            d_u,
            d_v,
            d_f,
            d_model,
            u,
            v,
            f,
            m,
        }
    }

    /// From row-major buffers: U 8 x d_u, V 8 x d_v, F 3 x d_f and the
    /// flattened binding map.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        d_u: usize,
        d_v: usize,
        d_f: usize,
        d_model: usize,
        u: Vec<f64>,
        v: Vec<f64>,
        f: Vec<f64>,
        m: Vec<f64>,
    ) -> Result<Self> {
        if d_u == 0 || d_v == 0 || d_f == 0 {
            return Err(Error::InvalidArgument("probe dims must be positive".into()));
        }
        if u.len() != 8 * d_u {
            return Err(Error::dims(8 * d_u, u.len(), "row embeddings"));
        }
        if v.len() != 8 * d_v {
            return Err(Error::dims(8 * d_v, v.len(), "column embeddings"));
        }
        if f.len() != 3 * d_f {
            return Err(Error::dims(3 * d_f, f.len(), "filler embeddings"));
        }
        let k = d_u * d_v * d_f;
        if m.len() != k * d_model {
            return Err(Error::dims(k * d_model, m.len(), "binding map"));
        }
        Ok(TrilinearTprProbe {
            d_u,
            d_v,
            d_f,
            d_model,
            u,
            v,
            f,
            m,
        })
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.d_u, self.d_v, self.d_f)
    }

    pub fn row_embedding(&self, i: usize) -> &[f64] {
        &self.u[i * self.d_u..(i + 1) * self.d_u]
    }

    pub fn col_embedding(&self, j: usize) -> &[f64] {
        &self.v[j * self.d_v..(j + 1) * self.d_v]
    }

    pub fn filler(&self, c: usize) -> &[f64] {
        &self.f[c * self.d_f..(c + 1) * self.d_f]
    }

    /// Row embeddings as an 8 x d_u matrix.
    pub fn rows(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(8, self.d_u, &self.u)
    }

    /// Column embeddings as an 8 x d_v matrix.
    pub fn cols(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(8, self.d_v, &self.v)
    }

    pub fn fillers(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(3, self.d_f, &self.f)
    }

    /// The (d_u * d_v * d_f) x d_model flattening of the binding map.
    pub fn m_flat(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.d_u * self.d_v * self.d_f, self.d_model, &self.m)
    }

    fn mt(&self) -> DMatrixView<'_, f64> {
        DMatrixView::from_slice(&self.m, self.d_model, self.d_u * self.d_v * self.d_f)
    }

    /// Binding tensor `M(h)`, flattened as `(a * d_v + b) * d_f + e`.
    pub fn binding(&self, h: &[f64]) -> Result<Vec<f64>> {
        check_len(h, self.d_model)?;
        Ok(self
            .m
            .chunks_exact(self.d_model)
            .map(|row| row.iter().zip(h).map(|(a, b)| a * b).sum())
            .collect())
    }

    fn unbind(&self, t: &[f64]) -> (Logits, Cache) {
        let (du, dv, df) = (self.d_u, self.d_v, self.d_f);
        let mut p = vec![0.0; 8 * dv * df];
        for i in 0..8 {
            let pi = &mut p[i * dv * df..(i + 1) * dv * df];
            for a in 0..du {
                let uia = self.u[i * du + a];
                for (o, &x) in pi.iter_mut().zip(&t[a * dv * df..(a + 1) * dv * df]) {
                    *o += uia * x;
                }
            }
        }
        let mut q = vec![0.0; 64 * df];
        for i in 0..8 {
            for j in 0..8 {
                let qij = &mut q[(8 * i + j) * df..(8 * i + j + 1) * df];
                for b in 0..dv {
                    let vjb = self.v[j * dv + b];
                    let pib = &p[(i * dv + b) * df..(i * dv + b + 1) * df];
                    for (o, &x) in qij.iter_mut().zip(pib) {
                        *o += vjb * x;
                    }
                }
            }
        }
        let mut logits = [[0.0; 3]; 64];
        for (sq, l) in logits.iter_mut().enumerate() {
            let qs = &q[sq * df..(sq + 1) * df];
            for (c, lc) in l.iter_mut().enumerate() {
                *lc = qs.iter().zip(&self.f[c * df..(c + 1) * df]).map(|(x, y)| x * y).sum();
            }
        }
        (logits, Cache { p, q })
    }

    pub fn forward_binding(&self, t: &[f64]) -> Logits {
        self.unbind(t).0
    }
}

impl Probe for TrilinearTprProbe {
    fn kind(&self) -> ProbeKind {
        ProbeKind::Trilinear
    }

    fn d_model(&self) -> usize {
        self.d_model
    }

    fn param_count(&self) -> usize {
        self.u.len() + self.v.len() + self.f.len() + self.m.len()
    }

    fn forward(&self, h: &[f64]) -> Result<Logits> {
        Ok(self.unbind(&self.binding(h)?).0)
    }

    fn forward_batch(&self, batch: &Batch) -> Vec<Logits> {
        let ts = self.mt().tr_mul(&batch.h);
        ts.column_iter().map(|t| self.unbind(t.as_slice()).0).collect()
    }

    fn loss_and_grad(&self, batch: &Batch) -> (f64, Grads) {
        let (du, dv, df) = (self.d_u, self.d_v, self.d_f);
        let n = batch.len();
        let scale = 1.0 / n as f64;
        let ts = self.mt().tr_mul(&batch.h);
        let mut dts = DMatrix::zeros(du * dv * df, n);
        let mut gu = vec![0.0; 8 * du];
        let mut gv = vec![0.0; 8 * dv];
        let mut gf = vec![0.0; 3 * df];
        let mut dq = vec![0.0; 64 * df];
        let mut dp = vec![0.0; 8 * dv * df];
        let mut loss = 0.0;

        for (col, y) in batch.labels.iter().enumerate() {
            let t = ts.column(col);
            let t = t.as_slice();
            let (logits, Cache { p, q }) = self.unbind(t);
            let (l, g) = board_loss_grad(&logits, y);
            loss += l;

            for sq in 0..64 {
                for e in 0..df {
                    dq[sq * df + e] = (0..3).map(|c| g[sq][c] * self.f[c * df + e]).sum::<f64>() * scale;
                }
                for c in 0..3 {
                    let gc = g[sq][c] * scale;
                    for e in 0..df {
                        gf[c * df + e] += gc * q[sq * df + e];
                    }
                }
            }
            // dV[j,b] = sum_{i,e} dQ[i,j,e] P[i,b,e];  dP[i,b,e] = sum_j dQ[i,j,e] V[j,b]
            dp.iter_mut().for_each(|x| *x = 0.0);
            for i in 0..8 {
                for j in 0..8 {
                    let dqij = &dq[(8 * i + j) * df..(8 * i + j + 1) * df];
                    for b in 0..dv {
                        let off = (i * dv + b) * df;
                        let pib = &p[off..off + df];
                        gv[j * dv + b] += dqij.iter().zip(pib).map(|(x, y)| x * y).sum::<f64>();
                        let vjb = self.v[j * dv + b];
                        for (o, &x) in dp[off..off + df].iter_mut().zip(dqij) {
                            *o += vjb * x;
                        }
                    }
                }
            }
            // dU[i,a] = <dP[i], T[a]>;  dT[a] = sum_i U[i,a] dP[i]
            let mut dt = dts.column_mut(col);
            let blk = dv * df;
            for i in 0..8 {
                let dpi = &dp[i * blk..(i + 1) * blk];
                for a in 0..du {
                    let ta = &t[a * blk..(a + 1) * blk];
                    gu[i * du + a] += dpi.iter().zip(ta).map(|(x, y)| x * y).sum::<f64>();
                    let uia = self.u[i * du + a];
                    for (k, &x) in dpi.iter().enumerate() {
                        dt[a * blk + k] += uia * x;
                    }
                }
            }
        }
        let dm = &batch.h * dts.transpose();
        (loss * scale, vec![gu, gv, gf, dm.as_slice().to_vec()])
    }

    fn params(&self) -> Vec<&[f64]> {
        vec![&self.u, &self.v, &self.f, &self.m]
    }

    fn params_mut(&mut self) -> Vec<&mut [f64]> {
        vec![&mut self.u, &mut self.v, &mut self.f, &mut self.m]
    }
}
