// SPDX-License-Identifier: MIT OR Apache-2.0

//! Probe families that read the 64-square board out of an activation vector.
//!
//! - [`LinearProbe`]: one 3 x d_model readout per square.
//! - [`BilinearTprProbe`]: role (square) and filler (color) embeddings scored
//!   against a binding matrix `B = M(h)` as `r_s^T B f_c`.
//! - [`TrilinearTprProbe`]: row, column and filler embeddings contracted with
//!   a binding tensor `T = M(h)`.
//!
//! All parameters are stored row-major in flat `f64` buffers, in the tensor
//! order used by checkpoints. Values coming out of [`train`] and
//! [`load_probe`] are exactly representable as `f32`, the checkpoint
//! precision, so a save/load cycle is lossless.

mod bilinear;
mod checkpoint;
mod linear;
mod loss;
mod train;
mod trilinear;

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

pub use bilinear::BilinearTprProbe;
pub use checkpoint::{
    load_probe, load_probe_as, read_probe_from, save_probe, write_probe_to, PROBE_MAGIC,
};
pub use linear::LinearProbe;
pub use loss::{board_loss, board_loss_grad, square_softmax};
pub use train::{accuracy, mean_loss, train, History, TrainConfig, ValidationPoint};
pub use trilinear::TrilinearTprProbe;

use crate::encodings::Dataset;
use crate::error::{Error, Result};
use crate::othello::Labels;

/// Per-square color logits, indexed `[square][color]`. For trilinear probes
/// the square index is `8 * row + col`.
pub type Logits = [[f64; 3]; 64];

pub const INIT_STD: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProbeKind {
    Linear,
    Bilinear,
    Trilinear,
}

impl ProbeKind {
    pub fn name(self) -> &'static str {
        match self {
            ProbeKind::Linear => "linear",
            ProbeKind::Bilinear => "bilinear",
            ProbeKind::Trilinear => "trilinear",
        }
    }
}

impl fmt::Display for ProbeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProbeKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(ProbeKind::Linear),
            "bilinear" => Ok(ProbeKind::Bilinear),
            "trilinear" => Ok(ProbeKind::Trilinear),
            _ => Err(Error::InvalidArgument(format!("unknown probe kind {s:?}"))),
        }
    }
}

/// A batch of activations stored column-per-sample (d_model x n).
#[derive(Debug, Clone)]
pub struct Batch {
    pub h: DMatrix<f64>,
    pub labels: Vec<Labels>,
}

impl Batch {
    pub fn from_dataset(d: &Dataset, indices: &[usize]) -> Batch {
        let dm = d.d_model();
        let mut h = DMatrix::zeros(dm, indices.len());
        let mut labels = Vec::with_capacity(indices.len());
        for (j, &i) in indices.iter().enumerate() {
            let s = d.get(i);
            for (dst, &x) in h.column_mut(j).iter_mut().zip(s.h) {
                *dst = x as f64;
            }
            labels.push(*s.labels);
        }
        Batch { h, labels }
    }

    pub fn from_vectors(rows: &[Vec<f64>], labels: Vec<Labels>) -> Batch {
        let dm = rows.first().map_or(0, Vec::len);
        let h = DMatrix::from_fn(dm, rows.len(), |k, j| rows[j][k]);
        Batch { h, labels }
    }

    pub fn len(&self) -> usize {
        self.h.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.h.ncols() == 0
    }

    pub fn d_model(&self) -> usize {
        self.h.nrows()
    }
}

/// Gradients in the same tensor order as [`Probe::params`].
pub type Grads = Vec<Vec<f64>>;

/// Common interface of the three probe families.
pub trait Probe: Clone + Send + Sync {
    fn kind(&self) -> ProbeKind;
    fn d_model(&self) -> usize;
    fn param_count(&self) -> usize;

    fn forward(&self, h: &[f64]) -> Result<Logits>;

    /// Logits for every column of `batch`.
    fn forward_batch(&self, batch: &Batch) -> Vec<Logits>;

    /// Mean board loss over the batch and its analytic gradient.
    fn loss_and_grad(&self, batch: &Batch) -> (f64, Grads);

    /// Parameter tensors in checkpoint order.
    fn params(&self) -> Vec<&[f64]>;
    fn params_mut(&mut self) -> Vec<&mut [f64]>;

    /// Rounds every parameter to the nearest `f32`.
    fn quantize(&mut self) {
        for t in self.params_mut() {
            for x in t.iter_mut() {
                *x = *x as f32 as f64;
            }
        }
    }
}

/// Any of the three probe families, as stored in a checkpoint.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyProbe {
    Linear(LinearProbe),
    Bilinear(BilinearTprProbe),
    Trilinear(TrilinearTprProbe),
}

macro_rules! dispatch {
    ($self:expr, $p:ident => $e:expr) => {
        match $self {
            AnyProbe::Linear($p) => $e,
            AnyProbe::Bilinear($p) => $e,
            AnyProbe::Trilinear($p) => $e,
        }
    };
}

impl Probe for AnyProbe {
    fn kind(&self) -> ProbeKind {
        dispatch!(self, p => p.kind())
    }
    fn d_model(&self) -> usize {
        dispatch!(self, p => p.d_model())
    }
    fn param_count(&self) -> usize {
        dispatch!(self, p => p.param_count())
    }
    fn forward(&self, h: &[f64]) -> Result<Logits> {
        dispatch!(self, p => p.forward(h))
    }
    fn forward_batch(&self, batch: &Batch) -> Vec<Logits> {
        dispatch!(self, p => p.forward_batch(batch))
    }
    fn loss_and_grad(&self, batch: &Batch) -> (f64, Grads) {
        dispatch!(self, p => p.loss_and_grad(batch))
    }
    fn params(&self) -> Vec<&[f64]> {
        dispatch!(self, p => p.params())
    }
    fn params_mut(&mut self) -> Vec<&mut [f64]> {
        dispatch!(self, p => p.params_mut())
    }
}

impl From<LinearProbe> for AnyProbe {
    fn from(p: LinearProbe) -> Self {
        AnyProbe::Linear(p)
    }
}

impl From<BilinearTprProbe> for AnyProbe {
    fn from(p: BilinearTprProbe) -> Self {
        AnyProbe::Bilinear(p)
    }
}

impl From<TrilinearTprProbe> for AnyProbe {
    fn from(p: TrilinearTprProbe) -> Self {
        AnyProbe::Trilinear(p)
    }
}

/// Closed-form parameter counts.
pub fn linear_param_count(d_model: usize) -> usize {
    192 * d_model
}

pub fn bilinear_param_count(d_r: usize, d_f: usize, d_model: usize) -> usize {
    64 * d_r + 3 * d_f + d_r * d_f * d_model
}

pub fn trilinear_param_count(d_u: usize, d_v: usize, d_f: usize, d_model: usize) -> usize {
    8 * d_u + 8 * d_v + 3 * d_f + d_u * d_v * d_f * d_model
}

/// `n` draws from N(0, INIT_STD^2), rounded to f32.
pub(crate) fn init_tensor(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let z: f64 = rng.sample(StandardNormal);
            (INIT_STD * z) as f32 as f64
        })
        .collect()
}

pub(crate) fn init_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) fn check_len(h: &[f64], d_model: usize) -> Result<()> {
    if h.len() != d_model {
        return Err(Error::dims(d_model, h.len(), "activation length"));
    }
    Ok(())
}

/// Index of the largest logit (first on ties).
pub fn argmax3(l: &[f64; 3]) -> usize {
    let mut best = 0;
    for c in 1..3 {
        if l[c] > l[best] {
            best = c;
        }
    }
    best
}
