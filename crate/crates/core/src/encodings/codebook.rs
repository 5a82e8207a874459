// SPDX-License-Identifier: MIT OR Apache-2.0

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::othello::{CellColor, Labels};

/// One random vector per (square, color) pair; a board is encoded as the sum
/// of its 64 selected vectors.
///
/// Row `3 * square + color` of [`matrix`](RandomCodingBook::matrix) holds the
/// vector for that pair. Entries are i.i.d. normal with standard deviation
/// `std`; the default `1 / sqrt(d_model)` gives each vector roughly unit norm.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomCodingBook {
    seed: u64,
    std: f64,
    q: DMatrix<f64>,
}

impl RandomCodingBook {
    pub fn new(seed: u64, d_model: usize) -> Self {
        Self::with_std(seed, d_model, default_std(d_model))
    }

    pub fn with_std(seed: u64, d_model: usize, std: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut q = DMatrix::zeros(192, d_model);
        for r in 0..192 {
            for c in 0..d_model {
                let z: f64 = rng.sample(StandardNormal);
                q[(r, c)] = std * z;
            }
        }
        RandomCodingBook { seed, std, q }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn std(&self) -> f64 {
        self.std
    }

    pub fn d_model(&self) -> usize {
        self.q.ncols()
    }

    /// The stacked 192 x d_model codebook.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn vector(&self, square: usize, color: CellColor) -> Vec<f64> {
        self.q.row(3 * square + color.idx()).iter().copied().collect()
    }

    /// Sum of the 64 vectors selected by `labels`.
    pub fn encode(&self, labels: &Labels) -> Vec<f64> {
        let mut h = vec![0.0; self.d_model()];
        for (s, c) in labels.iter().enumerate() {
            let row = self.q.row(3 * s + c.idx());
            for (hk, qk) in h.iter_mut().zip(row.iter()) {
                *hk += qk;
            }
        }
        h
    }
}

pub fn default_std(d_model: usize) -> f64 {
    1.0 / (d_model.max(1) as f64).sqrt()
}

/// Free-function form of [`RandomCodingBook::encode`].
pub fn random_coding_encode(book: &RandomCodingBook, labels: &Labels) -> Vec<f64> {
    book.encode(labels)
}
