// SPDX-License-Identifier: MIT OR Apache-2.0

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{argmax3, board_loss, Batch, Probe};
use crate::encodings::Dataset;
use crate::error::{Error, Result};

/// Optimization schedule shared by every probe family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub lr: f64,
    pub weight_decay: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub patience: usize,
    pub validate_every: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lr: 1e-2,
            weight_decay: 1e-2,
            batch_size: 128,
            epochs: 1,
            patience: 10,
            validate_every: 100,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.lr > 0.0
            && self.lr.is_finite()
            && self.weight_decay >= 0.0
            && self.weight_decay.is_finite()
            && self.batch_size > 0
            && self.epochs > 0
            && self.patience > 0
            && self.validate_every > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid training config {self:?}")))
        }
    }
}

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const EPS: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationPoint {
    pub step: usize,
    pub val_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct History {
    /// Mean batch loss after each optimizer step.
    pub train_loss: Vec<f64>,
    pub validations: Vec<ValidationPoint>,
    pub best_step: usize,
    pub best_val_loss: f64,
    pub steps: usize,
    pub stopped_early: bool,
}

/// Adaptive-moment optimizer with decoupled weight decay.
struct AdamW {
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    t: i32,
    lr: f64,
    wd: f64,
}

impl AdamW {
    fn new<P: Probe>(p: &P, lr: f64, wd: f64) -> Self {
        let zeros: Vec<Vec<f64>> = p.params().iter().map(|t| vec![0.0; t.len()]).collect();
        AdamW {
            m: zeros.clone(),
            v: zeros,
            t: 0,
            lr,
            wd,
        }
    }

    fn step<P: Probe>(&mut self, p: &mut P, grads: &[Vec<f64>]) {
        self.t += 1;
        let bc1 = 1.0 - BETA1.powi(self.t);
        let bc2 = 1.0 - BETA2.powi(self.t);
        let (lr, wd) = (self.lr, self.wd);
        for (((w, g), m), v) in p.params_mut().into_iter().zip(grads).zip(&mut self.m).zip(&mut self.v) {
            for i in 0..w.len() {
                w[i] *= 1.0 - lr * wd;
                m[i] = BETA1 * m[i] + (1.0 - BETA1) * g[i];
                v[i] = BETA2 * v[i] + (1.0 - BETA2) * g[i] * g[i];
                let mh = m[i] / bc1;
                let vh = v[i] / bc2;
                w[i] -= lr * mh / (vh.sqrt() + EPS);
            }
        }
    }
}

const EVAL_CHUNK: usize = 512;

fn check_width<P: Probe>(probe: &P, d: &Dataset) -> Result<()> {
    if d.d_model() != probe.d_model() {
        return Err(Error::dims(probe.d_model(), d.d_model(), "dataset width"));
    }
    Ok(())
}

fn chunk_ranges(n: usize) -> Vec<Vec<usize>> {
    (0..n)
        .step_by(EVAL_CHUNK)
        .map(|s| (s..(s + EVAL_CHUNK).min(n)).collect())
        .collect()
}

/// Mean board loss over a dataset.
pub fn mean_loss<P: Probe>(probe: &P, d: &Dataset) -> Result<f64> {
    check_width(probe, d)?;
    if d.is_empty() {
        return Err(Error::InvalidArgument("empty dataset".into()));
    }
    let parts: Vec<f64> = chunk_ranges(d.len())
        .par_iter()
        .map(|idx| {
            let b = Batch::from_dataset(d, idx);
            probe
                .forward_batch(&b)
                .iter()
                .zip(&b.labels)
                .map(|(l, y)| board_loss(l, y))
                .sum()
        })
        .collect();
    Ok(parts.iter().sum::<f64>() / d.len() as f64)
}

/// Fraction of (sample, square) pairs whose argmax color matches the label.
pub fn accuracy<P: Probe>(probe: &P, d: &Dataset) -> Result<f64> {
    check_width(probe, d)?;
    if d.is_empty() {
        return Err(Error::InvalidArgument("empty dataset".into()));
    }
    let hits: usize = chunk_ranges(d.len())
        .par_iter()
        .map(|idx| {
            let b = Batch::from_dataset(d, idx);
            probe
                .forward_batch(&b)
                .iter()
                .zip(&b.labels)
                .map(|(l, y)| l.iter().zip(y).filter(|(ls, c)| argmax3(ls) == c.idx()).count())
                .sum::<usize>()
        })
        .sum();
    Ok(hits as f64 / (64 * d.len()) as f64)
}

/// Trains `probe` in place and leaves it at the best validation checkpoint,
/// rounded to `f32`.
///
/// Validation runs every `validate_every` steps and after the last step;
/// training stops once `patience` validations in a row fail to improve.
pub fn train<P: Probe>(probe: &mut P, train: &Dataset, val: &Dataset, cfg: &TrainConfig) -> Result<History> {
    cfg.validate()?;
    check_width(probe, train)?;
    check_width(probe, val)?;
    if train.is_empty() || val.is_empty() {
        return Err(Error::InvalidArgument("empty training or validation set".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut opt = AdamW::new(probe, cfg.lr, cfg.weight_decay);
    let mut hist = History {
        best_val_loss: mean_loss(probe, val)?,
        ..History::default()
    };
    hist.validations.push(ValidationPoint {
        step: 0,
        val_loss: hist.best_val_loss,
    });
    let mut best = probe.clone();
    let mut bad = 0usize;
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut step = 0usize;

    'outer: for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let batches: Vec<&[usize]> = order.chunks(cfg.batch_size).collect();
        let last = batches.len() - 1;
        for (bi, idx) in batches.into_iter().enumerate() {
            let batch = Batch::from_dataset(train, idx);
            let (loss, grads) = probe.loss_and_grad(&batch);
            opt.step(probe, &grads);
            step += 1;
            hist.train_loss.push(loss);

            if step.is_multiple_of(cfg.validate_every) || bi == last {
                let vl = mean_loss(probe, val)?;
                hist.validations.push(ValidationPoint { step, val_loss: vl });
                if vl < hist.best_val_loss {
                    hist.best_val_loss = vl;
                    hist.best_step = step;
                    best = probe.clone();
                    bad = 0;
                } else {
                    bad += 1;
                    if bad >= cfg.patience {
                        hist.stopped_early = true;
                        break 'outer;
                    }
                }
            }
        }
    }
    hist.steps = step;
    *probe = best;
    probe.quantize();
    Ok(hist)
}
