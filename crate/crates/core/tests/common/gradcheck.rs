// SPDX-License-Identifier: MIT OR Apache-2.0

//! Brute-force probe loss and a central-difference gradient check.

use tprlab::encodings::sample_ood_labels;
use tprlab::othello::Labels;
use tprlab::probes::{AnyProbe, Batch, Probe};

pub const STEP: f64 = 1e-4;

fn nll(l: [f64; 3], y: usize) -> f64 {
    let z: f64 = l.iter().map(|x| x.exp()).sum();
    z.ln() - l[y]
}

/// Brute-force logits straight from the parameter tensors, using nothing
/// but nested loops.
pub fn brute_logits(p: &AnyProbe, h: &[f64]) -> Vec<[f64; 3]> {
    let d = h.len();
    let t = p.params();
    let mut out = vec![[0.0; 3]; 64];
    match p {
        AnyProbe::Linear(_) => {
            let w = t[0];
            for s in 0..64 {
                for c in 0..3 {
                    out[s][c] = (0..d).map(|k| w[(3 * s + c) * d + k] * h[k]).sum();
                }
            }
        }
        AnyProbe::Bilinear(b) => {
            let (r, f, m) = (t[0], t[1], t[2]);
            let (dr, df) = (b.d_r(), b.d_f());
            for s in 0..64 {
                for c in 0..3 {
                    for a in 0..dr {
                        for e in 0..df {
                            let bab: f64 = (0..d).map(|k| m[(a * df + e) * d + k] * h[k]).sum();
                            out[s][c] += r[s * dr + a] * bab * f[c * df + e];
                        }
                    }
                }
            }
        }
        AnyProbe::Trilinear(tp) => {
            let (u, v, f, m) = (t[0], t[1], t[2], t[3]);
            let (du, dv, df) = tp.dims();
            for i in 0..8 {
                for j in 0..8 {
                    for c in 0..3 {
                        for a in 0..du {
                            for b in 0..dv {
                                for e in 0..df {
                                    let tv: f64 = (0..d).map(|k| m[((a * dv + b) * df + e) * d + k] * h[k]).sum();
                                    out[8 * i + j][c] += tv * u[i * du + a] * v[j * dv + b] * f[c * df + e];
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

pub fn brute_loss(p: &AnyProbe, hs: &[Vec<f64>], ys: &[Labels]) -> f64 {
    let total: f64 = hs
        .iter()
        .zip(ys)
        .map(|(h, y)| brute_logits(p, h).iter().zip(y).map(|(l, c)| nll(*l, c.idx())).sum::<f64>())
        .sum();
    total / hs.len() as f64
}

pub fn inputs(n: usize, d: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<Labels>) {
    let hs = (0..n)
        .map(|j| (0..d).map(|k| (((seed as usize + 3 * j + 7 * k) % 11) as f64 - 5.0) * 0.3).collect())
        .collect();
    let ys = (0..n).map(|j| sample_ood_labels(seed * 31 + j as u64)).collect();
    (hs, ys)
}

/// Largest elementwise relative error, with a floor on the denominator
/// so that entries whose gradient is essentially zero are compared in
/// absolute terms.
pub fn max_rel_error(p: &AnyProbe, hs: &[Vec<f64>], ys: &[Labels]) -> f64 {
    let batch = Batch::from_vectors(hs, ys.to_vec());
    let (_, grads) = p.loss_and_grad(&batch);
    let mut worst: f64 = 0.0;
    for (ti, g) in grads.iter().enumerate() {
        for i in 0..g.len() {
            let mut plus = p.clone();
            plus.params_mut()[ti][i] += STEP;
            let mut minus = p.clone();
            minus.params_mut()[ti][i] -= STEP;
            let num = (brute_loss(&plus, hs, ys) - brute_loss(&minus, hs, ys)) / (2.0 * STEP);
            let denom = g[i].abs().max(num.abs()).max(1e-3);
            worst = worst.max((g[i] - num).abs() / denom);
        }
    }
    worst
}

/// Scale parameters up so the loss landscape is not flat around zero.
pub fn scaled(mut p: AnyProbe, by: f64) -> AnyProbe {
    for t in p.params_mut() {
        t.iter_mut().for_each(|x| *x *= by);
    }
    p
}
