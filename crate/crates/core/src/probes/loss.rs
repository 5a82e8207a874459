// SPDX-License-Identifier: MIT OR Apache-2.0

//! Per-square softmax cross-entropy summed over the board.

use super::Logits;
use crate::othello::Labels;

/// Softmax of one square's three logits (max-shifted).
pub fn square_softmax(l: &[f64; 3]) -> [f64; 3] {
    let m = l[0].max(l[1]).max(l[2]);
    let e = [(l[0] - m).exp(), (l[1] - m).exp(), (l[2] - m).exp()];
    let z = e[0] + e[1] + e[2];
    [e[0] / z, e[1] / z, e[2] / z]
}

#[inline]
fn square_nll(l: &[f64; 3], target: usize) -> f64 {
    let m = l[0].max(l[1]).max(l[2]);
    let lse = m + ((l[0] - m).exp() + (l[1] - m).exp() + (l[2] - m).exp()).ln();
    lse - l[target]
}

/// Sum over the 64 squares of the cross-entropy against `labels`.
pub fn board_loss(logits: &Logits, labels: &Labels) -> f64 {
    logits
        .iter()
        .zip(labels)
        .map(|(l, y)| square_nll(l, y.idx()))
        .sum()
}

/// Loss and its gradient with respect to the logits (`softmax - onehot`).
pub fn board_loss_grad(logits: &Logits, labels: &Labels) -> (f64, Logits) {
    let mut g = [[0.0; 3]; 64];
    let mut loss = 0.0;
    for ((l, y), gs) in logits.iter().zip(labels).zip(g.iter_mut()) {
        loss += square_nll(l, y.idx());
        *gs = square_softmax(l);
        gs[y.idx()] -= 1.0;
    }
    (loss, g)
}
