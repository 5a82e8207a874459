// SPDX-License-Identifier: MIT OR Apache-2.0

use std::fmt;

use serde::{Serialize, Serializer};

use crate::othello::{bits, Square};

/// Probability above which a next-move logit counts as predicting a move.
pub const MOVE_THRESHOLD: f64 = 0.01;

/// A set of squares, stored as a 64-bit mask (bit = square offset).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct MoveSet(pub u64);

impl MoveSet {
    pub fn contains(self, sq: Square) -> bool {
        self.0 & (1u64 << sq.offset()) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn squares(self) -> impl Iterator<Item = Square> {
        bits(self.0)
    }

    /// False positives plus false negatives against `other`.
    pub fn error_count(self, other: MoveSet) -> usize {
        (self.0 ^ other.0).count_ones() as usize
    }
}

impl fmt::Display for MoveSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let toks: Vec<String> = self.squares().map(|s| s.to_string()).collect();
        f.write_str(&toks.join(" "))
    }
}

impl Serialize for MoveSet {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.squares().map(|q| q.to_string()))
    }
}

/// Squares whose softmax probability over all 64 logits exceeds
/// [`MOVE_THRESHOLD`].
pub fn moves_from_logits(logits: &[f64; 64]) -> MoveSet {
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logits.iter().map(|l| (l - m).exp()).collect();
    let z: f64 = e.iter().sum();
    let mut mask = 0u64;
    for (i, x) in e.iter().enumerate() {
        if x / z > MOVE_THRESHOLD {
            mask |= 1 << i;
        }
    }
    MoveSet(mask)
}
