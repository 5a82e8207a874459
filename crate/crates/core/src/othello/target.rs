// SPDX-License-Identifier: MIT OR Apache-2.0

//! Target boards for intervention experiments.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{bits, Board, CellColor, DiscState, Square};
use crate::error::{Error, Result};

pub const DEFAULT_TARGET_ATTEMPTS: usize = 1000;

/// One square recolored in egocentric terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edit {
    #[serde(with = "square_token")]
    pub square: Square,
    pub from: CellColor,
    pub to: CellColor,
}

/// A modified board plus the edits that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetBoard {
    pub board: Board,
    pub edits: Vec<Edit>,
}

/// Single-edit target board, see [`make_target_board_k`].
pub fn make_target_board(board: &Board, seed: u64) -> Result<TargetBoard> {
    make_target_board_k(board, 1, seed, DEFAULT_TARGET_ATTEMPTS)
}

/// Picks `k` distinct occupied non-center squares and either flips each one's
/// color or empties it.
///
/// A candidate is accepted only when every occupied square stays 8-connected
/// to the center block and the legal-move set differs from the original.
/// Attempts are redrawn from one seeded stream up to `max_attempts` times.
pub fn make_target_board_k(
    board: &Board,
    k: usize,
    seed: u64,
    max_attempts: usize,
) -> Result<TargetBoard> {
    let candidates: Vec<Square> = bits(board.occupied())
        .filter(|s| !s.is_center())
        .collect();
    if k == 0 || candidates.len() < k {
        return Err(Error::NoValidTarget { attempts: 0 });
    }
    let labels = board.egocentric_labels();
    let original_moves = board.legal_mask();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    for _ in 0..max_attempts {
        let mut target = *board;
        let mut edits = Vec::with_capacity(k);
        for i in sample(&mut rng, candidates.len(), k).into_iter() {
            let sq = candidates[i];
            let from = labels[sq.offset()];
            let to = if rng.random_bool(0.5) {
                CellColor::Empty
            } else if from == CellColor::Current {
                CellColor::Opponent
            } else {
                CellColor::Current
            };
            let state = match (to, target.cell(sq)) {
                (CellColor::Empty, _) => DiscState::Vacant,
                (_, DiscState::Black) => DiscState::White,
                (_, _) => DiscState::Black,
            };
            target.set_cell(sq, state);
            edits.push(Edit { square: sq, from, to });
        }
        if target.is_connected() && target.legal_mask() != original_moves {
            edits.sort_by_key(|e| e.square);
            return Ok(TargetBoard {
                board: target,
                edits,
            });
        }
    }
    Err(Error::NoValidTarget {
        attempts: max_attempts,
    })
}

mod square_token {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::othello::Square;

    pub fn serialize<S: Serializer>(sq: &Square, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(sq)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Square, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
