// SPDX-License-Identifier: MIT OR Apache-2.0

use nalgebra::{DMatrix, DVector};

use crate::encodings::RandomCodingBook;
use crate::error::{Error, Result};
use crate::linalg::pinv;
use crate::othello::{Board, CellColor, Labels, Player, Transcript};

/// What the intervention sweep needs from a sequence model: an activation
/// for a transcript and next-move logits for a (possibly edited) activation.
pub trait ModelAdapter: Sync {
    fn d_model(&self) -> usize;
    fn encode(&self, t: &Transcript) -> Result<Vec<f64>>;
    fn next_move_logits(&self, h: &[f64]) -> Result<[f64; 64]>;
}

pub const LEGAL_LOGIT: f64 = 10.0;

/// Closed-loop stand-in for a trained model. It encodes positions with a
/// random codebook, decodes each square through the dual basis, and puts
/// `+LEGAL_LOGIT` on the legal moves of the decoded board and
/// `-LEGAL_LOGIT` everywhere else.
#[derive(Debug, Clone)]
pub struct SyntheticModel {
    book: RandomCodingBook,
    dual: DMatrix<f64>,
}

impl SyntheticModel {
    pub fn new(book: RandomCodingBook) -> Result<Self> {
        if book.d_model() < 192 {
            return Err(Error::InsufficientDimension {
                d_model: book.d_model(),
                required: 192,
            });
        }
        let dual = pinv(book.matrix()).transpose();
        Ok(SyntheticModel { book, dual })
    }

    pub fn book(&self) -> &RandomCodingBook {
        &self.book
    }

    pub fn encode_labels(&self, labels: &Labels) -> Vec<f64> {
        self.book.encode(labels)
    }

    /// Per-square argmax of the dual read-out.
    pub fn decode(&self, h: &[f64]) -> Result<Labels> {
        if h.len() != self.d_model() {
            return Err(Error::dims(self.d_model(), h.len(), "activation length"));
        }
        let scores = &self.dual * DVector::from_column_slice(h);
        let mut out = [CellColor::Empty; 64];
        for (s, l) in out.iter_mut().enumerate() {
            let sc = [scores[3 * s], scores[3 * s + 1], scores[3 * s + 2]];
            *l = CellColor::from_idx(crate::probes::argmax3(&sc)).expect("0..3");
        }
        Ok(out)
    }
}

impl ModelAdapter for SyntheticModel {
    fn d_model(&self) -> usize {
        self.book.d_model()
    }

    fn encode(&self, t: &Transcript) -> Result<Vec<f64>> {
        Ok(self.book.encode(&t.final_board().egocentric_labels()))
    }

    fn next_move_logits(&self, h: &[f64]) -> Result<[f64; 64]> {
        // Egocentric labels put the mover on `Current`; which absolute color
        // that is does not affect the legal set.
        let board = Board::from_labels(&self.decode(h)?, Player::Black);
        let legal = board.legal_mask();
        Ok(std::array::from_fn(|i| {
            if legal & (1 << i) != 0 {
                LEGAL_LOGIT
            } else {
                -LEGAL_LOGIT
            }
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interventions::moves_from_logits;
    use crate::othello::random_game;

    #[test]
    fn narrow_models_rejected() {
        assert!(matches!(
            SyntheticModel::new(RandomCodingBook::new(0, 191)),
            Err(Error::InsufficientDimension { d_model: 191, required: 192 })
        ));
    }

    #[test]
    fn logits_mark_true_legal_moves() {
        let m = SyntheticModel::new(RandomCodingBook::new(1, 256)).unwrap();
        for seed in 0..30 {
            let t = random_game(seed, 1 + (seed as usize * 7) % 55);
            let b = t.final_board();
            let h = m.encode(&t).unwrap();
            assert_eq!(m.decode(&h).unwrap(), b.egocentric_labels());
            if b.legal_mask() != 0 {
                assert_eq!(moves_from_logits(&m.next_move_logits(&h).unwrap()).0, b.legal_mask());
            }
        }
    }
}
