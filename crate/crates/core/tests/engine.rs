// SPDX-License-Identifier: MIT OR Apache-2.0

//! The bitboard engine against a deliberately naive 8x8 array implementation.

mod common;

use common::naive::Naive;
use proptest::prelude::*;
use tprlab::othello::{game_tree_count, Board, Square};

fn tokens(moves: &[(usize, usize)]) -> Vec<String> {
    let mut v: Vec<String> = moves
        .iter()
        .map(|&(r, c)| Square::from_row_col(r, c).unwrap().to_string())
        .collect();
    v.sort();
    v
}

#[test]
fn opening_moves() {
    let mut got: Vec<String> = Board::initial().legal_moves().iter().map(|s| s.to_string()).collect();
    got.sort();
    assert_eq!(got, ["C4", "D3", "E6", "F5"]);
    assert_eq!(tokens(&Naive::start().moves_for(1)), got);
}

#[test]
fn tree_counts_match_naive_enumerator() {
    let want = [4, 12, 56, 244, 1396, 8200];
    for (i, &w) in want.iter().enumerate() {
        let depth = i + 1;
        assert_eq!(Naive::start().count(depth), w, "naive depth {depth}");
        assert_eq!(game_tree_count(depth), w, "engine depth {depth}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_playouts_agree(choices in prop::collection::vec(any::<u16>(), 60)) {
        let mut b = Board::initial();
        let mut n = Naive::start();
        for pick in choices {
            prop_assert!(n.matches(&b));
            let legal: Vec<Square> = b.legal_moves();
            let naive = n.moves_for(n.side);
            prop_assert_eq!(
                tokens(&naive),
                {
                    let mut t: Vec<String> = legal.iter().map(|s| s.to_string()).collect();
                    t.sort();
                    t
                }
            );
            if legal.is_empty() {
                prop_assert!(b.is_terminal());
                break;
            }
            let sq = legal[pick as usize % legal.len()];
            b = b.apply_move(sq).unwrap();
            n = n.play(sq.row(), sq.col());
        }
    }
}
