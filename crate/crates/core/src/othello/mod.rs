// SPDX-License-Identifier: MIT OR Apache-2.0

//! Othello rules, transcripts, egocentric labels and target boards.

mod board;
mod game;
mod square;
mod target;

pub use board::{bits, Board, CellColor, DiscState, Labels, Player};
pub use game::{
    game_tree_count, random_game, read_transcripts, write_transcripts, Transcript, MAX_GAME_LEN,
};
pub use square::Square;
pub use target::{make_target_board, make_target_board_k, Edit, TargetBoard, DEFAULT_TARGET_ATTEMPTS};
