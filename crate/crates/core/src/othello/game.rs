// SPDX-License-Identifier: MIT OR Apache-2.0

//! Move transcripts, random self-play and move-tree counting.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{bits, Board, Square};
use crate::error::{Error, Result};

pub const MAX_GAME_LEN: usize = 60;

/// Ordered list of placed moves from the initial position.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Transcript {
    moves: Vec<Square>,
}

impl Transcript {
    /// Validates every move against the position it is played in.
    pub fn new(moves: Vec<Square>) -> Result<Transcript> {
        if moves.len() > MAX_GAME_LEN {
            return Err(Error::InvalidArgument(format!(
                "transcript has {} moves, at most {MAX_GAME_LEN} allowed",
                moves.len()
            )));
        }
        let mut board = Board::initial();
        for &m in &moves {
            board = board.apply_move(m)?;
        }
        Ok(Transcript { moves })
    }

    pub fn moves(&self) -> &[Square] {
        &self.moves
    }

    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }

    /// First `n` moves.
    pub fn prefix(&self, n: usize) -> Transcript {
        Transcript {
            moves: self.moves[..n.min(self.moves.len())].to_vec(),
        }
    }

    /// Position after each move, in order. Entry `t` is the board after
    /// `t + 1` moves.
    pub fn positions(&self) -> Vec<Board> {
        let mut board = Board::initial();
        self.moves
            .iter()
            .map(|&m| {
                board = board
                    .apply_move(m)
                    .expect("transcript moves validated at construction");
                board
            })
            .collect()
    }

    pub fn final_board(&self) -> Board {
        self.positions().pop().unwrap_or_else(Board::initial)
    }
}

impl fmt::Display for Transcript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, m) in self.moves.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{m}")?;
        }
        Ok(())
    }
}

impl FromStr for Transcript {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let moves = s
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<Vec<Square>>>()?;
        Transcript::new(moves)
    }
}

/// Reads one transcript per non-blank line.
pub fn read_transcripts<R: BufRead>(reader: R) -> Result<Vec<Transcript>> {
    let mut out = Vec::new();
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(line.parse()?);
    }
    Ok(out)
}

pub fn write_transcripts<W: Write>(mut writer: W, games: &[Transcript]) -> Result<()> {
    for g in games {
        writeln!(writer, "{g}")?;
    }
    Ok(())
}

/// Plays uniformly random legal moves until `max_len` moves or the game ends.
pub fn random_game(seed: u64, max_len: usize) -> Transcript {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut board = Board::initial();
    let mut moves = Vec::new();
    while moves.len() < max_len.min(MAX_GAME_LEN) {
        let legal = board.legal_moves();
        if legal.is_empty() {
            break;
        }
        let m = legal[rng.random_range(0..legal.len())];
        board = board.apply_move(m).expect("move drawn from legal set");
        moves.push(m);
    }
    Transcript { moves }
}

/// Number of distinct legal move sequences of exactly `depth` plies.
pub fn game_tree_count(depth: usize) -> u64 {
    fn walk(board: &Board, depth: usize) -> u64 {
        if depth == 0 {
            return 1;
        }
        let mask = board.legal_mask();
        if depth == 1 {
            return mask.count_ones() as u64;
        }
        bits(mask)
            .map(|m| walk(&board.apply_move(m).expect("legal"), depth - 1))
            .sum()
    }
    walk(&Board::initial(), depth)
}
