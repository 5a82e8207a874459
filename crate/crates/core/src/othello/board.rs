// SPDX-License-Identifier: MIT OR Apache-2.0

//! Bitboard rules engine.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::Square;
use crate::error::{Error, Result};

const NOT_COL0: u64 = !0x0101_0101_0101_0101;
const NOT_COL7: u64 = !0x8080_8080_8080_8080;

/// Absolute color of a placed disc, also used for the side to move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Player {
    Black,
    White,
}

impl Player {
    pub fn other(self) -> Player {
        match self {
            Player::Black => Player::White,
            Player::White => Player::Black,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DiscState {
    Black,
    White,
    Vacant,
}

/// Square label relative to the player to move.
///
/// The discriminants are the on-disk label bytes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[repr(u8)]
pub enum CellColor {
    Empty = 0,
    Current = 1,
    Opponent = 2,
}

impl CellColor {
    pub const ALL: [CellColor; 3] = [CellColor::Empty, CellColor::Current, CellColor::Opponent];

    #[inline]
    pub fn idx(self) -> usize {
        self as usize
    }

    pub fn from_idx(i: usize) -> Option<CellColor> {
        CellColor::ALL.get(i).copied()
    }

    pub fn from_byte(b: u8) -> Option<CellColor> {
        CellColor::from_idx(b as usize)
    }
}

impl fmt::Display for CellColor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CellColor::Empty => "empty",
            CellColor::Current => "current",
            CellColor::Opponent => "opponent",
        })
    }
}

/// A full egocentric labeling of the board.
pub type Labels = [CellColor; 64];

#[inline]
fn shift(bb: u64, dir: usize) -> u64 {
    match dir {
        0 => (bb << 1) & NOT_COL0, // col + 1
        1 => (bb >> 1) & NOT_COL7, // col - 1
        2 => bb << 8,              // row + 1
        3 => bb >> 8,              // row - 1
        4 => (bb << 9) & NOT_COL0,
        5 => (bb << 7) & NOT_COL7,
        6 => (bb >> 7) & NOT_COL0,
        _ => (bb >> 9) & NOT_COL7,
    }
}

/// Board position: two occupancy bitboards plus the side to move.
///
/// Bit `8 * row + col` corresponds to [`Square::offset`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Board {
    black: u64,
    white: u64,
    to_move: Player,
}

impl Board {
    /// Standard setup: Black on D5 and E4, White on D4 and E5, Black to move.
    pub fn initial() -> Board {
        let sq = |t: &str| t.parse::<Square>().expect("static token").bit();
        Board {
            black: sq("D5") | sq("E4"),
            white: sq("D4") | sq("E5"),
            to_move: Player::Black,
        }
    }

    pub fn from_cells(cells: &[DiscState; 64], to_move: Player) -> Board {
        let mut b = Board {
            black: 0,
            white: 0,
            to_move,
        };
        for (i, c) in cells.iter().enumerate() {
            match c {
                DiscState::Black => b.black |= 1 << i,
                DiscState::White => b.white |= 1 << i,
                DiscState::Vacant => {}
            }
        }
        b
    }

    /// Board whose player to move owns every `Current` square.
    pub fn from_labels(labels: &Labels, to_move: Player) -> Board {
        let mut cells = [DiscState::Vacant; 64];
        let (cur, opp) = match to_move {
            Player::Black => (DiscState::Black, DiscState::White),
            Player::White => (DiscState::White, DiscState::Black),
        };
        for (cell, l) in cells.iter_mut().zip(labels) {
            *cell = match l {
                CellColor::Empty => DiscState::Vacant,
                CellColor::Current => cur,
                CellColor::Opponent => opp,
            };
        }
        Board::from_cells(&cells, to_move)
    }

    pub fn from_bitboards(black: u64, white: u64, to_move: Player) -> Result<Board> {
        if black & white != 0 {
            return Err(Error::InvalidArgument(
                "black and white bitboards overlap".into(),
            ));
        }
        Ok(Board {
            black,
            white,
            to_move,
        })
    }

    pub fn black(&self) -> u64 {
        self.black
    }

    pub fn white(&self) -> u64 {
        self.white
    }

    pub fn to_move(&self) -> Player {
        self.to_move
    }

    pub fn with_to_move(mut self, p: Player) -> Board {
        self.to_move = p;
        self
    }

    pub fn occupied(&self) -> u64 {
        self.black | self.white
    }

    pub fn disc_count(&self) -> u32 {
        self.occupied().count_ones()
    }

    pub fn count(&self, p: Player) -> u32 {
        match p {
            Player::Black => self.black.count_ones(),
            Player::White => self.white.count_ones(),
        }
    }

    pub fn cell(&self, sq: Square) -> DiscState {
        let bit = sq.bit();
        if self.black & bit != 0 {
            DiscState::Black
        } else if self.white & bit != 0 {
            DiscState::White
        } else {
            DiscState::Vacant
        }
    }

    pub fn set_cell(&mut self, sq: Square, state: DiscState) {
        let bit = sq.bit();
        self.black &= !bit;
        self.white &= !bit;
        match state {
            DiscState::Black => self.black |= bit,
            DiscState::White => self.white |= bit,
            DiscState::Vacant => {}
        }
    }

    pub fn cells(&self) -> [DiscState; 64] {
        let mut out = [DiscState::Vacant; 64];
        for sq in Square::all() {
            out[sq.offset()] = self.cell(sq);
        }
        out
    }

    fn own_opp(&self, p: Player) -> (u64, u64) {
        match p {
            Player::Black => (self.black, self.white),
            Player::White => (self.white, self.black),
        }
    }

    fn legal_mask_for(&self, p: Player) -> u64 {
        let (own, opp) = self.own_opp(p);
        let empty = !(own | opp);
        let mut moves = 0;
        for dir in 0..8 {
            let mut run = shift(own, dir) & opp;
            for _ in 0..5 {
                run |= shift(run, dir) & opp;
            }
            moves |= shift(run, dir) & empty;
        }
        moves
    }

    /// Bitmask of legal placements for the side to move.
    pub fn legal_mask(&self) -> u64 {
        self.legal_mask_for(self.to_move)
    }

    pub fn legal_moves(&self) -> Vec<Square> {
        bits(self.legal_mask()).collect()
    }

    pub fn is_legal(&self, sq: Square) -> bool {
        self.legal_mask() & sq.bit() != 0
    }

    /// Neither side has a legal placement.
    pub fn is_terminal(&self) -> bool {
        self.legal_mask_for(Player::Black) == 0 && self.legal_mask_for(Player::White) == 0
    }

    fn flips(&self, sq: Square) -> u64 {
        let (own, opp) = self.own_opp(self.to_move);
        let start = sq.bit();
        let mut flips = 0;
        for dir in 0..8 {
            let mut run = 0;
            let mut cur = shift(start, dir);
            while cur & opp != 0 {
                run |= cur;
                cur = shift(cur, dir);
            }
            if cur & own != 0 {
                flips |= run;
            }
        }
        flips
    }

    /// Places a disc for the side to move and flips every bracketed run.
    ///
    /// The turn passes to the opponent unless the opponent has no legal move,
    /// in which case the mover keeps the turn. When neither side can move the
    /// turn goes to the opponent and the position is terminal.
    pub fn apply_move(&self, sq: Square) -> Result<Board> {
        if !self.is_legal(sq) {
            return Err(Error::IllegalMove(sq.to_string()));
        }
        let flips = self.flips(sq);
        let mut next = *self;
        let (own, opp) = match self.to_move {
            Player::Black => (&mut next.black, &mut next.white),
            Player::White => (&mut next.white, &mut next.black),
        };
        *own |= flips | sq.bit();
        *opp &= !flips;
        let opponent = self.to_move.other();
        next.to_move = if next.legal_mask_for(opponent) == 0 && next.legal_mask_for(self.to_move) != 0
        {
            self.to_move
        } else {
            opponent
        };
        Ok(next)
    }

    /// Labels relative to the side to move.
    pub fn egocentric_labels(&self) -> Labels {
        let (own, opp) = self.own_opp(self.to_move);
        let mut out = [CellColor::Empty; 64];
        for (i, l) in out.iter_mut().enumerate() {
            let bit = 1u64 << i;
            if own & bit != 0 {
                *l = CellColor::Current;
            } else if opp & bit != 0 {
                *l = CellColor::Opponent;
            }
        }
        out
    }

    /// Every occupied square is 8-connected to an occupied center square.
    pub fn is_connected(&self) -> bool {
        let occ = self.occupied();
        let center: u64 = Square::center().iter().map(|s| s.bit()).fold(0, |a, b| a | b);
        let mut reached = occ & center;
        loop {
            let mut grown = reached;
            for dir in 0..8 {
                grown |= shift(reached, dir) & occ;
            }
            if grown == reached {
                break;
            }
            reached = grown;
        }
        reached == occ
    }
}

impl Default for Board {
    fn default() -> Self {
        Board::initial()
    }
}

impl fmt::Display for Board {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "  1 2 3 4 5 6 7 8")?;
        for r in 0..8 {
            write!(f, "{}", (b'A' + r as u8) as char)?;
            for c in 0..8 {
                let ch = match self.cell(Square::from_row_col(r, c).unwrap()) {
                    DiscState::Black => 'X',
                    DiscState::White => 'O',
                    DiscState::Vacant => '.',
                };
                write!(f, " {ch}")?;
            }
            writeln!(f)?;
        }
        write!(f, "{:?} to move", self.to_move)
    }
}

/// Squares set in a bitmask, in ascending order.
pub fn bits(mut mask: u64) -> impl Iterator<Item = Square> {
    std::iter::from_fn(move || {
        if mask == 0 {
            return None;
        }
        let i = mask.trailing_zeros() as usize;
        mask &= mask - 1;
        Square::from_offset(i)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sq(t: &str) -> Square {
        t.parse().unwrap()
    }

    fn names(v: &[Square]) -> Vec<String> {
        let mut n: Vec<String> = v.iter().map(|s| s.to_string()).collect();
        n.sort();
        n
    }

    #[test]
    fn initial_setup() {
        let b = Board::initial();
        assert_eq!(b.to_move(), Player::Black);
        assert_eq!(b.cells().iter().filter(|c| **c == DiscState::Vacant).count(), 60);
        assert_eq!(b.cell(sq("D4")), DiscState::White);
        assert_eq!(b.cell(sq("D5")), DiscState::Black);
        assert_eq!(b.cell(sq("E4")), DiscState::Black);
        assert_eq!(b.cell(sq("E5")), DiscState::White);
    }

    #[test]
    fn opening_moves() {
        assert_eq!(names(&Board::initial().legal_moves()), ["C4", "D3", "E6", "F5"]);
    }

    #[test]
    fn full_board_has_no_moves() {
        let b = Board::from_bitboards(0x00ff_00ff_00ff_00ff, 0xff00_ff00_ff00_ff00, Player::Black)
            .unwrap();
        assert!(b.legal_moves().is_empty());
        assert!(b.is_terminal());
    }

    #[test]
    fn stranded_player_has_no_moves() {
        // White alone on the board: Black has nothing to bracket.
        let b = Board::from_bitboards(0, sq("D4").bit() | sq("E5").bit(), Player::Black).unwrap();
        assert!(b.legal_moves().is_empty());
    }

    #[test]
    fn d3_flips_d4() {
        let b = Board::initial().apply_move(sq("D3")).unwrap();
        assert_eq!(b.cell(sq("D4")), DiscState::Black);
        assert_eq!(b.count(Player::Black), 4);
        assert_eq!(b.count(Player::White), 1);
        assert_eq!(b.to_move(), Player::White);
    }

    #[test]
    fn illegal_move_rejected() {
        let b = Board::initial();
        assert!(matches!(b.apply_move(sq("A1")), Err(Error::IllegalMove(_))));
        assert!(matches!(b.apply_move(sq("D4")), Err(Error::IllegalMove(_))));
    }

    #[test]
    fn value_semantics() {
        let b = Board::initial();
        let saved = b;
        let _ = b.apply_move(sq("C4")).unwrap();
        assert_eq!(b, saved);
    }

    #[test]
    fn pass_keeps_turn() {
        // Black: A1, White: A2. Black plays A3 capturing A2; White then has
        // no discs and no move, so Black keeps the turn only if Black can
        // still move, which it cannot: the game is over.
        let b = Board::from_bitboards(sq("A1").bit(), sq("A2").bit(), Player::Black).unwrap();
        let n = b.apply_move(sq("A3")).unwrap();
        assert!(n.is_terminal());
        assert_eq!(n.to_move(), Player::White);

        // Black: A1, White: A2 and H8 with black H6. Black captures A2 via A3;
        // White (H8 only) has no move while Black can still take H7.
        let b = Board::from_bitboards(
            sq("A1").bit() | sq("H6").bit(),
            sq("A2").bit() | sq("H7").bit() | sq("G1").bit(),
            Player::Black,
        )
        .unwrap();
        let n = b.apply_move(sq("H8")).unwrap();
        assert_eq!(n.cell(sq("H7")), DiscState::Black);
        // White has A2 and G1 left: neither brackets anything.
        assert_eq!(n.legal_mask_for(Player::White), 0);
        assert_eq!(n.to_move(), Player::Black);
    }

    #[test]
    fn egocentric_initial() {
        let l = Board::initial().egocentric_labels();
        assert_eq!(l[sq("D5").offset()], CellColor::Current);
        assert_eq!(l[sq("E4").offset()], CellColor::Current);
        assert_eq!(l[sq("D4").offset()], CellColor::Opponent);
        assert_eq!(l[sq("E5").offset()], CellColor::Opponent);
        assert_eq!(l.iter().filter(|c| **c == CellColor::Empty).count(), 60);
    }

    #[test]
    fn egocentric_swaps_with_turn() {
        let b = Board::initial().apply_move(sq("F5")).unwrap();
        let a = b.egocentric_labels();
        let flipped = b.with_to_move(b.to_move().other()).egocentric_labels();
        for (x, y) in a.iter().zip(flipped.iter()) {
            match x {
                CellColor::Empty => assert_eq!(*y, CellColor::Empty),
                CellColor::Current => assert_eq!(*y, CellColor::Opponent),
                CellColor::Opponent => assert_eq!(*y, CellColor::Current),
            }
        }
        let vacant = Board::from_cells(&[DiscState::Vacant; 64], Player::White);
        assert!(vacant.egocentric_labels().iter().all(|c| *c == CellColor::Empty));
    }

    #[test]
    fn labels_roundtrip_through_board() {
        let b = Board::initial().apply_move(sq("E6")).unwrap();
        let l = b.egocentric_labels();
        assert_eq!(Board::from_labels(&l, b.to_move()), b);
    }

    #[test]
    fn island_check() {
        assert!(Board::initial().is_connected());
        let mut b = Board::initial();
        b.set_cell(sq("A1"), DiscState::Black);
        assert!(!b.is_connected());
        // A diagonal chain back to the center reconnects it.
        for t in ["B2", "C3"] {
            b.set_cell(sq(t), DiscState::White);
        }
        assert!(b.is_connected());
    }
}
