// SPDX-License-Identifier: MIT OR Apache-2.0

use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// One of the 64 board squares.
///
/// Rows are lettered `A`..`H` and columns numbered `1`..`8`, so the token
/// `"D3"` is row D, column 3. Internally the square is stored as a zero-based
/// offset `8 * row + col`; the public one-based [`index`](Square::index) is
/// `offset + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Square(u8);

impl Square {
    pub const COUNT: usize = 64;

    /// From a zero-based offset in `0..64`.
    pub fn from_offset(offset: usize) -> Option<Self> {
        (offset < 64).then_some(Square(offset as u8))
    }

    /// From a one-based index in `1..=64`.
    pub fn from_index(index: usize) -> Option<Self> {
        (1..=64).contains(&index).then(|| Square((index - 1) as u8))
    }

    /// From zero-based `(row, col)`.
    pub fn from_row_col(row: usize, col: usize) -> Option<Self> {
        (row < 8 && col < 8).then(|| Square((row * 8 + col) as u8))
    }

    #[inline]
    pub fn offset(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize + 1
    }

    #[inline]
    pub fn row(self) -> usize {
        self.0 as usize / 8
    }

    #[inline]
    pub fn col(self) -> usize {
        self.0 as usize % 8
    }

    #[inline]
    pub(crate) fn bit(self) -> u64 {
        1u64 << self.0
    }

    pub fn all() -> impl Iterator<Item = Square> {
        (0..64u8).map(Square)
    }

    /// The four squares occupied in the starting position.
    pub fn center() -> [Square; 4] {
        // D4, D5, E4, E5
        [Square(27), Square(28), Square(35), Square(36)]
    }

    pub fn is_center(self) -> bool {
        matches!(self.0, 27 | 28 | 35 | 36)
    }

    /// Squares at Chebyshev distance one.
    pub fn neighbors(self) -> impl Iterator<Item = Square> {
        let (r, c) = (self.row() as i32, self.col() as i32);
        (-1..=1)
            .flat_map(move |dr| (-1..=1).map(move |dc| (dr, dc)))
            .filter(|&d| d != (0, 0))
            .filter_map(move |(dr, dc)| {
                let (nr, nc) = (r + dr, c + dc);
                ((0..8).contains(&nr) && (0..8).contains(&nc))
                    .then(|| Square((nr * 8 + nc) as u8))
            })
    }
}

impl fmt::Display for Square {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", (b'A' + self.row() as u8) as char, self.col() + 1)
    }
}

impl FromStr for Square {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bytes = s.as_bytes();
        if bytes.len() != 2 {
            return Err(Error::Format(format!("bad square token {s:?}")));
        }
        let row = bytes[0].to_ascii_uppercase();
        let col = bytes[1];
        if !(b'A'..=b'H').contains(&row) || !(b'1'..=b'8').contains(&col) {
            return Err(Error::Format(format!("bad square token {s:?}")));
        }
        Ok(Square((row - b'A') * 8 + (col - b'1')))
    }
}
