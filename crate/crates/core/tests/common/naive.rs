// SPDX-License-Identifier: MIT OR Apache-2.0

//! A deliberately naive 8x8 array Othello, independent of the bitboards.

use tprlab::othello::{Board, DiscState, Player};

/// 0 empty, 1 black, 2 white; `side` is the mover.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Naive {
    pub g: [[u8; 8]; 8],
    pub side: u8,
}

const DIRS: [(i32, i32); 8] = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)];

impl Naive {
    pub fn start() -> Self {
        let mut g = [[0; 8]; 8];
        // Row letter D is index 3; column digit 5 is index 4.
        g[3][4] = 1;
        g[4][3] = 1;
        g[3][3] = 2;
        g[4][4] = 2;
        Naive { g, side: 1 }
    }

    fn captures(&self, side: u8, r: usize, c: usize) -> Vec<(usize, usize)> {
        if self.g[r][c] != 0 {
            return vec![];
        }
        let opp = 3 - side;
        let mut out = vec![];
        for (dr, dc) in DIRS {
            let mut run = vec![];
            let (mut i, mut j) = (r as i32 + dr, c as i32 + dc);
            while (0..8).contains(&i) && (0..8).contains(&j) && self.g[i as usize][j as usize] == opp {
                run.push((i as usize, j as usize));
                i += dr;
                j += dc;
            }
            if !run.is_empty() && (0..8).contains(&i) && (0..8).contains(&j) && self.g[i as usize][j as usize] == side {
                out.extend(run);
            }
        }
        out
    }

    pub fn moves_for(&self, side: u8) -> Vec<(usize, usize)> {
        let mut v = vec![];
        for r in 0..8 {
            for c in 0..8 {
                if !self.captures(side, r, c).is_empty() {
                    v.push((r, c));
                }
            }
        }
        v
    }

    pub fn play(&self, r: usize, c: usize) -> Naive {
        let flips = self.captures(self.side, r, c);
        assert!(!flips.is_empty());
        let mut n = *self;
        n.g[r][c] = self.side;
        for (i, j) in flips {
            n.g[i][j] = self.side;
        }
        let opp = 3 - self.side;
        n.side = if n.moves_for(opp).is_empty() && !n.moves_for(self.side).is_empty() {
            self.side
        } else {
            opp
        };
        n
    }

    pub fn count(&self, depth: usize) -> u64 {
        if depth == 0 {
            return 1;
        }
        self.moves_for(self.side)
            .into_iter()
            .map(|(r, c)| self.play(r, c).count(depth - 1))
            .sum()
    }

    pub fn matches(&self, b: &Board) -> bool {
        let side = match b.to_move() {
            Player::Black => 1,
            Player::White => 2,
        };
        let cells = b.cells();
        side == self.side
            && (0..64).all(|i| {
                let want = match cells[i] {
                    DiscState::Vacant => 0,
                    DiscState::Black => 1,
                    DiscState::White => 2,
                };
                self.g[i / 8][i % 8] == want
            })
    }
}
