// SPDX-License-Identifier: MIT OR Apache-2.0

//! How role embeddings relate to board geometry.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::cosine;
use crate::othello::Square;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Neighbor,
    SameRow,
    SameColumn,
    Diagonal,
    Unrelated,
}

impl Relation {
    pub const ALL: [Relation; 5] = [
        Relation::Neighbor,
        Relation::SameRow,
        Relation::SameColumn,
        Relation::Diagonal,
        Relation::Unrelated,
    ];

    /// Relation of `b` to `a`, first match in the order of [`Relation::ALL`].
    pub fn between(a: Square, b: Square) -> Relation {
        let di = a.row().abs_diff(b.row());
        let dj = a.col().abs_diff(b.col());
        if di.max(dj) == 1 {
            Relation::Neighbor
        } else if di == 0 {
            Relation::SameRow
        } else if dj == 0 {
            Relation::SameColumn
        } else if di == dj {
            Relation::Diagonal
        } else {
            Relation::Unrelated
        }
    }

    fn idx(self) -> usize {
        self as usize
    }
}

fn rows(r: &DMatrix<f64>) -> Result<Vec<Vec<f64>>> {
    if r.nrows() != 64 {
        return Err(Error::dims(64, r.nrows(), "role matrix rows"));
    }
    Ok(r.row_iter().map(|x| x.iter().copied().collect()).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KnnReport {
    pub counts: [usize; 5],
    pub fractions: [f64; 5],
    pub total: usize,
}

impl KnnReport {
    pub fn fraction(&self, r: Relation) -> f64 {
        self.fractions[r.idx()]
    }
}

/// For each square, retrieve as many nearest other roles (cosine distance)
/// as it has board neighbors and tally how each retrieved square relates
/// to it on the board.
pub fn knn_neighbor_classification(r: &DMatrix<f64>) -> Result<KnnReport> {
    let rows = rows(r)?;
    let mut counts = [0usize; 5];
    for a in Square::all() {
        let k = a.neighbors().count();
        let mut others: Vec<(f64, usize)> = (0..64)
            .filter(|&b| b != a.offset())
            .map(|b| (1.0 - cosine(&rows[a.offset()], &rows[b]), b))
            .collect();
        others.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        for &(_, b) in &others[..k] {
            let rel = Relation::between(a, Square::from_offset(b).expect("in range"));
            counts[rel.idx()] += 1;
        }
    }
    let total: usize = counts.iter().sum();
    let fractions = counts.map(|c| c as f64 / total as f64);
    Ok(KnnReport {
        counts,
        fractions,
        total,
    })
}

/// Mean cosine similarity between roles, grouped by absolute row and
/// column gap. Cell (0, 0) has no pairs and stays `None`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapSim {
    pub mean: [[Option<f64>; 8]; 8],
    pub counts: [[usize; 8]; 8],
}

struct Pairs {
    gaps: Vec<(usize, usize)>,
    sims: Vec<f64>,
}

fn pairs(r: &DMatrix<f64>) -> Result<Pairs> {
    let rows = rows(r)?;
    let mut gaps = Vec::with_capacity(2016);
    let mut sims = Vec::with_capacity(2016);
    for a in 0..64 {
        for b in a + 1..64 {
            let (sa, sb) = (Square::from_offset(a).unwrap(), Square::from_offset(b).unwrap());
            gaps.push((sa.row().abs_diff(sb.row()), sa.col().abs_diff(sb.col())));
            sims.push(cosine(&rows[a], &rows[b]));
        }
    }
    Ok(Pairs { gaps, sims })
}

fn group(p: &Pairs) -> GapSim {
    let mut sum = [[0.0; 8]; 8];
    let mut counts = [[0usize; 8]; 8];
    for (&(i, j), &s) in p.gaps.iter().zip(&p.sims) {
        sum[i][j] += s;
        counts[i][j] += 1;
    }
    let mut mean = [[None; 8]; 8];
    for i in 0..8 {
        for j in 0..8 {
            if counts[i][j] > 0 {
                mean[i][j] = Some(sum[i][j] / counts[i][j] as f64);
            }
        }
    }
    GapSim { mean, counts }
}

pub fn gapsim(r: &DMatrix<f64>) -> Result<GapSim> {
    Ok(group(&pairs(r)?))
}

/// Share of the variance in pairwise role similarity explained by the
/// (row gap, column gap) group means.
pub fn gapsim_r2(r: &DMatrix<f64>) -> Result<f64> {
    let p = pairs(r)?;
    let g = group(&p);
    let n = p.sims.len() as f64;
    let mean = p.sims.iter().sum::<f64>() / n;
    let ss_tot: f64 = p.sims.iter().map(|s| (s - mean).powi(2)).sum();
    if ss_tot < 1e-12 {
        return Err(Error::DegenerateVariance(ss_tot));
    }
    let ss_res: f64 = p
        .gaps
        .iter()
        .zip(&p.sims)
        .map(|(&(i, j), s)| (s - g.mean[i][j].expect("populated")).powi(2))
        .sum();
    Ok(1.0 - ss_res / ss_tot)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relation_precedence() {
        let sq = |t: &str| t.parse::<Square>().unwrap();
        assert_eq!(Relation::between(sq("D4"), sq("D5")), Relation::Neighbor);
        assert_eq!(Relation::between(sq("D4"), sq("E5")), Relation::Neighbor);
        assert_eq!(Relation::between(sq("D4"), sq("D8")), Relation::SameRow);
        assert_eq!(Relation::between(sq("D4"), sq("A4")), Relation::SameColumn);
        assert_eq!(Relation::between(sq("D4"), sq("F2")), Relation::Diagonal);
        assert_eq!(Relation::between(sq("D4"), sq("F3")), Relation::Unrelated);
    }

    #[test]
    fn group_sizes_closed_form() {
        let g = gapsim(&DMatrix::from_fn(64, 3, |i, j| (i * 3 + j) as f64 + 1.0)).unwrap();
        let mut total = 0;
        for a in 0..8 {
            for b in 0..8 {
                let want = match (a, b) {
                    (0, 0) => 0,
                    (0, d) | (d, 0) => 8 * (8 - d),
                    (a, b) => 2 * (8 - a) * (8 - b),
                };
                assert_eq!(g.counts[a][b], want, "({a},{b})");
                total += g.counts[a][b];
            }
        }
        assert_eq!(total, 2016);
        assert!(g.mean[0][0].is_none());
    }

    #[test]
    fn identical_rows() {
        let g = gapsim(&DMatrix::from_element(64, 4, 0.5)).unwrap();
        for a in 0..8 {
            for b in 0..8 {
                if (a, b) != (0, 0) {
                    assert!((g.mean[a][b].unwrap() - 1.0).abs() < 1e-12);
                }
            }
        }
        assert!(matches!(
            gapsim_r2(&DMatrix::from_element(64, 4, 0.5)),
            Err(Error::DegenerateVariance(_))
        ));
    }

    #[test]
    fn wrong_row_count() {
        assert!(knn_neighbor_classification(&DMatrix::zeros(63, 2)).is_err());
    }
}
