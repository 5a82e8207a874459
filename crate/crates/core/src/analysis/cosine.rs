// SPDX-License-Identifier: MIT OR Apache-2.0

use crate::error::{Error, Result};
use crate::linalg::norm;
use crate::probes::{LinearProbe, Probe};

const MIN_NORM: f64 = 1e-12;

fn centered_rows(p: &LinearProbe, s: usize) -> [Vec<f64>; 3] {
    let d = p.d_model();
    let w = &p.weights()[3 * s * d..3 * (s + 1) * d];
    let mean: Vec<f64> = (0..d).map(|k| (w[k] + w[d + k] + w[2 * d + k]) / 3.0).collect();
    std::array::from_fn(|c| (0..d).map(|k| w[c * d + k] - mean[k]).collect())
}

/// Per square and color, the cosine between the two probes' readout rows
/// after subtracting each square's mean row.
pub fn mean_centered_cosine(a: &LinearProbe, b: &LinearProbe) -> Result<[[f64; 3]; 64]> {
    if a.d_model() != b.d_model() {
        return Err(Error::dims(a.d_model(), b.d_model(), "probe width"));
    }
    let mut out = [[0.0; 3]; 64];
    for (s, row) in out.iter_mut().enumerate() {
        let (ra, rb) = (centered_rows(a, s), centered_rows(b, s));
        for c in 0..3 {
            let (na, nb) = (norm(&ra[c]), norm(&rb[c]));
            if na < MIN_NORM || nb < MIN_NORM {
                return Err(Error::ZeroVector { square: s, color: c });
            }
            let dot: f64 = ra[c].iter().zip(&rb[c]).map(|(x, y)| x * y).sum();
            row[c] = dot / (na * nb);
        }
    }
    Ok(out)
}

pub fn mean_similarity(sim: &[[f64; 3]; 64]) -> f64 {
    sim.iter().flatten().sum::<f64>() / 192.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::othello::CellColor;

    #[test]
    fn self_similarity_is_one() {
        let p = LinearProbe::random(10, 0);
        let sim = mean_centered_cosine(&p, &p).unwrap();
        assert!(sim.iter().flatten().all(|&x| (x - 1.0).abs() < 1e-12));
    }

    #[test]
    fn square_offsets_are_removed() {
        let p = LinearProbe::random(6, 1);
        let mut q = p.clone();
        for s in 0..64 {
            let shift: Vec<f64> = (0..6).map(|k| (s * 6 + k) as f64 * 0.1).collect();
            for c in CellColor::ALL {
                for (x, d) in q.row_mut(s, c).iter_mut().zip(&shift) {
                    *x += d;
                }
            }
        }
        let sim = mean_centered_cosine(&p, &q).unwrap();
        assert!(sim.iter().flatten().all(|&x| (x - 1.0).abs() < 1e-9));
    }

    #[test]
    fn degenerate_rows_rejected() {
        let p = LinearProbe::zeros(3);
        assert!(matches!(
            mean_centered_cosine(&p, &p),
            Err(Error::ZeroVector { square: 0, color: 0 })
        ));
        assert!(mean_centered_cosine(&p, &LinearProbe::zeros(4)).is_err());
    }
}
