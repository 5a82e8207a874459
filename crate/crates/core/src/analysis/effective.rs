// SPDX-License-Identifier: MIT OR Apache-2.0

//! Collapsing a TPR probe into the linear probe it computes.

use nalgebra::DMatrix;

use crate::probes::{AnyProbe, BilinearTprProbe, LinearProbe, TrilinearTprProbe};

/// Unbinding operator of a bilinear probe: row `3s + c` is `vec(r_s f_c^T)`.
pub fn bilinear_unbinding(p: &BilinearTprProbe) -> DMatrix<f64> {
    let (dr, df) = (p.d_r(), p.d_f());
    DMatrix::from_fn(192, dr * df, |row, col| {
        let (s, c) = (row / 3, row % 3);
        let (a, b) = (col / df, col % df);
        p.role(s)[a] * p.filler(c)[b]
    })
}

/// Unbinding operator of a trilinear probe: row `3(8i + j) + c` is
/// `vec(u_i (x) v_j (x) f_c)`.
pub fn trilinear_unbinding(p: &TrilinearTprProbe) -> DMatrix<f64> {
    let (_, dv, df) = p.dims();
    DMatrix::from_fn(192, p.m_flat().nrows(), |row, col| {
        let (sq, c) = (row / 3, row % 3);
        let (i, j) = (sq / 8, sq % 8);
        let (a, rest) = (col / (dv * df), col % (dv * df));
        let (b, e) = (rest / df, rest % df);
        p.row_embedding(i)[a] * p.col_embedding(j)[b] * p.filler(c)[e]
    })
}

fn assemble(k: DMatrix<f64>, m: DMatrix<f64>) -> LinearProbe {
    LinearProbe::from_matrix(&(k * m)).expect("192 rows by construction")
}

pub fn effective_bilinear(p: &BilinearTprProbe) -> LinearProbe {
    assemble(bilinear_unbinding(p), p.m_flat())
}

pub fn effective_trilinear(p: &TrilinearTprProbe) -> LinearProbe {
    assemble(trilinear_unbinding(p), p.m_flat())
}

/// The linear probe whose logits equal `p`'s for every input. A linear
/// probe is returned unchanged.
pub fn effective_linear_probe(p: &AnyProbe) -> LinearProbe {
    match p {
        AnyProbe::Linear(l) => l.clone(),
        AnyProbe::Bilinear(b) => effective_bilinear(b),
        AnyProbe::Trilinear(t) => effective_trilinear(t),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probes::Probe;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1e-6)
    }

    #[test]
    fn bilinear_identity() {
        let p = BilinearTprProbe::random(5, 2, 9, 1);
        let e = effective_bilinear(&p);
        let h: Vec<f64> = (0..9).map(|k| (k as f64 * 0.37).sin()).collect();
        let (a, b) = (p.forward(&h).unwrap(), e.forward(&h).unwrap());
        for s in 0..64 {
            for c in 0..3 {
                assert!(close(a[s][c], b[s][c]));
            }
        }
    }

    #[test]
    fn trilinear_identity() {
        let p = TrilinearTprProbe::random(3, 2, 2, 6, 2);
        let e = effective_trilinear(&p);
        let h = [0.2, -1.0, 0.5, 1.5, -0.3, 0.9];
        let (a, b) = (p.forward(&h).unwrap(), e.forward(&h).unwrap());
        for s in 0..64 {
            for c in 0..3 {
                assert!(close(a[s][c], b[s][c]));
            }
        }
    }

    #[test]
    fn reparameterized_linear_is_recovered() {
        let lin = LinearProbe::random(4, 3);
        let mut r = vec![0.0; 64 * 64];
        for i in 0..64 {
            r[i * 65] = 1.0;
        }
        let f = vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
        let p = BilinearTprProbe::from_parts(64, 3, 4, r, f, lin.weights().to_vec()).unwrap();
        assert_eq!(effective_bilinear(&p), lin);
    }
}
