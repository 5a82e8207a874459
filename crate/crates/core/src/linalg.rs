// SPDX-License-Identifier: MIT OR Apache-2.0

//! Dense decompositions used by the analyses and interventions.
//!
//! Thin wrappers over `nalgebra` that fix ordering (descending) and sign
//! conventions so results are reproducible.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Singular values at or below `PINV_RCOND * sigma_max` are treated as zero.
pub const PINV_RCOND: f64 = 1e-10;

/// Eigen-decomposition of a symmetric matrix with eigenvalues sorted in
/// non-increasing order. Each eigenvector is flipped so that its
/// largest-magnitude entry (the first one, on ties) is positive.
pub fn sym_eigen_desc(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut vecs = DMatrix::zeros(n, n);
    let mut vals = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(src).into_owned();
        canonical_sign(&mut col);
        vecs.set_column(dst, &col);
        vals.push(eig.eigenvalues[src]);
    }
    (vals, vecs)
}

fn canonical_sign(v: &mut DVector<f64>) {
    let pivot = v
        .iter()
        .enumerate()
        .fold((0, 0.0f64), |(bi, bv), (i, x)| {
            if x.abs() > bv.abs() + 1e-12 {
                (i, *x)
            } else {
                (bi, bv)
            }
        })
        .0;
    if v[pivot] < 0.0 {
        v.neg_mut();
    }
}

/// Moore-Penrose pseudo-inverse via SVD.
pub fn pinv(m: &DMatrix<f64>) -> DMatrix<f64> {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return DMatrix::zeros(c, r);
    }
    let svd = m.clone().svd(true, true);
    let u = svd.u.as_ref().expect("requested");
    let vt = svd.v_t.as_ref().expect("requested");
    let smax = svd.singular_values.max();
    let cutoff = PINV_RCOND * smax;
    let k = svd.singular_values.len();
    let mut out = DMatrix::zeros(c, r);
    for i in 0..k {
        let s = svd.singular_values[i];
        if s <= cutoff || s == 0.0 {
            continue;
        }
        // out += v_i u_i^T / s
        out.ger(1.0 / s, &vt.row(i).transpose(), &u.column(i), 1.0);
    }
    out
}

/// Singular values in non-increasing order.
pub fn singular_values_desc(m: &DMatrix<f64>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Numerical rank with the same cutoff as [`pinv`].
pub fn rank(m: &DMatrix<f64>) -> usize {
    let s = singular_values_desc(m);
    let Some(&smax) = s.first() else { return 0 };
    s.iter().filter(|&&x| x > PINV_RCOND * smax && x > 0.0).count()
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    let denom = (na * nb).sqrt();
    if denom == 0.0 {
        0.0
    } else {
        dot / denom
    }
}

pub fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pinv_of_full_row_rank_is_right_inverse() {
        let m = DMatrix::from_fn(3, 5, |i, j| ((i * 7 + j * 3) % 5) as f64 - 1.5 + (i == j) as u8 as f64);
        let p = pinv(&m);
        let id = &m * &p;
        assert!((id - DMatrix::identity(3, 3)).amax() < 1e-10);
    }

    #[test]
    fn pinv_penrose_conditions_rank_deficient() {
        // rank 1
        let u = DVector::from_vec(vec![1.0, 2.0, -1.0]);
        let v = DVector::from_vec(vec![0.5, -1.0, 3.0, 2.0]);
        let m = &u * v.transpose();
        let p = pinv(&m);
        assert!((&m * &p * &m - &m).amax() < 1e-10);
        assert!((&p * &m * &p - &p).amax() < 1e-10);
        assert!(((&m * &p).transpose() - &m * &p).amax() < 1e-10);
        assert_eq!(rank(&m), 1);
    }

    #[test]
    fn eigen_sorted_and_signed() {
        let m = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 2.0, 0.0, 0.0, 0.0, 5.0]);
        let (vals, vecs) = sym_eigen_desc(&m);
        assert!((vals[0] - 5.0).abs() < 1e-12);
        assert!((vals[1] - 3.0).abs() < 1e-12);
        assert!((vals[2] - 1.0).abs() < 1e-12);
        for j in 0..3 {
            let c = vecs.column(j);
            let max = c.amax();
            let first = c.iter().find(|x| x.abs() > max - 1e-9).unwrap();
            assert!(*first > 0.0);
            let mv = &m * c;
            assert!((mv - c * vals[j]).amax() < 1e-10);
        }
    }
}
