// SPDX-License-Identifier: MIT OR Apache-2.0

//! Low-dimensional views of embedding matrices.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{singular_values_desc, sym_eigen_desc};

#[derive(Debug, Clone, PartialEq)]
pub struct Pca {
    /// n x out_dims scores.
    pub coords: DMatrix<f64>,
    /// out_dims x d orthonormal principal directions.
    pub components: DMatrix<f64>,
    /// Fraction of the total variance carried by each kept component.
    pub explained: Vec<f64>,
}

fn center_columns(x: &DMatrix<f64>) -> DMatrix<f64> {
    let mut c = x.clone();
    for mut col in c.column_iter_mut() {
        let m = col.mean();
        col.add_scalar_mut(-m);
    }
    c
}

/// Principal component analysis of the rows of `x`.
pub fn pca(x: &DMatrix<f64>, out_dims: usize) -> Result<Pca> {
    let (n, d) = x.shape();
    if out_dims == 0 || out_dims > n.min(d) {
        return Err(Error::InvalidArgument(format!(
            "out_dims {out_dims} outside 1..={}",
            n.min(d)
        )));
    }
    let xc = center_columns(x);
    let (vals, vecs) = sym_eigen_desc(&(xc.transpose() * &xc));
    let total: f64 = vals.iter().map(|v| v.max(0.0)).sum();
    let components = vecs.columns(0, out_dims).transpose();
    let coords = &xc * components.transpose();
    let explained = vals[..out_dims]
        .iter()
        .map(|v| if total > 0.0 { v.max(0.0) / total } else { 0.0 })
        .collect();
    Ok(Pca {
        coords,
        components,
        explained,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Isomap {
    pub coords: DMatrix<f64>,
    /// Shortest-path distances over the neighbor graph.
    pub geodesic: DMatrix<f64>,
    /// Leading MDS eigenvalues before clipping at zero.
    pub eigenvalues: Vec<f64>,
    /// How many of the kept eigenvalues were negative and clipped.
    pub clipped: usize,
}

pub const ISOMAP_NEIGHBORS: usize = 8;

/// Isomap: Euclidean k-nearest-neighbor graph (symmetrized), all-pairs
/// shortest paths, then classical multidimensional scaling.
pub fn isomap(x: &DMatrix<f64>, k: usize, out_dims: usize) -> Result<Isomap> {
    let n = x.nrows();
    if k == 0 || k >= n.max(1) {
        return Err(Error::InvalidArgument(format!("neighbor count {k} outside 1..{n}")));
    }
    if out_dims == 0 || out_dims > n {
        return Err(Error::InvalidArgument(format!("out_dims {out_dims} outside 1..={n}")));
    }
    let euclid = DMatrix::from_fn(n, n, |i, j| (x.row(i) - x.row(j)).norm());
    let mut g = DMatrix::from_element(n, n, f64::INFINITY);
    for i in 0..n {
        g[(i, i)] = 0.0;
        let mut order: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        order.sort_by(|&a, &b| euclid[(i, a)].total_cmp(&euclid[(i, b)]).then(a.cmp(&b)));
        for &j in &order[..k] {
            g[(i, j)] = euclid[(i, j)];
            g[(j, i)] = euclid[(i, j)];
        }
    }
    for m in 0..n {
        for i in 0..n {
            let gim = g[(i, m)];
            if gim.is_infinite() {
                continue;
            }
            for j in 0..n {
                let via = gim + g[(m, j)];
                if via < g[(i, j)] {
                    g[(i, j)] = via;
                }
            }
        }
    }
    if g.iter().any(|v| v.is_infinite()) {
        return Err(Error::DisconnectedGraph);
    }

    // B = -1/2 J D^2 J
    let d2 = g.map(|v| v * v);
    let row_mean: Vec<f64> = d2.row_iter().map(|r| r.mean()).collect();
    let grand = d2.mean();
    let b = DMatrix::from_fn(n, n, |i, j| -0.5 * (d2[(i, j)] - row_mean[i] - row_mean[j] + grand));
    let (vals, vecs) = sym_eigen_desc(&b);
    let kept = &vals[..out_dims];
    let clipped = kept.iter().filter(|&&v| v < 0.0).count();
    let coords = DMatrix::from_fn(n, out_dims, |i, c| vecs[(i, c)] * kept[c].max(0.0).sqrt());
    Ok(Isomap {
        coords,
        geodesic: g,
        eigenvalues: kept.to_vec(),
        clipped,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GramReport {
    /// Cosine similarities between rows.
    pub gram: DMatrix<f64>,
    /// Singular values of the raw matrix, non-increasing.
    pub singular_values: Vec<f64>,
}

pub fn gram_report(e: &DMatrix<f64>) -> Result<GramReport> {
    let mut unit = e.clone();
    for (i, mut row) in unit.row_iter_mut().enumerate() {
        let n = row.norm();
        if n < 1e-12 {
            return Err(Error::ZeroRow(i));
        }
        row /= n;
    }
    Ok(GramReport {
        gram: &unit * unit.transpose(),
        singular_values: singular_values_desc(e),
    })
}

/// Largest absolute off-diagonal entry of a square matrix's deviation from
/// the identity.
pub fn max_off_diagonal(g: &DMatrix<f64>) -> f64 {
    let mut m: f64 = 0.0;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            if i != j {
                m = m.max(g[(i, j)].abs());
            }
        }
    }
    m
}
