// SPDX-License-Identifier: MIT OR Apache-2.0

//! Low-rank approximations of a linear probe.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::encodings::Dataset;
use crate::error::{Error, Result};
use crate::linalg::sym_eigen_desc;
use crate::probes::{accuracy, LinearProbe, Probe};

/// Parameters needed to store a rank-k factorization of a 192 x d_model matrix.
pub fn svd_param_count(k: usize, d_model: usize) -> usize {
    k * (192 + d_model)
}

/// Left singular vectors of the stacked probe, from the 192 x 192 Gram.
struct LeftBasis {
    u: DMatrix<f64>,
    w: DMatrix<f64>,
}

impl LeftBasis {
    fn new(p: &LinearProbe) -> Self {
        let w = p.matrix();
        let (_, u) = sym_eigen_desc(&(&w * w.transpose()));
        LeftBasis { u, w }
    }

    fn truncate(&self, k: usize) -> DMatrix<f64> {
        let uk = self.u.columns(0, k);
        uk * (uk.transpose() * &self.w)
    }
}

fn check_rank(k: usize, d_model: usize) -> Result<()> {
    let max = 192.min(d_model);
    if k == 0 || k > max {
        return Err(Error::InvalidArgument(format!("rank {k} outside 1..={max}")));
    }
    Ok(())
}

/// Best rank-`k` approximation of the probe matrix and its parameter count.
pub fn truncated_svd_probe(p: &LinearProbe, k: usize) -> Result<(LinearProbe, usize)> {
    check_rank(k, p.d_model())?;
    let wk = LeftBasis::new(p).truncate(k);
    Ok((LinearProbe::from_matrix(&wk)?, svd_param_count(k, p.d_model())))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SvdPoint {
    pub k: usize,
    pub params: usize,
    pub accuracy: f64,
    pub frobenius_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SvdSweep {
    pub points: Vec<SvdPoint>,
    /// Consecutive ranks `(k_prev, k)` where accuracy went down.
    pub accuracy_drops: Vec<(usize, usize)>,
}

/// Accuracy and reconstruction error of the rank-k probe for each `k`.
pub fn svd_sweep(p: &LinearProbe, ks: &[usize], test: &Dataset) -> Result<SvdSweep> {
    for &k in ks {
        check_rank(k, p.d_model())?;
    }
    let basis = LeftBasis::new(p);
    let mut points = Vec::with_capacity(ks.len());
    for &k in ks {
        let wk = basis.truncate(k);
        let err = (&basis.w - &wk).norm();
        let probe = LinearProbe::from_matrix(&wk)?;
        points.push(SvdPoint {
            k,
            params: svd_param_count(k, p.d_model()),
            accuracy: accuracy(&probe, test)?,
            frobenius_error: err,
        });
    }
    let mut sorted: Vec<&SvdPoint> = points.iter().collect();
    sorted.sort_by_key(|q| q.k);
    let accuracy_drops = sorted
        .windows(2)
        .filter(|w| w[1].accuracy < w[0].accuracy)
        .map(|w| (w[0].k, w[1].k))
        .collect();
    Ok(SvdSweep {
        points,
        accuracy_drops,
    })
}
