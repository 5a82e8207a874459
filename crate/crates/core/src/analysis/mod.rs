// SPDX-License-Identifier: MIT OR Apache-2.0

//! Diagnostics that relate TPR probes to linear probes and describe the
//! geometry of learned embeddings.

mod cosine;
mod effective;
mod embed;
mod geometry;
pub mod report;
mod svd;

pub use cosine::{mean_centered_cosine, mean_similarity};
pub use effective::{
    bilinear_unbinding, effective_bilinear, effective_linear_probe, effective_trilinear,
    trilinear_unbinding,
};
pub use embed::{gram_report, isomap, max_off_diagonal, pca, GramReport, Isomap, Pca, ISOMAP_NEIGHBORS};
pub use geometry::{gapsim, gapsim_r2, knn_neighbor_classification, GapSim, KnnReport, Relation};
pub use svd::{svd_param_count, svd_sweep, truncated_svd_probe, SvdPoint, SvdSweep};
