// SPDX-License-Identifier: MIT OR Apache-2.0

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "tprlab", version, about = "Linear and TPR probes for Othello board state")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate train/val/test activation datasets.
    GenData(GenDataArgs),
    /// Train a probe and report test accuracy.
    Train(TrainArgs),
    /// Score a probe checkpoint on a dataset.
    Eval(EvalArgs),
    /// Analyses of trained probes.
    #[command(subcommand)]
    Analyze(AnalyzeCommand),
    /// Closed-loop intervention sweep against the synthetic model.
    Intervene(InterveneArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourceArg {
    RandomCoding,
    Ood,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProbeArg {
    Linear,
    Bilinear,
    Trilinear,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GenDataArgs {
    #[arg(long, value_enum, default_value = "random-coding")]
    pub source: SourceArg,
    #[arg(long, default_value_t = 512)]
    pub d_model: usize,
    #[arg(long, default_value_t = 50_000)]
    pub train: usize,
    #[arg(long, default_value_t = 512)]
    pub val: usize,
    #[arg(long, default_value_t = 1_000)]
    pub test: usize,
    /// Seeds the board sampling; also the codebook unless --book-seed is given.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub book_seed: Option<u64>,
    /// Codebook entry standard deviation (default 1/sqrt(d_model)).
    #[arg(long)]
    pub book_std: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub layer: u32,
    /// Output directory for train.tprds, val.tprds and test.tprds.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ProbeShape {
    #[arg(long, value_enum, default_value = "bilinear")]
    pub probe: ProbeArg,
    #[arg(long, default_value_t = 52)]
    pub dr: usize,
    #[arg(long, default_value_t = 8)]
    pub du: usize,
    #[arg(long, default_value_t = 8)]
    pub dv: usize,
    #[arg(long, default_value_t = 2)]
    pub df: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TrainArgs {
    #[command(flatten)]
    pub shape: ProbeShape,
    /// Directory holding train.tprds, val.tprds and test.tprds.
    #[arg(long)]
    pub data: PathBuf,
    /// Expected activation width; mismatching data exits with code 4.
    #[arg(long)]
    pub d_model: Option<usize>,
    #[arg(long, default_value_t = 1e-2)]
    pub lr: f64,
    #[arg(long, default_value_t = 1e-2)]
    pub weight_decay: f64,
    #[arg(long, default_value_t = 128)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 1)]
    pub epochs: usize,
    #[arg(long, default_value_t = 10)]
    pub patience: usize,
    #[arg(long, default_value_t = 100)]
    pub validate_every: usize,
    /// Seeds initialization and the shuffle order.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Checkpoint path.
    #[arg(long)]
    pub out: PathBuf,
    /// Metrics JSON path (default: checkpoint path with .json extension).
    #[arg(long)]
    pub metrics: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EvalArgs {
    #[arg(long)]
    pub probe: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixArg {
    /// Square embeddings R (bilinear).
    Roles,
    /// Row embeddings U (trilinear).
    Rows,
    /// Column embeddings V (trilinear).
    Cols,
    /// Color embeddings F.
    Fillers,
    /// Flattened binding matrices M(h) over a dataset (requires --data).
    Bindings,
}

#[derive(Debug, Subcommand)]
pub enum AnalyzeCommand {
    /// Collapse a TPR probe into a linear probe checkpoint.
    Effective(EffectiveArgs),
    /// Mean-centered cosine between a linear probe and a TPR probe.
    Cosine(CosineArgs),
    /// Accuracy of rank-k truncations of a linear probe.
    SvdSweep(SvdSweepArgs),
    /// Board relations of nearest role embeddings.
    Knn(ProbeMatrixArgs),
    /// Role similarity by row and column gap.
    Gapsim(ProbeMatrixArgs),
    /// Principal components of an embedding or binding matrix.
    Pca(PcaArgs),
    /// Isomap embedding of an embedding or binding matrix.
    Isomap(IsomapArgs),
    /// Normalized Gram matrix and singular values of an embedding matrix.
    Gram(ProbeMatrixArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EffectiveArgs {
    #[arg(long)]
    pub probe: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CosineArgs {
    #[arg(long)]
    pub linear: PathBuf,
    #[arg(long)]
    pub tpr: PathBuf,
    /// CSV of similarities (row = square, col = color).
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SvdSweepArgs {
    /// Linear probe, or a TPR probe whose effective linear probe is used.
    #[arg(long)]
    pub probe: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "20,40,80,120")]
    pub k: Vec<usize>,
    /// CSV of k, params, accuracy, frobenius_error.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ProbeMatrixArgs {
    #[arg(long)]
    pub probe: PathBuf,
    #[arg(long, value_enum, default_value = "roles")]
    pub matrix: MatrixArg,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PcaArgs {
    #[arg(long)]
    pub probe: PathBuf,
    #[arg(long, value_enum, default_value = "fillers")]
    pub matrix: MatrixArg,
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Number of dataset samples used for --matrix bindings.
    #[arg(long, default_value_t = 1000)]
    pub limit: usize,
    #[arg(long, default_value_t = 2)]
    pub dims: usize,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct IsomapArgs {
    #[arg(long)]
    pub probe: PathBuf,
    #[arg(long, value_enum, default_value = "roles")]
    pub matrix: MatrixArg,
    #[arg(long, default_value_t = 8)]
    pub neighbors: usize,
    #[arg(long, default_value_t = 2)]
    pub dims: usize,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct InterveneArgs {
    #[arg(long)]
    pub probe: PathBuf,
    /// Codebook seed of the synthetic model (the gen-data book seed).
    #[arg(long, default_value_t = 0)]
    pub book_seed: u64,
    #[arg(long)]
    pub book_std: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    pub cases: usize,
    #[arg(long, default_value_t = 1)]
    pub edits: usize,
    /// Seeds case construction.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<f64>>,
    #[arg(long)]
    pub out: PathBuf,
}
