// SPDX-License-Identifier: MIT OR Apache-2.0

//! Training samples: the random-coding encoder, the out-of-distribution
//! label sampler, and the `tprds` file format used for both generated and
//! externally supplied activations.

mod codebook;
mod dataset;
mod format;

pub use codebook::{default_std, random_coding_encode, RandomCodingBook};
pub use dataset::{
    build_dataset, mix_seed, sample_ood_labels, Dataset, EncodedSample, SampleRef, Source, Split,
    SplitSizes, Splits,
};
pub use format::{
    read_dataset, read_dataset_expecting, read_dataset_from, record_len, write_dataset,
    write_dataset_to, DATASET_MAGIC,
};
