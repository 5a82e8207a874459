// SPDX-License-Identifier: MIT OR Apache-2.0

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::RandomCodingBook;
use crate::error::{Error, Result};
use crate::othello::{random_game, CellColor, Labels, MAX_GAME_LEN};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Source {
    /// Codebook encodings of positions from random legal games.
    RandomCoding,
    /// Codebook encodings of i.i.d. uniform labels.
    Ood,
    /// Activations produced outside this crate.
    External,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];

    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

impl Source {
    pub fn name(self) -> &'static str {
        match self {
            Source::RandomCoding => "random-coding",
            Source::Ood => "ood",
            Source::External => "external",
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Source {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random-coding" => Ok(Source::RandomCoding),
            "ood" => Ok(Source::Ood),
            "external" => Ok(Source::External),
            _ => Err(Error::Format(format!("unknown source {s:?}"))),
        }
    }
}

impl FromStr for Split {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "val" => Ok(Split::Val),
            "test" => Ok(Split::Test),
            _ => Err(Error::Format(format!("unknown split {s:?}"))),
        }
    }
}

/// One activation vector with its egocentric board labels.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedSample {
    pub h: Vec<f32>,
    pub labels: Labels,
    pub timestep: Option<u32>,
}

/// Borrowed view of one sample inside a [`Dataset`].
#[derive(Debug, Clone, Copy)]
pub struct SampleRef<'a> {
    pub h: &'a [f32],
    pub labels: &'a Labels,
    pub timestep: Option<u32>,
}

/// A split of encoded samples sharing one `d_model`.
///
/// Activations are stored contiguously, row-major, one row per sample. The
/// layer tag applies to every sample in the set.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    d_model: usize,
    pub source: Source,
    pub split: Split,
    pub layer: u32,
    h: Vec<f32>,
    labels: Vec<Labels>,
    timesteps: Option<Vec<u32>>,
}

impl Dataset {
    pub fn new(d_model: usize, source: Source, split: Split, layer: u32) -> Self {
        Dataset {
            d_model,
            source,
            split,
            layer,
            h: Vec::new(),
            labels: Vec::new(),
            timesteps: None,
        }
    }

    pub(crate) fn from_parts(
        d_model: usize,
        source: Source,
        split: Split,
        layer: u32,
        h: Vec<f32>,
        labels: Vec<Labels>,
        timesteps: Option<Vec<u32>>,
    ) -> Result<Self> {
        if h.len() != labels.len() * d_model {
            return Err(Error::dims(labels.len() * d_model, h.len(), "dataset payload"));
        }
        if let Some(t) = &timesteps {
            if t.len() != labels.len() {
                return Err(Error::dims(labels.len(), t.len(), "dataset timesteps"));
            }
        }
        Ok(Dataset {
            d_model,
            source,
            split,
            layer,
            h,
            labels,
            timesteps,
        })
    }

    pub fn d_model(&self) -> usize {
        self.d_model
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Appends a sample. Timesteps are kept only if every sample carries one.
    pub fn push(&mut self, sample: EncodedSample) -> Result<()> {
        if sample.h.len() != self.d_model {
            return Err(Error::dims(self.d_model, sample.h.len(), "sample activation"));
        }
        let first = self.labels.is_empty();
        self.h.extend_from_slice(&sample.h);
        self.labels.push(sample.labels);
        match (sample.timestep, &mut self.timesteps) {
            (Some(t), Some(ts)) => ts.push(t),
            (Some(t), None) if first => self.timesteps = Some(vec![t]),
            _ => self.timesteps = None,
        }
        Ok(())
    }

    pub fn get(&self, i: usize) -> SampleRef<'_> {
        SampleRef {
            h: &self.h[i * self.d_model..(i + 1) * self.d_model],
            labels: &self.labels[i],
            timestep: self.timesteps.as_ref().map(|t| t[i]),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = SampleRef<'_>> {
        (0..self.len()).map(move |i| self.get(i))
    }

    pub fn activations(&self) -> &[f32] {
        &self.h
    }

    pub fn labels(&self) -> &[Labels] {
        &self.labels
    }

    pub fn timesteps(&self) -> Option<&[u32]> {
        self.timesteps.as_deref()
    }

    /// Empirical frequency of each color over all squares and samples.
    pub fn color_frequencies(&self) -> [f64; 3] {
        let mut counts = [0usize; 3];
        for l in &self.labels {
            for c in l {
                counts[c.idx()] += 1;
            }
        }
        let total = (self.len() * 64).max(1) as f64;
        counts.map(|c| c as f64 / total)
    }
}

/// Requested sample counts per split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSizes {
    pub train: usize,
    pub val: usize,
    pub test: usize,
}

impl SplitSizes {
    /// Desk-scale defaults: 50,000 / 512 / 1,000.
    pub const DESK: SplitSizes = SplitSizes {
        train: 50_000,
        val: 512,
        test: 1_000,
    };
    /// Full training-set size: 295,699 / 512 / 1,000.
    pub const FULL: SplitSizes = SplitSizes {
        train: 295_699,
        val: 512,
        test: 1_000,
    };

    pub fn get(&self, split: Split) -> usize {
        match split {
            Split::Train => self.train,
            Split::Val => self.val,
            Split::Test => self.test,
        }
    }
}

impl Default for SplitSizes {
    fn default() -> Self {
        SplitSizes::DESK
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Splits {
    pub train: Dataset,
    pub val: Dataset,
    pub test: Dataset,
}

impl Splits {
    pub fn get(&self, split: Split) -> &Dataset {
        match split {
            Split::Train => &self.train,
            Split::Val => &self.val,
            Split::Test => &self.test,
        }
    }
}

/// SplitMix64 finalizer, used to derive independent child seeds.
pub fn mix_seed(seed: u64, stream: u64, index: u64) -> u64 {
    let mut z = seed
        .wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(index.wrapping_mul(0xD1B5_4A32_D192_ED03))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Labels with every square's color drawn uniformly and independently.
pub fn sample_ood_labels(seed: u64) -> Labels {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = [CellColor::Empty; 64];
    for l in out.iter_mut() {
        *l = CellColor::ALL[rng.random_range(0..3)];
    }
    out
}

// Seed streams keep splits, sources and games apart.
const STREAM_GAMES: u64 = 0x6761_6d65;
const STREAM_OOD: u64 = 0x006f_6f64;

fn split_stream(split: Split) -> u64 {
    match split {
        Split::Train => 1,
        Split::Val => 2,
        Split::Test => 3,
    }
}

/// Labels (and timesteps) for one split.
///
/// For game-derived data every position after each move of a game goes into
/// the same split, so no transcript contributes to two splits. The last game
/// is truncated to honor the requested size exactly.
fn split_labels(source: Source, n: usize, split: Split, seed: u64) -> Result<Vec<(Labels, u32)>> {
    let stream = split_stream(split);
    match source {
        Source::RandomCoding => {
            let mut out = Vec::with_capacity(n);
            let mut game = 0u64;
            while out.len() < n {
                let g = random_game(mix_seed(seed, STREAM_GAMES + stream, game), MAX_GAME_LEN);
                for (t, board) in g.positions().into_iter().enumerate() {
                    if out.len() == n {
                        break;
                    }
                    out.push((board.egocentric_labels(), t as u32));
                }
                game += 1;
            }
            Ok(out)
        }
        Source::Ood => Ok((0..n as u64)
            .map(|i| (sample_ood_labels(mix_seed(seed, STREAM_OOD + stream, i)), 0))
            .collect()),
        Source::External => Err(Error::InvalidArgument(
            "external datasets are read from files, not generated".into(),
        )),
    }
}

/// Generates train/val/test splits encoded with `book`.
pub fn build_dataset(
    source: Source,
    book: &RandomCodingBook,
    sizes: SplitSizes,
    seed: u64,
) -> Result<Splits> {
    let d = book.d_model();
    let make = |split: Split| -> Result<Dataset> {
        let items = split_labels(source, sizes.get(split), split, seed)?;
        let rows: Vec<Vec<f32>> = items
            .par_iter()
            .map(|(l, _)| book.encode(l).into_iter().map(|x| x as f32).collect())
            .collect();
        let h: Vec<f32> = rows.into_iter().flatten().collect();
        let labels = items.iter().map(|(l, _)| *l).collect();
        let timesteps = (source == Source::RandomCoding)
            .then(|| items.iter().map(|(_, t)| *t).collect());
        Dataset::from_parts(d, source, split, 0, h, labels, timesteps)
    };
    Ok(Splits {
        train: make(Split::Train)?,
        val: make(Split::Val)?,
        test: make(Split::Test)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn small() -> SplitSizes {
        SplitSizes {
            train: 700,
            val: 130,
            test: 90,
        }
    }

    #[test]
    fn sizes_honored() {
        let book = RandomCodingBook::new(1, 16);
        for source in [Source::RandomCoding, Source::Ood] {
            let s = build_dataset(source, &book, small(), 3).unwrap();
            assert_eq!(s.train.len(), 700);
            assert_eq!(s.val.len(), 130);
            assert_eq!(s.test.len(), 90);
            assert_eq!(s.train.activations().len(), 700 * 16);
            assert_eq!(s.val.split, Split::Val);
        }
    }

    #[test]
    fn splits_use_disjoint_games() {
        // Reconstruct game seeds per split and check no transcript repeats.
        let seed = 5;
        let mut seen: Vec<HashSet<String>> = Vec::new();
        for split in Split::ALL {
            let n = small().get(split);
            let mut games = HashSet::new();
            let mut count = 0;
            let mut i = 0;
            while count < n {
                let g = random_game(mix_seed(seed, STREAM_GAMES + split_stream(split), i), 60);
                count += g.len();
                games.insert(g.to_string());
                i += 1;
            }
            seen.push(games);
        }
        for a in 0..3 {
            for b in a + 1..3 {
                assert!(seen[a].is_disjoint(&seen[b]));
            }
        }
        // And the labels produced match those games' positions.
        let labels = split_labels(Source::RandomCoding, 90, Split::Test, seed).unwrap();
        let g0 = random_game(mix_seed(seed, STREAM_GAMES + 3, 0), 60);
        assert_eq!(labels[0].0, g0.positions()[0].egocentric_labels());
        assert_eq!(labels[1].1, 1);
    }

    #[test]
    fn label_marginals() {
        let book = RandomCodingBook::new(1, 8);
        let rc = build_dataset(Source::RandomCoding, &book, small(), 2).unwrap();
        let ood = build_dataset(Source::Ood, &book, small(), 2).unwrap();
        let f = rc.train.color_frequencies();
        assert!(f[0] > 0.45, "empty should dominate game boards: {f:?}");
        let g = ood.train.color_frequencies();
        for x in g {
            assert!((x - 1.0 / 3.0).abs() < 0.02, "{g:?}");
        }
    }

    #[test]
    fn ood_sampler_uniform_and_deterministic() {
        let mut counts = [0usize; 3];
        for i in 0..10_000u64 {
            let l = sample_ood_labels(i);
            for c in l.iter().take(1) {
                counts[c.idx()] += 1;
            }
        }
        for c in counts {
            let f = c as f64 / 10_000.0;
            assert!((0.32..=0.35).contains(&f), "{counts:?}");
        }
        assert_eq!(sample_ood_labels(42), sample_ood_labels(42));
        // Center squares are unconstrained.
        let center_empty = (0..200u64).any(|i| sample_ood_labels(i)[27] == CellColor::Empty);
        assert!(center_empty);
    }

    #[test]
    fn generation_deterministic() {
        let book = RandomCodingBook::new(1, 8);
        let a = build_dataset(Source::RandomCoding, &book, small(), 9).unwrap();
        let b = build_dataset(Source::RandomCoding, &book, small(), 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn push_checks_width() {
        let mut d = Dataset::new(4, Source::External, Split::Test, 3);
        assert!(d
            .push(EncodedSample {
                h: vec![0.0; 3],
                labels: [CellColor::Empty; 64],
                timestep: None
            })
            .is_err());
        d.push(EncodedSample {
            h: vec![1.0; 4],
            labels: [CellColor::Empty; 64],
            timestep: None,
        })
        .unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.get(0).h, &[1.0; 4]);
    }
}
