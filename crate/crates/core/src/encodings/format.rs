// SPDX-License-Identifier: MIT OR Apache-2.0

//! `tprds` dataset files.
//!
//! A single UTF-8 JSON header line, then `count` fixed-size records:
//!
//! ```text
//! {"magic":"tprds","version":1,"d_model":D,"count":N,"source":"...","split":"...","layer":L,"dtype":"f32le"}\n
//! record 0: D x f32 little-endian | 64 label bytes (0=Empty, 1=Current, 2=Opponent)
//! ...
//! ```
//!
//! Generated game data additionally carries a `timesteps` array in the
//! header; readers that do not know the key can ignore it.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Dataset, Source, Split};
use crate::error::{Error, Result};
use crate::othello::{CellColor, Labels};
use crate::persist::atomic_write;

pub const DATASET_MAGIC: &str = "tprds";
pub const FORMAT_VERSION: u32 = 1;
pub const DTYPE_F32LE: &str = "f32le";

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    magic: String,
    version: u32,
    d_model: usize,
    count: usize,
    source: Source,
    split: Split,
    layer: u32,
    dtype: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    timesteps: Option<Vec<u32>>,
}

/// Bytes per record for a given width.
pub fn record_len(d_model: usize) -> usize {
    d_model * 4 + 64
}

pub fn write_dataset_to<W: Write>(mut w: W, d: &Dataset) -> Result<()> {
    let header = Header {
        magic: DATASET_MAGIC.into(),
        version: FORMAT_VERSION,
        d_model: d.d_model(),
        count: d.len(),
        source: d.source,
        split: d.split,
        layer: d.layer,
        dtype: DTYPE_F32LE.into(),
        timesteps: d.timesteps().map(<[u32]>::to_vec),
    };
    serde_json::to_writer(&mut w, &header).map_err(|e| Error::Format(e.to_string()))?;
    w.write_all(b"\n")?;
    let mut rec = Vec::with_capacity(record_len(d.d_model()));
    for s in d.iter() {
        rec.clear();
        for x in s.h {
            rec.extend_from_slice(&x.to_le_bytes());
        }
        rec.extend(s.labels.iter().map(|c| *c as u8));
        w.write_all(&rec)?;
    }
    Ok(())
}

pub fn read_dataset_from<R: BufRead>(mut r: R) -> Result<Dataset> {
    let mut line = Vec::new();
    r.read_until(b'\n', &mut line)?;
    if line.last() != Some(&b'\n') {
        return Err(Error::Format("missing header line".into()));
    }
    let header: Header = serde_json::from_slice(&line[..line.len() - 1])
        .map_err(|e| Error::Format(format!("bad header: {e}")))?;
    if header.magic != DATASET_MAGIC {
        return Err(Error::Format(format!("bad magic {:?}", header.magic)));
    }
    if header.version != FORMAT_VERSION {
        return Err(Error::Format(format!("unsupported version {}", header.version)));
    }
    if header.dtype != DTYPE_F32LE {
        return Err(Error::Format(format!("unsupported dtype {:?}", header.dtype)));
    }
    if header.d_model == 0 {
        return Err(Error::Format("d_model must be positive".into()));
    }

    let mut payload = Vec::new();
    r.read_to_end(&mut payload)?;
    let rl = record_len(header.d_model);
    let expected = header
        .count
        .checked_mul(rl)
        .ok_or_else(|| Error::Format("count overflows".into()))?;
    if payload.len() != expected {
        return Err(Error::Format(format!(
            "payload is {} bytes, header declares {} records of {} bytes",
            payload.len(),
            header.count,
            rl
        )));
    }

    let mut h = Vec::with_capacity(header.count * header.d_model);
    let mut labels: Vec<Labels> = Vec::with_capacity(header.count);
    for rec in payload.chunks_exact(rl) {
        let (floats, label_bytes) = rec.split_at(header.d_model * 4);
        h.extend(
            floats
                .chunks_exact(4)
                .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]])),
        );
        let mut l = [CellColor::Empty; 64];
        for (dst, &b) in l.iter_mut().zip(label_bytes) {
            *dst = CellColor::from_byte(b)
                .ok_or_else(|| Error::Format(format!("bad label byte {b}")))?;
        }
        labels.push(l);
    }
    Dataset::from_parts(
        header.d_model,
        header.source,
        header.split,
        header.layer,
        h,
        labels,
        header.timesteps,
    )
    .map_err(|e| Error::Format(e.to_string()))
}

pub fn write_dataset(path: &Path, d: &Dataset) -> Result<()> {
    atomic_write(path, |w| write_dataset_to(w, d))
}

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    read_dataset_from(BufReader::new(File::open(path)?))
}

/// Reads a dataset and rejects it unless its width is `d_model`.
pub fn read_dataset_expecting(path: &Path, d_model: usize) -> Result<Dataset> {
    let d = read_dataset(path)?;
    if d.d_model() != d_model {
        return Err(Error::Format(format!(
            "dataset d_model {} does not match expected {d_model}",
            d.d_model()
        )));
    }
    Ok(d)
}
