// SPDX-License-Identifier: MIT OR Apache-2.0

//! `tprpb` probe checkpoints.
//!
//! One JSON header line, then every parameter tensor as little-endian `f32`,
//! row-major, in the order W | R, F, M | U, V, F, M.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{AnyProbe, BilinearTprProbe, LinearProbe, Probe, ProbeKind, TrilinearTprProbe};
use crate::error::{Error, Result};
use crate::persist::atomic_write;

pub const PROBE_MAGIC: &str = "tprpb";
const VERSION: u32 = 1;
const DTYPE: &str = "f32le";

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    magic: String,
    version: u32,
    kind: ProbeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    d_r: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    d_u: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    d_v: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    d_f: Option<usize>,
    d_model: usize,
    dtype: String,
}

fn header_for(p: &AnyProbe) -> Header {
    let (d_r, d_u, d_v, d_f) = match p {
        AnyProbe::Linear(_) => (None, None, None, None),
        AnyProbe::Bilinear(b) => (Some(b.d_r()), None, None, Some(b.d_f())),
        AnyProbe::Trilinear(t) => {
            let (u, v, f) = t.dims();
            (None, Some(u), Some(v), Some(f))
        }
    };
    Header {
        magic: PROBE_MAGIC.into(),
        version: VERSION,
        kind: p.kind(),
        d_r,
        d_u,
        d_v,
        d_f,
        d_model: p.d_model(),
        dtype: DTYPE.into(),
    }
}

pub fn write_probe_to<W: Write>(mut w: W, p: &AnyProbe) -> Result<()> {
    serde_json::to_writer(&mut w, &header_for(p)).map_err(|e| Error::Format(e.to_string()))?;
    w.write_all(b"\n")?;
    let mut buf = Vec::with_capacity(4 * p.param_count());
    for t in p.params() {
        for &x in t {
            buf.extend_from_slice(&(x as f32).to_le_bytes());
        }
    }
    w.write_all(&buf)?;
    Ok(())
}

fn need(v: Option<usize>, name: &str) -> Result<usize> {
    match v {
        Some(x) if x > 0 => Ok(x),
        _ => Err(Error::Format(format!("header lacks a positive {name}"))),
    }
}

pub fn read_probe_from<R: BufRead>(mut r: R) -> Result<AnyProbe> {
    let mut line = Vec::new();
    r.read_until(b'\n', &mut line)?;
    if line.last() != Some(&b'\n') {
        return Err(Error::Format("missing header line".into()));
    }
    let h: Header = serde_json::from_slice(&line[..line.len() - 1])
        .map_err(|e| Error::Format(format!("bad header: {e}")))?;
    if h.magic != PROBE_MAGIC {
        return Err(Error::Format(format!("bad magic {:?}", h.magic)));
    }
    if h.version != VERSION {
        return Err(Error::Format(format!("unsupported version {}", h.version)));
    }
    if h.dtype != DTYPE {
        return Err(Error::Format(format!("unsupported dtype {:?}", h.dtype)));
    }
    if h.d_model == 0 {
        return Err(Error::Format("d_model must be positive".into()));
    }
    let sizes: Vec<usize> = match h.kind {
        ProbeKind::Linear => vec![192 * h.d_model],
        ProbeKind::Bilinear => {
            let (dr, df) = (need(h.d_r, "d_r")?, need(h.d_f, "d_f")?);
            vec![64 * dr, 3 * df, dr * df * h.d_model]
        }
        ProbeKind::Trilinear => {
            let (du, dv, df) = (need(h.d_u, "d_u")?, need(h.d_v, "d_v")?, need(h.d_f, "d_f")?);
            vec![8 * du, 8 * dv, 3 * df, du * dv * df * h.d_model]
        }
    };
    let total: usize = sizes.iter().sum();
    let mut payload = Vec::new();
    r.read_to_end(&mut payload)?;
    if payload.len() != 4 * total {
        return Err(Error::Format(format!(
            "payload is {} bytes, expected {}",
            payload.len(),
            4 * total
        )));
    }
    let mut floats = payload
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64);
    let mut tensors: Vec<Vec<f64>> = sizes.iter().map(|&n| floats.by_ref().take(n).collect()).collect();
    if tensors.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::Format("non-finite parameter".into()));
    }
    let fmt = |e: Error| Error::Format(e.to_string());
    Ok(match h.kind {
        ProbeKind::Linear => LinearProbe::from_rows(h.d_model, tensors.remove(0)).map_err(fmt)?.into(),
        ProbeKind::Bilinear => {
            let m = tensors.pop().unwrap();
            let f = tensors.pop().unwrap();
            let r = tensors.pop().unwrap();
            BilinearTprProbe::from_parts(h.d_r.unwrap(), h.d_f.unwrap(), h.d_model, r, f, m)
                .map_err(fmt)?
                .into()
        }
        ProbeKind::Trilinear => {
            let m = tensors.pop().unwrap();
            let f = tensors.pop().unwrap();
            let v = tensors.pop().unwrap();
            let u = tensors.pop().unwrap();
            TrilinearTprProbe::from_parts(
                h.d_u.unwrap(),
                h.d_v.unwrap(),
                h.d_f.unwrap(),
                h.d_model,
                u,
                v,
                f,
                m,
            )
            .map_err(fmt)?
            .into()
        }
    })
}

pub fn save_probe(path: &Path, p: &AnyProbe) -> Result<()> {
    atomic_write(path, |w| write_probe_to(w, p))
}

pub fn load_probe(path: &Path) -> Result<AnyProbe> {
    read_probe_from(BufReader::new(File::open(path)?))
}

/// Loads a checkpoint and rejects it unless it holds a probe of `kind`.
pub fn load_probe_as(path: &Path, kind: ProbeKind) -> Result<AnyProbe> {
    let p = load_probe(path)?;
    if p.kind() != kind {
        return Err(Error::Format(format!("checkpoint holds a {} probe, expected {kind}", p.kind())));
    }
    Ok(p)
}
