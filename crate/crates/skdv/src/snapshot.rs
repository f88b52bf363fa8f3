//! Binary field snapshots and checkpoints.
//!
//! Layout, all little-endian: `SKDV`, version u32, n u64, then length,
//! center, t, α, β, γ as f64, then n pairs (Re u, Im u), then n values of v.
//! A checkpoint is a snapshot followed by `CKPT`, a u64 byte count and a JSON
//! document.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde::{de::DeserializeOwned, Serialize};
use skdv_core::{Complex64, FieldState, Grid, ModelParams};

use crate::error::{io_err, CliError, Result};

pub const MAGIC: &[u8; 4] = b"SKDV";
pub const VERSION: u32 = 1;
const CHECKPOINT_MAGIC: &[u8; 4] = b"CKPT";
const HEADER_LEN: usize = 4 + 4 + 8 + 6 * 8;

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub state: FieldState,
    pub params: ModelParams,
}

pub fn encode(state: &FieldState, params: &ModelParams) -> Vec<u8> {
    let g = &state.grid;
    let mut out = Vec::with_capacity(HEADER_LEN + 24 * g.n());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(g.n() as u64).to_le_bytes());
    for x in [g.length(), g.center(), state.t, params.alpha, params.beta, params.gamma] {
        out.extend_from_slice(&x.to_le_bytes());
    }
    for z in &state.u {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    for x in &state.v {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: &'a str,
}

impl<'a> Reader<'a> {
    fn take(&mut self, k: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(k).filter(|&e| e <= self.bytes.len()).ok_or_else(|| CliError::Format {
            path: self.path.into(),
            message: format!("truncated at byte {}", self.pos),
        })?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

/// Decode a snapshot at the start of `bytes`; returns it and the bytes consumed.
pub fn decode(bytes: &[u8], path: &str) -> Result<(Snapshot, usize)> {
    let bad = |message: String| CliError::Format { path: path.into(), message };
    let mut r = Reader { bytes, pos: 0, path };
    if r.take(4)? != MAGIC {
        return Err(bad("missing SKDV magic".into()));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(bad(format!("unsupported snapshot version {version}")));
    }
    let n = usize::try_from(r.u64()?).map_err(|_| bad("point count overflows".into()))?;
    if n.checked_mul(24).is_none_or(|b| b > bytes.len()) {
        return Err(bad(format!("point count {n} exceeds the file size")));
    }
    let [length, center, t, alpha, beta, gamma] = [r.f64()?, r.f64()?, r.f64()?, r.f64()?, r.f64()?, r.f64()?];
    let mut u = Vec::with_capacity(n);
    for _ in 0..n {
        u.push(Complex64::new(r.f64()?, r.f64()?));
    }
    let mut v = Vec::with_capacity(n);
    for _ in 0..n {
        v.push(r.f64()?);
    }
    let grid = Arc::new(Grid::new(n, length, center)?);
    let state = FieldState::new(grid, u, v, t)?;
    let params = ModelParams::new(alpha, beta, gamma)?;
    Ok((Snapshot { state, params }, r.pos))
}

pub fn write_snapshot(path: &Path, state: &FieldState, params: &ModelParams) -> Result<()> {
    fs::write(path, encode(state, params)).map_err(io_err(path))
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    let shown = path.display().to_string();
    let (snap, used) = decode(&bytes, &shown)?;
    if used != bytes.len() {
        return Err(CliError::Format { path: shown.into(), message: format!("{} trailing bytes", bytes.len() - used) });
    }
    Ok(snap)
}

pub fn write_checkpoint<M: Serialize>(path: &Path, state: &FieldState, params: &ModelParams, meta: &M) -> Result<()> {
    let mut bytes = encode(state, params);
    let json = serde_json::to_vec(meta).map_err(|e| CliError::Format { path: path.into(), message: e.to_string() })?;
    bytes.extend_from_slice(CHECKPOINT_MAGIC);
    bytes.extend_from_slice(&(json.len() as u64).to_le_bytes());
    bytes.extend_from_slice(&json);
    // Write then rename so an interrupted write never clobbers the last good checkpoint.
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

pub fn read_checkpoint<M: DeserializeOwned>(path: &Path) -> Result<(Snapshot, M)> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    let shown = path.display().to_string();
    let (snap, used) = decode(&bytes, &shown)?;
    let mut r = Reader { bytes: &bytes, pos: used, path: &shown };
    if r.take(4)? != CHECKPOINT_MAGIC {
        return Err(CliError::Format { path: shown.into(), message: "missing CKPT section".into() });
    }
    let len = usize::try_from(r.u64()?).unwrap_or(usize::MAX);
    let meta = serde_json::from_slice(r.take(len)?)
        .map_err(|e| CliError::Format { path: shown.clone().into(), message: e.to_string() })?;
    Ok((snap, meta))
}
