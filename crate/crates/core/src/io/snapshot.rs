//! Binary snapshots: a fixed little-endian header followed by the cell values.
//!
//! | bytes | content |
//! |---|---|
//! | 4 | magic `LNDU` |
//! | 4 | format version (`u32`) |
//! | 8 | `γ` (`f64`) |
//! | 4 | cells per axis (`u32`) |
//! | 8 | box half width (`f64`) |
//! | 8 | time (`f64`) |
//! | 8 | 64-bit FNV-1a of the payload bytes |
//! | `8 n³` | values (`f64`), index `(i n + j) n + k` |

use std::path::Path;

use crate::error::{LandauError, Result};
use crate::grid::{Field, Grid};

pub const SNAPSHOT_MAGIC: &[u8; 4] = b"LNDU";
pub const SNAPSHOT_VERSION: u32 = 1;
const HEADER_LEN: usize = 44;

/// 64-bit FNV-1a.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub gamma: f64,
    pub t: f64,
    pub field: Field,
}

pub fn encode_snapshot(field: &Field, t: f64, gamma: f64) -> Vec<u8> {
    let grid = field.grid();
    let payload: Vec<u8> = field.values().iter().flat_map(|x| x.to_le_bytes()).collect();
    let mut out = Vec::with_capacity(HEADER_LEN + payload.len());
    out.extend_from_slice(SNAPSHOT_MAGIC);
    out.extend_from_slice(&SNAPSHOT_VERSION.to_le_bytes());
    out.extend_from_slice(&gamma.to_le_bytes());
    out.extend_from_slice(&(grid.n() as u32).to_le_bytes());
    out.extend_from_slice(&grid.half_width().to_le_bytes());
    out.extend_from_slice(&t.to_le_bytes());
    out.extend_from_slice(&fnv1a64(&payload).to_le_bytes());
    out.extend_from_slice(&payload);
    out
}

pub fn decode_snapshot(bytes: &[u8], path: &Path) -> Result<Snapshot> {
    let fail = |message: String| LandauError::Snapshot {
        path: path.to_path_buf(),
        message,
    };
    if bytes.len() < HEADER_LEN {
        return Err(fail(format!("truncated header ({} bytes)", bytes.len())));
    }
    if &bytes[0..4] != SNAPSHOT_MAGIC {
        return Err(fail("bad magic, not a snapshot file".into()));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().expect("4 bytes"));
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().expect("8 bytes"));
    let version = u32_at(4);
    if version != SNAPSHOT_VERSION {
        return Err(fail(format!("unsupported version {version}, expected {SNAPSHOT_VERSION}")));
    }
    let gamma = f64_at(8);
    let n = u32_at(16) as usize;
    let half_width = f64_at(20);
    let t = f64_at(28);
    let checksum = u64::from_le_bytes(bytes[36..44].try_into().expect("8 bytes"));
    let payload = &bytes[HEADER_LEN..];
    let actual = fnv1a64(payload);
    if actual != checksum {
        return Err(fail(format!("checksum mismatch: header {checksum:016x}, payload {actual:016x}")));
    }
    if payload.len() != 8 * n * n * n {
        return Err(fail(format!("header grid n = {n} does not match {} payload bytes", payload.len())));
    }
    let grid = Grid::new(n, half_width).map_err(|e| fail(format!("invalid header grid: {e}")))?;
    let values = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    Ok(Snapshot {
        gamma,
        t,
        field: Field::from_values(grid, values)?,
    })
}

pub fn write_snapshot(path: &Path, field: &Field, t: f64, gamma: f64) -> Result<()> {
    std::fs::write(path, encode_snapshot(field, t, gamma)).map_err(|e| LandauError::io(path, e))
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot> {
    let bytes = std::fs::read(path).map_err(|e| LandauError::io(path, e))?;
    decode_snapshot(&bytes, path)
}
