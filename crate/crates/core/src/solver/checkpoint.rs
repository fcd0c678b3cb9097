//! Binary checkpoints.
//!
//! Layout, all integers and floats little-endian:
//!
//! | bytes | content |
//! |-------|---------|
//! | 8 | magic `FEZCKPT\0` |
//! | 4 | format version (`u32`) |
//! | 4 | header length `n` (`u32`) |
//! | n | UTF-8 JSON [`CheckpointHeader`] |
//! | 8·N each | `f64` arrays for `ψ`, `z¹`, `z²`, `z³`, row-major over the grid |

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::state::ZField;
use crate::error::{Error, Result};
use crate::geometry::{Grid, Scheme};

pub const MAGIC: &[u8; 8] = b"FEZCKPT\0";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckpointHeader {
    pub dims: [usize; 3],
    pub spacing: [f64; 3],
    pub k: f64,
    pub rho0: f64,
    pub c1: f64,
    pub c2: f64,
    /// Logarithmic time of the state.
    pub t: f64,
    pub t0: f64,
    pub scheme: Scheme,
    /// Hash of the producing configuration, when known.
    #[serde(default)]
    pub config_hash: Option<String>,
}

pub fn write_checkpoint(mut w: impl Write, header: &CheckpointHeader, field: &ZField) -> Result<()> {
    if header.dims != field.grid().dims() {
        return Err(Error::Checkpoint("header dims do not match the field".into()));
    }
    let json = serde_json::to_vec(header)?;
    w.write_all(MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    w.write_all(&(json.len() as u32).to_le_bytes())?;
    w.write_all(&json)?;
    let mut buf = Vec::with_capacity(8 * field.data().len());
    for c in 0..4 {
        for v in field.component(c) {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_checkpoint(mut r: impl Read) -> Result<(CheckpointHeader, ZField)> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Checkpoint("bad magic bytes".into()));
    }
    let mut word = [0u8; 4];
    r.read_exact(&mut word)?;
    let version = u32::from_le_bytes(word);
    if version != FORMAT_VERSION {
        return Err(Error::Checkpoint(format!("unsupported format version {version}")));
    }
    r.read_exact(&mut word)?;
    let mut json = vec![0u8; u32::from_le_bytes(word) as usize];
    r.read_exact(&mut json)?;
    let header: CheckpointHeader = serde_json::from_slice(&json)?;
    let grid = Grid::new(header.dims, header.spacing)?;
    let n = grid.len();
    let mut raw = vec![0u8; 8 * 4 * n];
    r.read_exact(&mut raw).map_err(|e| Error::Checkpoint(format!("truncated field data: {e}")))?;
    let mut data = vec![0.0; 4 * n];
    for (j, chunk) in raw.chunks_exact(8).enumerate() {
        let (c, i) = (j / n, j % n);
        data[4 * i + c] = f64::from_le_bytes(chunk.try_into().expect("chunk of eight bytes"));
    }
    Ok((header, ZField::from_data(grid, data)))
}

pub fn save_checkpoint(path: &Path, header: &CheckpointHeader, field: &ZField) -> Result<()> {
    let f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_checkpoint(f, header, field)
}

pub fn load_checkpoint(path: &Path) -> Result<(CheckpointHeader, ZField)> {
    read_checkpoint(std::io::BufReader::new(std::fs::File::open(path)?))
}
