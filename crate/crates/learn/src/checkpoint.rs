//! Binary checkpoint format (little-endian):
//!
//! ```text
//! magic      8 bytes  "FFCKPT\0\0"
//! version    u32
//! digest     32 bytes SHA-256 of the model config bytes
//! config     u32 length + UTF-8 JSON model config
//! count      u32
//! per parameter:
//!   name     u16 length + UTF-8
//!   ndim     u32, then ndim × u64 extents
//!   data     f64 × product of extents, row-major
//! ```

use std::io::{Cursor, Read};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::tensor::Tensor;

pub const MAGIC: &[u8; 8] = b"FFCKPT\0\0";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CheckpointError {
    #[error("not a checkpoint (bad magic bytes)")]
    BadMagic,
    #[error("unsupported checkpoint version: expected {expected}, found {found}")]
    Version { expected: u32, found: u32 },
    #[error("checkpoint is truncated")]
    Truncated,
    #[error("config digest mismatch: expected {expected}, found {found}")]
    DigestMismatch { expected: String, found: String },
    #[error("malformed checkpoint: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub config_json: String,
    pub params: Vec<(String, Tensor)>,
}

pub fn config_digest(config_json: &str) -> String {
    hex::encode(Sha256::digest(config_json.as_bytes()))
}

impl Checkpoint {
    pub fn digest(&self) -> String {
        config_digest(&self.config_json)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.write_u32::<LittleEndian>(FORMAT_VERSION).unwrap();
        out.extend_from_slice(&Sha256::digest(self.config_json.as_bytes()));
        out.write_u32::<LittleEndian>(self.config_json.len() as u32).unwrap();
        out.extend_from_slice(self.config_json.as_bytes());
        out.write_u32::<LittleEndian>(self.params.len() as u32).unwrap();
        for (name, t) in &self.params {
            out.write_u16::<LittleEndian>(name.len() as u16).unwrap();
            out.extend_from_slice(name.as_bytes());
            out.write_u32::<LittleEndian>(2).unwrap();
            out.write_u64::<LittleEndian>(t.rows() as u64).unwrap();
            out.write_u64::<LittleEndian>(t.cols() as u64).unwrap();
            for &x in t.data() {
                out.write_f64::<LittleEndian>(x).unwrap();
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CheckpointError> {
        let mut r = Cursor::new(bytes);
        let trunc = |_| CheckpointError::Truncated;
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic).map_err(|_| CheckpointError::BadMagic)?;
        if &magic != MAGIC {
            return Err(CheckpointError::BadMagic);
        }
        let version = r.read_u32::<LittleEndian>().map_err(trunc)?;
        if version != FORMAT_VERSION {
            return Err(CheckpointError::Version { expected: FORMAT_VERSION, found: version });
        }
        let mut digest = [0u8; 32];
        r.read_exact(&mut digest).map_err(trunc)?;
        let config_json = read_string(&mut r, |r| r.read_u32::<LittleEndian>().map(|n| n as usize))?;
        let actual: [u8; 32] = Sha256::digest(config_json.as_bytes()).into();
        if actual != digest {
            return Err(CheckpointError::DigestMismatch { expected: hex::encode(digest), found: hex::encode(actual) });
        }
        let count = r.read_u32::<LittleEndian>().map_err(trunc)?;
        let mut params = Vec::new();
        for _ in 0..count {
            let name = read_string(&mut r, |r| r.read_u16::<LittleEndian>().map(usize::from))?;
            let ndim = r.read_u32::<LittleEndian>().map_err(trunc)?;
            if ndim != 2 {
                return Err(CheckpointError::Malformed(format!("{name}: expected 2 dimensions, found {ndim}")));
            }
            let rows = r.read_u64::<LittleEndian>().map_err(trunc)? as usize;
            let cols = r.read_u64::<LittleEndian>().map_err(trunc)? as usize;
            let len = rows.checked_mul(cols).filter(|&n| n <= bytes.len() / 8).ok_or(CheckpointError::Truncated)?;
            let mut data = vec![0.0; len];
            r.read_f64_into::<LittleEndian>(&mut data).map_err(trunc)?;
            params.push((name, Tensor::new(rows, cols, data)));
        }
        if (r.position() as usize) != bytes.len() {
            return Err(CheckpointError::Malformed("trailing bytes".into()));
        }
        Ok(Checkpoint { config_json, params })
    }
}

fn read_string<F>(r: &mut Cursor<&[u8]>, len: F) -> Result<String, CheckpointError>
where
    F: FnOnce(&mut Cursor<&[u8]>) -> std::io::Result<usize>,
{
    let n = len(r).map_err(|_| CheckpointError::Truncated)?;
    let remaining = r.get_ref().len() - r.position() as usize;
    if n > remaining {
        return Err(CheckpointError::Truncated);
    }
    let mut buf = vec![0u8; n];
    r.read_exact(&mut buf).map_err(|_| CheckpointError::Truncated)?;
    String::from_utf8(buf).map_err(|e| CheckpointError::Malformed(e.to_string()))
}
