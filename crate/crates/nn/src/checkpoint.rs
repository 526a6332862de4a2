//! Binary checkpoint container: a JSON metadata blob plus named `f32`
//! tensors, little-endian.
//!
//! ```text
//! magic "LGNVCKPT" | version u32 | sha256(metadata) [32]
//! | metadata len u64 | metadata utf-8
//! | tensor count u32 | { name len u32 | name | ndim u32 | dims u64… | data f32… }
//! ```

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"LGNVCKPT";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<f32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub metadata: String,
    pub tensors: Vec<Tensor>,
}

/// Hex SHA-256 of a string, used to fingerprint configurations.
pub fn sha256_hex(s: &str) -> String {
    Sha256::digest(s.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

impl Checkpoint {
    pub fn tensor(&self, name: &str) -> Option<&Tensor> {
        self.tensors.iter().find(|t| t.name == name)
    }

    /// Tensors whose names start with `prefix.`, with the prefix stripped.
    pub fn group(&self, prefix: &str) -> Vec<(String, Vec<usize>, Vec<f32>)> {
        let p = format!("{prefix}.");
        self.tensors
            .iter()
            .filter_map(|t| {
                t.name
                    .strip_prefix(&p)
                    .map(|n| (n.to_string(), t.shape.clone(), t.data.clone()))
            })
            .collect()
    }

    pub fn push_group(&mut self, prefix: &str, group: Vec<(String, Vec<usize>, Vec<f32>)>) {
        for (name, shape, data) in group {
            self.tensors.push(Tensor {
                name: format!("{prefix}.{name}"),
                shape,
                data,
            });
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&Sha256::digest(self.metadata.as_bytes()));
        out.extend_from_slice(&(self.metadata.len() as u64).to_le_bytes());
        out.extend_from_slice(self.metadata.as_bytes());
        out.extend_from_slice(&(self.tensors.len() as u32).to_le_bytes());
        for t in &self.tensors {
            out.extend_from_slice(&(t.name.len() as u32).to_le_bytes());
            out.extend_from_slice(t.name.as_bytes());
            out.extend_from_slice(&(t.shape.len() as u32).to_le_bytes());
            for &d in &t.shape {
                out.extend_from_slice(&(d as u64).to_le_bytes());
            }
            for &x in &t.data {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = bytes;
        let mut magic = [0u8; 8];
        read_exact(&mut r, &mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format("not a checkpoint file".into()));
        }
        let version = read_u32(&mut r)?;
        if version != VERSION {
            return Err(Error::Version {
                found: version,
                expected: VERSION,
            });
        }
        let mut digest = [0u8; 32];
        read_exact(&mut r, &mut digest)?;
        let meta_len = read_u64(&mut r)? as usize;
        if meta_len > r.len() {
            return Err(Error::Format("truncated metadata".into()));
        }
        let mut meta = vec![0u8; meta_len];
        read_exact(&mut r, &mut meta)?;
        if Sha256::digest(&meta).as_slice() != digest {
            return Err(Error::Format("metadata checksum mismatch".into()));
        }
        let metadata = String::from_utf8(meta).map_err(|_| Error::Format("metadata is not utf-8".into()))?;
        let count = read_u32(&mut r)?;
        let mut tensors = Vec::new();
        for _ in 0..count {
            let name_len = read_u32(&mut r)? as usize;
            if name_len > r.len() {
                return Err(Error::Format("truncated tensor name".into()));
            }
            let mut name = vec![0u8; name_len];
            read_exact(&mut r, &mut name)?;
            let name = String::from_utf8(name).map_err(|_| Error::Format("tensor name is not utf-8".into()))?;
            let ndim = read_u32(&mut r)? as usize;
            let mut shape = Vec::with_capacity(ndim.min(8));
            for _ in 0..ndim {
                shape.push(read_u64(&mut r)? as usize);
            }
            let n = shape
                .iter()
                .try_fold(1usize, |acc, &d| acc.checked_mul(d))
                .filter(|&n| n.checked_mul(4).is_some_and(|b| b <= r.len()))
                .ok_or_else(|| Error::Format(format!("tensor {name} truncated")))?;
            let data = r[..4 * n]
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
                .collect();
            r = &r[4 * n..];
            tensors.push(Tensor { name, shape, data });
        }
        if !r.is_empty() {
            return Err(Error::Format("trailing bytes".into()));
        }
        Ok(Self { metadata, tensors })
    }

    /// Writes atomically via a temporary sibling file.
    pub fn save(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("tmp");
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(&self.to_bytes())?;
            f.sync_all()?;
        }
        fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut bytes = Vec::new();
        fs::File::open(path)?.read_to_end(&mut bytes)?;
        Self::from_bytes(&bytes)
    }
}

fn read_exact(r: &mut &[u8], buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf).map_err(|_| Error::Format("unexpected end of file".into()))
}

fn read_u32(r: &mut &[u8]) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64(r: &mut &[u8]) -> Result<u64> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b)?;
    Ok(u64::from_le_bytes(b))
}
