//! Versioned binary container for fitted models.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic      8 bytes   "RDMTCNTR"
//! version    u32       CONTAINER_VERSION
//! kind       u16 length + UTF-8 bytes        e.g. "cnn", "logistic", "ffnn"
//! meta       u32 length + UTF-8 JSON object  hyperparameters, vocabulary hash, ...
//! arrays     u32 count, then per array:
//!              u16 name length + UTF-8 name
//!              u64 element count
//!              count × f64 (IEEE-754 binary64, little-endian)
//! checksum   32 bytes  SHA-256 of every preceding byte
//! ```
//!
//! Values are stored bit-for-bit, so a save/load round trip is exact.

use serde::{de::DeserializeOwned, Serialize};
use sha2::{Digest, Sha256};

use crate::{Error, Result};

pub const MAGIC: &[u8; 8] = b"RDMTCNTR";
pub const CONTAINER_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Container {
    pub kind: String,
    pub meta: serde_json::Value,
    pub arrays: Vec<(String, Vec<f64>)>,
}

impl Container {
    pub fn new<M: Serialize>(kind: &str, meta: &M) -> Result<Self> {
        let meta = serde_json::to_value(meta).map_err(|e| Error::format(kind, e.to_string()))?;
        Ok(Container { kind: kind.to_string(), meta, arrays: Vec::new() })
    }

    pub fn push(&mut self, name: &str, values: &[f64]) {
        self.arrays.push((name.to_string(), values.to_vec()));
    }

    pub fn meta<M: DeserializeOwned>(&self) -> Result<M> {
        serde_json::from_value(self.meta.clone()).map_err(|e| Error::format(&self.kind, format!("metadata: {e}")))
    }

    pub fn array(&self, name: &str) -> Result<&[f64]> {
        self.arrays
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
            .ok_or_else(|| Error::format(&self.kind, format!("missing array {name:?}")))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&CONTAINER_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.kind.len() as u16).to_le_bytes());
        out.extend_from_slice(self.kind.as_bytes());
        let meta = serde_json::to_vec(&self.meta).expect("JSON value serializes");
        out.extend_from_slice(&(meta.len() as u32).to_le_bytes());
        out.extend_from_slice(&meta);
        out.extend_from_slice(&(self.arrays.len() as u32).to_le_bytes());
        for (name, values) in &self.arrays {
            out.extend_from_slice(&(name.len() as u16).to_le_bytes());
            out.extend_from_slice(name.as_bytes());
            out.extend_from_slice(&(values.len() as u64).to_le_bytes());
            for v in values {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        let digest = Sha256::digest(&out);
        out.extend_from_slice(&digest);
        out
    }

    /// Parses and verifies a container, requiring `kind` when given.
    pub fn from_bytes(bytes: &[u8], kind: Option<&str>) -> Result<Self> {
        let artifact = kind.unwrap_or("container");
        let bad = |d: &str| Error::format(artifact, d.to_string());
        if bytes.len() < MAGIC.len() + 4 + 32 || &bytes[..8] != MAGIC {
            return Err(bad("not a model container (bad magic)"));
        }
        let (body, digest) = bytes.split_at(bytes.len() - 32);
        if Sha256::digest(body).as_slice() != digest {
            return Err(bad("checksum mismatch; file is corrupt"));
        }
        let mut r = Reader { buf: body, pos: 8 };
        let version = r.u32()?;
        if version != CONTAINER_VERSION {
            return Err(bad(&format!("expected container version {CONTAINER_VERSION}, found {version}")));
        }
        let n = r.u16()? as usize;
        let found_kind = r.string(n)?;
        if let Some(k) = kind {
            if found_kind != k {
                return Err(bad(&format!("expected a {k} container, found {found_kind}")));
            }
        }
        let n = r.u32()? as usize;
        let meta = serde_json::from_slice(r.take(n)?).map_err(|e| bad(&format!("metadata: {e}")))?;
        let count = r.u32()? as usize;
        let mut arrays = Vec::with_capacity(count);
        for _ in 0..count {
            let n = r.u16()? as usize;
            let name = r.string(n)?;
            let len = r.u64()? as usize;
            let raw = r.take(len.checked_mul(8).ok_or_else(|| bad("array too large"))?)?;
            let values = raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
            arrays.push((name, values));
        }
        if r.pos != body.len() {
            return Err(bad("trailing bytes"));
        }
        Ok(Container { kind: found_kind, meta, arrays })
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        let end = end.ok_or_else(|| Error::format("container", "truncated"))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn string(&mut self, n: usize) -> Result<String> {
        String::from_utf8(self.take(n)?.to_vec()).map_err(|_| Error::format("container", "invalid UTF-8"))
    }
}
