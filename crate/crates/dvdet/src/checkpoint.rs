//! Single-file checkpoints.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic    8 bytes  "DVDETCKP"
//! version  u32      1
//! header   u64 length, then UTF-8 JSON: the run configuration
//! count    u64      number of parameters
//! entry*   u32 name length, name bytes, u32 rank, u64 per dimension,
//!          then the row-major values as raw f64
//! ```
//!
//! Values are stored bit for bit, so a reload reproduces the parameters
//! exactly. Optimizer moments are not stored.

use std::path::Path;

use dvdet_core::model::DvDet;
use dvdet_core::nn::{ParamStore, Tensor};

use crate::config::Config;
use crate::error::{Result, Stage, StageError};

pub const MAGIC: &[u8; 8] = b"DVDETCKP";
pub const VERSION: u32 = 1;

fn bad(message: impl std::fmt::Display) -> StageError {
    StageError::checkpoint(message)
}

pub fn encode(config: &Config, store: &ParamStore) -> Result<Vec<u8>> {
    let header = serde_json::to_vec(config).map_err(|e| StageError::invariant(Stage::Checkpoint, e))?;
    let mut out = Vec::with_capacity(64 + header.len() + store.scalar_count() * 8);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(header.len() as u64).to_le_bytes());
    out.extend_from_slice(&header);
    out.extend_from_slice(&(store.len() as u64).to_le_bytes());
    for (name, p) in store.iter() {
        out.extend_from_slice(&(name.len() as u32).to_le_bytes());
        out.extend_from_slice(name.as_bytes());
        out.extend_from_slice(&(p.value.shape().len() as u32).to_le_bytes());
        for d in p.value.shape() {
            out.extend_from_slice(&(*d as u64).to_le_bytes());
        }
        for v in p.value.data() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|e| *e <= self.bytes.len());
        let end = end.ok_or_else(|| bad(format!("truncated at byte {}", self.pos)))?;
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

    fn len(&mut self) -> Result<usize> {
        usize::try_from(self.u64()?).map_err(|_| bad("length does not fit in memory"))
    }
}

/// Parses a checkpoint without checking it against a model.
pub fn decode(bytes: &[u8]) -> Result<(Config, ParamStore)> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(8).ok() != Some(MAGIC.as_slice()) {
        return Err(bad("not a dvdet checkpoint (bad magic)"));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    let header_len = r.len()?;
    let config: Config =
        serde_json::from_slice(r.take(header_len)?).map_err(|e| bad(format!("header: {e}")))?;
    let count = r.len()?;
    let mut store = ParamStore::new();
    for _ in 0..count {
        let name_len = r.u32()? as usize;
        let name = std::str::from_utf8(r.take(name_len)?).map_err(|_| bad("parameter name is not UTF-8"))?;
        let rank = r.u32()? as usize;
        let shape = (0..rank).map(|_| r.len()).collect::<Result<Vec<usize>>>()?;
        let n = shape
            .iter()
            .try_fold(1usize, |acc, d| acc.checked_mul(*d))
            .filter(|n| n.checked_mul(8).is_some_and(|b| b <= bytes.len()))
            .ok_or_else(|| bad(format!("parameter `{name}` has an impossible shape {shape:?}")))?;
        let raw = r.take(n * 8)?;
        let data: Vec<f64> = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        if data.iter().any(|v| !v.is_finite()) {
            return Err(bad(format!("parameter `{name}` holds a non-finite value")));
        }
        let tensor = Tensor::from_vec(&shape, data).map_err(|e| bad(e))?;
        store.insert(name, tensor).map_err(|e| bad(e))?;
    }
    if r.pos != bytes.len() {
        return Err(bad(format!("{} trailing bytes", bytes.len() - r.pos)));
    }
    Ok((config, store))
}

pub fn save(path: &Path, config: &Config, store: &ParamStore) -> Result<()> {
    let bytes = encode(config, store)?;
    std::fs::write(path, bytes).map_err(|e| StageError::io(Stage::Output, path, e))
}

/// Loaded checkpoint, validated against the model its header describes.
#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub config: Config,
    pub model: DvDet,
    pub store: ParamStore,
}

pub fn load(path: &Path) -> Result<Checkpoint> {
    let bytes = std::fs::read(path).map_err(|e| {
        let mut err = StageError::io(Stage::Checkpoint, path, e);
        err.kind = crate::error::ErrorKind::Checkpoint;
        err
    })?;
    let (config, store) = decode(&bytes)?;
    config.validate().map_err(|e| bad(format!("header: {}", e.message)))?;
    let model = DvDet::new(config.model_config()).map_err(|e| bad(e))?;
    model.check_store(&store).map_err(|e| bad(format!("incompatible with its model: {e}")))?;
    Ok(Checkpoint { config, model, store })
}
