//! EMCK checkpoint files.
//!
//! ```text
//! "EMCK"              4 bytes
//! version             u16 (= 1)
//! block count         u32
//! per block:
//!   name length       u16
//!   name              UTF-8
//!   rank              u8
//!   dims              rank × u32
//!   data              Π dims × f32
//! metadata:
//!   config hash       u64
//!   best val macro F1 f64
//!   epoch             u32
//! ```
//! Little-endian throughout. Blocks may appear in any order on read; the
//! head's shape is recovered from the `proj`, `hidden.*` and `out` blocks.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::params::{HeadDims, ModelParams};

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"EMCK";
pub const CHECKPOINT_VERSION: u16 = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckpointMeta {
    pub config_hash: u64,
    pub best_val_f1: f64,
    pub epoch: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub params: ModelParams<f32>,
    pub meta: CheckpointMeta,
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Vec<u8> {
        let blocks = self.params.named_buffers();
        let mut out = Vec::new();
        out.extend_from_slice(CHECKPOINT_MAGIC);
        out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
        out.extend_from_slice(&(blocks.len() as u32).to_le_bytes());
        for b in blocks {
            out.extend_from_slice(&(b.name.len() as u16).to_le_bytes());
            out.extend_from_slice(b.name.as_bytes());
            out.push(b.dims.len() as u8);
            for d in &b.dims {
                out.extend_from_slice(&(*d as u32).to_le_bytes());
            }
            for v in b.data {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out.extend_from_slice(&self.meta.config_hash.to_le_bytes());
        out.extend_from_slice(&self.meta.best_val_f1.to_le_bytes());
        out.extend_from_slice(&self.meta.epoch.to_le_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4, "EMCK header")? != CHECKPOINT_MAGIC {
            return Err(Error::parse("EMCK header", "bad magic"));
        }
        let version = r.u16("EMCK header")?;
        if version != CHECKPOINT_VERSION {
            return Err(Error::parse(
                "EMCK header",
                format!("unsupported version {version}"),
            ));
        }
        let count = r.u32("EMCK header")? as usize;
        let mut blocks: HashMap<String, (Vec<usize>, Vec<f32>)> = HashMap::new();
        for i in 0..count {
            let ctx = format!("EMCK block {i}");
            let name_len = r.u16(&ctx)? as usize;
            let name = String::from_utf8(r.take(name_len, &ctx)?.to_vec())
                .map_err(|_| Error::parse(&ctx, "name is not UTF-8"))?;
            let rank = r.take(1, &ctx)?[0] as usize;
            let dims = (0..rank)
                .map(|_| r.u32(&ctx).map(|d| d as usize))
                .collect::<Result<Vec<_>>>()?;
            let n: usize = dims.iter().product();
            let data = r
                .take(n * 4, &ctx)?
                .chunks_exact(4)
                .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
                .collect();
            if blocks.insert(name.clone(), (dims, data)).is_some() {
                return Err(Error::parse(ctx, format!("duplicate block {name:?}")));
            }
        }
        let meta = CheckpointMeta {
            config_hash: u64::from_le_bytes(r.take(8, "EMCK metadata")?.try_into().unwrap()),
            best_val_f1: f64::from_le_bytes(r.take(8, "EMCK metadata")?.try_into().unwrap()),
            epoch: r.u32("EMCK metadata")?,
        };
        if r.pos != bytes.len() {
            return Err(Error::parse("EMCK metadata", "trailing bytes"));
        }

        let dims = infer_dims(&blocks)?;
        let mut params = ModelParams::<f32>::zeros(dims);
        let expected: Vec<(String, Vec<usize>)> = params
            .named_buffers()
            .into_iter()
            .map(|b| (b.name, b.dims))
            .collect();
        if expected.len() != blocks.len() {
            return Err(Error::parse(
                "EMCK blocks",
                format!(
                    "{} blocks, a head of this shape has {}",
                    blocks.len(),
                    expected.len()
                ),
            ));
        }
        for ((name, want), dst) in expected.into_iter().zip(params.buffers_mut()) {
            let (got, data) = blocks
                .get(&name)
                .ok_or_else(|| Error::parse("EMCK blocks", format!("missing block {name:?}")))?;
            if *got != want {
                return Err(Error::parse(
                    "EMCK blocks",
                    format!("block {name:?} has shape {got:?}, expected {want:?}"),
                ));
            }
            dst.copy_from_slice(data);
        }
        if !params.is_finite() {
            return Err(Error::parse("EMCK blocks", "non-finite parameter"));
        }
        Ok(Checkpoint { params, meta })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(&fs::read(path).map_err(|e| Error::io(path, e))?)
    }
}

fn infer_dims(blocks: &HashMap<String, (Vec<usize>, Vec<f32>)>) -> Result<HeadDims> {
    let matrix = |name: &str| match blocks.get(name) {
        Some((d, _)) if d.len() == 2 => Ok((d[0], d[1])),
        _ => Err(Error::parse(
            "EMCK blocks",
            format!("missing or malformed {name:?}"),
        )),
    };
    let (embed, width) = matrix("proj.weight")?;
    let (_, classes) = matrix("out.weight")?;
    let layers = (0..)
        .take_while(|i| blocks.contains_key(&format!("hidden.{i}.weight")))
        .count();
    Ok(HeadDims {
        embed,
        width,
        layers,
        classes,
    })
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, ctx: &str) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::parse(ctx, "truncated"))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u16(&mut self, ctx: &str) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2, ctx)?.try_into().unwrap()))
    }

    fn u32(&mut self, ctx: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, ctx)?.try_into().unwrap()))
    }
}
