//! EMOF feature-sequence files.
//!
//! ```text
//! offset  size  field
//! 0       4     magic "EMOF"
//! 4       2     version (u16, = 1)
//! 6       1     modality (0 speech, 1 text)
//! 7       1     reserved (0)
//! 8       4     T, frame count (u32)
//! 12      4     E, embedding dimension (u32)
//! 16      4·T·E frames, row-major f32
//! ```
//! All integers and floats are little-endian.

use crate::error::{Error, Result};
use crate::numerics::Tensor2D;

pub const FEATURE_MAGIC: &[u8; 4] = b"EMOF";
pub const FEATURE_VERSION: u16 = 1;
pub const FEATURE_HEADER_LEN: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Modality {
    Speech,
    Text,
}

impl Modality {
    fn code(self) -> u8 {
        match self {
            Modality::Speech => 0,
            Modality::Text => 1,
        }
    }

    fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Modality::Speech),
            1 => Some(Modality::Text),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Modality::Speech => "speech",
            Modality::Text => "text",
        }
    }
}

/// A `T×E` sequence of embedding frames from one modality.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSequence {
    pub modality: Modality,
    pub frames: Tensor2D<f32>,
}

impl FeatureSequence {
    pub fn new(modality: Modality, frames: Tensor2D<f32>) -> Self {
        Self { modality, frames }
    }

    pub fn len(&self) -> usize {
        self.frames.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.rows() == 0
    }

    pub fn dim(&self) -> usize {
        self.frames.cols()
    }
}

pub fn feature_file_len(frames: usize, dim: usize) -> usize {
    FEATURE_HEADER_LEN + 4 * frames * dim
}

pub fn write_features(f: &FeatureSequence) -> Result<Vec<u8>> {
    let (t, e) = f.frames.shape();
    if t == 0 || e == 0 {
        return Err(Error::Data(format!(
            "refusing to store a {t}x{e} feature sequence"
        )));
    }
    let too_big = |n: usize| u32::try_from(n).map_err(|_| Error::Data(format!("{n} exceeds u32")));
    let mut out = Vec::with_capacity(feature_file_len(t, e));
    out.extend_from_slice(FEATURE_MAGIC);
    out.extend_from_slice(&FEATURE_VERSION.to_le_bytes());
    out.push(f.modality.code());
    out.push(0);
    out.extend_from_slice(&too_big(t)?.to_le_bytes());
    out.extend_from_slice(&too_big(e)?.to_le_bytes());
    for v in f.frames.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

pub fn read_features(bytes: &[u8]) -> Result<FeatureSequence> {
    let ctx = "EMOF header";
    if bytes.len() < FEATURE_HEADER_LEN {
        return Err(Error::parse(
            ctx,
            format!("{} bytes, need {FEATURE_HEADER_LEN}", bytes.len()),
        ));
    }
    if &bytes[0..4] != FEATURE_MAGIC {
        return Err(Error::parse(
            ctx,
            format!("bad magic {:?}", String::from_utf8_lossy(&bytes[0..4])),
        ));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != FEATURE_VERSION {
        return Err(Error::parse(ctx, format!("unsupported version {version}")));
    }
    let modality = Modality::from_code(bytes[6])
        .ok_or_else(|| Error::parse(ctx, format!("unknown modality code {}", bytes[6])))?;
    let t = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let e = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
    if t == 0 || e == 0 {
        return Err(Error::parse(ctx, format!("empty {t}x{e} sequence")));
    }
    let expected = t
        .checked_mul(e)
        .and_then(|n| n.checked_mul(4))
        .and_then(|n| n.checked_add(FEATURE_HEADER_LEN));
    if expected != Some(bytes.len()) {
        return Err(Error::parse(
            "EMOF payload",
            format!("{} bytes on disk for a {t}x{e} header", bytes.len()),
        ));
    }
    let values = bytes[FEATURE_HEADER_LEN..]
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
        .collect();
    let frames =
        Tensor2D::new(t, e, values).map_err(|err| Error::parse("EMOF payload", err.to_string()))?;
    Ok(FeatureSequence { modality, frames })
}

/// Frame-axis concatenation, speech frames first.
pub fn fuse_modalities(speech: &FeatureSequence, text: &FeatureSequence) -> Result<Tensor2D<f32>> {
    if speech.is_empty() && text.is_empty() {
        return Err(Error::Data("both modalities are empty".into()));
    }
    if speech.dim() != text.dim() {
        return Err(Error::Dimension(format!(
            "speech embedding dimension {} differs from text dimension {}",
            speech.dim(),
            text.dim()
        )));
    }
    speech.frames.vstack(&text.frames)
}
