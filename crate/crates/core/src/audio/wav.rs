//! RIFF/WAVE PCM16 reader and writer.
//!
//! Only `fmt ` and `data` are interpreted; any other chunk is skipped.
//! Multichannel audio is averaged down to mono.

use crate::audio::Waveform;
use crate::error::{Error, Result};

const PCM_FORMAT: u16 = 1;
const PCM_SCALE: f32 = 32768.0;

struct Fmt {
    channels: u16,
    sample_rate: u32,
}

pub fn read_wav(bytes: &[u8]) -> Result<Waveform> {
    if bytes.len() < 12 {
        return Err(Error::parse("RIFF header", "file shorter than 12 bytes"));
    }
    if &bytes[0..4] != b"RIFF" {
        return Err(Error::parse(
            "RIFF header",
            format!("bad magic {:?}", String::from_utf8_lossy(&bytes[0..4])),
        ));
    }
    if &bytes[8..12] != b"WAVE" {
        return Err(Error::parse("RIFF header", "form type is not WAVE"));
    }

    let mut fmt: Option<Fmt> = None;
    let mut data: Option<&[u8]> = None;
    let mut pos = 12;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32::from_le_bytes(bytes[pos + 4..pos + 8].try_into().unwrap()) as usize;
        let name = String::from_utf8_lossy(id).into_owned();
        let body_start = pos + 8;
        let body_end = body_start
            .checked_add(size)
            .filter(|&end| end <= bytes.len())
            .ok_or_else(|| {
                Error::parse(
                    format!("'{name}' chunk"),
                    format!(
                        "declares {size} bytes but only {} remain",
                        bytes.len() - body_start
                    ),
                )
            })?;
        let body = &bytes[body_start..body_end];
        match id {
            b"fmt " => fmt = Some(parse_fmt(body)?),
            b"data" => data = Some(body),
            _ => {}
        }
        // chunks are word aligned
        pos = body_end + (size & 1);
    }

    let fmt = fmt.ok_or_else(|| Error::parse("'fmt ' chunk", "missing"))?;
    let data = data.ok_or_else(|| Error::parse("'data' chunk", "missing"))?;
    let channels = fmt.channels as usize;
    let frame_bytes = 2 * channels;
    if data.len() % frame_bytes != 0 {
        return Err(Error::parse(
            "'data' chunk",
            format!(
                "{} bytes is not a whole number of {channels}-channel frames",
                data.len()
            ),
        ));
    }
    if data.is_empty() {
        return Err(Error::parse("'data' chunk", "no samples"));
    }
    let samples = data
        .chunks_exact(frame_bytes)
        .map(|frame| {
            let sum: f32 = frame
                .chunks_exact(2)
                .map(|b| i16::from_le_bytes([b[0], b[1]]) as f32 / PCM_SCALE)
                .sum();
            sum / channels as f32
        })
        .collect();
    Waveform::new(samples, fmt.sample_rate)
}

fn parse_fmt(body: &[u8]) -> Result<Fmt> {
    if body.len() < 16 {
        return Err(Error::parse(
            "'fmt ' chunk",
            format!("{} bytes, need 16", body.len()),
        ));
    }
    let u16_at = |i: usize| u16::from_le_bytes([body[i], body[i + 1]]);
    let format = u16_at(0);
    let channels = u16_at(2);
    let sample_rate = u32::from_le_bytes(body[4..8].try_into().unwrap());
    let bits = u16_at(14);
    if format != PCM_FORMAT {
        return Err(Error::parse(
            "'fmt ' chunk",
            format!("unsupported codec tag {format:#06x}, only PCM is read"),
        ));
    }
    if bits != 16 {
        return Err(Error::parse(
            "'fmt ' chunk",
            format!("unsupported bit depth {bits}, only 16-bit PCM is read"),
        ));
    }
    if channels == 0 || sample_rate == 0 {
        return Err(Error::parse("'fmt ' chunk", "zero channels or sample rate"));
    }
    Ok(Fmt {
        channels,
        sample_rate,
    })
}

/// Quantizes a float sample to PCM16, clamping out-of-range values.
pub fn to_pcm16(x: f32) -> i16 {
    (x * PCM_SCALE)
        .round()
        .clamp(i16::MIN as f32, i16::MAX as f32) as i16
}

/// Serializes as a 44-byte-header mono PCM16 file.
pub fn write_wav(w: &Waveform) -> Vec<u8> {
    let data_len = (w.samples.len() * 2) as u32;
    let mut out = Vec::with_capacity(44 + data_len as usize);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&PCM_FORMAT.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&w.sample_rate.to_le_bytes());
    out.extend_from_slice(&(w.sample_rate * 2).to_le_bytes());
    out.extend_from_slice(&2u16.to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());
    for &s in &w.samples {
        out.extend_from_slice(&to_pcm16(s).to_le_bytes());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_sample_file(value: i16) -> Vec<u8> {
        write_wav(&Waveform::new(vec![value as f32 / 32768.0], 16_000).unwrap())
    }

    #[test]
    fn minimal_file_scales_by_32768() {
        let bytes = one_sample_file(16384);
        assert_eq!(bytes.len(), 46);
        let w = read_wav(&bytes).unwrap();
        assert_eq!(w.samples, vec![0.5]);
        assert_eq!(w.sample_rate, 16_000);
    }

    #[test]
    fn rifx_is_rejected() {
        let mut bytes = one_sample_file(1);
        bytes[3] = b'X';
        let err = read_wav(&bytes).unwrap_err();
        assert!(err.to_string().contains("RIFF header"), "{err}");
    }

    #[test]
    fn truncated_data_names_chunk() {
        let mut bytes = one_sample_file(1);
        bytes.pop();
        let err = read_wav(&bytes).unwrap_err();
        assert!(err.to_string().contains("'data' chunk"), "{err}");
    }

    #[test]
    fn non_pcm_codec_rejected() {
        let mut bytes = one_sample_file(1);
        bytes[20] = 3; // IEEE float tag
        let err = read_wav(&bytes).unwrap_err();
        assert!(err.to_string().contains("codec"), "{err}");
    }

    #[test]
    fn unknown_chunks_are_skipped_and_stereo_is_averaged() {
        let mut bytes = Vec::new();
        bytes.extend_from_slice(b"RIFF\0\0\0\0WAVE");
        bytes.extend_from_slice(b"LIST");
        bytes.extend_from_slice(&3u32.to_le_bytes());
        bytes.extend_from_slice(b"abc\0"); // odd size plus pad byte
        bytes.extend_from_slice(b"fmt ");
        bytes.extend_from_slice(&16u32.to_le_bytes());
        for v in [1u16, 2] {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        bytes.extend_from_slice(&8000u32.to_le_bytes());
        bytes.extend_from_slice(&32000u32.to_le_bytes());
        bytes.extend_from_slice(&4u16.to_le_bytes());
        bytes.extend_from_slice(&16u16.to_le_bytes());
        bytes.extend_from_slice(b"data");
        bytes.extend_from_slice(&8u32.to_le_bytes());
        for v in [16384i16, 0, -16384, -16384] {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        let w = read_wav(&bytes).unwrap();
        assert_eq!(w.sample_rate, 8000);
        assert_eq!(w.samples, vec![0.25, -0.5]);
    }

    #[test]
    fn clamps_on_write() {
        assert_eq!(to_pcm16(2.0), i16::MAX);
        assert_eq!(to_pcm16(-2.0), i16::MIN);
        assert_eq!(to_pcm16(-1.0), i16::MIN);
    }
}
