//! Waveform I/O, normalization, cropping and augmentation.

pub mod augment;
pub mod preprocess;
pub mod wav;

pub use augment::{
    add_noise, add_reverb, augment_stream, maybe_augment, speed_perturb, synthetic_rir,
    AugmentChain, Augmentation,
};
pub use preprocess::{
    compute_norm_stats, crop_or_pad, normalize, resample, NormStats, DEFAULT_WINDOW_SECONDS,
};
pub use wav::{read_wav, write_wav};

use crate::error::{Error, Result};

pub const DEFAULT_SAMPLE_RATE: u32 = 16_000;

/// Mono audio.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    pub samples: Vec<f32>,
    pub sample_rate: u32,
}

impl Waveform {
    pub fn new(samples: Vec<f32>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::Data("sample rate must be positive".into()));
        }
        if samples.iter().any(|x| !x.is_finite()) {
            return Err(Error::Data("non-finite audio sample".into()));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub fn duration_seconds(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }
}
