use crate::audio::Waveform;
use crate::error::{Error, Result};
use crate::numerics::{Mode, Rng};

pub const DEFAULT_WINDOW_SECONDS: f64 = 5.5;

/// Dataset-global mean and standard deviation of sample values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormStats {
    pub mean: f64,
    pub std: f64,
}

impl NormStats {
    /// Statistics reported for the original training corpus. Their units are
    /// unknown, so they are only meaningful as configuration defaults.
    pub const REFERENCE: NormStats = NormStats {
        mean: -33.62,
        std: 56.15,
    };

    pub fn new(mean: f64, std: f64) -> Result<Self> {
        if !(std > 0.0 && std.is_finite() && mean.is_finite()) {
            return Err(Error::Config(format!(
                "invalid normalization stats ({mean}, {std})"
            )));
        }
        Ok(Self { mean, std })
    }
}

/// Mean and population std over the concatenation of all training samples.
pub fn compute_norm_stats(corpus: &[Waveform]) -> Result<NormStats> {
    let count: usize = corpus.iter().map(|w| w.samples.len()).sum();
    if count == 0 {
        return Err(Error::Data("no samples to compute statistics from".into()));
    }
    let values = || {
        corpus
            .iter()
            .flat_map(|w| w.samples.iter().map(|&x| x as f64))
    };
    let mean = values().sum::<f64>() / count as f64;
    let var = values().map(|x| (x - mean) * (x - mean)).sum::<f64>() / count as f64;
    let std = var.sqrt();
    if std == 0.0 {
        return Err(Error::Data("corpus is constant (std = 0)".into()));
    }
    Ok(NormStats { mean, std })
}

pub fn normalize(w: &Waveform, stats: NormStats) -> Waveform {
    let samples = w
        .samples
        .iter()
        .map(|&x| ((x as f64 - stats.mean) / stats.std) as f32)
        .collect();
    Waveform {
        samples,
        sample_rate: w.sample_rate,
    }
}

pub fn window_len(window_seconds: f64, sample_rate: u32) -> usize {
    (window_seconds * sample_rate as f64).round() as usize
}

/// Fixed-window training crop. Longer inputs are cropped at a uniformly
/// random offset, shorter ones are tiled end to end. Inference is identity.
pub fn crop_or_pad(
    w: &Waveform,
    window_seconds: f64,
    rng: &mut Rng,
    mode: Mode,
) -> Result<Waveform> {
    if w.samples.is_empty() {
        return Err(Error::Data("cannot crop an empty waveform".into()));
    }
    if !(window_seconds > 0.0) {
        return Err(Error::Config(format!("window of {window_seconds} s")));
    }
    if mode == Mode::Eval {
        return Ok(w.clone());
    }
    let window = window_len(window_seconds, w.sample_rate);
    let len = w.samples.len();
    let samples = if len > window {
        let start = rng.int_inclusive(0, len - window);
        w.samples[start..start + window].to_vec()
    } else {
        w.samples.iter().copied().cycle().take(window).collect()
    };
    Ok(Waveform {
        samples,
        sample_rate: w.sample_rate,
    })
}

/// Linear-interpolation resampling to `target_rate`.
pub fn resample(w: &Waveform, target_rate: u32) -> Result<Waveform> {
    if target_rate == 0 {
        return Err(Error::Config("target sample rate 0".into()));
    }
    if target_rate == w.sample_rate {
        return Ok(w.clone());
    }
    let step = w.sample_rate as f64 / target_rate as f64;
    let out_len = ((w.samples.len() as f64 / step).round() as usize).max(1);
    Ok(Waveform {
        samples: interpolate(&w.samples, step, out_len),
        sample_rate: target_rate,
    })
}

/// Reads `samples` at positions `i·step` for `i < out_len`, linearly
/// interpolating and holding the last sample past the end.
pub(crate) fn interpolate(samples: &[f32], step: f64, out_len: usize) -> Vec<f32> {
    let last = samples.len() - 1;
    (0..out_len)
        .map(|i| {
            let pos = i as f64 * step;
            let i0 = pos.floor() as usize;
            if i0 >= last {
                return samples[last];
            }
            let frac = pos - i0 as f64;
            let a = samples[i0] as f64;
            let b = samples[i0 + 1] as f64;
            (a + (b - a) * frac) as f32
        })
        .collect()
}
