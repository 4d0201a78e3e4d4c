//! Streaming waveform augmentation: speed perturbation, synthetic
//! reverberation and additive background noise.

use std::fmt;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::audio::preprocess::interpolate;
use crate::audio::Waveform;
use crate::error::{Error, Result};
use crate::numerics::{Mode, Rng, StreamKey};

/// Resamples by `factor` with linear interpolation. `factor > 1` shortens the
/// signal and raises pitch.
pub fn speed_perturb(w: &Waveform, factor: f64) -> Result<Waveform> {
    if !(factor > 0.0 && factor.is_finite()) {
        return Err(Error::Config(format!("speed factor {factor}")));
    }
    if factor == 1.0 || w.samples.is_empty() {
        return Ok(w.clone());
    }
    let out_len = ((w.samples.len() as f64 / factor).round() as usize).max(1);
    Ok(Waveform {
        samples: interpolate(&w.samples, factor, out_len),
        sample_rate: w.sample_rate,
    })
}

/// Exponentially decaying Gaussian noise with a unit first tap:
/// `h[n] = g[n]·10^(−3n/(t60·sr))`, `round(t60·sr)` taps long.
pub fn synthetic_rir(t60: f64, sample_rate: u32, rng: &mut Rng) -> Vec<f32> {
    let decay_len = t60 * sample_rate as f64;
    let taps = (decay_len.round() as usize).max(1);
    let mut h = Vec::with_capacity(taps);
    h.push(1.0);
    for n in 1..taps {
        let envelope = 10f64.powf(-3.0 * n as f64 / decay_len);
        h.push((rng.gaussian() * envelope) as f32);
    }
    h
}

// Above this many multiply-adds the convolution goes through the FFT.
const DIRECT_CONV_LIMIT: usize = 1 << 20;

/// Linear convolution with `rir`, truncated to the input length.
pub fn add_reverb(w: &Waveform, rir: &[f32]) -> Result<Waveform> {
    if rir.is_empty() {
        return Err(Error::Config("empty impulse response".into()));
    }
    let n = w.samples.len();
    let rir = &rir[..rir.len().min(n)];
    let samples = if n * rir.len() <= DIRECT_CONV_LIMIT {
        direct_convolution(&w.samples, rir)
    } else {
        fft_convolution(&w.samples, rir)
    };
    Ok(Waveform {
        samples,
        sample_rate: w.sample_rate,
    })
}

fn direct_convolution(x: &[f32], h: &[f32]) -> Vec<f32> {
    (0..x.len())
        .map(|i| {
            let taps = h.len().min(i + 1);
            (0..taps)
                .map(|k| h[k] as f64 * x[i - k] as f64)
                .sum::<f64>() as f32
        })
        .collect()
}

fn fft_convolution(x: &[f32], h: &[f32]) -> Vec<f32> {
    let size = (x.len() + h.len() - 1).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(size);
    let inverse = planner.plan_fft_inverse(size);
    let padded = |v: &[f32]| {
        let mut buf: Vec<Complex<f64>> = v.iter().map(|&s| Complex::new(s as f64, 0.0)).collect();
        buf.resize(size, Complex::new(0.0, 0.0));
        buf
    };
    let mut a = padded(x);
    let mut b = padded(h);
    forward.process(&mut a);
    forward.process(&mut b);
    for (p, q) in a.iter_mut().zip(&b) {
        *p *= q;
    }
    inverse.process(&mut a);
    let scale = 1.0 / size as f64;
    a[..x.len()].iter().map(|c| (c.re * scale) as f32).collect()
}

fn mean_square(x: &[f32]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.iter().map(|&v| v as f64 * v as f64).sum::<f64>() / x.len() as f64
}

/// Noise gain that puts `noise` at `snr_db` below a signal of power `p_signal`.
pub fn noise_gain(p_signal: f64, p_noise: f64, snr_db: f64) -> f64 {
    (p_signal / (p_noise * 10f64.powf(snr_db / 10.0))).sqrt()
}

/// Adds `noise` (looped or cropped to the signal length) at the requested SNR.
/// Silent signals, and silent noise, leave the input unchanged.
pub fn add_noise(w: &Waveform, noise: &Waveform, snr_db: f64) -> Result<Waveform> {
    if noise.samples.is_empty() {
        return Err(Error::Config("empty noise waveform".into()));
    }
    let fitted: Vec<f32> = noise
        .samples
        .iter()
        .copied()
        .cycle()
        .take(w.samples.len())
        .collect();
    let p_signal = mean_square(&w.samples);
    let p_noise = mean_square(&fitted);
    if p_signal == 0.0 || p_noise == 0.0 {
        return Ok(w.clone());
    }
    let alpha = noise_gain(p_signal, p_noise, snr_db);
    let samples = w
        .samples
        .iter()
        .zip(&fitted)
        .map(|(&s, &n)| (s as f64 + alpha * n as f64) as f32)
        .collect();
    Ok(Waveform {
        samples,
        sample_rate: w.sample_rate,
    })
}

/// Probabilistic augmentation settings.
#[derive(Debug, Clone)]
pub struct AugmentChain {
    pub probability: f64,
    pub speed_factors: Vec<f64>,
    /// T60 drawn uniformly from this range, in seconds.
    pub t60_range: (f64, f64),
    /// SNR drawn uniformly from this range, in dB.
    pub snr_range_db: (f64, f64),
    /// Background noise recordings; white Gaussian noise when empty.
    pub noise_bank: Vec<Waveform>,
}

impl Default for AugmentChain {
    fn default() -> Self {
        Self {
            probability: 0.3,
            speed_factors: vec![0.9, 1.0, 1.1],
            t60_range: (0.1, 0.5),
            snr_range_db: (5.0, 20.0),
            noise_bank: Vec::new(),
        }
    }
}

impl AugmentChain {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.probability) {
            return Err(Error::Config(format!(
                "augmentation probability {} outside [0, 1]",
                self.probability
            )));
        }
        if self.speed_factors.is_empty() || self.speed_factors.iter().any(|&f| !(f > 0.0)) {
            return Err(Error::Config(
                "speed factors must be a non-empty set of positive values".into(),
            ));
        }
        let (lo, hi) = self.t60_range;
        if !(lo > 0.0 && lo <= hi) {
            return Err(Error::Config(format!("T60 range ({lo}, {hi})")));
        }
        let (lo, hi) = self.snr_range_db;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::Config(format!("SNR range ({lo}, {hi})")));
        }
        if self.noise_bank.iter().any(|n| n.samples.is_empty()) {
            return Err(Error::Config("empty recording in noise bank".into()));
        }
        Ok(())
    }
}

/// The transform `maybe_augment` applied, with its drawn parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum Augmentation {
    Speed {
        factor: f64,
    },
    Reverb {
        t60: f64,
    },
    /// `source` indexes the noise bank; `None` is the white-noise fallback.
    Noise {
        snr_db: f64,
        source: Option<usize>,
    },
}

impl Augmentation {
    pub fn name(&self) -> &'static str {
        match self {
            Augmentation::Speed { .. } => "speed",
            Augmentation::Reverb { .. } => "reverb",
            Augmentation::Noise { .. } => "noise",
        }
    }
}

impl fmt::Display for Augmentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Augmentation::Speed { factor } => write!(f, "factor={factor}"),
            Augmentation::Reverb { t60 } => write!(f, "t60={t60:.6}"),
            Augmentation::Noise { snr_db, source } => match source {
                Some(i) => write!(f, "snr_db={snr_db:.6};noise={i}"),
                None => write!(f, "snr_db={snr_db:.6};noise=white"),
            },
        }
    }
}

/// The random stream for one sample in one epoch.
pub fn augment_stream(seed: u64, epoch: u64, sample_id: &str) -> Rng {
    StreamKey::new(seed)
        .str("augment")
        .u64(epoch)
        .str(sample_id)
        .rng()
}

/// With probability `chain.probability`, replaces the input by one uniformly
/// chosen augmentation of it. Eval mode returns the input unchanged.
pub fn maybe_augment(
    w: &Waveform,
    chain: &AugmentChain,
    rng: &mut Rng,
    mode: Mode,
) -> Result<(Waveform, Option<Augmentation>)> {
    chain.validate()?;
    if mode == Mode::Eval || !rng.bernoulli(chain.probability) || w.samples.is_empty() {
        return Ok((w.clone(), None));
    }
    match rng.index(3) {
        0 => {
            let factor = chain.speed_factors[rng.index(chain.speed_factors.len())];
            Ok((
                speed_perturb(w, factor)?,
                Some(Augmentation::Speed { factor }),
            ))
        }
        1 => {
            let t60 = rng.uniform_range(chain.t60_range.0, chain.t60_range.1);
            let rir = synthetic_rir(t60, w.sample_rate, rng);
            let wet = add_reverb(w, &rir)?;
            Ok((match_level(&wet, w), Some(Augmentation::Reverb { t60 })))
        }
        _ => {
            let snr_db = rng.uniform_range(chain.snr_range_db.0, chain.snr_range_db.1);
            let (noise, source) = if chain.noise_bank.is_empty() {
                let white = (0..w.samples.len())
                    .map(|_| rng.gaussian() as f32)
                    .collect();
                (Waveform::new(white, w.sample_rate)?, None)
            } else {
                let i = rng.index(chain.noise_bank.len());
                (chain.noise_bank[i].clone(), Some(i))
            };
            Ok((
                add_noise(w, &noise, snr_db)?,
                Some(Augmentation::Noise { snr_db, source }),
            ))
        }
    }
}

/// Rescales `wet` to the RMS of `dry`.
fn match_level(wet: &Waveform, dry: &Waveform) -> Waveform {
    let p_wet = mean_square(&wet.samples);
    if p_wet == 0.0 {
        return wet.clone();
    }
    let gain = (mean_square(&dry.samples) / p_wet).sqrt();
    Waveform {
        samples: wet
            .samples
            .iter()
            .map(|&s| (s as f64 * gain) as f32)
            .collect(),
        sample_rate: wet.sample_rate,
    }
}
