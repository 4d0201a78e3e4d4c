//! Deterministic synthetic embedding corpus.
//!
//! Each class `k` and modality owns a mean vector of norm `separation`
//! (Gram–Schmidt orthogonalized across classes while `K ≤ E`). A frame of a
//! class-`k` sample is `mean + noise·g` with `g` standard normal per element.
//! Sample `i` of class `k` draws from its own stream keyed by
//! `(seed, k, i)`, so generation order never changes content.

use crate::dataio::features::{FeatureSequence, Modality};
use crate::dataio::manifest::{ClassTable, EMOTIONS};
use crate::dataio::Sample;
use crate::error::{Error, Result};
use crate::numerics::{StreamKey, Tensor2D};

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub counts: Vec<usize>,
    pub dim: usize,
    pub speech_frames: (usize, usize),
    pub text_frames: (usize, usize),
    pub separation: f64,
    pub noise: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            counts: vec![300, 250, 150, 120, 100, 80],
            dim: 64,
            speech_frames: (8, 16),
            text_frames: (4, 8),
            separation: 5.0,
            noise: 1.0,
            seed: 0,
        }
    }
}

impl SyntheticSpec {
    pub fn classes(&self) -> usize {
        self.counts.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.counts.is_empty() || self.counts.contains(&0) {
            return Err(Error::Config(
                "every class needs at least one sample".into(),
            ));
        }
        if self.dim == 0 {
            return Err(Error::Config("embedding dimension must be positive".into()));
        }
        for (name, (lo, hi)) in [("speech", self.speech_frames), ("text", self.text_frames)] {
            if lo == 0 || lo > hi {
                return Err(Error::Config(format!("{name} frame range {lo}..={hi}")));
            }
        }
        if !(self.separation > 0.0) || !(self.noise >= 0.0) {
            return Err(Error::Config(
                "separation must be positive and noise non-negative".into(),
            ));
        }
        Ok(())
    }

    /// The six emotion names when `K ≤ 6`, otherwise `class0..`.
    pub fn class_table(&self) -> ClassTable {
        let k = self.classes();
        let names = if k <= EMOTIONS.len() {
            EMOTIONS[..k].iter().map(|s| s.to_string()).collect()
        } else {
            (0..k).map(|i| format!("class{i}")).collect()
        };
        ClassTable::new(names).expect("generated names are unique")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDataset {
    pub classes: ClassTable,
    /// Class-major order: all of class 0, then class 1, ...
    pub samples: Vec<Sample>,
}

pub fn class_means(spec: &SyntheticSpec, modality: Modality) -> Vec<Vec<f64>> {
    let mut means: Vec<Vec<f64>> = Vec::with_capacity(spec.classes());
    for k in 0..spec.classes() {
        let mut rng = StreamKey::new(spec.seed)
            .str("class-mean")
            .str(modality.name())
            .u64(k as u64)
            .rng();
        let mut v: Vec<f64> = (0..spec.dim).map(|_| rng.gaussian()).collect();
        if k < spec.dim {
            for prev in &means {
                let proj = dot(&v, prev) / dot(prev, prev);
                for (a, b) in v.iter_mut().zip(prev) {
                    *a -= proj * b;
                }
            }
        }
        let norm = dot(&v, &v).sqrt();
        means.push(v.iter().map(|x| x / norm * spec.separation).collect());
    }
    means
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn sample_id(classes: &ClassTable, class: usize, index: usize) -> String {
    format!("{}_{index:04}", classes.name(class))
}

pub fn gen_synthetic(spec: &SyntheticSpec) -> Result<SyntheticDataset> {
    spec.validate()?;
    let classes = spec.class_table();
    let speech_means = class_means(spec, Modality::Speech);
    let text_means = class_means(spec, Modality::Text);
    let mut samples = Vec::with_capacity(spec.counts.iter().sum());
    for (k, &count) in spec.counts.iter().enumerate() {
        for i in 0..count {
            samples.push(synth_sample(
                spec,
                &classes,
                k,
                i,
                &speech_means[k],
                &text_means[k],
            ));
        }
    }
    Ok(SyntheticDataset { classes, samples })
}

fn synth_sample(
    spec: &SyntheticSpec,
    classes: &ClassTable,
    class: usize,
    index: usize,
    speech_mean: &[f64],
    text_mean: &[f64],
) -> Sample {
    let mut rng = StreamKey::new(spec.seed)
        .str("sample")
        .u64(class as u64)
        .u64(index as u64)
        .rng();
    let mut frames = |(lo, hi): (usize, usize), mean: &[f64], modality| {
        let t = rng.int_inclusive(lo, hi);
        let data = (0..t)
            .flat_map(|_| {
                mean.iter()
                    .map(|&m| (m + spec.noise * rng.gaussian()) as f32)
                    .collect::<Vec<_>>()
            })
            .collect();
        FeatureSequence::new(
            modality,
            Tensor2D::new(t, spec.dim, data).expect("finite frames"),
        )
    };
    let speech = frames(spec.speech_frames, speech_mean, Modality::Speech);
    let text = frames(spec.text_frames, text_mean, Modality::Text);
    Sample {
        id: sample_id(classes, class, index),
        speech,
        text,
        label: class,
    }
}
