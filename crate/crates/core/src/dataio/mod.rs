//! Feature files, manifests, modality fusion and the synthetic corpus.

pub mod features;
pub mod manifest;
pub mod synth;

pub use features::{
    feature_file_len, fuse_modalities, read_features, write_features, FeatureSequence, Modality,
};
pub use manifest::{load_manifest, ClassTable, Manifest, ManifestRecord, EMOTIONS};
pub use synth::{gen_synthetic, SyntheticDataset, SyntheticSpec};

use crate::error::Result;
use crate::numerics::{StreamKey, Tensor2D};

/// One labelled utterance.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub id: String,
    pub speech: FeatureSequence,
    pub text: FeatureSequence,
    pub label: usize,
}

impl Sample {
    pub fn fused(&self) -> Result<Tensor2D<f32>> {
        fuse_modalities(&self.speech, &self.text)
    }
}

pub fn label_counts(samples: &[Sample], classes: usize) -> Vec<usize> {
    let mut counts = vec![0; classes];
    for s in samples {
        counts[s.label] += 1;
    }
    counts
}

/// Stratified train/validation split. Each class contributes
/// `round(n·fraction)` samples to validation, keeping at least one sample on
/// each side when the class has two or more. Both halves keep input order.
pub fn stratified_split(
    samples: &[Sample],
    classes: usize,
    fraction: f64,
    seed: u64,
) -> (Vec<Sample>, Vec<Sample>) {
    let mut in_val = vec![false; samples.len()];
    for k in 0..classes {
        let mut members: Vec<usize> = (0..samples.len())
            .filter(|&i| samples[i].label == k)
            .collect();
        let n = members.len();
        let mut take = (n as f64 * fraction).round() as usize;
        if n >= 2 && fraction > 0.0 {
            take = take.clamp(1, n - 1);
        }
        StreamKey::new(seed)
            .str("split")
            .u64(k as u64)
            .rng()
            .shuffle(&mut members);
        for &i in &members[..take.min(n)] {
            in_val[i] = true;
        }
    }
    let mut train = Vec::new();
    let mut val = Vec::new();
    for (s, v) in samples.iter().zip(in_val) {
        if v {
            val.push(s.clone());
        } else {
            train.push(s.clone());
        }
    }
    (train, val)
}
