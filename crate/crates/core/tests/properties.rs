mod common;

use proptest::collection::vec;
use proptest::prelude::*;

use emopool::audio::{crop_or_pad, read_wav, write_wav, Waveform};
use emopool::dataio::{
    fuse_modalities, read_features, stratified_split, write_features, FeatureSequence, Modality,
    Sample,
};
use emopool::ensemble::hard_vote;
use emopool::model::{
    attn_pool_forward, compute_class_weights, Checkpoint, CheckpointMeta, HeadDims, ModelParams,
};
use emopool::numerics::{
    layer_norm_forward, softmax, AdamW, AdamWConfig, Mode, Rng, Tensor2D, LAYER_NORM_EPS,
};
use emopool::train::Metrics;

fn matrix(max_rows: usize, max_cols: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1..=max_rows, 1..=max_cols).prop_flat_map(|(r, c)| vec(vec(-10.0f64..10.0, c), r))
}

proptest! {
    #[test]
    fn softmax_is_a_distribution_and_shift_invariant(x in vec(-50.0f64..50.0, 1..12), shift in -100.0f64..100.0) {
        let p = softmax(&x);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(p.iter().all(|&v| v >= 0.0));
        let shifted: Vec<f64> = x.iter().map(|v| v + shift).collect();
        for (a, b) in p.iter().zip(softmax(&shifted)) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn layer_norm_standardizes(x in vec(-100.0f64..100.0, 2..32)) {
        let d = x.len();
        let spread = x.iter().cloned().fold(f64::MIN, f64::max) - x.iter().cloned().fold(f64::MAX, f64::min);
        prop_assume!(spread > 1e-3);
        let (y, _) = layer_norm_forward(&x, &vec![1.0; d], &vec![0.0; d], LAYER_NORM_EPS);
        let mean = y.iter().sum::<f64>() / d as f64;
        let var = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / d as f64;
        prop_assert!(mean.abs() < 1e-9);
        prop_assert!((var - 1.0).abs() < 1e-3);
    }

    #[test]
    fn pooled_vector_lies_in_the_frame_hull(rows in matrix(12, 8), seed in any::<u64>()) {
        let e = rows[0].len();
        let mut rng = Rng::new(seed);
        let u: Vec<f64> = (0..e).map(|_| rng.gaussian()).collect();
        let pooled = attn_pool_forward(&Tensor2D::from_rows(&rows).unwrap(), &u).unwrap();
        prop_assert!((pooled.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for j in 0..e {
            let lo = rows.iter().map(|r| r[j]).fold(f64::MAX, f64::min);
            let hi = rows.iter().map(|r| r[j]).fold(f64::MIN, f64::max);
            prop_assert!(pooled.vector[j] >= lo - 1e-9 && pooled.vector[j] <= hi + 1e-9);
        }
    }

    #[test]
    fn features_roundtrip_bit_exact(t in 1usize..20, e in 1usize..16, seed in any::<u64>(), text in any::<bool>()) {
        let mut rng = Rng::new(seed);
        let data: Vec<f32> = (0..t * e).map(|_| (rng.gaussian() * 1e3) as f32).collect();
        let modality = if text { Modality::Text } else { Modality::Speech };
        let seq = FeatureSequence::new(modality, Tensor2D::new(t, e, data).unwrap());
        let bytes = write_features(&seq).unwrap();
        prop_assert_eq!(bytes.len(), 16 + 4 * t * e);
        let back = read_features(&bytes).unwrap();
        prop_assert_eq!(back.modality, modality);
        prop_assert!(back.frames.data().iter().zip(seq.frames.data()).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn truncated_features_are_rejected(t in 1usize..6, e in 1usize..6, cut in 1usize..8) {
        let seq = FeatureSequence::new(Modality::Speech, Tensor2D::zeros(t, e));
        let bytes = write_features(&seq).unwrap();
        let cut = cut.min(bytes.len());
        prop_assert!(read_features(&bytes[..bytes.len() - cut]).is_err());
    }

    #[test]
    fn fusion_keeps_every_frame_in_order(ts in 0usize..6, tt in 0usize..6, e in 1usize..6) {
        prop_assume!(ts + tt > 0);
        let seq = |m, t: usize, off: f32| FeatureSequence::new(
            m,
            Tensor2D::new(t, e, (0..t * e).map(|i| i as f32 * 0.37 + off).collect()).unwrap(),
        );
        let s = seq(Modality::Speech, ts, 0.0);
        let x = seq(Modality::Text, tt, 1000.0);
        let fused = fuse_modalities(&s, &x).unwrap();
        prop_assert_eq!(fused.rows(), ts + tt);
        for r in 0..ts {
            prop_assert_eq!(fused.row(r), s.frames.row(r));
        }
        for r in 0..tt {
            prop_assert_eq!(fused.row(ts + r), x.frames.row(r));
        }
    }

    #[test]
    fn checkpoint_roundtrip(embed in 1usize..8, width in 1usize..8, layers in 0usize..3, classes in 2usize..7, seed in any::<u64>(), f1 in 0.0f64..=1.0, epoch in 0u32..500) {
        let dims = HeadDims { embed, width, layers, classes };
        let ck = Checkpoint {
            params: ModelParams::init(dims, &mut Rng::new(seed)),
            meta: CheckpointMeta { config_hash: seed.rotate_left(7), best_val_f1: f1, epoch },
        };
        let back = Checkpoint::from_bytes(&ck.to_bytes()).unwrap();
        prop_assert_eq!(back.params.dims(), dims);
        prop_assert_eq!(back, ck);
    }

    #[test]
    fn wav_roundtrip_within_one_lsb(samples in vec(-1.0f32..1.0, 1..2000), rate in 8000u32..48000) {
        let w = Waveform::new(samples, rate).unwrap();
        let back = read_wav(&write_wav(&w)).unwrap();
        prop_assert_eq!(back.sample_rate, rate);
        prop_assert_eq!(back.samples.len(), w.samples.len());
        for (a, b) in w.samples.iter().zip(&back.samples) {
            prop_assert!((a - b).abs() <= 1.0 / 32768.0);
        }
    }

    #[test]
    fn crop_or_pad_hits_the_window(len in 1usize..40_000, secs in 0.01f64..2.0, seed in any::<u64>()) {
        let w = Waveform::new((0..len).map(|i| i as f32).collect(), 16_000).unwrap();
        let out = crop_or_pad(&w, secs, &mut Rng::new(seed), Mode::Train).unwrap();
        let window = (secs * 16_000.0).round() as usize;
        prop_assert_eq!(out.samples.len(), window);
        let eval = crop_or_pad(&w, secs, &mut Rng::new(seed), Mode::Eval).unwrap();
        prop_assert_eq!(eval, w);
    }

    #[test]
    fn vote_is_a_member_prediction_and_order_free(
        preds in vec(0usize..6, 1..4).prop_map(|v| v.into_iter().cycle().take(5).collect::<Vec<_>>()),
        seed in any::<u64>(),
    ) {
        let m = [3, 5][(seed % 2) as usize];
        let preds = &preds[..m];
        let f1s: Vec<f64> = (0..m).map(|i| 0.5 + 0.01 * ((seed as usize + 3 * i) % 17) as f64 + i as f64 * 1e-4).collect();
        let out = hard_vote(preds, &f1s).unwrap();
        prop_assert!(preds.contains(&out));
        let rev: Vec<usize> = preds.iter().rev().copied().collect();
        let rev_f1: Vec<f64> = f1s.iter().rev().copied().collect();
        prop_assert_eq!(hard_vote(&rev, &rev_f1).unwrap(), out);
    }

    #[test]
    fn metric_ranges(pairs in vec((0usize..6, 0usize..6), 1..300)) {
        let (labels, preds): (Vec<usize>, Vec<usize>) = pairs.into_iter().unzip();
        let m = Metrics::from_predictions(&labels, &preds, 6).unwrap();
        prop_assert!((0.0..=1.0).contains(&m.macro_f1));
        prop_assert!((0.0..=1.0).contains(&m.accuracy));
        let perfect = Metrics::from_predictions(&labels, &labels, 6).unwrap();
        prop_assert_eq!(perfect.accuracy, 1.0);
        prop_assert!(perfect.per_class.iter().all(|s| s.f1 == 0.0 || s.f1 == 1.0));
    }

    #[test]
    fn balanced_weights_equalize_class_mass(counts in vec(1usize..500, 2..8)) {
        let w = compute_class_weights(&counts).unwrap();
        let n: usize = counts.iter().sum();
        let k = counts.len() as f64;
        for (c, &wk) in counts.iter().zip(w.as_slice()) {
            prop_assert!((*c as f64 * wk - n as f64 / k).abs() < 1e-9);
        }
    }

    #[test]
    fn split_partitions_each_class(counts in vec(0usize..30, 1..6), fraction in 0.05f64..0.5, seed in any::<u64>()) {
        let samples: Vec<Sample> = counts
            .iter()
            .enumerate()
            .flat_map(|(k, &n)| (0..n).map(move |i| Sample {
                id: format!("{k}_{i}"),
                speech: FeatureSequence::new(Modality::Speech, Tensor2D::zeros(1, 2)),
                text: FeatureSequence::new(Modality::Text, Tensor2D::zeros(1, 2)),
                label: k,
            }))
            .collect();
        let (train, val) = stratified_split(&samples, counts.len(), fraction, seed);
        prop_assert_eq!(train.len() + val.len(), samples.len());
        for (k, &n) in counts.iter().enumerate() {
            let v = val.iter().filter(|s| s.label == k).count();
            let t = train.iter().filter(|s| s.label == k).count();
            prop_assert_eq!(v + t, n);
            if n >= 2 {
                prop_assert!(v >= 1 && t >= 1);
            }
        }
        let mut ids: Vec<&str> = train.iter().chain(&val).map(|s| s.id.as_str()).collect();
        ids.sort();
        ids.dedup();
        prop_assert_eq!(ids.len(), samples.len());
    }

    #[test]
    fn adamw_with_zero_lr_is_identity(params in vec(-5.0f64..5.0, 1..20), seed in any::<u64>()) {
        let mut rng = Rng::new(seed);
        let grads: Vec<f64> = params.iter().map(|_| rng.gaussian()).collect();
        let mut p = params.clone();
        let mut opt = AdamW::new(AdamWConfig::new(0.0, 0.1));
        opt.step(&mut [&mut p[..]], &[&grads[..]]).unwrap();
        prop_assert_eq!(p, params);
    }
}

#[test]
fn gradient_check_catches_a_wrong_derivative() {
    use emopool::numerics::{gelu, gelu_grad, grad_check};
    let err = grad_check(|p| (gelu(p[0]), vec![1.01 * gelu_grad(p[0])]), &[0.7], 1e-5);
    assert!(err > 1e-3, "{err}");
}
