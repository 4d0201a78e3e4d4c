use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use emopool::audio::{add_reverb, speed_perturb, synthetic_rir, Waveform};
use emopool::numerics::Rng;

fn peak_hz(w: &Waveform) -> f64 {
    let mut buf: Vec<Complex<f64>> = w
        .samples
        .iter()
        .map(|&s| Complex::new(s as f64, 0.0))
        .collect();
    let n = buf.len();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let bin = (1..n / 2)
        .max_by(|&a, &b| buf[a].norm().total_cmp(&buf[b].norm()))
        .unwrap();
    bin as f64 * w.sample_rate as f64 / n as f64
}

#[test]
fn faster_playback_raises_a_440_hz_tone_to_484() {
    let sr = 16_000.0;
    let tone: Vec<f32> = (0..32_000)
        .map(|i| (2.0 * std::f64::consts::PI * 440.0 * i as f64 / sr).sin() as f32)
        .collect();
    let w = Waveform::new(tone, 16_000).unwrap();
    let out = speed_perturb(&w, 1.1).unwrap();
    let resolution = sr / out.samples.len() as f64;
    assert!(
        (peak_hz(&out) - 484.0).abs() <= resolution,
        "{}",
        peak_hz(&out)
    );
    assert!((peak_hz(&speed_perturb(&w, 0.9).unwrap()) - 396.0).abs() <= resolution);
}

#[test]
fn impulse_through_reverb_returns_the_truncated_rir() {
    let rir = synthetic_rir(0.3, 16_000, &mut Rng::new(5));
    assert_eq!(rir.len(), 4800);
    assert_eq!(rir[0], 1.0);
    let mut impulse = vec![0.0f32; 3000];
    impulse[0] = 1.0;
    let out = add_reverb(&Waveform::new(impulse, 16_000).unwrap(), &rir).unwrap();
    assert_eq!(out.samples.len(), 3000);
    for (a, b) in out.samples.iter().zip(&rir) {
        assert!((a - b).abs() < 1e-5);
    }
}

#[test]
fn rir_tail_decays_by_sixty_db_per_t60() {
    let t60 = 0.4;
    let rir = synthetic_rir(t60, 16_000, &mut Rng::new(8));
    let energy = |r: &[f32]| r.iter().map(|&x| (x as f64).powi(2)).sum::<f64>() / r.len() as f64;
    // Energy in the first and last tenth, away from the unit tap.
    let n = rir.len();
    let early = energy(&rir[1..n / 10]);
    let late = energy(&rir[9 * n / 10..]);
    let db = 10.0 * (early / late).log10();
    // The two windows have the same shape 0.9·T60 apart: 54 dB, give or take the noise.
    assert!((db - 54.0).abs() < 3.0, "{db}");
}
