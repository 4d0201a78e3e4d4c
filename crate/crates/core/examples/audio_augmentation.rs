//! Runs a tone through each augmentation and writes the results as WAV files.
//!
//! `cargo run --example audio_augmentation -- [out_dir]`

use std::path::PathBuf;

use emopool::audio::{
    add_noise, add_reverb, crop_or_pad, maybe_augment, speed_perturb, synthetic_rir, write_wav,
    AugmentChain, Waveform,
};
use emopool::numerics::{Mode, Rng};

fn main() -> emopool::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("emopool-audio"));
    std::fs::create_dir_all(&out).map_err(|e| emopool::Error::Io {
        path: out.clone(),
        source: e,
    })?;

    let sr = 16_000;
    let tone: Vec<f32> = (0..2 * sr)
        .map(|i| 0.5 * (2.0 * std::f32::consts::PI * 440.0 * i as f32 / sr as f32).sin())
        .collect();
    let dry = Waveform::new(tone, sr as u32)?;
    let mut rng = Rng::new(1);

    let fast = speed_perturb(&dry, 1.1)?;
    let wet = add_reverb(&dry, &synthetic_rir(0.4, dry.sample_rate, &mut rng))?;
    let hiss = Waveform::new(
        (0..4000).map(|_| rng.gaussian() as f32).collect(),
        dry.sample_rate,
    )?;
    let noisy = add_noise(&dry, &hiss, 10.0)?;
    let window = crop_or_pad(&dry, 5.5, &mut rng, Mode::Train)?;

    for (name, w) in [
        ("dry", &dry),
        ("speed_1.1", &fast),
        ("reverb", &wet),
        ("noise_10db", &noisy),
        ("padded", &window),
    ] {
        let path = out.join(format!("{name}.wav"));
        std::fs::write(&path, write_wav(w)).map_err(|e| emopool::Error::Io {
            path: path.clone(),
            source: e,
        })?;
        println!(
            "{:<12} {:>7} samples  {:.2} s",
            name,
            w.samples.len(),
            w.duration_seconds()
        );
    }

    // Streaming augmentation: each epoch redraws per sample.
    let chain = AugmentChain::default();
    for epoch in 0..5 {
        let mut stream = emopool::audio::augment_stream(7, epoch, "clip_0001");
        let (_, applied) = maybe_augment(&dry, &chain, &mut stream, Mode::Train)?;
        match applied {
            Some(a) => println!("epoch {epoch}: {} ({a})", a.name()),
            None => println!("epoch {epoch}: original"),
        }
    }
    println!("wrote {}", out.display());
    Ok(())
}
