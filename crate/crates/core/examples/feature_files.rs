//! Writes a few EMOF feature files and a manifest, then loads them back.

use std::fs;

use emopool::dataio::{
    gen_synthetic, load_manifest, read_features, write_features, Manifest, ManifestRecord,
    SyntheticSpec,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("emopool-features");
    fs::create_dir_all(&dir)?;

    let set = gen_synthetic(&SyntheticSpec {
        counts: vec![2, 2, 1, 1, 1, 1],
        dim: 8,
        ..Default::default()
    })?;
    let mut records = Vec::new();
    for s in &set.samples {
        let speech = format!("{}.speech.emof", s.id);
        let text = format!("{}.text.emof", s.id);
        fs::write(dir.join(&speech), write_features(&s.speech)?)?;
        fs::write(dir.join(&text), write_features(&s.text)?)?;
        records.push(ManifestRecord {
            id: s.id.clone(),
            speech: speech.into(),
            text: text.into(),
            label: set.classes.name(s.label).to_string(),
        });
    }
    let manifest = Manifest {
        records,
        classes: set.classes.clone(),
    };
    fs::write(dir.join("manifest.csv"), manifest.to_csv()?)?;
    print!("{}", manifest.to_csv()?);

    let first = read_features(&fs::read(dir.join("neutral_0000.speech.emof"))?)?;
    println!(
        "neutral_0000 speech: {} frames x {}",
        first.len(),
        first.dim()
    );

    let (_, samples) = load_manifest(&dir.join("manifest.csv"), &set.classes)?;
    for s in &samples {
        let fused = s.fused()?;
        println!(
            "{:<14} {:>8}  fused {}x{}",
            s.id,
            set.classes.name(s.label),
            fused.rows(),
            fused.cols()
        );
    }
    Ok(())
}
