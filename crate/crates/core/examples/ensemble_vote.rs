//! Trains three heads with different seeds on a hard synthetic task and
//! combines them by hard voting.

use emopool::dataio::{gen_synthetic, stratified_split, SyntheticSpec};
use emopool::ensemble::{ensemble_evaluate, hard_vote, Ensemble, EnsembleMember};
use emopool::train::{train, TrainConfig};

fn main() -> emopool::Result<()> {
    // Majority wins; with three different votes the best validation model decides.
    let f1s = [0.80, 0.90, 0.70];
    println!("[0, 0, 1] -> {}", hard_vote(&[0, 0, 1], &f1s)?);
    println!("[0, 1, 2] -> {}", hard_vote(&[0, 1, 2], &f1s)?);

    let spec = SyntheticSpec {
        counts: vec![200; 6],
        dim: 32,
        separation: 1.0,
        noise: 1.5,
        seed: 5,
        ..Default::default()
    };
    let set = gen_synthetic(&spec)?;
    let (train_set, rest) = stratified_split(&set.samples, 6, 0.3, 0);
    let (val, test) = stratified_split(&rest, 6, 0.5, 1);

    let mut members = Vec::new();
    for seed in 0..3 {
        let config = TrainConfig {
            lr: 1e-3,
            max_epochs: 15,
            hidden_width: 64,
            seed,
            ..Default::default()
        };
        let outcome = train(&train_set, &val, &set.classes, &config)?;
        members.push(EnsembleMember::new(outcome.best));
    }
    let ensemble = Ensemble::new(members)?;
    let report = ensemble_evaluate(&ensemble, &test, 1)?;
    for (i, (m, metrics)) in ensemble.members().iter().zip(&report.members).enumerate() {
        println!(
            "model {i}: val F1 {:.4}  test macro F1 {:.4}",
            m.val_f1(),
            metrics.macro_f1
        );
    }
    println!("hard voting: test macro F1 {:.4}", report.ensemble.macro_f1);
    Ok(())
}
