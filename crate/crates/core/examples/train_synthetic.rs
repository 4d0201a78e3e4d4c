//! Trains the head on an imbalanced six-class synthetic corpus and prints the
//! history and final validation report.

use emopool::dataio::{gen_synthetic, label_counts, stratified_split, SyntheticSpec};
use emopool::train::report::metrics_table;
use emopool::train::{train_with_observer, TrainConfig};

fn main() -> emopool::Result<()> {
    let spec = SyntheticSpec {
        separation: 2.0,
        noise: 1.5,
        ..Default::default()
    };
    let set = gen_synthetic(&spec)?;
    let (train_set, val) = stratified_split(&set.samples, set.classes.len(), 0.15, 0);
    println!(
        "train counts {:?}",
        label_counts(&train_set, set.classes.len())
    );

    let config = TrainConfig {
        lr: 1e-3,
        max_epochs: 30,
        ..Default::default()
    };
    let outcome = train_with_observer(&train_set, &val, &set.classes, &config, |r| {
        println!(
            "epoch {:>2}  loss {:.4}  val F1 {:.4}  lr {:e}",
            r.epoch, r.train_loss, r.val_macro_f1, r.lr
        );
    })?;
    println!("best epoch {}", outcome.best.meta.epoch);
    print!("{}", metrics_table(&outcome.best_metrics, &set.classes));
    Ok(())
}
