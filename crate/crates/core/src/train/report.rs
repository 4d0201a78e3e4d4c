//! Text and CSV renderings of training history and metrics.

use std::fmt::Write;

use crate::dataio::ClassTable;
use crate::train::metrics::{ConfusionMatrix, Metrics};
use crate::train::trainer::EpochRecord;

pub fn history_csv(history: &[EpochRecord]) -> String {
    let mut out = String::from("epoch,train_loss,val_macro_f1,lr\n");
    for r in history {
        writeln!(
            out,
            "{},{},{},{}",
            r.epoch, r.train_loss, r.val_macro_f1, r.lr
        )
        .unwrap();
    }
    out
}

/// Rows are true classes, columns predictions.
pub fn confusion_csv(cm: &ConfusionMatrix, classes: &ClassTable) -> String {
    let mut out = String::from("true\\pred");
    for name in classes.names() {
        write!(out, ",{name}").unwrap();
    }
    out.push('\n');
    for t in 0..cm.classes() {
        out.push_str(classes.name(t));
        for p in 0..cm.classes() {
            write!(out, ",{}", cm.get(t, p)).unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn metrics_table(metrics: &Metrics, classes: &ClassTable) -> String {
    let width = classes
        .names()
        .iter()
        .map(|n| n.len())
        .max()
        .unwrap_or(5)
        .max(8);
    let mut out = String::new();
    writeln!(
        out,
        "{:<width$}  precision  recall  f1      support",
        "class"
    )
    .unwrap();
    for (k, s) in metrics.per_class.iter().enumerate() {
        let support: u64 = (0..metrics.confusion.classes())
            .map(|p| metrics.confusion.get(k, p))
            .sum();
        writeln!(
            out,
            "{:<width$}  {:>9.4}  {:>6.4}  {:>6.4}  {support:>7}",
            classes.name(k),
            s.precision,
            s.recall,
            s.f1
        )
        .unwrap();
    }
    writeln!(out, "macro F1  {:.4}", metrics.macro_f1).unwrap();
    writeln!(out, "accuracy  {:.4}", metrics.accuracy).unwrap();
    out
}
