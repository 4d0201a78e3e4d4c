use crate::error::{Error, Result};

/// `K×K` counts indexed `(true, predicted)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    classes: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn new(classes: usize) -> Self {
        Self {
            classes,
            counts: vec![0; classes * classes],
        }
    }

    pub fn from_predictions(
        labels: &[usize],
        predictions: &[usize],
        classes: usize,
    ) -> Result<Self> {
        if labels.len() != predictions.len() {
            return Err(Error::Dimension(format!(
                "{} labels but {} predictions",
                labels.len(),
                predictions.len()
            )));
        }
        let mut cm = Self::new(classes);
        for (&t, &p) in labels.iter().zip(predictions) {
            if t >= classes || p >= classes {
                return Err(Error::Data(format!(
                    "class index ({t}, {p}) outside 0..{classes}"
                )));
            }
            cm.record(t, p);
        }
        Ok(cm)
    }

    pub fn record(&mut self, truth: usize, predicted: usize) {
        self.counts[truth * self.classes + predicted] += 1;
    }

    pub fn merge(&mut self, other: &Self) {
        assert_eq!(self.classes, other.classes);
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn get(&self, truth: usize, predicted: usize) -> u64 {
        self.counts[truth * self.classes + predicted]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn correct(&self) -> u64 {
        (0..self.classes).map(|k| self.get(k, k)).sum()
    }

    fn row_sum(&self, truth: usize) -> u64 {
        (0..self.classes).map(|p| self.get(truth, p)).sum()
    }

    fn col_sum(&self, predicted: usize) -> u64 {
        (0..self.classes).map(|t| self.get(t, predicted)).sum()
    }

    pub fn class_scores(&self, class: usize) -> ClassScores {
        let tp = self.get(class, class);
        let precision = ratio(tp, self.col_sum(class));
        let recall = ratio(tp, self.row_sum(class));
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        ClassScores {
            precision,
            recall,
            f1,
        }
    }
}

/// `num / den`, with `0/0` defined as 0.
fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Unweighted mean of per-class F1.
pub fn macro_f1(cm: &ConfusionMatrix) -> f64 {
    (0..cm.classes())
        .map(|k| cm.class_scores(k).f1)
        .sum::<f64>()
        / cm.classes() as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub per_class: Vec<ClassScores>,
    pub macro_f1: f64,
    pub accuracy: f64,
    pub confusion: ConfusionMatrix,
}

impl Metrics {
    pub fn from_confusion(confusion: ConfusionMatrix) -> Self {
        let per_class = (0..confusion.classes())
            .map(|k| confusion.class_scores(k))
            .collect();
        Self {
            per_class,
            macro_f1: macro_f1(&confusion),
            accuracy: ratio(confusion.correct(), confusion.total()),
            confusion,
        }
    }

    pub fn from_predictions(
        labels: &[usize],
        predictions: &[usize],
        classes: usize,
    ) -> Result<Self> {
        Ok(Self::from_confusion(ConfusionMatrix::from_predictions(
            labels,
            predictions,
            classes,
        )?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_computed_two_class() {
        let m = Metrics::from_predictions(&[0, 0, 1, 1], &[0, 1, 1, 1], 2).unwrap();
        assert!((m.per_class[0].f1 - 2.0 / 3.0).abs() < 1e-15);
        assert!((m.per_class[1].f1 - 0.8).abs() < 1e-15);
        assert!((m.macro_f1 - 0.733_333_333_333_333_3).abs() < 1e-12);
        assert_eq!(m.accuracy, 0.75);
        assert_eq!(m.confusion.total(), 4);
    }

    #[test]
    fn perfect_and_inverted() {
        let labels: Vec<usize> = (0..60).map(|i| i % 6).collect();
        let m = Metrics::from_predictions(&labels, &labels, 6).unwrap();
        assert_eq!(m.macro_f1, 1.0);
        for t in 0..6 {
            for p in 0..6 {
                assert_eq!(m.confusion.get(t, p) > 0, t == p);
            }
        }
        let wrong: Vec<usize> = labels.iter().map(|l| (l + 1) % 6).collect();
        assert_eq!(
            Metrics::from_predictions(&labels, &wrong, 6)
                .unwrap()
                .macro_f1,
            0.0
        );
    }

    #[test]
    fn constant_predictor_on_balanced_pair() {
        let m = Metrics::from_predictions(&[0, 0, 1, 1], &[0, 0, 0, 0], 2).unwrap();
        assert!((m.per_class[0].f1 - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(m.per_class[1].f1, 0.0);
        assert!((m.macro_f1 - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn merge_adds_counts() {
        let mut a = ConfusionMatrix::from_predictions(&[0, 1], &[0, 0], 2).unwrap();
        let b = ConfusionMatrix::from_predictions(&[1], &[1], 2).unwrap();
        a.merge(&b);
        assert_eq!(a.total(), 3);
        assert_eq!(a.get(1, 1), 1);
        assert!(ConfusionMatrix::from_predictions(&[2], &[0], 2).is_err());
    }
}
