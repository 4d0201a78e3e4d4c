use crate::error::{Error, Result};
use crate::numerics::{softmax, Real};

/// Per-class loss multipliers.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassWeights(Vec<f64>);

impl ClassWeights {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(Error::Config(format!(
                "class weights must be positive: {weights:?}"
            )));
        }
        Ok(Self(weights))
    }

    pub fn uniform(classes: usize) -> Self {
        Self(vec![1.0; classes])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, class: usize) -> f64 {
        self.0[class]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Balanced inverse-frequency weights `N / (K·n_k)`.
pub fn compute_class_weights(counts: &[usize]) -> Result<ClassWeights> {
    if let Some(k) = counts.iter().position(|&n| n == 0) {
        return Err(Error::Data(format!("class {k} has no training samples")));
    }
    let total: usize = counts.iter().sum();
    let k = counts.len() as f64;
    ClassWeights::new(
        counts
            .iter()
            .map(|&n| total as f64 / (k * n as f64))
            .collect(),
    )
}

/// Weighted negative log-likelihood of one sample.
///
/// Returns `w_y·(−log softmax(z)_y)` and its gradient `w_y·(softmax(z) − e_y)`.
/// A batch divides both by the sum of its samples' weights.
pub fn weighted_cross_entropy<F: Real>(
    logits: &[F],
    label: usize,
    weights: &ClassWeights,
) -> Result<(F, Vec<F>)> {
    if label >= logits.len() || logits.len() != weights.len() {
        return Err(Error::Dimension(format!(
            "label {label} with {} logits and {} class weights",
            logits.len(),
            weights.len()
        )));
    }
    let max = logits.iter().copied().fold(F::neg_infinity(), F::max);
    let log_sum = max + logits.iter().map(|&z| (z - max).exp()).sum::<F>().ln();
    let w = F::from_f64(weights.get(label));
    let loss = w * (log_sum - logits[label]);
    let mut grad = softmax(logits);
    grad[label] = grad[label] - F::one();
    for g in &mut grad {
        *g = *g * w;
    }
    Ok((loss, grad))
}
