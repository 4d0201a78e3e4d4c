//! AdamW: Adam with decoupled weight decay.
//!
//! ```text
//! t ← t + 1
//! m ← β₁·m + (1 − β₁)·g
//! v ← β₂·v + (1 − β₂)·g²
//! m̂ = m / (1 − β₁ᵗ),  v̂ = v / (1 − β₂ᵗ)
//! θ ← θ − lr·m̂/(√v̂ + ε) − lr·λ·θ
//! ```

use crate::error::{Error, Result};
use crate::numerics::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamWConfig {
    pub lr: f64,
    pub weight_decay: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamWConfig {
    pub fn new(lr: f64, weight_decay: f64) -> Self {
        Self {
            lr,
            weight_decay,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

#[derive(Debug, Clone)]
struct Moments<F> {
    m: Vec<F>,
    v: Vec<F>,
}

/// Optimizer state for an ordered list of parameter buffers.
#[derive(Debug, Clone)]
pub struct AdamW<F> {
    pub config: AdamWConfig,
    step: u64,
    moments: Vec<Moments<F>>,
}

impl<F: Real> AdamW<F> {
    pub fn new(config: AdamWConfig) -> Self {
        Self {
            config,
            step: 0,
            moments: Vec::new(),
        }
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    pub fn set_lr(&mut self, lr: f64) {
        self.config.lr = lr;
    }

    /// One update of every buffer. `params[i]` pairs with `grads[i]` and
    /// must keep its length across calls.
    pub fn step(&mut self, params: &mut [&mut [F]], grads: &[&[F]]) -> Result<()> {
        if params.len() != grads.len() {
            return Err(Error::Dimension(format!(
                "{} parameter buffers but {} gradients",
                params.len(),
                grads.len()
            )));
        }
        for (i, (p, g)) in params.iter().zip(grads).enumerate() {
            if p.len() != g.len() {
                return Err(Error::Dimension(format!(
                    "parameter {i}: {} values but {} gradients",
                    p.len(),
                    g.len()
                )));
            }
            if let Some(j) = g.iter().position(|x| !x.is_finite()) {
                return Err(Error::Training(format!(
                    "non-finite gradient in parameter {i} at index {j}"
                )));
            }
        }
        if self.moments.is_empty() {
            self.moments = params
                .iter()
                .map(|p| Moments {
                    m: vec![F::zero(); p.len()],
                    v: vec![F::zero(); p.len()],
                })
                .collect();
        } else if self.moments.len() != params.len() {
            return Err(Error::Dimension(
                "parameter list changed between steps".into(),
            ));
        }

        self.step += 1;
        let c = &self.config;
        let t = self.step as i32;
        let b1 = F::from_f64(c.beta1);
        let b2 = F::from_f64(c.beta2);
        let one = F::one();
        let bias1 = F::from_f64(1.0 - c.beta1.powi(t));
        let bias2 = F::from_f64(1.0 - c.beta2.powi(t));
        let lr = F::from_f64(c.lr);
        let decay = F::from_f64(c.lr * c.weight_decay);
        let eps = F::from_f64(c.eps);

        for ((p, g), st) in params.iter_mut().zip(grads).zip(&mut self.moments) {
            for k in 0..p.len() {
                let gk = g[k];
                st.m[k] = b1 * st.m[k] + (one - b1) * gk;
                st.v[k] = b2 * st.v[k] + (one - b2) * gk * gk;
                let m_hat = st.m[k] / bias1;
                let v_hat = st.v[k] / bias2;
                let old = p[k];
                p[k] = old - lr * m_hat / (v_hat.sqrt() + eps) - decay * old;
            }
        }
        Ok(())
    }
}

/// Single-buffer convenience wrapper.
pub fn adamw_step<F: Real>(param: &mut [F], grad: &[F], state: &mut AdamW<F>) -> Result<()> {
    state.step(&mut [param], &[grad])
}
