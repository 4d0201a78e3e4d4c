//! Attention pooling over a sequence of hidden frames.
//!
//! ```text
//! s_t = h_t·u / √E
//! w   = softmax(s)
//! c   = Σ_t w_t·h_t
//! ```
//!
//! Backward, for upstream `dc`:
//!
//! ```text
//! g_t  = h_t·dc
//! ds_t = w_t·(g_t − Σ_i w_i·g_i)
//! dh_t = w_t·dc + ds_t·u/√E
//! du   = Σ_t ds_t·h_t / √E
//! ```

use crate::error::{Error, Result};
use crate::numerics::tensor::dot;
use crate::numerics::{softmax, Real, Rng, Tensor2D};

/// The learned query vector `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct PoolingParams<F> {
    pub u: Vec<F>,
}

pub fn xavier_bound(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}

/// Xavier-uniform with `fan_in = E`, `fan_out = 1`.
pub fn init_pooling<F: Real>(dim: usize, rng: &mut Rng) -> PoolingParams<F> {
    let a = xavier_bound(dim, 1);
    PoolingParams {
        u: (0..dim)
            .map(|_| F::from_f64(rng.uniform_range(-a, a)))
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pooled<F> {
    /// `c`, length `E`.
    pub vector: Vec<F>,
    /// `w`, one weight per frame.
    pub weights: Vec<F>,
}

pub fn attn_pool_forward<F: Real>(h: &Tensor2D<F>, u: &[F]) -> Result<Pooled<F>> {
    let (t, e) = h.shape();
    if t == 0 {
        return Err(Error::Data("attention pooling over zero frames".into()));
    }
    if u.len() != e {
        return Err(Error::Dimension(format!(
            "pooling vector of length {} for {e}-dimensional frames",
            u.len()
        )));
    }
    let scale = F::from_usize(e).sqrt();
    let scores: Vec<F> = h.iter_rows().map(|row| dot(row, u) / scale).collect();
    let weights = softmax(&scores);
    let mut vector = vec![F::zero(); e];
    for (row, &w) in h.iter_rows().zip(&weights) {
        for (c, &x) in vector.iter_mut().zip(row) {
            *c = *c + w * x;
        }
    }
    Ok(Pooled { vector, weights })
}

/// Returns `(dh, du)`.
pub fn attn_pool_backward<F: Real>(
    h: &Tensor2D<F>,
    u: &[F],
    weights: &[F],
    dc: &[F],
) -> (Tensor2D<F>, Vec<F>) {
    let (t, e) = h.shape();
    let scale = F::from_usize(e).sqrt();
    let g: Vec<F> = h.iter_rows().map(|row| dot(row, dc)).collect();
    let mean_g = dot(weights, &g);
    let ds: Vec<F> = weights
        .iter()
        .zip(&g)
        .map(|(&w, &gt)| w * (gt - mean_g))
        .collect();

    let mut dh = Tensor2D::zeros(t, e);
    let mut du = vec![F::zero(); e];
    for (r, (&w, &dst)) in weights.iter().zip(&ds).enumerate() {
        let coupling = dst / scale;
        let h_row = h.row(r);
        for (j, d) in dh.row_mut(r).iter_mut().enumerate() {
            *d = w * dc[j] + coupling * u[j];
            du[j] = du[j] + coupling * h_row[j];
        }
    }
    (dh, du)
}
