//! Forward and hand-derived backward passes for the layers of the head.

use crate::error::{Error, Result};
use crate::numerics::{Real, Rng, Tensor2D};

pub const LAYER_NORM_EPS: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// `y = x·W + b`, rowwise.
pub fn linear_forward<F: Real>(x: &Tensor2D<F>, w: &Tensor2D<F>, b: &[F]) -> Result<Tensor2D<F>> {
    if b.len() != w.cols() {
        return Err(Error::Dimension(format!(
            "bias of length {} for {} outputs",
            b.len(),
            w.cols()
        )));
    }
    let mut y = x.matmul(w)?;
    for r in 0..y.rows() {
        for (v, &bias) in y.row_mut(r).iter_mut().zip(b) {
            *v = *v + bias;
        }
    }
    Ok(y)
}

#[derive(Debug, Clone)]
pub struct LinearGrads<F> {
    pub dx: Tensor2D<F>,
    pub dw: Tensor2D<F>,
    pub db: Vec<F>,
}

pub fn linear_backward<F: Real>(
    x: &Tensor2D<F>,
    w: &Tensor2D<F>,
    dy: &Tensor2D<F>,
) -> Result<LinearGrads<F>> {
    if dy.shape() != (x.rows(), w.cols()) {
        return Err(Error::Dimension(format!(
            "upstream gradient {:?}, expected {:?}",
            dy.shape(),
            (x.rows(), w.cols())
        )));
    }
    let dx = dy.matmul_t(w)?;
    let dw = x.t_matmul(dy)?;
    let mut db = vec![F::zero(); w.cols()];
    for row in dy.iter_rows() {
        crate::numerics::tensor::add_into(&mut db, row);
    }
    Ok(LinearGrads { dx, dw, db })
}

#[derive(Debug, Clone)]
pub struct LayerNormCache<F> {
    xhat: Vec<F>,
    inv_std: F,
}

/// Layer normalization of one vector with population variance.
pub fn layer_norm_forward<F: Real>(
    x: &[F],
    gamma: &[F],
    beta: &[F],
    eps: f64,
) -> (Vec<F>, LayerNormCache<F>) {
    let d = F::from_usize(x.len());
    let mean = x.iter().copied().sum::<F>() / d;
    let var = x.iter().map(|&v| (v - mean) * (v - mean)).sum::<F>() / d;
    let inv_std = F::one() / (var + F::from_f64(eps)).sqrt();
    let xhat: Vec<F> = x.iter().map(|&v| (v - mean) * inv_std).collect();
    let y = xhat
        .iter()
        .zip(gamma.iter().zip(beta))
        .map(|(&n, (&g, &b))| g * n + b)
        .collect();
    (y, LayerNormCache { xhat, inv_std })
}

/// Returns `(dx, dgamma, dbeta)`.
pub fn layer_norm_backward<F: Real>(
    cache: &LayerNormCache<F>,
    gamma: &[F],
    dy: &[F],
) -> (Vec<F>, Vec<F>, Vec<F>) {
    let d = F::from_usize(dy.len());
    let dgamma: Vec<F> = dy.iter().zip(&cache.xhat).map(|(&g, &n)| g * n).collect();
    let dbeta = dy.to_vec();
    let dxhat: Vec<F> = dy.iter().zip(gamma).map(|(&g, &w)| g * w).collect();
    let sum_dxhat = dxhat.iter().copied().sum::<F>();
    let sum_dxhat_xhat = dxhat
        .iter()
        .zip(&cache.xhat)
        .map(|(&g, &n)| g * n)
        .sum::<F>();
    let dx = dxhat
        .iter()
        .zip(&cache.xhat)
        .map(|(&g, &n)| cache.inv_std / d * (d * g - sum_dxhat - n * sum_dxhat_xhat))
        .collect();
    (dx, dgamma, dbeta)
}

/// Exact GELU, `x·Φ(x)`.
pub fn gelu<F: Real>(x: F) -> F {
    x * std_normal_cdf(x)
}

/// `d/dx gelu(x) = Φ(x) + x·φ(x)`.
pub fn gelu_grad<F: Real>(x: F) -> F {
    let pdf =
        (-(x * x) / F::from_f64(2.0)).exp() / F::from_f64((2.0 * std::f64::consts::PI).sqrt());
    std_normal_cdf(x) + x * pdf
}

/// `Φ(x) = erfc(−x/√2)/2`, accurate in the lower tail where `1 + erf` cancels.
fn std_normal_cdf<F: Real>(x: F) -> F {
    F::from_f64(0.5) * (-x * F::FRAC_1_SQRT_2()).erfc()
}

/// Per-element multipliers applied by one dropout call: `0` or `1/(1-p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DropoutMask<F>(Vec<F>);

impl<F: Real> DropoutMask<F> {
    pub fn apply(&self, x: &[F]) -> Vec<F> {
        x.iter().zip(&self.0).map(|(&v, &m)| v * m).collect()
    }

    pub fn zeroed(&self) -> usize {
        self.0.iter().filter(|m| m.is_zero()).count()
    }
}

/// Inverted dropout. Eval mode (and `p = 0`) return the input untouched and no mask.
pub fn dropout<F: Real>(
    x: &[F],
    p: f64,
    mode: Mode,
    rng: &mut Rng,
) -> Result<(Vec<F>, Option<DropoutMask<F>>)> {
    check_dropout_rate(p)?;
    if mode == Mode::Eval || p == 0.0 {
        return Ok((x.to_vec(), None));
    }
    let keep = F::from_f64(1.0 / (1.0 - p));
    let mask = DropoutMask(
        (0..x.len())
            .map(|_| if rng.bernoulli(p) { F::zero() } else { keep })
            .collect(),
    );
    Ok((mask.apply(x), Some(mask)))
}

pub fn check_dropout_rate(p: f64) -> Result<()> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::Config(format!("dropout rate {p} outside [0, 1)")));
    }
    Ok(())
}

/// Max-subtracted softmax.
pub fn softmax<F: Real>(x: &[F]) -> Vec<F> {
    let max = x.iter().copied().fold(F::neg_infinity(), F::max);
    let exps: Vec<F> = x.iter().map(|&v| (v - max).exp()).collect();
    let total = exps.iter().copied().sum::<F>();
    exps.into_iter().map(|e| e / total).collect()
}

/// Vector-Jacobian product of softmax given its output `y`.
pub fn softmax_backward<F: Real>(y: &[F], dy: &[F]) -> Vec<F> {
    let inner = crate::numerics::tensor::dot(y, dy);
    y.iter().zip(dy).map(|(&p, &g)| p * (g - inner)).collect()
}
