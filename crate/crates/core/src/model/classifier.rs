//! Classifier stack: input projection, `L × [linear → dropout → layer norm →
//! GELU]`, output projection.

use crate::error::{Error, Result};
use crate::model::pooling::xavier_bound;
use crate::numerics::{
    dropout, gelu, gelu_grad, layer_norm_backward, layer_norm_forward, linear_backward,
    linear_forward, DropoutMask, LayerNormCache, Mode, Real, Rng, Tensor2D, LAYER_NORM_EPS,
};

#[derive(Debug, Clone, PartialEq)]
pub struct Dense<F> {
    /// `fan_in × fan_out`.
    pub weight: Tensor2D<F>,
    pub bias: Vec<F>,
}

impl<F: Real> Dense<F> {
    pub fn xavier(fan_in: usize, fan_out: usize, rng: &mut Rng) -> Self {
        let a = xavier_bound(fan_in, fan_out);
        let data = (0..fan_in * fan_out)
            .map(|_| F::from_f64(rng.uniform_range(-a, a)))
            .collect();
        Self {
            weight: Tensor2D::new(fan_in, fan_out, data).expect("finite init"),
            bias: vec![F::zero(); fan_out],
        }
    }

    pub fn zeros(fan_in: usize, fan_out: usize) -> Self {
        Self {
            weight: Tensor2D::zeros(fan_in, fan_out),
            bias: vec![F::zero(); fan_out],
        }
    }

    fn forward(&self, x: &[F]) -> Result<Vec<F>> {
        let x = Tensor2D::row_vector(x.to_vec());
        Ok(linear_forward(&x, &self.weight, &self.bias)?.into_data())
    }

    /// Returns `dx` and the parameter gradient.
    fn backward(&self, x: &[F], dy: &[F]) -> Result<(Vec<F>, Dense<F>)> {
        let g = linear_backward(
            &Tensor2D::row_vector(x.to_vec()),
            &self.weight,
            &Tensor2D::row_vector(dy.to_vec()),
        )?;
        Ok((
            g.dx.into_data(),
            Dense {
                weight: g.dw,
                bias: g.db,
            },
        ))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HiddenLayer<F> {
    pub dense: Dense<F>,
    pub gamma: Vec<F>,
    pub beta: Vec<F>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierParams<F> {
    pub projection: Dense<F>,
    pub hidden: Vec<HiddenLayer<F>>,
    pub output: Dense<F>,
}

impl<F: Real> ClassifierParams<F> {
    /// Xavier-uniform matrices, zero biases, unit gain and zero shift.
    pub fn init(embed: usize, width: usize, layers: usize, classes: usize, rng: &mut Rng) -> Self {
        let projection = Dense::xavier(embed, width, rng);
        let hidden = (0..layers)
            .map(|_| HiddenLayer {
                dense: Dense::xavier(width, width, rng),
                gamma: vec![F::one(); width],
                beta: vec![F::zero(); width],
            })
            .collect();
        let output = Dense::xavier(width, classes, rng);
        Self {
            projection,
            hidden,
            output,
        }
    }

    pub fn zeros(embed: usize, width: usize, layers: usize, classes: usize) -> Self {
        Self {
            projection: Dense::zeros(embed, width),
            hidden: (0..layers)
                .map(|_| HiddenLayer {
                    dense: Dense::zeros(width, width),
                    gamma: vec![F::zero(); width],
                    beta: vec![F::zero(); width],
                })
                .collect(),
            output: Dense::zeros(width, classes),
        }
    }

    pub fn embed_dim(&self) -> usize {
        self.projection.weight.rows()
    }

    pub fn width(&self) -> usize {
        self.projection.weight.cols()
    }

    pub fn classes(&self) -> usize {
        self.output.weight.cols()
    }

    pub fn validate(&self) -> Result<()> {
        let h = self.width();
        let ok_dense =
            |d: &Dense<F>, rows, cols| d.weight.shape() == (rows, cols) && d.bias.len() == cols;
        let hidden_ok = self
            .hidden
            .iter()
            .all(|l| ok_dense(&l.dense, h, h) && l.gamma.len() == h && l.beta.len() == h);
        if !(self.projection.bias.len() == h
            && hidden_ok
            && ok_dense(&self.output, h, self.classes()))
        {
            return Err(Error::Dimension(
                "inconsistent classifier shape chain".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct LayerCache<F> {
    input: Vec<F>,
    mask: Option<DropoutMask<F>>,
    norm: LayerNormCache<F>,
    normed: Vec<F>,
}

#[derive(Debug, Clone)]
pub struct ClassifierCache<F> {
    input: Vec<F>,
    layers: Vec<LayerCache<F>>,
    last: Vec<F>,
}

/// Logits for one pooled vector.
pub fn classifier_forward<F: Real>(
    c: &[F],
    params: &ClassifierParams<F>,
    dropout_rate: f64,
    mode: Mode,
    rng: &mut Rng,
) -> Result<(Vec<F>, ClassifierCache<F>)> {
    if c.len() != params.embed_dim() {
        return Err(Error::Dimension(format!(
            "pooled vector of length {} for a classifier expecting {}",
            c.len(),
            params.embed_dim()
        )));
    }
    let mut a = params.projection.forward(c)?;
    let mut layers = Vec::with_capacity(params.hidden.len());
    for layer in &params.hidden {
        let z = layer.dense.forward(&a)?;
        let (dropped, mask) = dropout(&z, dropout_rate, mode, rng)?;
        let (normed, norm) =
            layer_norm_forward(&dropped, &layer.gamma, &layer.beta, LAYER_NORM_EPS);
        let next = normed.iter().map(|&v| gelu(v)).collect();
        layers.push(LayerCache {
            input: std::mem::replace(&mut a, next),
            mask,
            norm,
            normed,
        });
    }
    let logits = params.output.forward(&a)?;
    Ok((
        logits,
        ClassifierCache {
            input: c.to_vec(),
            layers,
            last: a,
        },
    ))
}

/// Returns `(dc, parameter gradients)`.
pub fn classifier_backward<F: Real>(
    params: &ClassifierParams<F>,
    cache: &ClassifierCache<F>,
    dlogits: &[F],
) -> Result<(Vec<F>, ClassifierParams<F>)> {
    let (mut da, output) = params.output.backward(&cache.last, dlogits)?;
    let mut hidden = Vec::with_capacity(params.hidden.len());
    for (layer, lc) in params.hidden.iter().zip(&cache.layers).rev() {
        let dnormed: Vec<F> = da
            .iter()
            .zip(&lc.normed)
            .map(|(&g, &n)| g * gelu_grad(n))
            .collect();
        let (ddropped, gamma, beta) = layer_norm_backward(&lc.norm, &layer.gamma, &dnormed);
        let dz = match &lc.mask {
            Some(mask) => mask.apply(&ddropped),
            None => ddropped,
        };
        let (dinput, dense) = layer.dense.backward(&lc.input, &dz)?;
        da = dinput;
        hidden.push(HiddenLayer { dense, gamma, beta });
    }
    hidden.reverse();
    let (dc, projection) = params.projection.backward(&cache.input, &da)?;
    Ok((
        dc,
        ClassifierParams {
            projection,
            hidden,
            output,
        },
    ))
}

/// Index of the largest logit; ties go to the lowest index.
pub fn argmax<F: Real>(logits: &[F]) -> usize {
    let mut best = 0;
    for (i, &v) in logits.iter().enumerate().skip(1) {
        if v > logits[best] {
            best = i;
        }
    }
    best
}
