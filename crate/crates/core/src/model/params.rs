use crate::error::{Error, Result};
use crate::model::classifier::{
    classifier_backward, classifier_forward, ClassifierCache, ClassifierParams,
};
use crate::model::pooling::{attn_pool_backward, attn_pool_forward, init_pooling, PoolingParams};
use crate::numerics::{Mode, Real, Rng, Tensor2D};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HeadDims {
    pub embed: usize,
    pub width: usize,
    pub layers: usize,
    pub classes: usize,
}

/// Every trainable tensor of the head.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams<F> {
    pub pooling: PoolingParams<F>,
    pub classifier: ClassifierParams<F>,
}

/// A parameter buffer with its checkpoint name and logical shape.
pub struct NamedBuffer<'a, F> {
    pub name: String,
    pub dims: Vec<usize>,
    pub data: &'a [F],
}

impl<F: Real> ModelParams<F> {
    pub fn init(dims: HeadDims, rng: &mut Rng) -> Self {
        let pooling = init_pooling(dims.embed, rng);
        let classifier =
            ClassifierParams::init(dims.embed, dims.width, dims.layers, dims.classes, rng);
        Self {
            pooling,
            classifier,
        }
    }

    pub fn zeros(dims: HeadDims) -> Self {
        Self {
            pooling: PoolingParams {
                u: vec![F::zero(); dims.embed],
            },
            classifier: ClassifierParams::zeros(dims.embed, dims.width, dims.layers, dims.classes),
        }
    }

    pub fn dims(&self) -> HeadDims {
        HeadDims {
            embed: self.pooling.u.len(),
            width: self.classifier.width(),
            layers: self.classifier.hidden.len(),
            classes: self.classifier.classes(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.classifier.validate()?;
        if self.pooling.u.len() != self.classifier.embed_dim() {
            return Err(Error::Dimension(format!(
                "pooling vector of length {} feeds a classifier expecting {}",
                self.pooling.u.len(),
                self.classifier.embed_dim()
            )));
        }
        Ok(())
    }

    pub fn named_buffers(&self) -> Vec<NamedBuffer<'_, F>> {
        let mut out = Vec::new();
        let mut push = |name: String, dims: Vec<usize>, data| {
            out.push(NamedBuffer { name, dims, data });
        };
        let c = &self.classifier;
        push("pool.u".into(), vec![self.pooling.u.len()], &self.pooling.u);
        push(
            "proj.weight".into(),
            matrix_dims(&c.projection.weight),
            c.projection.weight.data(),
        );
        push(
            "proj.bias".into(),
            vec![c.projection.bias.len()],
            &c.projection.bias,
        );
        for (i, l) in c.hidden.iter().enumerate() {
            push(
                format!("hidden.{i}.weight"),
                matrix_dims(&l.dense.weight),
                l.dense.weight.data(),
            );
            push(
                format!("hidden.{i}.bias"),
                vec![l.dense.bias.len()],
                &l.dense.bias,
            );
            push(
                format!("hidden.{i}.norm.gamma"),
                vec![l.gamma.len()],
                &l.gamma,
            );
            push(format!("hidden.{i}.norm.beta"), vec![l.beta.len()], &l.beta);
        }
        push(
            "out.weight".into(),
            matrix_dims(&c.output.weight),
            c.output.weight.data(),
        );
        push("out.bias".into(), vec![c.output.bias.len()], &c.output.bias);
        out
    }

    pub fn buffers(&self) -> Vec<&[F]> {
        self.named_buffers().into_iter().map(|b| b.data).collect()
    }

    /// Mutable buffers in the same order as [`Self::named_buffers`].
    pub fn buffers_mut(&mut self) -> Vec<&mut [F]> {
        let c = &mut self.classifier;
        let mut out: Vec<&mut [F]> = vec![
            &mut self.pooling.u,
            c.projection.weight.data_mut(),
            &mut c.projection.bias,
        ];
        for l in &mut c.hidden {
            out.push(l.dense.weight.data_mut());
            out.push(&mut l.dense.bias);
            out.push(&mut l.gamma);
            out.push(&mut l.beta);
        }
        out.push(c.output.weight.data_mut());
        out.push(&mut c.output.bias);
        out
    }

    pub fn num_values(&self) -> usize {
        self.buffers().iter().map(|b| b.len()).sum()
    }

    pub fn flatten(&self) -> Vec<F> {
        self.buffers().concat()
    }

    /// Overwrites every value from a flat vector in buffer order.
    pub fn assign_flat(&mut self, values: &[F]) {
        assert_eq!(values.len(), self.num_values());
        let mut offset = 0;
        for buf in self.buffers_mut() {
            buf.copy_from_slice(&values[offset..offset + buf.len()]);
            offset += buf.len();
        }
    }

    pub fn add_assign(&mut self, other: &Self) {
        for (a, b) in self.buffers_mut().into_iter().zip(other.buffers()) {
            crate::numerics::tensor::add_into(a, b);
        }
    }

    pub fn scale(&mut self, factor: F) {
        for buf in self.buffers_mut() {
            for v in buf.iter_mut() {
                *v = *v * factor;
            }
        }
    }

    pub fn cast<G: Real>(&self) -> ModelParams<G> {
        let mut out = ModelParams::<G>::zeros(self.dims());
        for (dst, src) in out.buffers_mut().into_iter().zip(self.buffers()) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d = G::from_f64(s.as_f64());
            }
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.buffers()
            .iter()
            .all(|b| b.iter().all(|v| v.is_finite()))
    }
}

fn matrix_dims<F: Real>(m: &Tensor2D<F>) -> Vec<usize> {
    vec![m.rows(), m.cols()]
}

/// Everything the backward pass needs from one forward pass.
#[derive(Debug, Clone)]
pub struct HeadCache<F> {
    pub weights: Vec<F>,
    classifier: ClassifierCache<F>,
}

/// Pooling followed by the classifier, for one fused `T×E` sequence.
pub fn head_forward<F: Real>(
    params: &ModelParams<F>,
    h: &Tensor2D<F>,
    dropout_rate: f64,
    mode: Mode,
    rng: &mut Rng,
) -> Result<(Vec<F>, HeadCache<F>)> {
    let pooled = attn_pool_forward(h, &params.pooling.u)?;
    let (logits, classifier) =
        classifier_forward(&pooled.vector, &params.classifier, dropout_rate, mode, rng)?;
    Ok((
        logits,
        HeadCache {
            weights: pooled.weights,
            classifier,
        },
    ))
}

/// Returns parameter gradients and the gradient with respect to `h`.
pub fn head_backward<F: Real>(
    params: &ModelParams<F>,
    h: &Tensor2D<F>,
    cache: &HeadCache<F>,
    dlogits: &[F],
) -> Result<(ModelParams<F>, Tensor2D<F>)> {
    let (dc, classifier) = classifier_backward(&params.classifier, &cache.classifier, dlogits)?;
    let (dh, du) = attn_pool_backward(h, &params.pooling.u, &cache.weights, &dc);
    Ok((
        ModelParams {
            pooling: PoolingParams { u: du },
            classifier,
        },
        dh,
    ))
}
