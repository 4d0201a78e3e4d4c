//! Oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use emopool::model::{
    attn_pool_backward, attn_pool_forward, head_backward, head_forward, weighted_cross_entropy,
    ClassWeights, HeadDims, ModelParams,
};
use emopool::numerics::{
    gelu, gelu_grad, grad_check, layer_norm_backward, layer_norm_forward, linear_backward,
    linear_forward, Mode, Rng, Tensor2D, LAYER_NORM_EPS,
};

pub const GRAD_POINTS: u64 = 20;
pub const GRAD_EPS: f64 = 1e-5;
pub const GRAD_TOL: f64 = 1e-4;

pub fn gaussian_vec(rng: &mut Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gaussian()).collect()
}

pub fn tensor(rows: usize, cols: usize, data: &[f64]) -> Tensor2D<f64> {
    Tensor2D::new(rows, cols, data.to_vec()).unwrap()
}

/// Worst relative error for `y = xW + b` under the loss `Σ r⊙y`.
pub fn check_linear(seed: u64) -> f64 {
    let mut rng = Rng::new(seed);
    let (n, i, o) = (3, 4, 5);
    let r = tensor(n, o, &gaussian_vec(&mut rng, n * o));
    let point = gaussian_vec(&mut rng, n * i + i * o + o);
    grad_check(
        |p| {
            let x = tensor(n, i, &p[..n * i]);
            let w = tensor(i, o, &p[n * i..n * i + i * o]);
            let b = &p[n * i + i * o..];
            let y = linear_forward(&x, &w, b).unwrap();
            let loss = y.data().iter().zip(r.data()).map(|(a, b)| a * b).sum();
            let g = linear_backward(&x, &w, &r).unwrap();
            let mut grad = g.dx.into_data();
            grad.extend(g.dw.into_data());
            grad.extend(g.db);
            (loss, grad)
        },
        &point,
        GRAD_EPS,
    )
}

pub fn check_layer_norm(seed: u64) -> f64 {
    let mut rng = Rng::new(seed);
    let d = 7;
    let r = gaussian_vec(&mut rng, d);
    let point = gaussian_vec(&mut rng, 3 * d);
    grad_check(
        |p| {
            let (x, rest) = p.split_at(d);
            let (gamma, beta) = rest.split_at(d);
            let (y, cache) = layer_norm_forward(x, gamma, beta, LAYER_NORM_EPS);
            let loss = y.iter().zip(&r).map(|(a, b)| a * b).sum();
            let (dx, dg, db) = layer_norm_backward(&cache, gamma, &r);
            (loss, [dx, dg, db].concat())
        },
        &point,
        GRAD_EPS,
    )
}

/// Elementwise, so each input is checked on its own; summing them would bury
/// the tail gradients under the roundoff of the larger terms.
pub fn check_gelu(seed: u64) -> f64 {
    let mut rng = Rng::new(seed);
    (0..8)
        .map(|_| {
            let x = 3.0 * rng.gaussian();
            grad_check(|p| (gelu(p[0]), vec![gelu_grad(p[0])]), &[x], GRAD_EPS)
        })
        .fold(0.0, f64::max)
}

/// Softmax feeding weighted cross-entropy, with respect to the logits.
pub fn check_softmax_ce(seed: u64) -> f64 {
    let mut rng = Rng::new(seed);
    let k = 6;
    let weights = ClassWeights::new((0..k).map(|_| rng.uniform_range(0.2, 3.0)).collect()).unwrap();
    let label = rng.index(k);
    let point: Vec<f64> = (0..k).map(|_| 2.0 * rng.gaussian()).collect();
    grad_check(
        |p| weighted_cross_entropy(p, label, &weights).unwrap(),
        &point,
        GRAD_EPS,
    )
}

/// Pooling gradients for `(h, u)` under the loss `c·r`.
pub fn check_pooling(seed: u64) -> (f64, f64) {
    let mut rng = Rng::new(seed);
    let t = 2 + rng.index(6);
    let e = 5;
    let r = gaussian_vec(&mut rng, e);
    let h0 = gaussian_vec(&mut rng, t * e);
    let u0 = gaussian_vec(&mut rng, e);
    let pooled_loss = |h: &[f64], u: &[f64]| {
        let h = tensor(t, e, h);
        let pooled = attn_pool_forward(&h, u).unwrap();
        let loss: f64 = pooled.vector.iter().zip(&r).map(|(a, b)| a * b).sum();
        let (dh, du) = attn_pool_backward(&h, u, &pooled.weights, &r);
        (loss, dh.into_data(), du)
    };
    let dh_err = grad_check(
        |h| {
            let (loss, dh, _) = pooled_loss(h, &u0);
            (loss, dh)
        },
        &h0,
        GRAD_EPS,
    );
    let du_err = grad_check(
        |u| {
            let (loss, _, du) = pooled_loss(&h0, u);
            (loss, du)
        },
        &u0,
        GRAD_EPS,
    );
    (dh_err, du_err)
}

/// Pooling, classifier and loss together, with respect to every parameter and
/// the input frames. Dropout is active with a mask fixed by the seed.
pub fn check_head(seed: u64) -> f64 {
    let mut rng = Rng::new(seed);
    let dims = HeadDims {
        embed: 6,
        width: 8,
        layers: 2,
        classes: 4,
    };
    let t = 1 + rng.index(5);
    let params = ModelParams::<f64>::init(dims, &mut rng);
    let weights = ClassWeights::new(
        (0..dims.classes)
            .map(|_| rng.uniform_range(0.5, 2.0))
            .collect(),
    )
    .unwrap();
    let label = rng.index(dims.classes);
    let n_params = params.num_values();
    let mut point = params.flatten();
    point.extend(gaussian_vec(&mut rng, t * dims.embed));
    let mask_seed = rng.next_u64();
    grad_check(
        |p| {
            let mut params = ModelParams::<f64>::zeros(dims);
            params.assign_flat(&p[..n_params]);
            let h = tensor(t, dims.embed, &p[n_params..]);
            let mut mask_rng = Rng::new(mask_seed);
            let (logits, cache) =
                head_forward(&params, &h, 0.1, Mode::Train, &mut mask_rng).unwrap();
            let (loss, dlogits) = weighted_cross_entropy(&logits, label, &weights).unwrap();
            let (grads, dh) = head_backward(&params, &h, &cache, &dlogits).unwrap();
            let mut grad = grads.flatten();
            grad.extend(dh.into_data());
            (loss, grad)
        },
        &point,
        GRAD_EPS,
    )
}

/// `(component, worst error over the seeded points)` for every differentiable block.
pub fn gradient_suite() -> Vec<(&'static str, f64)> {
    let worst = |f: &dyn Fn(u64) -> f64| (0..GRAD_POINTS).map(|s| f(1000 + s)).fold(0.0, f64::max);
    vec![
        ("linear", worst(&check_linear)),
        ("layer norm", worst(&check_layer_norm)),
        ("gelu", worst(&check_gelu)),
        ("softmax + weighted CE", worst(&check_softmax_ce)),
        ("pooling dh", worst(&|s| check_pooling(s).0)),
        ("pooling du", worst(&|s| check_pooling(s).1)),
        ("full head", worst(&check_head)),
    ]
}

/// Per-class `(precision, recall, f1)` counted straight from the label lists.
pub fn brute_force_scores(labels: &[usize], preds: &[usize], k: usize) -> Vec<(f64, f64, f64)> {
    (0..k)
        .map(|c| {
            let tp = labels
                .iter()
                .zip(preds)
                .filter(|&(&l, &p)| l == c && p == c)
                .count() as f64;
            let predicted = preds.iter().filter(|&&p| p == c).count() as f64;
            let actual = labels.iter().filter(|&&l| l == c).count() as f64;
            let precision = if predicted > 0.0 { tp / predicted } else { 0.0 };
            let recall = if actual > 0.0 { tp / actual } else { 0.0 };
            let f1 = if precision + recall > 0.0 {
                2.0 * precision * recall / (precision + recall)
            } else {
                0.0
            };
            (precision, recall, f1)
        })
        .collect()
}

/// Majority vote by counting, else the vote of the best-scoring member.
pub fn vote_oracle(preds: &[usize], f1s: &[f64]) -> usize {
    for &candidate in preds {
        let votes = preds.iter().filter(|&&p| p == candidate).count();
        if votes * 2 > preds.len() {
            return candidate;
        }
    }
    let mut best = 0;
    for i in 1..preds.len() {
        if f1s[i] > f1s[best] {
            best = i;
        }
    }
    preds[best]
}

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_emopool")
}

pub fn run_cli(args: &[&str], cwd: &std::path::Path) -> std::process::Output {
    std::process::Command::new(bin())
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("spawn emopool")
}
