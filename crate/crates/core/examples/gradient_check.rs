//! Checks the hand-written backward pass of the whole head against central
//! differences in f64.

use emopool::model::{
    head_backward, head_forward, weighted_cross_entropy, ClassWeights, HeadDims, ModelParams,
};
use emopool::numerics::{grad_check, Mode, Rng, Tensor2D};

fn main() {
    let dims = HeadDims {
        embed: 8,
        width: 16,
        layers: 2,
        classes: 6,
    };
    let mut rng = Rng::new(3);
    let params = ModelParams::<f64>::init(dims, &mut rng);
    let h = Tensor2D::new(5, 8, (0..40).map(|_| rng.gaussian()).collect()).unwrap();
    let weights = ClassWeights::new(vec![0.6, 0.7, 1.1, 1.4, 1.7, 2.1]).unwrap();
    let label = 4;

    let err = grad_check(
        |flat| {
            let mut p = ModelParams::zeros(dims);
            p.assign_flat(flat);
            let (logits, cache) = head_forward(&p, &h, 0.0, Mode::Eval, &mut Rng::new(0)).unwrap();
            let (loss, dlogits) = weighted_cross_entropy(&logits, label, &weights).unwrap();
            let (grads, _) = head_backward(&p, &h, &cache, &dlogits).unwrap();
            (loss, grads.flatten())
        },
        &params.flatten(),
        1e-5,
    );
    println!(
        "{} parameters, max relative error {err:.2e}",
        params.num_values()
    );
}
