//! Pools a short fused sequence into one vector and shows where the weight goes.

use emopool::model::attn_pool_forward;
use emopool::numerics::Tensor2D;

fn main() -> emopool::Result<()> {
    // Four frames; the third points along the query.
    let h = Tensor2D::from_rows(&[
        vec![0.1, 0.0, 0.2, 0.0],
        vec![0.0, 0.3, 0.0, 0.1],
        vec![2.0, 2.0, 2.0, 2.0],
        vec![-0.5, 0.1, 0.0, 0.4],
    ])?;
    let u = vec![1.0; 4];

    let pooled = attn_pool_forward(&h, &u)?;
    for (t, w) in pooled.weights.iter().enumerate() {
        println!("frame {t}: weight {w:.4}");
    }
    println!("pooled: {:?}", pooled.vector);

    // A zero query averages the frames.
    let flat = attn_pool_forward(&h, &[0.0; 4])?;
    println!("zero query: {:?}", flat.vector);
    Ok(())
}
