//! The classification head: attention pooling, classifier stack and loss.

pub mod checkpoint;
pub mod classifier;
pub mod loss;
pub mod params;
pub mod pooling;

pub use checkpoint::{Checkpoint, CheckpointMeta};
pub use classifier::{
    argmax, classifier_backward, classifier_forward, ClassifierParams, Dense, HiddenLayer,
};
pub use loss::{compute_class_weights, weighted_cross_entropy, ClassWeights};
pub use params::{head_backward, head_forward, HeadCache, HeadDims, ModelParams};
pub use pooling::{attn_pool_backward, attn_pool_forward, init_pooling, Pooled, PoolingParams};
