//! DCNN function blocks: inner product, pooling and activation.

mod activation;
mod inner;
mod pool;

pub use activation::{
    btanh, btanh_signed, optimal_states, stanh, Boundary, BtanhState, FebKind, FsmActivation,
    SamplePoint,
};
pub use inner::{inner_product, products, IpOutput, IpVariant};
pub use pool::{
    avg_pool, avg_pool_counts, avg_pool_signed, max_pool_hw, max_pool_hw_counts,
    SegmentSelector, DEFAULT_SEGMENT,
};
