//! Deterministic dense linear algebra and seeded randomness shared by every
//! other module.

mod rng;
mod scalar;
pub(crate) mod tensor;

pub use rng::Rng64;
pub use scalar::Scalar;
pub use tensor::{gemm_into, Tensor};
