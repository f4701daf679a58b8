//! LIF network forward dynamics and the three backward algorithms that make
//! up the segregated temporal probe.

mod backward;
mod forward;
mod loss;
mod surrogate;
mod types;

pub use backward::{backward_notd, backward_sdbp, backward_stbp, BackwardOptions};
pub use forward::{lif_forward, smooth_forward, ForwardTrace};
pub use loss::softmax_xent;
pub use surrogate::SurrogateSpec;
pub use types::{
    GradientSet, LayerGrads, LayerWeights, LifParams, Mode, Network, Readout, RecurrentInit,
};
