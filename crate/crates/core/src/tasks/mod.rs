//! Temporal-processing benchmark construction and loading: Binary Adding,
//! PS-MNIST, and the on-disk dataset container shared by both.

mod binary_adding;
mod dataset;
mod mnist;
mod ps_mnist;

pub use binary_adding::{brute_force_label, gen_binary_adding, BalanceMode, BinaryAddingSpec};
pub use dataset::{DatasetMeta, SequenceDataset};
pub use mnist::{load_mnist_idx, MnistData};
pub use ps_mnist::{
    make_ps_mnist, make_ps_mnist_with_perm, ps_mnist_permutation, DEFAULT_PERM_SEED, SEQ_LEN,
};
