use crate::error::{Error, Result};
use crate::numerics::Rng64;
use crate::tasks::{MnistData, SequenceDataset};

/// Length of the flattened pixel sequence.
pub const SEQ_LEN: usize = 28 * 28;

/// Documented default permutation seed; the task is only meaningful when
/// train and test share one permutation, so the seed is part of the spec.
pub const DEFAULT_PERM_SEED: u64 = 2024;

/// The single fixed pixel permutation for a given seed.
pub fn ps_mnist_permutation(seed: u64) -> Vec<usize> {
    Rng64::new(seed).fisher_yates(SEQ_LEN)
}

/// Build the permuted-sequential MNIST dataset: each 28x28 image flattened
/// row-major to 784 steps of one channel, pixel order shuffled by the shared
/// permutation, bytes scaled to [0, 1] by /255.
pub fn make_ps_mnist(data: &MnistData, seed: u64) -> Result<SequenceDataset> {
    make_ps_mnist_with_perm(data, seed, &ps_mnist_permutation(seed))
}

/// Same construction with an explicit permutation; the identity permutation
/// recovers plain sequential MNIST (test hook).
pub fn make_ps_mnist_with_perm(
    data: &MnistData,
    seed: u64,
    perm: &[usize],
) -> Result<SequenceDataset> {
    if data.rows != 28 || data.cols != 28 {
        return Err(Error::ShapeMismatch(format!(
            "PS-MNIST expects 28x28 images, got {}x{}",
            data.rows, data.cols
        )));
    }
    if perm.len() != SEQ_LEN {
        return Err(Error::InvalidArgument(format!(
            "permutation length {} != {SEQ_LEN}",
            perm.len()
        )));
    }
    let n = data.samples;
    let mut inputs = Vec::with_capacity(n * SEQ_LEN);
    for i in 0..n {
        let flat = &data.pixels[i * SEQ_LEN..(i + 1) * SEQ_LEN];
        for &p in perm {
            inputs.push(flat[p] as f32 / 255.0);
        }
    }
    let labels = data.labels.iter().map(|&l| l as u16).collect();
    SequenceDataset::new("ps-mnist", seed, n, SEQ_LEN, 1, 10, inputs, labels)
}
