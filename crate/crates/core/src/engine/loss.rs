use crate::error::{Error, Result};
use crate::numerics::{Scalar, Tensor};

/// Mean softmax cross-entropy over a batch of logits.
///
/// Returns the loss and its gradient with respect to the logits,
/// `(softmax - onehot) / batch`.
pub fn softmax_xent<S: Scalar>(logits: &Tensor<S>, labels: &[usize]) -> Result<(S, Tensor<S>)> {
    if logits.ndim() != 2 || logits.rows() != labels.len() {
        return Err(Error::ShapeMismatch(format!(
            "logits {:?} vs {} labels",
            logits.shape(),
            labels.len()
        )));
    }
    let (batch, classes) = (logits.rows(), logits.cols());
    for &y in labels {
        if y >= classes {
            return Err(Error::InvalidArgument(format!(
                "label {y} out of range for {classes} classes"
            )));
        }
    }
    let inv_batch = S::from_cfg(1.0 / batch as f64);
    let mut grad = Tensor::zeros(&[batch, classes]);
    let mut loss = S::zero();
    for b in 0..batch {
        let row: Vec<S> = (0..classes).map(|c| logits.at(b, c)).collect();
        let max = row.iter().cloned().fold(S::neg_infinity(), S::max);
        let exps: Vec<S> = row.iter().map(|&x| (x - max).exp()).collect();
        let z: S = exps.iter().cloned().sum();
        let log_z = z.ln() + max;
        loss += (log_z - row[labels[b]]) * inv_batch;
        for c in 0..classes {
            let p = exps[c] / z;
            let target = if c == labels[b] { S::one() } else { S::zero() };
            *grad.at_mut(b, c) = (p - target) * inv_batch;
        }
    }
    Ok((loss, grad))
}
