//! Independent gradient oracles for the acceptance suite.
//!
//! Nothing here reuses the library's backward recursions: finite differences
//! probe the smooth forward pass directly, and the literal evaluator expands
//! the unrolled chain rule as explicit sums over step pairs with plain-loop
//! linear algebra, so agreement with the engine is evidence, not a tautology.

use stp_core::engine::{
    smooth_forward, softmax_xent, ForwardTrace, GradientSet, Mode, Network, SurrogateSpec,
};
use stp_core::numerics::Tensor;

/// Scalar loss of the smooth (exactly differentiable) forward pass:
/// cross-entropy on the final-step readout potentials.
pub fn smooth_loss(
    net: &Network<f64>,
    inputs: &Tensor<f64>,
    labels: &[usize],
    spec: SurrogateSpec<f64>,
) -> f64 {
    let trace = smooth_forward(net, inputs, Mode::TemporalOn, spec).expect("smooth forward");
    softmax_xent(trace.final_logits(), labels).expect("loss").0
}

/// Central finite differences of [`smooth_loss`] with respect to every
/// weight, in the same flat order as [`Network::flat`].
pub fn fd_gradients(
    net: &Network<f64>,
    inputs: &Tensor<f64>,
    labels: &[usize],
    spec: SurrogateSpec<f64>,
    h: f64,
) -> Vec<Tensor<f64>> {
    let mut work = net.clone();
    let shapes: Vec<Vec<usize>> = work.flat().iter().map(|t| t.shape().to_vec()).collect();
    let mut out: Vec<Tensor<f64>> = shapes.iter().map(|s| Tensor::zeros(s)).collect();
    for (ti, shape) in shapes.iter().enumerate() {
        let len: usize = shape.iter().product();
        for j in 0..len {
            let orig = work.flat()[ti].data()[j];
            work.flat_mut()[ti].data_mut()[j] = orig + h;
            let up = smooth_loss(&work, inputs, labels, spec);
            work.flat_mut()[ti].data_mut()[j] = orig - h;
            let down = smooth_loss(&work, inputs, labels, spec);
            work.flat_mut()[ti].data_mut()[j] = orig;
            out[ti].data_mut()[j] = (up - down) / (2.0 * h);
        }
    }
    out
}

/// Largest relative disagreement between two gradient lists. The floor in the
/// denominator keeps 0-versus-1e-12 noise from reading as a 100% error.
pub fn max_rel_err(analytic: &[&Tensor<f64>], oracle: &[Tensor<f64>]) -> f64 {
    assert_eq!(analytic.len(), oracle.len());
    let mut worst = 0.0f64;
    for (a, b) in analytic.iter().zip(oracle) {
        assert_eq!(a.shape(), b.shape());
        for (&x, &y) in a.data().iter().zip(b.data()) {
            let denom = x.abs().max(y.abs()).max(1e-4);
            worst = worst.max((x - y).abs() / denom);
        }
    }
    worst
}

/// Largest absolute entry-wise difference between two gradient lists.
pub fn max_abs_diff(a: &GradientSet<f64>, b: &GradientSet<f64>) -> f64 {
    a.flat()
        .iter()
        .zip(b.flat())
        .flat_map(|(x, y)| {
            x.data()
                .iter()
                .zip(y.data())
                .map(|(&p, &q)| (p - q).abs())
                .collect::<Vec<_>>()
        })
        .fold(0.0, f64::max)
}

/// `dst += a^T * b` with plain loops (a, b: batch x rows / batch x cols).
fn outer_acc(dst: &mut Tensor<f64>, a: &Tensor<f64>, b: &Tensor<f64>) {
    let (batch, rows, cols) = (a.rows(), a.cols(), b.cols());
    assert_eq!(b.rows(), batch);
    assert_eq!(dst.shape(), &[rows, cols]);
    for s in 0..batch {
        for i in 0..rows {
            let ai = a.at(s, i);
            for j in 0..cols {
                *dst.at_mut(i, j) += ai * b.at(s, j);
            }
        }
    }
}

/// `a * b` with plain loops.
fn mat_mul(a: &Tensor<f64>, b: &Tensor<f64>) -> Tensor<f64> {
    let (m, k, n) = (a.rows(), a.cols(), b.cols());
    assert_eq!(b.rows(), k);
    let mut c = Tensor::zeros(&[m, n]);
    for i in 0..m {
        for l in 0..k {
            let ail = a.at(i, l);
            for j in 0..n {
                *c.at_mut(i, j) += ail * b.at(l, j);
            }
        }
    }
    c
}

/// Literal unrolled-in-time gradient for a feedforward network over a
/// hard-threshold `TemporalOn` trace.
///
/// Every temporal pathway (membrane carry, the reset term, and the readout
/// decay chain) appears as an explicit sum over step pairs `(t, tau)` with a
/// running product of per-step in-layer factors, O(T^2) per layer, instead of
/// the engine's backward recursion. With `temporal: false` only the
/// `tau == t` terms survive and the readout chain is dropped, which is the
/// spatial-only gradient.
pub fn literal_gradients(
    net: &Network<f64>,
    trace: &ForwardTrace<f64>,
    d_readout: &[Tensor<f64>],
    spec: SurrogateSpec<f64>,
    temporal: bool,
) -> GradientSet<f64> {
    assert!(
        net.layers.iter().all(|l| l.v.is_none()),
        "literal oracle covers feedforward networks"
    );
    let steps = trace.steps();
    let batch = trace.batch();
    let layers = net.layers.len();
    let lam = net.params.decay;
    let th = net.params.threshold;
    let lam_out = net.readout.decay;

    // dL/do[t]: the readout decay chain as an explicit geometric double sum
    let mut gbar: Vec<Tensor<f64>> = Vec::with_capacity(steps);
    for t in 0..steps {
        let mut g = d_readout[t].clone();
        if temporal {
            for t2 in (t + 1)..steps {
                g.axpy(lam_out.powi((t2 - t) as i32), &d_readout[t2]).unwrap();
            }
        }
        gbar.push(g);
    }

    // surrogate factor H[t] = H(u - th) and the in-layer step factor
    // p[t] = d u[t+1] / d u[t] = lam * (1 - s[t]) - lam * u[t] * H[t]
    // (direct carry plus the path through the reset), both elementwise
    let surro: Vec<Vec<Tensor<f64>>> = (0..layers)
        .map(|l| {
            (0..steps)
                .map(|t| trace.u[l][t].map(|u| spec.value(u - th)))
                .collect()
        })
        .collect();
    let carry: Vec<Vec<Tensor<f64>>> = (0..layers)
        .map(|l| {
            (0..steps)
                .map(|t| {
                    let mut p = Tensor::zeros(trace.u[l][t].shape());
                    for i in 0..p.len() {
                        let u = trace.u[l][t].data()[i];
                        let s = trace.s[l][t].data()[i];
                        let hh = surro[l][t].data()[i];
                        p.data_mut()[i] = lam * (1.0 - s) - lam * u * hh;
                    }
                    p
                })
                .collect()
        })
        .collect();

    // dL/du layer by layer from the top; `source[tau]` is dL/ds^l[tau]
    // through everything above layer l
    let mut delta: Vec<Vec<Tensor<f64>>> = vec![Vec::new(); layers];
    for l in (0..layers).rev() {
        let source: Vec<Tensor<f64>> = (0..steps)
            .map(|tau| {
                if l == layers - 1 {
                    mat_mul(&gbar[tau], &net.readout.w_out)
                } else {
                    mat_mul(&delta[l + 1][tau], &net.layers[l + 1].w)
                }
            })
            .collect();
        let n = net.layers[l].out_dim();
        let mut dl: Vec<Tensor<f64>> = Vec::with_capacity(steps);
        for t in 0..steps {
            let mut acc = Tensor::zeros(&[batch, n]);
            let mut prod = Tensor::from_vec(&[batch, n], vec![1.0; batch * n]).unwrap();
            for tau in t..steps {
                if tau > t {
                    prod.hadamard(&carry[l][tau - 1]).unwrap();
                }
                // exit the layer through the spike at step tau
                let mut term = source[tau].clone();
                term.hadamard(&surro[l][tau]).unwrap();
                term.hadamard(&prod).unwrap();
                acc.axpy(1.0, &term).unwrap();
                if !temporal {
                    break;
                }
            }
            dl.push(acc);
        }
        delta[l] = dl;
    }

    let mut grads = GradientSet::zeros_like(net);
    for l in 0..layers {
        for t in 0..steps {
            let below = if l == 0 { &trace.inputs[t] } else { &trace.s[l - 1][t] };
            outer_acc(&mut grads.layers[l].w, &delta[l][t], below);
        }
    }
    for t in 0..steps {
        outer_acc(&mut grads.w_out, &gbar[t], &trace.s[layers - 1][t]);
    }
    grads
}
