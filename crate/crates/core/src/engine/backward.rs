use crate::engine::{ForwardTrace, GradientSet, Mode, Network, SurrogateSpec};
use crate::error::{Error, Result};
use crate::numerics::tensor::gemm_into;
use crate::numerics::{Scalar, Tensor};

/// Options shared by the backward algorithms.
#[derive(Debug, Clone, Copy)]
pub struct BackwardOptions<S: Scalar> {
    pub surrogate: SurrogateSpec<S>,
    /// When set, the reset pathway is treated as a constant in the backward
    /// pass: d u[t+1] / d u[t] = decay * (1 - s[t]) only. Off by default,
    /// which keeps the full derivative term -decay * u[t] * H(u[t] - V_th).
    pub detach_reset: bool,
}

impl<S: Scalar> BackwardOptions<S> {
    pub fn new(surrogate: SurrogateSpec<S>) -> Self {
        BackwardOptions {
            surrogate,
            detach_reset: false,
        }
    }
}

/// Full spatio-temporal backpropagation: errors flow across both layers and
/// time, including the recurrent, reset, and readout-decay pathways.
///
/// `d_readout[t]` is the loss gradient at the readout potentials of step `t`
/// (zero tensors where the loss does not touch that step).
pub fn backward_stbp<S: Scalar>(
    net: &Network<S>,
    trace: &ForwardTrace<S>,
    d_readout: &[Tensor<S>],
    opts: &BackwardOptions<S>,
) -> Result<GradientSet<S>> {
    require_mode(trace, Mode::TemporalOn, "backward_stbp")?;
    run_backward(net, trace, d_readout, opts, true)
}

/// Spatial-domain backpropagation: the forward trace keeps its temporal
/// dynamics, but no gradient flows from any step to an earlier one -- the
/// membrane carry, recurrent, and readout-decay pathways are all severed.
pub fn backward_sdbp<S: Scalar>(
    net: &Network<S>,
    trace: &ForwardTrace<S>,
    d_readout: &[Tensor<S>],
    opts: &BackwardOptions<S>,
) -> Result<GradientSet<S>> {
    require_mode(trace, Mode::TemporalOn, "backward_sdbp")?;
    run_backward(net, trace, d_readout, opts, false)
}

/// Per-step spatial backprop over a `TemporalOff` trace; step contributions
/// are summed. Identical in form to SDBP's recursion.
pub fn backward_notd<S: Scalar>(
    net: &Network<S>,
    trace: &ForwardTrace<S>,
    d_readout: &[Tensor<S>],
    opts: &BackwardOptions<S>,
) -> Result<GradientSet<S>> {
    require_mode(trace, Mode::TemporalOff, "backward_notd")?;
    run_backward(net, trace, d_readout, opts, false)
}

fn require_mode<S: Scalar>(trace: &ForwardTrace<S>, want: Mode, who: &str) -> Result<()> {
    if trace.mode != want {
        return Err(Error::InvalidArgument(format!(
            "{who} requires a {want:?} trace, got {:?}",
            trace.mode
        )));
    }
    Ok(())
}

fn run_backward<S: Scalar>(
    net: &Network<S>,
    trace: &ForwardTrace<S>,
    d_readout: &[Tensor<S>],
    opts: &BackwardOptions<S>,
    temporal: bool,
) -> Result<GradientSet<S>> {
    let steps = trace.steps();
    let batch = trace.batch();
    let layer_count = net.layers.len();
    if d_readout.len() != steps {
        return Err(Error::ShapeMismatch(format!(
            "d_readout has {} steps, trace has {steps}",
            d_readout.len()
        )));
    }
    for d in d_readout {
        if d.shape() != [batch, net.classes()] {
            return Err(Error::ShapeMismatch(format!(
                "d_readout frame {:?}, want [{batch}, {}]",
                d.shape(),
                net.classes()
            )));
        }
    }
    let decay = net.params.decay;
    let threshold = net.params.threshold;
    let readout_decay = match trace.mode {
        Mode::TemporalOn => net.readout.decay,
        Mode::TemporalOff => S::zero(),
    };

    // dL/do[t]: accumulate the readout decay chain only when temporal
    // pathways are live.
    let mut gbar: Vec<Tensor<S>> = d_readout.to_vec();
    if temporal {
        for t in (0..steps.saturating_sub(1)).rev() {
            let (head, tail) = gbar.split_at_mut(t + 1);
            head[t].axpy(readout_decay, &tail[0])?;
        }
    }

    let mut grads = GradientSet::zeros_like(net);
    // delta[l] from step t+1, for the temporal pathways
    let mut delta_next: Vec<Tensor<S>> = Vec::new();

    for t in (0..steps).rev() {
        let mut delta_cur: Vec<Tensor<S>> =
            (0..layer_count).map(|_| Tensor::zeros(&[1])).collect();
        for l in (0..layer_count).rev() {
            let layer = &net.layers[l];
            let n = layer.out_dim();
            // ds = dL/ds^l[t], from the layer above (or readout) at this step
            let mut ds = Tensor::zeros(&[batch, n]);
            if l == layer_count - 1 {
                gemm_into(
                    &mut ds,
                    S::one(),
                    &gbar[t],
                    false,
                    &net.readout.w_out,
                    false,
                    S::zero(),
                )?;
            } else {
                gemm_into(
                    &mut ds,
                    S::one(),
                    &delta_cur[l + 1],
                    false,
                    &net.layers[l + 1].w,
                    false,
                    S::zero(),
                )?;
            }
            if temporal && t + 1 < steps {
                let dn = &delta_next[l];
                if let Some(v) = &layer.v {
                    gemm_into(&mut ds, S::one(), dn, false, v, false, S::one())?;
                }
                if !opts.detach_reset {
                    // reset pathway: d u[t+1] / d s[t] = -decay * u[t]
                    let u_t = &trace.u[l][t];
                    for i in 0..ds.len() {
                        ds.data_mut()[i] -= dn.data()[i] * decay * u_t.data()[i];
                    }
                }
            }
            // delta = ds * H(u - V_th) (+ membrane carry when temporal)
            let u_t = &trace.u[l][t];
            let mut delta = ds;
            for i in 0..delta.len() {
                delta.data_mut()[i] =
                    delta.data()[i] * opts.surrogate.value(u_t.data()[i] - threshold);
            }
            if temporal && t + 1 < steps {
                let dn = &delta_next[l];
                let s_t = &trace.s[l][t];
                for i in 0..delta.len() {
                    delta.data_mut()[i] += dn.data()[i] * decay * (S::one() - s_t.data()[i]);
                }
            }
            delta_cur[l] = delta;
        }

        // weight gradients: outer products summed over the batch
        for l in 0..layer_count {
            let below: &Tensor<S> = if l == 0 {
                &trace.inputs[t]
            } else {
                &trace.s[l - 1][t]
            };
            gemm_into(
                &mut grads.layers[l].w,
                S::one(),
                &delta_cur[l],
                true,
                below,
                false,
                S::one(),
            )?;
            if let (Some(gv), true) = (grads.layers[l].v.as_mut(), trace.mode == Mode::TemporalOn)
            {
                if t > 0 {
                    gemm_into(
                        gv,
                        S::one(),
                        &delta_cur[l],
                        true,
                        &trace.s[l][t - 1],
                        false,
                        S::one(),
                    )?;
                }
            }
        }
        gemm_into(
            &mut grads.w_out,
            S::one(),
            &gbar[t],
            true,
            &trace.s[layer_count - 1][t],
            false,
            S::one(),
        )?;

        delta_next = delta_cur;
    }

    grads.ensure_finite()?;
    Ok(grads)
}
