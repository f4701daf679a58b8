use crate::engine::{GradientSet, Network};
use crate::error::{Error, Result};
use crate::numerics::{Scalar, Tensor};

/// Optimizer family plus its hyperparameters (stored as f64, narrowed at the
/// update site so one config drives either scalar type).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OptimizerKind {
    Sgd {
        momentum: f64,
    },
    AdamW {
        beta1: f64,
        beta2: f64,
        eps: f64,
        weight_decay: f64,
    },
}

impl OptimizerKind {
    pub fn adamw_default() -> Self {
        OptimizerKind::AdamW {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay: 0.01,
        }
    }

    pub fn sgd_plain() -> Self {
        OptimizerKind::Sgd { momentum: 0.0 }
    }
}

/// Mutable optimizer state. Buffer layout mirrors [`Network::flat`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimState<S: Scalar> {
    pub kind: OptimizerKind,
    /// SGD: momentum buffers (empty when momentum = 0).
    /// AdamW: first moments.
    pub m: Vec<Tensor<S>>,
    /// AdamW second moments; empty for SGD.
    pub v: Vec<Tensor<S>>,
    pub step: u64,
}

impl<S: Scalar> OptimState<S> {
    pub fn new(kind: OptimizerKind, net: &Network<S>) -> Self {
        let zeros: Vec<Tensor<S>> = net.flat().iter().map(|w| Tensor::zeros(w.shape())).collect();
        let (m, v) = match kind {
            OptimizerKind::Sgd { momentum } => {
                if momentum == 0.0 {
                    (Vec::new(), Vec::new())
                } else {
                    (zeros, Vec::new())
                }
            }
            OptimizerKind::AdamW { .. } => (zeros.clone(), zeros),
        };
        OptimState { kind, m, v, step: 0 }
    }

    /// Apply one update with learning rate `lr`. AdamW uses decoupled weight
    /// decay and bias-corrected moments.
    pub fn step(&mut self, net: &mut Network<S>, grads: &GradientSet<S>, lr: f64) -> Result<()> {
        let weights = net.flat_mut();
        let gs = grads.flat();
        if weights.len() != gs.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} weight tensors vs {} gradient tensors",
                weights.len(),
                gs.len()
            )));
        }
        for g in &gs {
            g.ensure_finite("optimizer input gradient")?;
        }
        self.step += 1;
        let lr = S::from_cfg(lr);
        match self.kind {
            OptimizerKind::Sgd { momentum } => {
                let mu = S::from_cfg(momentum);
                for (i, (w, g)) in weights.into_iter().zip(gs).enumerate() {
                    if momentum == 0.0 {
                        w.axpy(-lr, g)?;
                    } else {
                        let buf = &mut self.m[i];
                        buf.scale(mu);
                        buf.axpy(S::one(), g)?;
                        w.axpy(-lr, buf)?;
                    }
                }
            }
            OptimizerKind::AdamW {
                beta1,
                beta2,
                eps,
                weight_decay,
            } => {
                let b1 = S::from_cfg(beta1);
                let b2 = S::from_cfg(beta2);
                let eps = S::from_cfg(eps);
                let wd = S::from_cfg(weight_decay);
                let t = self.step as i32;
                let bc1 = S::one() - S::from_cfg(beta1.powi(t));
                let bc2 = S::one() - S::from_cfg(beta2.powi(t));
                for (i, (w, g)) in weights.into_iter().zip(gs).enumerate() {
                    let m = &mut self.m[i];
                    let v = &mut self.v[i];
                    for ((wx, gx), (mx, vx)) in w
                        .data_mut()
                        .iter_mut()
                        .zip(g.data())
                        .zip(m.data_mut().iter_mut().zip(v.data_mut()))
                    {
                        *mx = b1 * *mx + (S::one() - b1) * *gx;
                        *vx = b2 * *vx + (S::one() - b2) * *gx * *gx;
                        let m_hat = *mx / bc1;
                        let v_hat = *vx / bc2;
                        // decoupled decay, then the Adam step
                        *wx -= lr * wd * *wx;
                        *wx -= lr * m_hat / (v_hat.sqrt() + eps);
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{LifParams, RecurrentInit};
    use crate::numerics::Rng64;

    fn toy_net(seed: u64) -> Network<f64> {
        let params = LifParams::new(0.5, 0.5).unwrap();
        Network::init(
            2,
            &[3],
            2,
            RecurrentInit::None,
            params,
            1.0,
            &mut Rng64::new(seed),
        )
    }

    fn single_weight_net(w0: f64) -> Network<f64> {
        let mut net = Network::init(
            1,
            &[1],
            1,
            RecurrentInit::None,
            LifParams::new(0.0, 0.5).unwrap(),
            0.0,
            &mut Rng64::new(0),
        );
        for w in net.flat_mut() {
            w.data_mut()[0] = w0;
        }
        net
    }

    fn grads_of(net: &Network<f64>, g: f64) -> GradientSet<f64> {
        let mut gs = GradientSet::zeros_like(net);
        for t in gs.flat_mut() {
            for x in t.data_mut() {
                *x = g;
            }
        }
        gs
    }

    #[test]
    fn zero_grad_zero_decay_is_identity() {
        let mut net = toy_net(1);
        let before = net.clone();
        let mut st = OptimState::new(
            OptimizerKind::AdamW {
                beta1: 0.9,
                beta2: 0.999,
                eps: 1e-8,
                weight_decay: 0.0,
            },
            &net,
        );
        let g = GradientSet::zeros_like(&net);
        st.step(&mut net, &g, 0.1).unwrap();
        assert_eq!(net, before);
    }

    #[test]
    fn adamw_first_step_magnitude() {
        // w=0, g=1, lr=0.1, no decay: bias-corrected m_hat = v_hat = 1,
        // so the update is -lr / (1 + eps) ~ -0.1
        let mut net = single_weight_net(0.0);
        let mut st = OptimState::new(
            OptimizerKind::AdamW {
                beta1: 0.9,
                beta2: 0.999,
                eps: 1e-8,
                weight_decay: 0.0,
            },
            &net,
        );
        let g = grads_of(&net, 1.0);
        st.step(&mut net, &g, 0.1).unwrap();
        for w in net.flat() {
            assert!((w.data()[0] + 0.1).abs() < 1e-8, "got {}", w.data()[0]);
        }
    }

    #[test]
    fn adamw_decay_only() {
        // g=0, decay=0.01, lr=0.1, w=1: moments stay zero so the Adam term
        // vanishes and only the decoupled decay acts: w -> 1 - 0.001
        let mut net = single_weight_net(1.0);
        let mut st = OptimState::new(OptimizerKind::adamw_default(), &net);
        let g = GradientSet::zeros_like(&net);
        st.step(&mut net, &g, 0.1).unwrap();
        for w in net.flat() {
            assert!((w.data()[0] - 0.999).abs() < 1e-15);
        }
    }

    #[test]
    fn sgd_plain_step() {
        let mut net = single_weight_net(0.5);
        let mut st = OptimState::new(OptimizerKind::sgd_plain(), &net);
        let g = grads_of(&net, 2.0);
        st.step(&mut net, &g, 0.1).unwrap();
        for w in net.flat() {
            assert!((w.data()[0] - 0.3).abs() < 1e-15);
        }
    }

    #[test]
    fn sgd_momentum_accumulates() {
        let mut net = single_weight_net(0.0);
        let mut st = OptimState::new(OptimizerKind::Sgd { momentum: 0.9 }, &net);
        let g = grads_of(&net, 1.0);
        st.step(&mut net, &g, 0.1).unwrap(); // buf = 1, w = -0.1
        st.step(&mut net, &g, 0.1).unwrap(); // buf = 1.9, w = -0.29
        for w in net.flat() {
            assert!((w.data()[0] + 0.29).abs() < 1e-12);
        }
        assert_eq!(st.step, 2);
    }

    #[test]
    fn non_finite_gradient_rejected() {
        let mut net = toy_net(2);
        let mut st = OptimState::new(OptimizerKind::adamw_default(), &net);
        let mut g = GradientSet::zeros_like(&net);
        g.flat_mut()[0].data_mut()[0] = f64::NAN;
        assert!(st.step(&mut net, &g, 0.1).is_err());
    }
}
