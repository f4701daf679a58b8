use crate::error::{Error, Result};
use crate::numerics::{Rng64, Scalar, Tensor};

/// Leaky integrate-and-fire neuron parameters. Resting potential is fixed 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LifParams<S: Scalar> {
    /// Membrane decay factor, in [0, 1].
    pub decay: S,
    /// Firing threshold, > 0.
    pub threshold: S,
}

impl<S: Scalar> LifParams<S> {
    pub fn new(decay: S, threshold: S) -> Result<Self> {
        if decay < S::zero() || decay > S::one() {
            return Err(Error::InvalidArgument(format!(
                "decay must lie in [0, 1], got {decay}"
            )));
        }
        if threshold <= S::zero() {
            return Err(Error::InvalidArgument(format!(
                "threshold must be positive, got {threshold}"
            )));
        }
        Ok(LifParams { decay, threshold })
    }
}

/// Forward regime: `TemporalOn` keeps the membrane-carry term of the LIF
/// update, `TemporalOff` drops it so every step is processed independently.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    TemporalOn,
    TemporalOff,
}

/// One spiking layer: feedforward matrix `w` (out x in) and an optional
/// recurrent matrix `v` (out x out) that feeds last step's own spikes back in.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerWeights<S: Scalar> {
    pub w: Tensor<S>,
    pub v: Option<Tensor<S>>,
}

impl<S: Scalar> LayerWeights<S> {
    pub fn out_dim(&self) -> usize {
        self.w.rows()
    }

    pub fn in_dim(&self) -> usize {
        self.w.cols()
    }
}

/// Non-spiking leaky-integrator readout: o[t] = decay * o[t-1] + W_out * s^L[t].
/// It never spikes and never resets.
#[derive(Debug, Clone, PartialEq)]
pub struct Readout<S: Scalar> {
    pub w_out: Tensor<S>,
    pub decay: S,
}

/// A full network: hidden spiking layers plus the readout.
#[derive(Debug, Clone, PartialEq)]
pub struct Network<S: Scalar> {
    pub layers: Vec<LayerWeights<S>>,
    pub readout: Readout<S>,
    pub params: LifParams<S>,
}

/// How to initialize the recurrent matrices of a new network.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecurrentInit {
    /// No recurrent matrices at all.
    None,
    /// Zero matrices; the probe uses this so all arms share the same W draws.
    Zero,
    /// Uniform fan-in scaled draws, like the feedforward matrices.
    Uniform,
}

impl<S: Scalar> Network<S> {
    /// Build a network with uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) weights
    /// drawn from `rng`. `widths` excludes input and output extents, which are
    /// passed separately.
    pub fn init(
        input_dim: usize,
        hidden: &[usize],
        classes: usize,
        recurrent: RecurrentInit,
        params: LifParams<S>,
        readout_decay: S,
        rng: &mut Rng64,
    ) -> Self {
        let mut layers = Vec::with_capacity(hidden.len());
        let mut prev = input_dim;
        for &n in hidden {
            let w = uniform_fan_in(n, prev, rng);
            let v = match recurrent {
                RecurrentInit::None => None,
                RecurrentInit::Zero => Some(Tensor::zeros(&[n, n])),
                RecurrentInit::Uniform => Some(uniform_fan_in(n, n, rng)),
            };
            layers.push(LayerWeights { w, v });
            prev = n;
        }
        let w_out = uniform_fan_in(classes, prev, rng);
        Network {
            layers,
            readout: Readout {
                w_out,
                decay: readout_decay,
            },
            params,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn classes(&self) -> usize {
        self.readout.w_out.rows()
    }

    pub fn is_recurrent(&self) -> bool {
        self.layers.iter().any(|l| l.v.is_some())
    }

    /// All weight tensors in a fixed order (per layer: w then v, finally
    /// w_out). Gradient sets enumerate in the same order.
    pub fn flat(&self) -> Vec<&Tensor<S>> {
        let mut out = Vec::new();
        for l in &self.layers {
            out.push(&l.w);
            if let Some(v) = &l.v {
                out.push(v);
            }
        }
        out.push(&self.readout.w_out);
        out
    }

    pub fn flat_mut(&mut self) -> Vec<&mut Tensor<S>> {
        let mut out = Vec::new();
        for l in &mut self.layers {
            out.push(&mut l.w);
            if let Some(v) = &mut l.v {
                out.push(v);
            }
        }
        out.push(&mut self.readout.w_out);
        out
    }
}

fn uniform_fan_in<S: Scalar>(out: usize, fan_in: usize, rng: &mut Rng64) -> Tensor<S> {
    let bound = 1.0 / (fan_in.max(1) as f64).sqrt();
    let data: Vec<S> = (0..out * fan_in)
        .map(|_| S::from_cfg(rng.uniform(-bound, bound)))
        .collect();
    Tensor::from_vec(&[out, fan_in], data).expect("sized by construction")
}

/// Per-layer gradients, shapes mirroring [`LayerWeights`].
#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrads<S: Scalar> {
    pub w: Tensor<S>,
    pub v: Option<Tensor<S>>,
}

/// Gradients for every weight in a [`Network`].
#[derive(Debug, Clone, PartialEq)]
pub struct GradientSet<S: Scalar> {
    pub layers: Vec<LayerGrads<S>>,
    pub w_out: Tensor<S>,
}

impl<S: Scalar> GradientSet<S> {
    pub fn zeros_like(net: &Network<S>) -> Self {
        GradientSet {
            layers: net
                .layers
                .iter()
                .map(|l| LayerGrads {
                    w: Tensor::zeros(l.w.shape()),
                    v: l.v.as_ref().map(|v| Tensor::zeros(v.shape())),
                })
                .collect(),
            w_out: Tensor::zeros(net.readout.w_out.shape()),
        }
    }

    /// Same fixed order as [`Network::flat`].
    pub fn flat(&self) -> Vec<&Tensor<S>> {
        let mut out = Vec::new();
        for l in &self.layers {
            out.push(&l.w);
            if let Some(v) = &l.v {
                out.push(v);
            }
        }
        out.push(&self.w_out);
        out
    }

    pub fn flat_mut(&mut self) -> Vec<&mut Tensor<S>> {
        let mut out = Vec::new();
        for l in &mut self.layers {
            out.push(&mut l.w);
            if let Some(v) = &mut l.v {
                out.push(v);
            }
        }
        out.push(&mut self.w_out);
        out
    }

    pub fn ensure_finite(&self) -> Result<()> {
        for g in self.flat() {
            g.ensure_finite("gradient")?;
        }
        Ok(())
    }

    /// Global L2 norm over every entry.
    pub fn global_norm(&self) -> S {
        self.flat()
            .iter()
            .map(|t| {
                let n = t.frob_norm();
                n * n
            })
            .sum::<S>()
            .sqrt()
    }

    /// Scale all gradients so the global norm is at most `max_norm`.
    pub fn clip_global_norm(&mut self, max_norm: S) {
        let norm = self.global_norm();
        if norm > max_norm && norm > S::zero() {
            let f = max_norm / norm;
            for g in self.flat_mut() {
                g.scale(f);
            }
        }
    }
}
