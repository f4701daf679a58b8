use crate::engine::{Mode, SurrogateSpec};
use crate::error::{Error, Result};
use crate::numerics::Scalar;
use crate::train::{OptimizerKind, Schedule};

/// Which backward algorithm a run uses. STBP/SDBP share the `TemporalOn`
/// forward; NoTD runs the stateless `TemporalOff` forward.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Stbp,
    Sdbp,
    Notd,
}

impl Algorithm {
    pub fn mode(self) -> Mode {
        match self {
            Algorithm::Stbp | Algorithm::Sdbp => Mode::TemporalOn,
            Algorithm::Notd => Mode::TemporalOff,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Stbp => "stbp",
            Algorithm::Sdbp => "sdbp",
            Algorithm::Notd => "notd",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "stbp" => Ok(Algorithm::Stbp),
            "sdbp" => Ok(Algorithm::Sdbp),
            "notd" => Ok(Algorithm::Notd),
            other => Err(Error::InvalidArgument(format!(
                "unknown algorithm '{other}' (expected stbp, sdbp, or notd)"
            ))),
        }
    }
}

/// How a NoTD run turns per-step readout potentials into one prediction.
///
/// The default is the final frame's logits: under a stateless forward every
/// step is independent, and predicting from the last frame keeps the arm
/// genuinely frame-level. Averaging logits over steps would re-introduce
/// temporal integration at evaluation time (a mean over frames can count
/// across the sequence), defeating the point of the comparison; it remains
/// selectable for analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregation {
    /// argmax of the mean logits over steps.
    MeanLogits,
    /// the step with the strongest single-class response decides.
    MaxResponseFrame,
    /// final step's logits (default).
    LastStep,
}

/// Everything that determines a training run. All hyperparameters live here
/// as f64 and are narrowed to the run's scalar type at use sites, so one
/// config drives both f32 and f64 runs.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub optimizer: OptimizerKind,
    pub schedule: Schedule,
    pub seed: u64,
    /// Hidden layer widths, excluding input and output extents.
    pub hidden: Vec<usize>,
    pub recurrent: bool,
    pub decay: f64,
    pub threshold: f64,
    /// Readout integrator decay; forced to 0 under NoTD's stateless forward.
    pub readout_decay: f64,
    pub surrogate: SurrogateSpec<f64>,
    pub detach_reset: bool,
    pub algorithm: Algorithm,
    pub grad_clip: Option<f64>,
    pub aggregation: Aggregation,
}

impl TrainConfig {
    /// Published Binary Adding configuration: 50 epochs, AdamW, lr 5e-4,
    /// StepLR 0.8 every 10 epochs, batch 250, decay 0.98, threshold 0.5,
    /// hidden widths 128-128.
    pub fn binary_adding(algorithm: Algorithm, recurrent: bool, seed: u64) -> Self {
        TrainConfig {
            epochs: 50,
            batch_size: 250,
            lr: 5e-4,
            optimizer: OptimizerKind::adamw_default(),
            schedule: Schedule::StepLr {
                factor: 0.8,
                period: 10,
            },
            seed,
            hidden: vec![128, 128],
            recurrent,
            decay: 0.98,
            threshold: 0.5,
            readout_decay: 1.0,
            surrogate: SurrogateSpec::rectangle_default(),
            detach_reset: false,
            algorithm,
            grad_clip: if recurrent { Some(1.0) } else { None },
            aggregation: Aggregation::LastStep,
        }
    }

    /// Published PS-MNIST configuration: 100 epochs, AdamW, lr 5e-4, StepLR,
    /// batch 256, decay 1.0, threshold 0.5, hidden widths 64-256-256.
    pub fn ps_mnist(algorithm: Algorithm, recurrent: bool, seed: u64) -> Self {
        TrainConfig {
            epochs: 100,
            batch_size: 256,
            hidden: vec![64, 256, 256],
            decay: 1.0,
            ..TrainConfig::binary_adding(algorithm, recurrent, seed)
        }
    }

    pub fn validate(&self, classes: usize) -> Result<()> {
        // epochs = 0 is allowed: an initialization-only run that still
        // evaluates and writes a checkpoint
        if self.batch_size == 0 {
            return Err(Error::InvalidArgument("batch size must be positive".into()));
        }
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return Err(Error::InvalidArgument(
                "hidden widths must be non-empty and positive".into(),
            ));
        }
        if !(self.lr >= 0.0 && self.lr.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "learning rate must be finite and >= 0, got {}",
                self.lr
            )));
        }
        if classes == 0 {
            return Err(Error::InvalidArgument("task has zero classes".into()));
        }
        if let Some(c) = self.grad_clip {
            if !(c > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "gradient clip norm must be positive, got {c}"
                )));
            }
        }
        // decay/threshold ranges are enforced again by LifParams::new
        self.lif::<f64>().map(|_| ())
    }

    pub fn lif<S: Scalar>(&self) -> Result<crate::engine::LifParams<S>> {
        crate::engine::LifParams::new(S::from_cfg(self.decay), S::from_cfg(self.threshold))
    }

    /// Readout decay after the algorithm's mode is applied: NoTD processes
    /// steps independently, so its readout carries nothing.
    pub fn effective_readout_decay(&self) -> f64 {
        match self.algorithm {
            Algorithm::Notd => 0.0,
            _ => self.readout_decay,
        }
    }

    pub fn surrogate_as<S: Scalar>(&self) -> SurrogateSpec<S> {
        match self.surrogate {
            SurrogateSpec::Rectangle { width } => SurrogateSpec::Rectangle {
                width: S::from_cfg(width),
            },
            SurrogateSpec::Triangle { half_width } => SurrogateSpec::Triangle {
                half_width: S::from_cfg(half_width),
            },
            SurrogateSpec::Sigmoid { slope } => SurrogateSpec::Sigmoid {
                slope: S::from_cfg(slope),
            },
            SurrogateSpec::MultiGaussian { height, sigma } => SurrogateSpec::MultiGaussian {
                height: S::from_cfg(height),
                sigma: S::from_cfg(sigma),
            },
        }
    }
}
