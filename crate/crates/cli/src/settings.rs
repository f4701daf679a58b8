//! Translation from the raw key/value [`Config`] to the typed structures the
//! core library consumes.

use std::path::PathBuf;

use stp_core::engine::SurrogateSpec;
use stp_core::stp::Thresholds;
use stp_core::tasks::{BalanceMode, BinaryAddingSpec};
use stp_core::train::{Aggregation, Algorithm, OptimizerKind, Schedule, TrainConfig};

use crate::config::Config;
use crate::CliError;

/// Which benchmark the run targets.
#[derive(Debug, Clone, PartialEq)]
pub enum TaskSettings {
    BinaryAdding(BinaryAddingSpec),
    PsMnist {
        perm_seed: u64,
        images_train: PathBuf,
        labels_train: PathBuf,
        images_test: PathBuf,
        labels_test: PathBuf,
    },
}

impl TaskSettings {
    pub fn name(&self) -> &'static str {
        match self {
            TaskSettings::BinaryAdding(_) => "binary-adding",
            TaskSettings::PsMnist { .. } => "ps-mnist",
        }
    }
}

pub fn task_settings(cfg: &Config, data_root: &std::path::Path) -> Result<TaskSettings, CliError> {
    let name = cfg.get_or("task", "name", "binary-adding");
    match name {
        "binary-adding" => {
            let balance = match cfg.get_or("task", "balance", "balanced") {
                "natural" => BalanceMode::Natural,
                "balanced" => BalanceMode::Balanced,
                other => {
                    return Err(CliError::config(format!(
                        "task.balance: '{other}' is not natural or balanced"
                    )))
                }
            };
            Ok(TaskSettings::BinaryAdding(BinaryAddingSpec {
                steps: cfg.get_usize("task", "steps", 100)?,
                train_size: cfg.get_usize("task", "train_size", 50_000)?,
                test_size: cfg.get_usize("task", "test_size", 2_000)?,
                seed: cfg.get_u64("task", "seed", 1)?,
                balance,
            }))
        }
        "ps-mnist" => {
            let path = |key: &str, default: &str| -> PathBuf {
                match cfg.get("task", key) {
                    Some(p) => data_root.join(p),
                    None => data_root.join("mnist").join(default),
                }
            };
            Ok(TaskSettings::PsMnist {
                perm_seed: cfg.get_u64("task", "perm_seed", 2024)?,
                images_train: path("images_train", "train-images-idx3-ubyte"),
                labels_train: path("labels_train", "train-labels-idx1-ubyte"),
                images_test: path("images_test", "t10k-images-idx3-ubyte"),
                labels_test: path("labels_test", "t10k-labels-idx1-ubyte"),
            })
        }
        other => Err(CliError::config(format!(
            "task.name: '{other}' is not binary-adding or ps-mnist"
        ))),
    }
}

/// Numeric width for the run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    F64,
    F32,
}

pub fn precision(cfg: &Config) -> Result<Precision, CliError> {
    match cfg.get_or("train", "precision", "f64") {
        "f64" => Ok(Precision::F64),
        "f32" => Ok(Precision::F32),
        other => Err(CliError::config(format!(
            "train.precision: '{other}' is not f64 or f32"
        ))),
    }
}

pub fn train_config(cfg: &Config, task: &TaskSettings) -> Result<TrainConfig, CliError> {
    let algorithm = Algorithm::parse(cfg.get_or("train", "algorithm", "stbp"))?;
    let seed = cfg.get_u64("train", "seed", 7)?;
    let recurrent = cfg.get_bool(
        "train",
        "recurrent",
        matches!(task, TaskSettings::BinaryAdding(_)),
    )?;
    // published per-task defaults; every field below can be overridden
    let mut base = match task {
        TaskSettings::BinaryAdding(_) => TrainConfig::binary_adding(algorithm, recurrent, seed),
        TaskSettings::PsMnist { .. } => TrainConfig::ps_mnist(algorithm, recurrent, seed),
    };

    base.epochs = cfg.get_usize("train", "epochs", base.epochs)?;
    base.batch_size = cfg.get_usize("train", "batch_size", base.batch_size)?;
    base.lr = cfg.get_f64("train", "lr", base.lr)?;
    base.hidden = cfg.get_usize_list("train", "hidden", &base.hidden.clone())?;
    base.decay = cfg.get_f64("train", "decay", base.decay)?;
    base.threshold = cfg.get_f64("train", "threshold", base.threshold)?;
    base.readout_decay = cfg.get_f64("train", "readout_decay", base.readout_decay)?;
    base.detach_reset = cfg.get_bool("train", "detach_reset", base.detach_reset)?;

    base.optimizer = match cfg.get_or("train", "optimizer", "adamw") {
        "adamw" => OptimizerKind::AdamW {
            beta1: cfg.get_f64("train", "beta1", 0.9)?,
            beta2: cfg.get_f64("train", "beta2", 0.999)?,
            eps: cfg.get_f64("train", "eps", 1e-8)?,
            weight_decay: cfg.get_f64("train", "weight_decay", 0.01)?,
        },
        "sgd" => OptimizerKind::Sgd {
            momentum: cfg.get_f64("train", "momentum", 0.0)?,
        },
        other => {
            return Err(CliError::config(format!(
                "train.optimizer: '{other}' is not adamw or sgd"
            )))
        }
    };

    base.schedule = match cfg.get_or("train", "schedule", "step") {
        "constant" => Schedule::Constant,
        "step" => Schedule::StepLr {
            factor: cfg.get_f64("train", "step_factor", 0.8)?,
            period: cfg.get_usize("train", "step_period", 10)?,
        },
        "cosine" => Schedule::Cosine,
        other => {
            return Err(CliError::config(format!(
                "train.schedule: '{other}' is not constant, step, or cosine"
            )))
        }
    };

    base.surrogate = match cfg.get_or("train", "surrogate", "rectangle") {
        "rectangle" => SurrogateSpec::Rectangle {
            width: cfg.get_f64("train", "surrogate_width", 1.0)?,
        },
        "triangle" => SurrogateSpec::Triangle {
            half_width: cfg.get_f64("train", "surrogate_half_width", 1.0)?,
        },
        "sigmoid" => SurrogateSpec::Sigmoid {
            slope: cfg.get_f64("train", "surrogate_slope", 4.0)?,
        },
        "multi-gaussian" => SurrogateSpec::MultiGaussian {
            height: cfg.get_f64("train", "surrogate_height", 0.15)?,
            sigma: cfg.get_f64("train", "surrogate_sigma", 0.5)?,
        },
        other => {
            return Err(CliError::config(format!(
                "train.surrogate: '{other}' is not a known surrogate family"
            )))
        }
    };

    base.grad_clip = match cfg.get("train", "grad_clip") {
        None => base.grad_clip,
        Some("off") | Some("none") => None,
        Some(v) => Some(v.parse().map_err(|_| {
            CliError::config(format!("train.grad_clip: '{v}' is not a number or 'off'"))
        })?),
    };

    base.aggregation = match cfg.get_or("train", "aggregation", "last") {
        "mean" => Aggregation::MeanLogits,
        "max-frame" => Aggregation::MaxResponseFrame,
        "last" => Aggregation::LastStep,
        other => {
            return Err(CliError::config(format!(
                "train.aggregation: '{other}' is not mean, max-frame, or last"
            )))
        }
    };

    Ok(base)
}

pub fn thresholds(cfg: &Config) -> Result<Thresholds, CliError> {
    Ok(Thresholds {
        credit: cfg.get_f64("stp", "theta_credit", 2.0)?,
        temporal: cfg.get_f64("stp", "theta_temporal", 2.0)?,
    })
}
