//! Optimizers, schedules, the epoch loop, metrics, and checkpointing that
//! turn the engine into reproducible experiments.

mod checkpoint;
mod config;
mod metrics;
mod optim;
mod run;
mod schedule;

pub use checkpoint::Checkpoint;
pub use config::{Aggregation, Algorithm, TrainConfig};
pub use metrics::{write_metrics_csv, MetricRow};
pub use optim::{OptimState, OptimizerKind};
pub use run::{evaluate, init_network, train_run, train_run_from, EpochMetrics, TrainOutcome};
pub use schedule::{step_lr, Schedule};
