use stp_core::train::{train_run_from, MetricRow, TrainOutcome};
use stp_core::Scalar;

use crate::commands::{load_datasets, log_line, prepare_run_dir, run_id};
use crate::settings::{precision, task_settings, train_config, Precision, TaskSettings};
use crate::{data_root, CliError, Config};

/// Train one model per the config: writes metrics.csv and the best
/// checkpoint into the run directory.
pub fn cmd_train(cfg: &Config) -> Result<(), CliError> {
    let root = data_root();
    let task = task_settings(cfg, &root)?;
    let tc = train_config(cfg, &task)?;
    let dir = prepare_run_dir(cfg, "train")?;
    log_line(&dir, "loading datasets")?;
    let (train, test) = load_datasets(&task, &root)?;
    log_line(&dir, &format!("training {} on {}", tc.algorithm.name(), task.name()))?;

    match precision(cfg)? {
        Precision::F64 => run::<f64>(cfg, &task, &tc, &train, &test, &dir),
        Precision::F32 => run::<f32>(cfg, &task, &tc, &train, &test, &dir),
    }
}

fn run<S: Scalar>(
    cfg: &Config,
    task: &TaskSettings,
    tc: &stp_core::train::TrainConfig,
    train: &stp_core::tasks::SequenceDataset,
    test: &stp_core::tasks::SequenceDataset,
    dir: &std::path::Path,
) -> Result<(), CliError> {
    let hash = cfg.hash();
    let out: TrainOutcome<S> = train_run_from(tc, train, test, hash, None)?;

    let id = run_id(cfg);
    let mut rows = Vec::with_capacity(out.history.len() * 2);
    for m in &out.history {
        rows.push(MetricRow {
            run_id: id.clone(),
            task: task.name().to_string(),
            algorithm: tc.algorithm.name().to_string(),
            epoch: m.epoch,
            split: "train".into(),
            metric: "loss".into(),
            value: m.train_loss,
        });
        rows.push(MetricRow {
            run_id: id.clone(),
            task: task.name().to_string(),
            algorithm: tc.algorithm.name().to_string(),
            epoch: m.epoch,
            split: "test".into(),
            metric: "accuracy".into(),
            value: m.test_accuracy,
        });
    }
    let mut csv = Vec::new();
    stp_core::train::write_metrics_csv(&mut csv, &rows)?;
    std::fs::write(dir.join("metrics.csv"), csv)?;
    out.best.save(&dir.join("checkpoint.stpb"))?;
    log_line(
        dir,
        &format!(
            "done: best accuracy {:.2}% at epoch {}",
            out.best_accuracy, out.best_epoch
        ),
    )?;
    println!(
        "{} best_accuracy={:.2} best_epoch={}",
        dir.display(),
        out.best_accuracy,
        out.best_epoch
    );
    Ok(())
}
