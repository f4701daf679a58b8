use stp_core::stp::run_stp;
use stp_core::Scalar;

use crate::commands::{load_datasets, log_line, prepare_run_dir};
use crate::settings::{precision, task_settings, thresholds, train_config, Precision};
use crate::{data_root, CliError, Config};

/// Run the three-algorithm probe and write report.json. Exit is clean only
/// when every arm completed and a verdict was rendered.
pub fn cmd_stp(cfg: &Config) -> Result<(), CliError> {
    let root = data_root();
    let task = task_settings(cfg, &root)?;
    let tc = train_config(cfg, &task)?;
    let th = thresholds(cfg)?;
    let dir = prepare_run_dir(cfg, "stp")?;
    log_line(&dir, "loading datasets")?;
    let (train, test) = load_datasets(&task, &root)?;
    log_line(&dir, "running three probe arms")?;

    let report = match precision(cfg)? {
        Precision::F64 => run::<f64>(&tc, &train, &test, th),
        Precision::F32 => run::<f32>(&tc, &train, &test, th),
    }?;

    let text = serde_json::to_string_pretty(&report)
        .map_err(|e| CliError::Data(format!("serializing report: {e}")))?;
    std::fs::write(dir.join("report.json"), &text)?;
    println!("{}", text);

    match report.verdict {
        Some(_) => {
            log_line(&dir, "probe complete")?;
            Ok(())
        }
        None => {
            let failed: Vec<&str> = report
                .arms
                .iter()
                .filter(|a| a.error.is_some())
                .map(|a| a.algorithm.as_str())
                .collect();
            log_line(&dir, "probe arm failed; verdict withheld")?;
            Err(CliError::Divergence(format!(
                "probe arm(s) failed: {}",
                failed.join(", ")
            )))
        }
    }
}

fn run<S: Scalar>(
    tc: &stp_core::train::TrainConfig,
    train: &stp_core::tasks::SequenceDataset,
    test: &stp_core::tasks::SequenceDataset,
    th: stp_core::stp::Thresholds,
) -> Result<stp_core::stp::StpReport, CliError> {
    Ok(run_stp::<S>(tc, train, test, th)?)
}
