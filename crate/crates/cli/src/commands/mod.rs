//! Subcommand implementations. Each command is a pure function of
//! (config, overrides, dataset bytes); everything it writes lands in a run
//! directory named by the config hash, except the timestamped sidecar log.

mod energy;
mod gen_data;
mod report;
mod stp_cmd;
mod train_cmd;

pub use energy::cmd_energy;
pub use gen_data::cmd_gen_data;
pub use report::cmd_report;
pub use stp_cmd::cmd_stp;
pub use train_cmd::cmd_train;

use std::io::Write;
use std::path::{Path, PathBuf};

use stp_core::tasks::{gen_binary_adding, load_mnist_idx, make_ps_mnist, SequenceDataset};

use crate::settings::TaskSettings;
use crate::{Config, CliError};

/// Create `<output.dir>/<command>-<hash12>/`, echo the merged config into it,
/// and return the path.
pub(crate) fn prepare_run_dir(cfg: &Config, command: &str) -> Result<PathBuf, CliError> {
    let base = cfg.get_or("output", "dir", "runs").to_string();
    let dir = Path::new(&base).join(format!("{command}-{}", cfg.hash_prefix()));
    std::fs::create_dir_all(&dir)?;
    std::fs::write(dir.join("config.txt"), cfg.serialize())?;
    Ok(dir)
}

/// Append a timestamped line to the run's sidecar log. Timestamps live only
/// here so every other artifact is byte-reproducible.
pub(crate) fn log_line(dir: &Path, msg: &str) -> Result<(), CliError> {
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let mut f = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(dir.join("run.log"))?;
    writeln!(f, "[{secs}] {msg}")?;
    Ok(())
}

pub(crate) fn run_id(cfg: &Config) -> String {
    cfg.get_or("output", "run_id", &cfg.hash_prefix()).to_string()
}

pub(crate) fn dataset_paths(task: &TaskSettings, data_root: &Path) -> (PathBuf, PathBuf) {
    (
        data_root.join(format!("{}-train.stpd", task.name())),
        data_root.join(format!("{}-test.stpd", task.name())),
    )
}

/// Build both splits in memory from the task settings.
pub(crate) fn build_datasets(
    task: &TaskSettings,
) -> Result<(SequenceDataset, SequenceDataset), CliError> {
    match task {
        TaskSettings::BinaryAdding(spec) => Ok(gen_binary_adding(spec)?),
        TaskSettings::PsMnist {
            perm_seed,
            images_train,
            labels_train,
            images_test,
            labels_test,
        } => {
            let files = [images_train, labels_train, images_test, labels_test];
            if let Some(p) = files.iter().find(|p| !p.exists()) {
                return Err(CliError::data(format!(
                    "MNIST file {} not found; place the IDX files under the data root ({})",
                    p.display(),
                    crate::DATA_ROOT_ENV
                )));
            }
            let train_raw = load_mnist_idx(images_train, labels_train)?;
            let test_raw = load_mnist_idx(images_test, labels_test)?;
            let train = make_ps_mnist(&train_raw, *perm_seed)?;
            let test = make_ps_mnist(&test_raw, *perm_seed)?;
            Ok((train, test))
        }
    }
}

/// Load the materialized splits if present, otherwise build them in memory.
/// A file whose header disagrees with the task settings is a data error.
pub(crate) fn load_datasets(
    task: &TaskSettings,
    data_root: &Path,
) -> Result<(SequenceDataset, SequenceDataset), CliError> {
    let (train_path, test_path) = dataset_paths(task, data_root);
    if train_path.exists() && test_path.exists() {
        let train = SequenceDataset::load(&train_path)?;
        let test = SequenceDataset::load(&test_path)?;
        if let TaskSettings::BinaryAdding(spec) = task {
            if train.steps != spec.steps
                || train.samples != spec.train_size
                || test.samples != spec.test_size
                || train.meta.seed != spec.seed
            {
                return Err(CliError::data(format!(
                    "{} does not match the configured task (found N={} T={} seed={})",
                    train_path.display(),
                    train.samples,
                    train.steps,
                    train.meta.seed
                )));
            }
        }
        return Ok((train, test));
    }
    build_datasets(task)
}
