use crate::commands::{build_datasets, dataset_paths};
use crate::settings::task_settings;
use crate::{data_root, CliError, Config};

/// Materialize the configured task's train/test splits as STPD files under
/// the data root and print their spec hashes. Rerunning with the same config
/// rewrites byte-identical files.
pub fn cmd_gen_data(cfg: &Config) -> Result<(), CliError> {
    let root = data_root();
    std::fs::create_dir_all(&root)?;
    let task = task_settings(cfg, &root)?;
    let (train, test) = build_datasets(&task)?;
    let (train_path, test_path) = dataset_paths(&task, &root);
    train.save(&train_path)?;
    test.save(&test_path)?;
    println!(
        "{} samples={} steps={} spec_hash={:016x}",
        train_path.display(),
        train.samples,
        train.steps,
        train.meta.spec_hash
    );
    println!(
        "{} samples={} steps={} spec_hash={:016x}",
        test_path.display(),
        test.samples,
        test.steps,
        test.meta.spec_hash
    );
    Ok(())
}
