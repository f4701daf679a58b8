use std::path::Path;

use stp_core::stp::StpReport;

use crate::{CliError, Config};

/// Merge every probe report found under the output directory into one
/// summary CSV (one row per arm, verdict repeated per row).
pub fn cmd_report(cfg: &Config) -> Result<(), CliError> {
    let base = cfg.get_or("output", "dir", "runs").to_string();
    let base = Path::new(&base);
    let mut reports: Vec<(String, StpReport)> = Vec::new();
    if base.is_dir() {
        let mut entries: Vec<_> = std::fs::read_dir(base)?
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .collect();
        entries.sort();
        for dir in entries {
            let path = dir.join("report.json");
            if !path.is_file() {
                continue;
            }
            let text = std::fs::read_to_string(&path)?;
            let report: StpReport = serde_json::from_str(&text)
                .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
            let run = dir
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default();
            reports.push((run, report));
        }
    }
    if reports.is_empty() {
        return Err(CliError::data(format!(
            "no report.json files found under {}",
            base.display()
        )));
    }

    let mut out =
        String::from("run,task,seed,theta_credit,theta_temporal,algorithm,accuracy,delta,verdict\n");
    for (run, r) in &reports {
        let verdict = match r.verdict {
            Some(v) => format!("{v:?}"),
            None => "withheld".to_string(),
        };
        for arm in &r.arms {
            let acc = arm.accuracy.map(|a| a.to_string()).unwrap_or_default();
            let delta = arm.delta.map(|d| d.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{run},{},{},{},{},{},{acc},{delta},{verdict}\n",
                r.task, r.seed, r.thresholds.credit, r.thresholds.temporal, arm.algorithm
            ));
        }
    }
    std::fs::write(base.join("summary.csv"), &out)?;
    print!("{out}");
    Ok(())
}
