use std::process::ExitCode;

use stp_cli::commands::{cmd_energy, cmd_gen_data, cmd_report, cmd_stp, cmd_train};
use stp_cli::{schema_help, CliError, Config, DATA_ROOT_ENV};

const USAGE: &str = "\
stp — train small spiking networks under three gradient regimes and audit
whether a sequence benchmark needs temporal processing.

usage: stp <command> [--config FILE] [--section.key VALUE]...

commands:
  gen-data   materialize the configured task's dataset files
  train      train one model; writes metrics.csv and a checkpoint
  stp        run the three-algorithm probe; writes report.json
  energy     theoretical energy audit (analytic or measured)
  report     merge probe reports under the output dir into summary.csv

options:
  --config FILE          read a [section]/key=value config file
  --section.key VALUE    override one config value (wins over the file)
  --help                 this text plus the full key schema

environment:
  STP_DATA_ROOT          data directory (default ./data)

exit codes: 0 ok, 2 config error, 3 data error, 4 training divergence
";

fn parse_cli(args: &[String]) -> Result<(String, Config), CliError> {
    let Some(command) = args.first() else {
        return Err(CliError::config("missing command; try --help"));
    };
    let mut cfg = Config::default();
    let mut overrides: Vec<(String, String)> = Vec::new();
    let mut config_path: Option<String> = None;
    let mut i = 1;
    while i < args.len() {
        let arg = &args[i];
        let Some(flag) = arg.strip_prefix("--") else {
            return Err(CliError::config(format!("unexpected argument '{arg}'")));
        };
        let value = |i: usize| -> Result<&String, CliError> {
            args.get(i + 1)
                .ok_or_else(|| CliError::config(format!("--{flag} needs a value")))
        };
        match flag {
            "config" => {
                config_path = Some(value(i)?.clone());
                i += 2;
            }
            "thresholds" => {
                // convenience alias for the two probe thresholds
                let credit = value(i)?.clone();
                let temporal = args
                    .get(i + 2)
                    .ok_or_else(|| CliError::config("--thresholds needs two values"))?
                    .clone();
                overrides.push(("stp.theta_credit".into(), credit));
                overrides.push(("stp.theta_temporal".into(), temporal));
                i += 3;
            }
            _ if flag.contains('.') => {
                overrides.push((flag.to_string(), value(i)?.clone()));
                i += 2;
            }
            // shorthands for the most-used train keys
            "algorithm" | "epochs" | "seed" | "precision" => {
                overrides.push((format!("train.{flag}"), value(i)?.clone()));
                i += 2;
            }
            other => {
                return Err(CliError::config(format!(
                    "unknown option '--{other}'; overrides look like --section.key"
                )));
            }
        }
    }
    if let Some(path) = config_path {
        let text = std::fs::read_to_string(&path)
            .map_err(|e| CliError::config(format!("reading {path}: {e}")))?;
        cfg = Config::parse(&text)?;
    }
    for (key, value) in overrides {
        cfg.set(&key, &value)?;
    }
    Ok((command.clone(), cfg))
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--help" || a == "-h") || args.is_empty() {
        print!("{USAGE}\n{}", schema_help());
        return ExitCode::SUCCESS;
    }
    let result = parse_cli(&args).and_then(|(command, cfg)| match command.as_str() {
        "gen-data" => cmd_gen_data(&cfg),
        "train" => cmd_train(&cfg),
        "stp" => cmd_stp(&cfg),
        "energy" => cmd_energy(&cfg),
        "report" => cmd_report(&cfg),
        other => Err(CliError::config(format!(
            "unknown command '{other}'; try --help"
        ))),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("stp: {e}");
            if matches!(e, CliError::Data(_)) {
                eprintln!("stp: data root is '{}' (set {DATA_ROOT_ENV} to change)",
                    stp_cli::data_root().display());
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
