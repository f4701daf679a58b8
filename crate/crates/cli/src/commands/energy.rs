use stp_core::energy::{
    energy_of, energy_report_from_trace, Arch, ArchDims, EnergyConstants, SpikeStats,
    ENERGY_CSV_HEADER,
};
use stp_core::engine::{lif_forward, Mode};
use stp_core::train::{init_network, Checkpoint, OptimState};
use stp_core::Scalar;

use crate::commands::{load_datasets, log_line, prepare_run_dir};
use crate::settings::{precision, task_settings, train_config, Precision};
use crate::{data_root, CliError, Config};

/// Theoretical energy audit. Analytic mode prices one published formula at
/// explicit dimensions and frequencies; measured mode runs a trained
/// checkpoint over a sample batch and prices each layer from its observed
/// firing rate.
pub fn cmd_energy(cfg: &Config) -> Result<(), CliError> {
    let dir = prepare_run_dir(cfg, "energy")?;
    let csv = match cfg.get_or("energy", "mode", "analytic") {
        "analytic" => analytic(cfg)?,
        "measured" => match precision(cfg)? {
            Precision::F64 => measured::<f64>(cfg)?,
            Precision::F32 => measured::<f32>(cfg)?,
        },
        other => {
            return Err(CliError::config(format!(
                "energy.mode: '{other}' is not analytic or measured"
            )))
        }
    };
    std::fs::write(dir.join("energy.csv"), &csv)?;
    print!("{csv}");
    log_line(&dir, "energy report written")?;
    Ok(())
}

fn consts(cfg: &Config) -> Result<EnergyConstants, CliError> {
    Ok(EnergyConstants {
        e_ac_pj: cfg.get_f64("energy", "e_ac", 0.9)?,
        e_mac_pj: cfg.get_f64("energy", "e_mac", 4.6)?,
    })
}

fn analytic(cfg: &Config) -> Result<String, CliError> {
    let arch = Arch::parse(cfg.get_or("energy", "arch", "dense-fc"))?;
    let dims = ArchDims {
        m: cfg.get_usize("energy", "m", 1)?,
        n: cfg.get_usize("energy", "n", 1)?,
        k: cfg.get_usize("energy", "k", 1)?,
        h: cfg.get_usize("energy", "h", 1)?,
        t: cfg.get_usize("energy", "t", 1)?,
        t_in: cfg.get_usize("energy", "t_in", 1)?,
    };
    let stats = SpikeStats {
        f_in: cfg.get_opt_f64("energy", "f_in")?,
        f_out: cfg.get_opt_f64("energy", "f_out")?,
        f_conv2: cfg.get_opt_f64("energy", "f_conv2")?,
        f_q: cfg.get_opt_f64("energy", "f_q")?,
        f_k: cfg.get_opt_f64("energy", "f_k")?,
        f_v: cfg.get_opt_f64("energy", "f_v")?,
        f_attn: cfg.get_opt_f64("energy", "f_attn")?,
        f_fc1: cfg.get_opt_f64("energy", "f_fc1")?,
        f_fc2: cfg.get_opt_f64("energy", "f_fc2")?,
    };
    let c = consts(cfg)?;
    let total = energy_of(arch, &dims, &stats, &c)?;
    // split the formula into its AC and MAC parts via linearity in the
    // constants: op counts follow from unit-cost evaluations
    let probe1 = EnergyConstants {
        e_ac_pj: 1.0,
        e_mac_pj: 1.0,
    };
    let probe2 = EnergyConstants {
        e_ac_pj: 1.0,
        e_mac_pj: 2.0,
    };
    let all_ops = energy_of(arch, &dims, &stats, &probe1)? * 1000.0;
    let mac_ops = (energy_of(arch, &dims, &stats, &probe2)? * 1000.0) - all_ops;
    let ac_ops = all_ops - mac_ops;

    let mut out = format!("{ENERGY_CSV_HEADER}\n");
    if ac_ops > 0.0 {
        let nj = ac_ops * c.e_ac_pj / 1000.0;
        out.push_str(&format!("analytic,{},AC,{ac_ops},{nj},\n", arch.name()));
    }
    if mac_ops > 0.0 {
        let nj = mac_ops * c.e_mac_pj / 1000.0;
        out.push_str(&format!("analytic,{},MAC,{mac_ops},{nj},\n", arch.name()));
    }
    out.push_str(&format!("analytic,{},total,,{total},\n", arch.name()));
    Ok(out)
}

fn measured<S: Scalar>(cfg: &Config) -> Result<String, CliError> {
    let root = data_root();
    let task = task_settings(cfg, &root)?;
    let tc = train_config(cfg, &task)?;
    let (_, test) = load_datasets(&task, &root)?;
    let mut net = init_network::<S>(&tc, test.channels, test.classes)?;
    if let Some(path) = cfg.get("energy", "checkpoint") {
        let ck = Checkpoint::load(std::path::Path::new(path), None)?;
        let mut opt = OptimState::new(tc.optimizer, &net);
        ck.restore(&mut net, &mut opt)?;
    }
    let batch = cfg.get_usize("energy", "batch", 64)?.min(test.samples);
    let indices: Vec<usize> = (0..batch).collect();
    let (inputs, _) = test.batch::<S>(&indices);
    let trace = lif_forward(&net, &inputs, Mode::TemporalOn)?;
    let report = energy_report_from_trace(&net, &trace, &consts(cfg)?)?;
    let mut buf = Vec::new();
    report.write_csv(&mut buf)?;
    String::from_utf8(buf).map_err(|_| CliError::Data("non-UTF8 CSV".into()))
}
