//! Theoretical energy accounting: per-layer cost formulas for spiking and
//! non-spiking architectures, spike-frequency measurement for nets trained in
//! this toolkit, and the spiking/dense comparison report.

use std::io::Write;

use crate::engine::{lif_forward, ForwardTrace, Mode, Network};
use crate::error::{Error, Result};
use crate::numerics::{Scalar, Tensor};

/// CMOS per-operation energies in pJ. Defaults: 0.9 pJ per accumulate (AC),
/// 4.6 pJ per multiply-accumulate (MAC).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyConstants {
    pub e_ac_pj: f64,
    pub e_mac_pj: f64,
}

impl Default for EnergyConstants {
    fn default() -> Self {
        EnergyConstants {
            e_ac_pj: 0.9,
            e_mac_pj: 4.6,
        }
    }
}

impl EnergyConstants {
    pub fn validate(&self) -> Result<()> {
        if self.e_ac_pj <= 0.0 || self.e_mac_pj <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "energy constants must be positive, got AC={} MAC={}",
                self.e_ac_pj, self.e_mac_pj
            )));
        }
        Ok(())
    }
}

/// Structural dimensions a formula may consume: input size `m`, hidden size
/// `n`, kernel size `k`, feedforward hidden dim `h`, sequence length `t`, and
/// the internal window `t_in`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArchDims {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub h: usize,
    pub t: usize,
    pub t_in: usize,
}

impl ArchDims {
    pub fn validate(&self) -> Result<()> {
        if [self.m, self.n, self.k, self.h, self.t, self.t_in].contains(&0) {
            return Err(Error::InvalidArgument(
                "architecture dimensions must all be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Measured or assumed spike frequencies, each in [0, 1]. A formula that
/// needs a frequency the caller did not supply is an error, not a default.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SpikeStats {
    pub f_in: Option<f64>,
    pub f_out: Option<f64>,
    pub f_conv2: Option<f64>,
    pub f_q: Option<f64>,
    pub f_k: Option<f64>,
    pub f_v: Option<f64>,
    pub f_attn: Option<f64>,
    pub f_fc1: Option<f64>,
    pub f_fc2: Option<f64>,
}

impl SpikeStats {
    /// Every frequency set to the same value.
    pub fn uniform(f: f64) -> Self {
        SpikeStats {
            f_in: Some(f),
            f_out: Some(f),
            f_conv2: Some(f),
            f_q: Some(f),
            f_k: Some(f),
            f_v: Some(f),
            f_attn: Some(f),
            f_fc1: Some(f),
            f_fc2: Some(f),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, f) in [
            ("f_in", self.f_in),
            ("f_out", self.f_out),
            ("f_conv2", self.f_conv2),
            ("f_q", self.f_q),
            ("f_k", self.f_k),
            ("f_v", self.f_v),
            ("f_attn", self.f_attn),
            ("f_fc1", self.f_fc1),
            ("f_fc2", self.f_fc2),
        ] {
            if let Some(f) = f {
                if !(0.0..=1.0).contains(&f) {
                    return Err(Error::InvalidArgument(format!(
                        "spike frequency {name}={f} outside [0, 1]"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn need(f: Option<f64>, name: &str, arch: &str) -> Result<f64> {
    f.ok_or_else(|| Error::InvalidArgument(format!("{arch} requires frequency {name}")))
}

/// The architectures with published per-layer cost formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arch {
    Tcn,
    SpikingTcn,
    Lstm,
    Gsu,
    Transformer,
    /// Spike-driven transformer block counted with 4-bit-style quadruple cost.
    Sdt4,
    /// Same block at unit cost.
    Sdt1,
    SpikingFc,
    DenseFc,
}

impl Arch {
    pub fn name(self) -> &'static str {
        match self {
            Arch::Tcn => "tcn",
            Arch::SpikingTcn => "spiking-tcn",
            Arch::Lstm => "lstm",
            Arch::Gsu => "gsu",
            Arch::Transformer => "transformer",
            Arch::Sdt4 => "sdt4",
            Arch::Sdt1 => "sdt1",
            Arch::SpikingFc => "spiking-fc",
            Arch::DenseFc => "dense-fc",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tcn" => Ok(Arch::Tcn),
            "spiking-tcn" => Ok(Arch::SpikingTcn),
            "lstm" => Ok(Arch::Lstm),
            "gsu" => Ok(Arch::Gsu),
            "transformer" => Ok(Arch::Transformer),
            "sdt4" => Ok(Arch::Sdt4),
            "sdt1" => Ok(Arch::Sdt1),
            "spiking-fc" => Ok(Arch::SpikingFc),
            "dense-fc" => Ok(Arch::DenseFc),
            other => Err(Error::InvalidArgument(format!(
                "unknown architecture '{other}'"
            ))),
        }
    }
}

/// Per-layer energy of one architecture in nJ: exact evaluation of the
/// published formula at the given dimensions and spike frequencies.
pub fn energy_of(
    arch: Arch,
    dims: &ArchDims,
    stats: &SpikeStats,
    consts: &EnergyConstants,
) -> Result<f64> {
    dims.validate()?;
    stats.validate()?;
    consts.validate()?;
    let (m, n, k, h, t) = (
        dims.m as f64,
        dims.n as f64,
        dims.k as f64,
        dims.h as f64,
        dims.t as f64,
    );
    let ac = consts.e_ac_pj;
    let mac = consts.e_mac_pj;
    let name = arch.name();
    let pj = match arch {
        Arch::Tcn => (k * m * n + k * n * n) * mac,
        Arch::SpikingTcn => {
            let f_in = need(stats.f_in, "f_in", name)?;
            let f_conv2 = need(stats.f_conv2, "f_conv2", name)?;
            (k * m * n * f_in + k * n * n * f_conv2) * ac
        }
        Arch::Lstm => (4.0 * m * n + 4.0 * n * n + 19.0 * n) * mac,
        Arch::Gsu => {
            let f_in = need(stats.f_in, "f_in", name)?;
            let f_out = need(stats.f_out, "f_out", name)?;
            (2.0 * m * n * f_in + 2.0 * n * n * f_out) * ac + 5.0 * n * mac
        }
        Arch::Transformer => (4.0 * n * n + 2.0 * n * t + 2.0 * n * h) * mac,
        Arch::Sdt4 => {
            let f_in = need(stats.f_in, "f_in", name)?;
            let f_attn = need(stats.f_attn, "f_attn", name)?;
            let f_q = need(stats.f_q, "f_q", name)?;
            let f_k = need(stats.f_k, "f_k", name)?;
            let f_v = need(stats.f_v, "f_v", name)?;
            let f_fc1 = need(stats.f_fc1, "f_fc1", name)?;
            let f_fc2 = need(stats.f_fc2, "f_fc2", name)?;
            ((12.0 * f_in + 4.0 * f_attn) * n * n
                + (4.0 * f_q * f_k + 4.0 * f_v) * n * t
                + (4.0 * f_fc1 + 4.0 * f_fc2) * n * h)
                * ac
                + (24.0 * n + 4.0 * h) * mac
        }
        Arch::Sdt1 => {
            let f_in = need(stats.f_in, "f_in", name)?;
            let f_attn = need(stats.f_attn, "f_attn", name)?;
            let f_q = need(stats.f_q, "f_q", name)?;
            let f_k = need(stats.f_k, "f_k", name)?;
            let f_v = need(stats.f_v, "f_v", name)?;
            let f_fc1 = need(stats.f_fc1, "f_fc1", name)?;
            let f_fc2 = need(stats.f_fc2, "f_fc2", name)?;
            ((3.0 * f_in + f_attn) * n * n
                + (f_q * f_k + f_v) * n * t
                + (f_fc1 + f_fc2) * n * h)
                * ac
        }
        Arch::SpikingFc => {
            let f_in = need(stats.f_in, "f_in", name)?;
            m * n * f_in * ac
        }
        Arch::DenseFc => m * n * mac,
    };
    Ok(pj / 1000.0)
}

/// Fraction of exact-1 entries at every layer boundary of a trace: index 0 is
/// the input sequence, index l >= 1 the spike output of hidden layer l.
pub fn measure_layer_frequencies<S: Scalar>(trace: &ForwardTrace<S>) -> Result<Vec<f64>> {
    if trace.inputs.is_empty() {
        return Err(Error::InvalidArgument("empty forward trace".into()));
    }
    let freq_of = |frames: &[Tensor<S>]| -> f64 {
        let total: usize = frames.iter().map(|f| f.len()).sum();
        let ones: usize = frames
            .iter()
            .map(|f| f.data().iter().filter(|&&x| x == S::one()).count())
            .sum();
        ones as f64 / total as f64
    };
    let mut out = Vec::with_capacity(trace.layer_count() + 1);
    out.push(freq_of(&trace.inputs));
    for layer in &trace.s {
        out.push(freq_of(layer));
    }
    Ok(out)
}

/// Boundary frequencies folded into a [`SpikeStats`]: `f_in` is the input
/// firing rate, `f_out` the last hidden layer's.
pub fn measure_spike_freq<S: Scalar>(trace: &ForwardTrace<S>) -> Result<SpikeStats> {
    let freqs = measure_layer_frequencies(trace)?;
    Ok(SpikeStats {
        f_in: Some(freqs[0]),
        f_out: Some(*freqs.last().unwrap()),
        ..SpikeStats::default()
    })
}

/// One report row: a layer counted either as accumulates driven by measured
/// spikes or as the dense multiply-accumulate counterpart.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyRow {
    pub layer: String,
    pub architecture: &'static str,
    pub op_kind: &'static str,
    pub op_count: f64,
    pub energy_nj: f64,
    /// dense / spiking cost for this layer; infinity when nothing spikes.
    pub ratio: f64,
}

/// Per-layer spiking vs. dense comparison for a trained network.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    pub rows: Vec<EnergyRow>,
    pub total_spiking_nj: f64,
    pub total_dense_nj: f64,
    pub total_ratio: f64,
}

fn ratio_of(dense: f64, spiking: f64) -> f64 {
    if spiking == 0.0 {
        f64::INFINITY
    } else {
        dense / spiking
    }
}

/// Audit a network on a sample batch: run the temporal forward pass, measure
/// firing rates at each layer boundary, and price every connection matrix
/// both as a spiking layer and as its dense counterpart.
pub fn energy_report<S: Scalar>(
    net: &Network<S>,
    inputs: &Tensor<S>,
    consts: &EnergyConstants,
) -> Result<EnergyReport> {
    let trace = lif_forward(net, inputs, Mode::TemporalOn)?;
    energy_report_from_trace(net, &trace, consts)
}

pub fn energy_report_from_trace<S: Scalar>(
    net: &Network<S>,
    trace: &ForwardTrace<S>,
    consts: &EnergyConstants,
) -> Result<EnergyReport> {
    consts.validate()?;
    let freqs = measure_layer_frequencies(trace)?;
    // (name, fan-in, fan-out, input frequency) per connection matrix
    let mut layers: Vec<(String, usize, usize, f64)> = net
        .layers
        .iter()
        .enumerate()
        .map(|(i, l)| (format!("layer{i}"), l.in_dim(), l.out_dim(), freqs[i]))
        .collect();
    layers.push((
        "readout".to_string(),
        net.readout.w_out.cols(),
        net.readout.w_out.rows(),
        freqs[net.layers.len()],
    ));

    let mut rows = Vec::with_capacity(layers.len() * 2);
    let mut total_spiking = 0.0;
    let mut total_dense = 0.0;
    for (name, m, n, f_in) in layers {
        let dims = ArchDims {
            m,
            n,
            k: 1,
            h: 1,
            t: 1,
            t_in: 1,
        };
        let stats = SpikeStats {
            f_in: Some(f_in),
            ..SpikeStats::default()
        };
        let spiking = energy_of(Arch::SpikingFc, &dims, &stats, consts)?;
        let dense = energy_of(Arch::DenseFc, &dims, &stats, consts)?;
        let ratio = ratio_of(dense, spiking);
        let ops = (m * n) as f64;
        rows.push(EnergyRow {
            layer: name.clone(),
            architecture: Arch::SpikingFc.name(),
            op_kind: "AC",
            op_count: ops * f_in,
            energy_nj: spiking,
            ratio,
        });
        rows.push(EnergyRow {
            layer: name,
            architecture: Arch::DenseFc.name(),
            op_kind: "MAC",
            op_count: ops,
            energy_nj: dense,
            ratio,
        });
        total_spiking += spiking;
        total_dense += dense;
    }
    Ok(EnergyReport {
        rows,
        total_spiking_nj: total_spiking,
        total_dense_nj: total_dense,
        total_ratio: ratio_of(total_dense, total_spiking),
    })
}

pub const ENERGY_CSV_HEADER: &str = "layer,architecture,op_kind,op_count,energy_nJ,ratio";

impl EnergyReport {
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "{ENERGY_CSV_HEADER}")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                r.layer, r.architecture, r.op_kind, r.op_count, r.energy_nj, r.ratio
            )?;
        }
        Ok(())
    }
}
