use std::io::Write;

use crate::error::Result;

/// One metrics record. Serialized as a CSV row:
/// run_id,task,algorithm,epoch,split,metric,value
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow {
    pub run_id: String,
    pub task: String,
    pub algorithm: String,
    pub epoch: usize,
    pub split: String,
    pub metric: String,
    pub value: f64,
}

pub const METRICS_HEADER: &str = "run_id,task,algorithm,epoch,split,metric,value";

/// Write a header plus one row per record.
pub fn write_metrics_csv<W: Write>(w: &mut W, rows: &[MetricRow]) -> Result<()> {
    writeln!(w, "{METRICS_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.run_id, r.task, r.algorithm, r.epoch, r.split, r.metric, r.value
        )?;
    }
    Ok(())
}
