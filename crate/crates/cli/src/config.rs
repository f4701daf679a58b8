//! Experiment configuration: a small `[section]` / `key = value` text format
//! with a closed key schema, CLI overrides, canonical serialization, and a
//! content hash that names each run's output directory.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use sha2::{Digest, Sha256};

use crate::CliError;

/// (section, key, description) for every accepted key. Anything else is a
/// config error; `--help` prints this table.
pub const SCHEMA: &[(&str, &str, &str)] = &[
    ("task", "name", "binary-adding or ps-mnist"),
    ("task", "steps", "sequence length T (binary adding)"),
    ("task", "train_size", "training samples (binary adding)"),
    ("task", "test_size", "test samples (binary adding)"),
    ("task", "seed", "dataset generation seed"),
    ("task", "balance", "label balance: natural or balanced"),
    ("task", "perm_seed", "pixel permutation seed (ps-mnist)"),
    ("task", "images_train", "IDX image file, train split (ps-mnist)"),
    ("task", "labels_train", "IDX label file, train split (ps-mnist)"),
    ("task", "images_test", "IDX image file, test split (ps-mnist)"),
    ("task", "labels_test", "IDX label file, test split (ps-mnist)"),
    ("train", "epochs", "number of training epochs"),
    ("train", "batch_size", "samples per optimizer step"),
    ("train", "lr", "base learning rate"),
    ("train", "optimizer", "adamw or sgd"),
    ("train", "momentum", "SGD momentum"),
    ("train", "beta1", "AdamW first-moment decay"),
    ("train", "beta2", "AdamW second-moment decay"),
    ("train", "eps", "AdamW epsilon"),
    ("train", "weight_decay", "AdamW decoupled weight decay"),
    ("train", "schedule", "constant, step, or cosine"),
    ("train", "step_factor", "StepLR multiplicative factor"),
    ("train", "step_period", "StepLR period in epochs"),
    ("train", "seed", "weight init / shuffling seed"),
    ("train", "hidden", "comma-separated hidden widths, e.g. 128,128"),
    ("train", "recurrent", "true to add recurrent weights"),
    ("train", "decay", "membrane decay factor in [0,1]"),
    ("train", "threshold", "firing threshold"),
    ("train", "readout_decay", "readout integrator decay"),
    (
        "train",
        "surrogate",
        "rectangle, triangle, sigmoid, or multi-gaussian",
    ),
    ("train", "surrogate_width", "rectangle window width"),
    ("train", "surrogate_half_width", "triangle half width"),
    ("train", "surrogate_slope", "sigmoid slope"),
    ("train", "surrogate_height", "multi-gaussian side-lobe height"),
    ("train", "surrogate_sigma", "multi-gaussian sigma"),
    ("train", "detach_reset", "true to detach the reset pathway"),
    ("train", "algorithm", "stbp, sdbp, or notd"),
    ("train", "grad_clip", "global-norm clip, or 'off'"),
    (
        "train",
        "aggregation",
        "notd prediction: last (default), mean, or max-frame",
    ),
    ("train", "precision", "f64 (default) or f32"),
    ("stp", "theta_credit", "criterion-1 accuracy gap threshold"),
    ("stp", "theta_temporal", "criterion-2 accuracy gap threshold"),
    ("energy", "mode", "analytic or measured"),
    ("energy", "arch", "architecture name (analytic mode)"),
    ("energy", "m", "input size"),
    ("energy", "n", "hidden size"),
    ("energy", "k", "kernel size"),
    ("energy", "h", "feedforward hidden dim"),
    ("energy", "t", "sequence length"),
    ("energy", "t_in", "internal window"),
    ("energy", "f_in", "input spike frequency"),
    ("energy", "f_out", "output spike frequency"),
    ("energy", "f_conv2", "second-conv spike frequency"),
    ("energy", "f_q", "query spike frequency"),
    ("energy", "f_k", "key spike frequency"),
    ("energy", "f_v", "value spike frequency"),
    ("energy", "f_attn", "attention spike frequency"),
    ("energy", "f_fc1", "first-fc spike frequency"),
    ("energy", "f_fc2", "second-fc spike frequency"),
    ("energy", "e_ac", "pJ per accumulate"),
    ("energy", "e_mac", "pJ per multiply-accumulate"),
    ("energy", "checkpoint", "checkpoint path (measured mode)"),
    ("energy", "batch", "sample batch size (measured mode)"),
    ("output", "dir", "base output directory"),
    ("output", "run_id", "run identifier override"),
];

fn key_known(section: &str, key: &str) -> bool {
    SCHEMA.iter().any(|(s, k, _)| *s == section && *k == key)
}

/// Parsed configuration: section -> key -> raw string value. BTreeMaps give
/// a canonical serialization order for hashing and echoing.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Config {
    pub sections: BTreeMap<String, BTreeMap<String, String>>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut sections: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        let mut current: Option<String> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let name = name.trim().to_string();
                sections.entry(name.clone()).or_default();
                current = Some(name);
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::config(format!(
                    "line {}: expected 'key = value', got '{line}'",
                    lineno + 1
                )));
            };
            let Some(section) = &current else {
                return Err(CliError::config(format!(
                    "line {}: key '{}' before any [section] header",
                    lineno + 1,
                    key.trim()
                )));
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if !key_known(section, &key) {
                return Err(CliError::config(format!(
                    "unknown key '{section}.{key}' (see --help for the accepted keys)"
                )));
            }
            sections
                .get_mut(section)
                .expect("section inserted above")
                .insert(key, value);
        }
        Ok(Config { sections })
    }

    /// Canonical text form: sorted sections and keys, `key = value` lines.
    /// `parse(serialize(c)) == c` for any valid config.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for (section, kv) in &self.sections {
            if kv.is_empty() {
                continue;
            }
            let _ = writeln!(out, "[{section}]");
            for (k, v) in kv {
                let _ = writeln!(out, "{k} = {v}");
            }
            let _ = writeln!(out);
        }
        out
    }

    /// Apply one `--section.key value` override; overrides win over file
    /// values.
    pub fn set(&mut self, dotted: &str, value: &str) -> Result<(), CliError> {
        let Some((section, key)) = dotted.split_once('.') else {
            return Err(CliError::config(format!(
                "override '--{dotted}' must look like --section.key"
            )));
        };
        if !key_known(section, key) {
            return Err(CliError::config(format!(
                "unknown key '{section}.{key}' (see --help for the accepted keys)"
            )));
        }
        self.sections
            .entry(section.to_string())
            .or_default()
            .insert(key.to_string(), value.to_string());
        Ok(())
    }

    /// SHA-256 of the canonical serialization.
    pub fn hash(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(self.serialize().as_bytes());
        h.finalize().into()
    }

    /// First 12 hex chars of [`Config::hash`]; names the output directory.
    pub fn hash_prefix(&self) -> String {
        self.hash()[..6].iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections
            .get(section)
            .and_then(|kv| kv.get(key))
            .map(|s| s.as_str())
    }

    pub fn get_or<'a>(&'a self, section: &str, key: &str, default: &'a str) -> &'a str {
        self.get(section, key).unwrap_or(default)
    }

    pub fn get_u64(&self, section: &str, key: &str, default: u64) -> Result<u64, CliError> {
        match self.get(section, key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| {
                CliError::config(format!("{section}.{key}: '{v}' is not an integer"))
            }),
        }
    }

    pub fn get_usize(&self, section: &str, key: &str, default: usize) -> Result<usize, CliError> {
        Ok(self.get_u64(section, key, default as u64)? as usize)
    }

    pub fn get_f64(&self, section: &str, key: &str, default: f64) -> Result<f64, CliError> {
        match self.get(section, key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| CliError::config(format!("{section}.{key}: '{v}' is not a number"))),
        }
    }

    pub fn get_opt_f64(&self, section: &str, key: &str) -> Result<Option<f64>, CliError> {
        match self.get(section, key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|_| {
                CliError::config(format!("{section}.{key}: '{v}' is not a number"))
            }),
        }
    }

    pub fn get_bool(&self, section: &str, key: &str, default: bool) -> Result<bool, CliError> {
        match self.get(section, key) {
            None => Ok(default),
            Some("true") | Some("1") | Some("yes") => Ok(true),
            Some("false") | Some("0") | Some("no") => Ok(false),
            Some(v) => Err(CliError::config(format!(
                "{section}.{key}: '{v}' is not a boolean (true/false)"
            ))),
        }
    }

    /// Comma-separated positive integers, e.g. `128,128`.
    pub fn get_usize_list(
        &self,
        section: &str,
        key: &str,
        default: &[usize],
    ) -> Result<Vec<usize>, CliError> {
        match self.get(section, key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .split(',')
                .map(|p| {
                    p.trim().parse().map_err(|_| {
                        CliError::config(format!("{section}.{key}: '{p}' is not an integer"))
                    })
                })
                .collect(),
        }
    }
}

/// Render the schema table for `--help`.
pub fn schema_help() -> String {
    let mut out = String::from("accepted config keys (file sections or --section.key overrides):\n");
    for (s, k, d) in SCHEMA {
        let _ = writeln!(out, "  {s}.{k:<20} {d}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# comment line
[task]
name = binary-adding   # trailing comment
steps = 100

[train]
lr = 5e-4
hidden = 128,128
";

    #[test]
    fn parse_basic() {
        let c = Config::parse(SAMPLE).unwrap();
        assert_eq!(c.get("task", "name"), Some("binary-adding"));
        assert_eq!(c.get("task", "steps"), Some("100"));
        assert_eq!(c.get("train", "hidden"), Some("128,128"));
        assert_eq!(c.get_f64("train", "lr", 0.0).unwrap(), 5e-4);
    }

    #[test]
    fn unknown_key_is_error() {
        assert!(Config::parse("[task]\nnme = x\n").is_err());
        assert!(Config::parse("[typo]\nname = x\n").is_err());
        let mut c = Config::default();
        assert!(c.set("task.nme", "x").is_err());
        assert!(c.set("noborder", "x").is_err());
    }

    #[test]
    fn key_outside_section_is_error() {
        assert!(Config::parse("name = x\n").is_err());
    }

    #[test]
    fn round_trip_identity() {
        let c = Config::parse(SAMPLE).unwrap();
        let text = c.serialize();
        let c2 = Config::parse(&text).unwrap();
        assert_eq!(c, c2);
        // serialization is canonical: a second pass is byte-identical
        assert_eq!(text, c2.serialize());
    }

    #[test]
    fn overrides_win() {
        let mut c = Config::parse(SAMPLE).unwrap();
        c.set("train.lr", "1e-3").unwrap();
        assert_eq!(c.get("train", "lr"), Some("1e-3"));
        c.set("stp.theta_credit", "4").unwrap();
        assert_eq!(c.get("stp", "theta_credit"), Some("4"));
    }

    #[test]
    fn hash_tracks_content() {
        let a = Config::parse(SAMPLE).unwrap();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.set("train.lr", "1e-3").unwrap();
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash_prefix().len(), 12);
    }

    #[test]
    fn typed_getters_validate() {
        let c = Config::parse("[task]\nsteps = ten\n").unwrap();
        assert!(c.get_u64("task", "steps", 0).is_err());
        let c = Config::parse("[train]\nrecurrent = maybe\n").unwrap();
        assert!(c.get_bool("train", "recurrent", false).is_err());
        let c = Config::parse("[train]\nhidden = 12,x\n").unwrap();
        assert!(c.get_usize_list("train", "hidden", &[]).is_err());
    }

    #[test]
    fn help_lists_every_key() {
        let help = schema_help();
        for (s, k, _) in SCHEMA {
            assert!(help.contains(&format!("{s}.{k}")), "{s}.{k} missing");
        }
    }
}
