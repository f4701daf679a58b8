use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::numerics::{Scalar, Tensor};

const MAGIC: &[u8; 4] = b"STPD";
const VERSION: u32 = 1;

/// Provenance carried with a dataset so runs can assert they trained on the
/// intended bytes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetMeta {
    pub task: String,
    pub seed: u64,
    /// Mixed from the header fields; a cheap integrity fingerprint.
    pub spec_hash: u64,
}

/// A fixed (N x T x C) sequence classification dataset with integer labels.
///
/// Inputs are stored as f32, matching the file format, and widened to the
/// requested scalar type at batch-assembly time.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceDataset {
    pub inputs: Vec<f32>,
    pub labels: Vec<u16>,
    pub samples: usize,
    pub steps: usize,
    pub channels: usize,
    pub classes: usize,
    pub meta: DatasetMeta,
}

fn mix_hash(parts: &[u64]) -> u64 {
    // splitmix64 finalizer folded over the header words
    let mut h = 0x9E37_79B9_7F4A_7C15u64;
    for &p in parts {
        let mut z = h ^ p.wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        h = z ^ (z >> 31);
    }
    h
}

impl SequenceDataset {
    pub fn new(
        task: &str,
        seed: u64,
        samples: usize,
        steps: usize,
        channels: usize,
        classes: usize,
        inputs: Vec<f32>,
        labels: Vec<u16>,
    ) -> Result<Self> {
        if inputs.len() != samples * steps * channels || labels.len() != samples {
            return Err(Error::ShapeMismatch(format!(
                "dataset {task}: {} inputs / {} labels vs N={samples} T={steps} C={channels}",
                inputs.len(),
                labels.len()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l as usize >= classes) {
            return Err(Error::InvalidArgument(format!(
                "label {bad} out of range for {classes} classes"
            )));
        }
        let spec_hash = mix_hash(&[
            task.len() as u64,
            seed,
            samples as u64,
            steps as u64,
            channels as u64,
            classes as u64,
        ]);
        Ok(SequenceDataset {
            inputs,
            labels,
            samples,
            steps,
            channels,
            classes,
            meta: DatasetMeta {
                task: task.to_string(),
                seed,
                spec_hash,
            },
        })
    }

    #[inline]
    pub fn input_at(&self, sample: usize, step: usize, channel: usize) -> f32 {
        self.inputs[(sample * self.steps + step) * self.channels + channel]
    }

    /// Assemble the listed samples into a batch tensor plus labels.
    pub fn batch<S: Scalar>(&self, indices: &[usize]) -> (Tensor<S>, Vec<usize>) {
        let b = indices.len();
        let mut data = Vec::with_capacity(b * self.steps * self.channels);
        for &idx in indices {
            let base = idx * self.steps * self.channels;
            data.extend(
                self.inputs[base..base + self.steps * self.channels]
                    .iter()
                    .map(|&x| S::from_cfg(x as f64)),
            );
        }
        let tensor = Tensor::from_vec(&[b, self.steps, self.channels], data)
            .expect("sized by construction");
        let labels = indices.iter().map(|&i| self.labels[i] as usize).collect();
        (tensor, labels)
    }

    /// Serialize to the STPD container (little-endian, f32 inputs, u16 labels).
    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        let name = self.meta.task.as_bytes();
        w.write_all(&(name.len() as u32).to_le_bytes())?;
        w.write_all(name)?;
        w.write_all(&self.meta.seed.to_le_bytes())?;
        for dim in [self.samples, self.steps, self.channels, self.classes] {
            w.write_all(&(dim as u32).to_le_bytes())?;
        }
        let mut buf = Vec::with_capacity(self.inputs.len() * 4);
        for &x in &self.inputs {
            buf.extend_from_slice(&x.to_le_bytes());
        }
        w.write_all(&buf)?;
        let mut lbuf = Vec::with_capacity(self.labels.len() * 2);
        for &l in &self.labels {
            lbuf.extend_from_slice(&l.to_le_bytes());
        }
        w.write_all(&lbuf)?;
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_to(&mut f)
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format(format!("bad dataset magic {magic:?}")));
        }
        let version = read_u32(r)?;
        if version != VERSION {
            return Err(Error::Format(format!("unsupported dataset version {version}")));
        }
        let name_len = read_u32(r)? as usize;
        let mut name = vec![0u8; name_len];
        r.read_exact(&mut name)?;
        let task = String::from_utf8(name)
            .map_err(|_| Error::Format("task name is not UTF-8".into()))?;
        let mut seed_bytes = [0u8; 8];
        r.read_exact(&mut seed_bytes)?;
        let seed = u64::from_le_bytes(seed_bytes);
        let samples = read_u32(r)? as usize;
        let steps = read_u32(r)? as usize;
        let channels = read_u32(r)? as usize;
        let classes = read_u32(r)? as usize;
        let count = samples * steps * channels;
        let mut buf = vec![0u8; count * 4];
        r.read_exact(&mut buf)
            .map_err(|_| Error::Format("truncated dataset payload".into()))?;
        let inputs: Vec<f32> = buf
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        let mut lbuf = vec![0u8; samples * 2];
        r.read_exact(&mut lbuf)
            .map_err(|_| Error::Format("truncated label payload".into()))?;
        let labels: Vec<u16> = lbuf
            .chunks_exact(2)
            .map(|c| u16::from_le_bytes([c[0], c[1]]))
            .collect();
        SequenceDataset::new(&task, seed, samples, steps, channels, classes, inputs, labels)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
        Self::read_from(&mut f)
    }
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> SequenceDataset {
        SequenceDataset::new(
            "toy",
            7,
            2,
            3,
            2,
            4,
            vec![0.0, 1.0, 0.5, 0.25, 1.0, 0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6],
            vec![1, 3],
        )
        .unwrap()
    }

    #[test]
    fn round_trips_byte_identically() {
        let d = toy();
        let mut buf = Vec::new();
        d.write_to(&mut buf).unwrap();
        let mut buf2 = Vec::new();
        d.write_to(&mut buf2).unwrap();
        assert_eq!(buf, buf2);
        let back = SequenceDataset::read_from(&mut buf.as_slice()).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn bad_magic_rejected() {
        let mut buf = Vec::new();
        toy().write_to(&mut buf).unwrap();
        buf[0] = b'X';
        assert!(SequenceDataset::read_from(&mut buf.as_slice()).is_err());
    }

    #[test]
    fn truncation_rejected() {
        let mut buf = Vec::new();
        toy().write_to(&mut buf).unwrap();
        buf.truncate(buf.len() - 3);
        assert!(SequenceDataset::read_from(&mut buf.as_slice()).is_err());
    }

    #[test]
    fn batch_widens_to_requested_scalar() {
        let d = toy();
        let (t, labels) = d.batch::<f64>(&[1, 0]);
        assert_eq!(t.shape(), &[2, 3, 2]);
        assert_eq!(labels, vec![3, 1]);
        assert_eq!(t.at3(0, 0, 0), 0.1f32 as f64);
        assert_eq!(t.at3(1, 0, 1), 1.0);
    }
}
