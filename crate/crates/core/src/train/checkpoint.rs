use std::io::{Read, Write};
use std::path::Path;

use crate::engine::Network;
use crate::error::{Error, Result};
use crate::numerics::{Scalar, Tensor};
use crate::train::OptimState;

const MAGIC: &[u8; 4] = b"STPB";
const VERSION: u32 = 1;

/// A versioned container of named f64 arrays: every weight tensor, the
/// optimizer moments and step counter, the epoch index, and a config hash so
/// a checkpoint can only be restored into the run that produced it.
///
/// Arrays are stored f64 regardless of the run's scalar type; f32 values
/// widen and narrow losslessly.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub config_hash: [u8; 32],
    pub epoch: u64,
    pub arrays: Vec<(String, Vec<usize>, Vec<f64>)>,
}

fn widen<S: Scalar>(t: &Tensor<S>) -> (Vec<usize>, Vec<f64>) {
    (
        t.shape().to_vec(),
        t.data().iter().map(|x| x.to_f64().unwrap()).collect(),
    )
}

impl Checkpoint {
    /// Snapshot a network plus optimizer state at the end of `epoch`.
    pub fn capture<S: Scalar>(
        config_hash: [u8; 32],
        epoch: u64,
        net: &Network<S>,
        opt: &OptimState<S>,
    ) -> Self {
        let mut arrays = Vec::new();
        for (i, l) in net.layers.iter().enumerate() {
            let (dims, data) = widen(&l.w);
            arrays.push((format!("layer{i}.w"), dims, data));
            if let Some(v) = &l.v {
                let (dims, data) = widen(v);
                arrays.push((format!("layer{i}.v"), dims, data));
            }
        }
        let (dims, data) = widen(&net.readout.w_out);
        arrays.push(("readout.w_out".to_string(), dims, data));
        for (i, m) in opt.m.iter().enumerate() {
            let (dims, data) = widen(m);
            arrays.push((format!("opt.m{i}"), dims, data));
        }
        for (i, v) in opt.v.iter().enumerate() {
            let (dims, data) = widen(v);
            arrays.push((format!("opt.v{i}"), dims, data));
        }
        arrays.push(("opt.step".to_string(), vec![1], vec![opt.step as f64]));
        Checkpoint {
            config_hash,
            epoch,
            arrays,
        }
    }

    fn get(&self, name: &str) -> Result<&(String, Vec<usize>, Vec<f64>)> {
        self.arrays
            .iter()
            .find(|(n, _, _)| n == name)
            .ok_or_else(|| Error::Format(format!("checkpoint is missing array '{name}'")))
    }

    fn load_into<S: Scalar>(&self, name: &str, t: &mut Tensor<S>) -> Result<()> {
        let (_, dims, data) = self.get(name)?;
        if dims != t.shape() {
            return Err(Error::ShapeMismatch(format!(
                "checkpoint array '{name}' has dims {dims:?}, expected {:?}",
                t.shape()
            )));
        }
        for (dst, &src) in t.data_mut().iter_mut().zip(data) {
            *dst = S::from_cfg(src);
        }
        Ok(())
    }

    /// Restore weights and optimizer state into an already-shaped network.
    /// The caller is responsible for checking the config hash first (see
    /// [`Checkpoint::read_from`] / [`Checkpoint::load`] with `expect_hash`).
    pub fn restore<S: Scalar>(
        &self,
        net: &mut Network<S>,
        opt: &mut OptimState<S>,
    ) -> Result<()> {
        for i in 0..net.layers.len() {
            let has_v = net.layers[i].v.is_some();
            self.load_into(&format!("layer{i}.w"), &mut net.layers[i].w)?;
            if has_v {
                self.load_into(&format!("layer{i}.v"), net.layers[i].v.as_mut().unwrap())?;
            }
        }
        self.load_into("readout.w_out", &mut net.readout.w_out)?;
        for (i, m) in opt.m.iter_mut().enumerate() {
            self.load_into(&format!("opt.m{i}"), m)?;
        }
        for (i, v) in opt.v.iter_mut().enumerate() {
            self.load_into(&format!("opt.v{i}"), v)?;
        }
        let (_, _, step) = self.get("opt.step")?;
        opt.step = step[0] as u64;
        Ok(())
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&self.config_hash)?;
        w.write_all(&self.epoch.to_le_bytes())?;
        w.write_all(&(self.arrays.len() as u32).to_le_bytes())?;
        for (name, dims, data) in &self.arrays {
            w.write_all(&(name.len() as u32).to_le_bytes())?;
            w.write_all(name.as_bytes())?;
            w.write_all(&[dims.len() as u8])?;
            for &d in dims {
                w.write_all(&(d as u32).to_le_bytes())?;
            }
            let mut buf = Vec::with_capacity(data.len() * 8);
            for &x in data {
                buf.extend_from_slice(&x.to_le_bytes());
            }
            w.write_all(&buf)?;
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_to(&mut f)
    }

    /// Parse a checkpoint; when `expect_hash` is given, a mismatching config
    /// hash is an error.
    pub fn read_from<R: Read>(r: &mut R, expect_hash: Option<&[u8; 32]>) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format(format!("bad checkpoint magic {magic:?}")));
        }
        let version = read_u32(r)?;
        if version != VERSION {
            return Err(Error::Format(format!(
                "unsupported checkpoint version {version}"
            )));
        }
        let mut config_hash = [0u8; 32];
        r.read_exact(&mut config_hash)?;
        if let Some(expect) = expect_hash {
            if expect != &config_hash {
                return Err(Error::Format(
                    "checkpoint config hash does not match the active config".into(),
                ));
            }
        }
        let mut epoch_bytes = [0u8; 8];
        r.read_exact(&mut epoch_bytes)?;
        let epoch = u64::from_le_bytes(epoch_bytes);
        let count = read_u32(r)? as usize;
        let mut arrays = Vec::with_capacity(count);
        for _ in 0..count {
            let name_len = read_u32(r)? as usize;
            let mut name = vec![0u8; name_len];
            r.read_exact(&mut name)?;
            let name = String::from_utf8(name)
                .map_err(|_| Error::Format("array name is not UTF-8".into()))?;
            let mut ndim = [0u8; 1];
            r.read_exact(&mut ndim)?;
            let mut dims = Vec::with_capacity(ndim[0] as usize);
            for _ in 0..ndim[0] {
                dims.push(read_u32(r)? as usize);
            }
            let n: usize = dims.iter().product();
            let mut buf = vec![0u8; n * 8];
            r.read_exact(&mut buf)
                .map_err(|_| Error::Format(format!("truncated payload for array '{name}'")))?;
            let data = buf
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect();
            arrays.push((name, dims, data));
        }
        Ok(Checkpoint {
            config_hash,
            epoch,
            arrays,
        })
    }

    pub fn load(path: &Path, expect_hash: Option<&[u8; 32]>) -> Result<Self> {
        let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
        Self::read_from(&mut f, expect_hash)
    }
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}
