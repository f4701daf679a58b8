use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};

const IMAGE_MAGIC: u32 = 0x0000_0803;
const LABEL_MAGIC: u32 = 0x0000_0801;

/// Raw MNIST payload as read from the big-endian IDX files: pixel bytes kept
/// verbatim, scaled to [0, 1] only when sequences are built from them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MnistData {
    pub samples: usize,
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<u8>,
    pub labels: Vec<u8>,
}

impl MnistData {
    #[inline]
    pub fn pixel(&self, sample: usize, row: usize, col: usize) -> u8 {
        self.pixels[(sample * self.rows + row) * self.cols + col]
    }
}

fn read_u32_be<R: Read>(r: &mut R, what: &str) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)
        .map_err(|_| Error::Format(format!("truncated IDX file while reading {what}")))?;
    Ok(u32::from_be_bytes(b))
}

/// Parse an MNIST-style IDX image/label file pair.
pub fn load_mnist_idx(images_path: &Path, labels_path: &Path) -> Result<MnistData> {
    let mut img = std::io::BufReader::new(std::fs::File::open(images_path)?);
    let magic = read_u32_be(&mut img, "image magic")?;
    if magic != IMAGE_MAGIC {
        return Err(Error::Format(format!(
            "bad image magic {magic:#010x}, expected {IMAGE_MAGIC:#010x}"
        )));
    }
    let samples = read_u32_be(&mut img, "image count")? as usize;
    let rows = read_u32_be(&mut img, "row count")? as usize;
    let cols = read_u32_be(&mut img, "column count")? as usize;
    let mut pixels = vec![0u8; samples * rows * cols];
    img.read_exact(&mut pixels)
        .map_err(|_| Error::Format("truncated image payload".into()))?;

    let mut lbl = std::io::BufReader::new(std::fs::File::open(labels_path)?);
    let magic = read_u32_be(&mut lbl, "label magic")?;
    if magic != LABEL_MAGIC {
        return Err(Error::Format(format!(
            "bad label magic {magic:#010x}, expected {LABEL_MAGIC:#010x}"
        )));
    }
    let label_count = read_u32_be(&mut lbl, "label count")? as usize;
    if label_count != samples {
        return Err(Error::Format(format!(
            "image/label count mismatch: {samples} vs {label_count}"
        )));
    }
    let mut labels = vec![0u8; label_count];
    lbl.read_exact(&mut labels)
        .map_err(|_| Error::Format("truncated label payload".into()))?;

    Ok(MnistData {
        samples,
        rows,
        cols,
        pixels,
        labels,
    })
}

#[cfg(test)]
pub(crate) fn write_idx_pair(
    dir: &Path,
    pixels: &[u8],
    labels: &[u8],
    rows: usize,
    cols: usize,
) -> (std::path::PathBuf, std::path::PathBuf) {
    use std::io::Write;
    let n = labels.len();
    assert_eq!(pixels.len(), n * rows * cols);
    let img_path = dir.join("images.idx3-ubyte");
    let lbl_path = dir.join("labels.idx1-ubyte");
    let mut f = std::fs::File::create(&img_path).unwrap();
    f.write_all(&IMAGE_MAGIC.to_be_bytes()).unwrap();
    f.write_all(&(n as u32).to_be_bytes()).unwrap();
    f.write_all(&(rows as u32).to_be_bytes()).unwrap();
    f.write_all(&(cols as u32).to_be_bytes()).unwrap();
    f.write_all(pixels).unwrap();
    let mut f = std::fs::File::create(&lbl_path).unwrap();
    f.write_all(&LABEL_MAGIC.to_be_bytes()).unwrap();
    f.write_all(&(n as u32).to_be_bytes()).unwrap();
    f.write_all(labels).unwrap();
    (img_path, lbl_path)
}
