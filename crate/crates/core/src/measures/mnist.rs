use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use super::grid::{GridDensity, GridFrame};
use crate::error::{Error, Result};

const IMAGES_MAGIC: u32 = 0x0000_0803;
const LABELS_MAGIC: u32 = 0x0000_0801;

fn read_u32(bytes: &[u8], at: usize, path: &Path) -> Result<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| Error::parse(path, "truncated header"))
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

/// Loads digits with a label in `digits` from an IDX image/label file pair.
///
/// Each image becomes a unit-mass density on the 28x28 frame with origin
/// `(0, 0)` and spacing 1. Image row `r` (counted from the top) maps to grid
/// row `27 - r`, so the digit stays upright in a y-up frame. At most `limit`
/// densities are returned, in file order.
pub fn load_mnist_idx(
    images_path: &Path,
    labels_path: &Path,
    digits: &BTreeSet<u8>,
    limit: usize,
) -> Result<Vec<(GridDensity, u8)>> {
    let images = read_file(images_path)?;
    let labels = read_file(labels_path)?;

    let magic = read_u32(&images, 0, images_path)?;
    if magic != IMAGES_MAGIC {
        return Err(Error::parse(
            images_path,
            format!("bad image magic 0x{magic:08x}, expected 0x{IMAGES_MAGIC:08x}"),
        ));
    }
    let magic = read_u32(&labels, 0, labels_path)?;
    if magic != LABELS_MAGIC {
        return Err(Error::parse(
            labels_path,
            format!("bad label magic 0x{magic:08x}, expected 0x{LABELS_MAGIC:08x}"),
        ));
    }
    let count = read_u32(&images, 4, images_path)? as usize;
    let rows = read_u32(&images, 8, images_path)? as usize;
    let cols = read_u32(&images, 12, images_path)? as usize;
    let label_count = read_u32(&labels, 4, labels_path)? as usize;
    if count != label_count {
        return Err(Error::parse(
            images_path,
            format!("{count} images but {label_count} labels"),
        ));
    }
    if rows == 0 || cols == 0 {
        return Err(Error::parse(images_path, "zero image dimension"));
    }
    let pixels = rows * cols;
    if images.len() < 16 + count * pixels {
        return Err(Error::parse(
            images_path,
            format!(
                "truncated: {} bytes for {count} images of {rows}x{cols}",
                images.len()
            ),
        ));
    }
    if labels.len() < 8 + count {
        return Err(Error::parse(
            labels_path,
            format!("truncated: {} bytes for {count} labels", labels.len()),
        ));
    }

    let frame = GridFrame::new(cols, rows, [0.0, 0.0], 1.0)?;
    let mut out = Vec::new();
    for k in 0..count {
        if out.len() >= limit {
            break;
        }
        let label = labels[8 + k];
        if !digits.contains(&label) {
            continue;
        }
        let img = &images[16 + k * pixels..16 + (k + 1) * pixels];
        let mut w = vec![0.0; pixels];
        for r in 0..rows {
            let j = rows - 1 - r;
            for c in 0..cols {
                w[j * cols + c] = f64::from(img[r * cols + c]);
            }
        }
        let d = GridDensity::from_weights(frame, w).map_err(|_| {
            Error::parse(images_path, format!("image {k} is entirely blank"))
        })?;
        out.push((d, label));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_idx(dir: &Path, n: usize, labels: &[u8], image_magic: u32) -> (std::path::PathBuf, std::path::PathBuf) {
        let mut img = Vec::new();
        img.extend_from_slice(&image_magic.to_be_bytes());
        img.extend_from_slice(&(n as u32).to_be_bytes());
        img.extend_from_slice(&28u32.to_be_bytes());
        img.extend_from_slice(&28u32.to_be_bytes());
        for k in 0..n {
            let mut px = vec![0u8; 784];
            // one bright pixel in the top-left row, shifted by k
            px[k % 28] = 255;
            img.extend_from_slice(&px);
        }
        let mut lab = Vec::new();
        lab.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
        lab.extend_from_slice(&(labels.len() as u32).to_be_bytes());
        lab.extend_from_slice(labels);
        let ip = dir.join("img");
        let lp = dir.join("lab");
        fs::write(&ip, img).unwrap();
        fs::write(&lp, lab).unwrap();
        (ip, lp)
    }

    #[test]
    fn filters_and_orients() {
        let dir = tempfile::tempdir().unwrap();
        let (ip, lp) = write_idx(dir.path(), 4, &[0, 7, 1, 0], IMAGES_MAGIC);
        let digits: BTreeSet<u8> = [0, 1].into();
        let out = load_mnist_idx(&ip, &lp, &digits, 10).unwrap();
        assert_eq!(out.iter().map(|x| x.1).collect::<Vec<_>>(), vec![0, 1, 0]);
        // top image row becomes grid row 27
        assert_eq!(out[0].0.at(0, 27), 1.0);
        assert_eq!(out[1].0.at(2, 27), 1.0);
        assert!(load_mnist_idx(&ip, &lp, &digits, 0).unwrap().is_empty());
        assert_eq!(load_mnist_idx(&ip, &lp, &digits, 2).unwrap().len(), 2);
    }

    #[test]
    fn bad_magic_names_file() {
        let dir = tempfile::tempdir().unwrap();
        let (ip, lp) = write_idx(dir.path(), 2, &[0, 1], 0x0000_0801);
        let err = load_mnist_idx(&ip, &lp, &[0].into(), 10).unwrap_err();
        assert!(err.to_string().contains("img"), "{err}");
    }

    #[test]
    fn count_mismatch_and_truncation() {
        let dir = tempfile::tempdir().unwrap();
        let (ip, lp) = write_idx(dir.path(), 2, &[0, 1, 1], IMAGES_MAGIC);
        assert!(load_mnist_idx(&ip, &lp, &[0].into(), 10).is_err());
        let (ip, lp) = write_idx(dir.path(), 2, &[0, 1], IMAGES_MAGIC);
        let bytes = fs::read(&ip).unwrap();
        fs::write(&ip, &bytes[..bytes.len() - 10]).unwrap();
        let err = load_mnist_idx(&ip, &lp, &[0].into(), 10).unwrap_err();
        assert!(err.to_string().contains("truncated"));
    }
}
