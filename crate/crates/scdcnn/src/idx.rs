//! MNIST-style IDX containers (big-endian).

use std::path::Path;

use scdcnn_core::network::Image;

use crate::error::{Error, Result};

pub const IMAGE_MAGIC: u32 = 0x0000_0803;
pub const LABEL_MAGIC: u32 = 0x0000_0801;

fn parse_error(path: &Path, offset: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        offset: offset as u64,
        message: message.into(),
    }
}

fn be_u32(bytes: &[u8], at: usize, path: &Path, what: &str) -> Result<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes(b.try_into().unwrap()))
        .ok_or_else(|| parse_error(path, at, format!("truncated header: missing {what}")))
}

fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

/// Raw pixel rows of an image file: `(rows, cols, pixels)`.
pub fn parse_images(bytes: &[u8], path: &Path) -> Result<(usize, usize, Vec<Vec<u8>>)> {
    let magic = be_u32(bytes, 0, path, "magic")?;
    if magic != IMAGE_MAGIC {
        return Err(parse_error(path, 0, format!("bad magic {magic:#010x}, expected {IMAGE_MAGIC:#010x}")));
    }
    let n = be_u32(bytes, 4, path, "image count")? as usize;
    let rows = be_u32(bytes, 8, path, "row count")? as usize;
    let cols = be_u32(bytes, 12, path, "column count")? as usize;
    let size = rows * cols;
    let need = 16 + n * size;
    if bytes.len() < need {
        let complete = (bytes.len() - 16) / size.max(1);
        return Err(parse_error(path, 16 + complete * size, format!("truncated payload: {n} images declared, {complete} present")));
    }
    if bytes.len() > need {
        return Err(parse_error(path, need, "trailing bytes after the last image"));
    }
    let images = bytes[16..].chunks_exact(size.max(1)).take(n).map(<[u8]>::to_vec).collect();
    Ok((rows, cols, images))
}

pub fn parse_labels(bytes: &[u8], path: &Path) -> Result<Vec<u8>> {
    let magic = be_u32(bytes, 0, path, "magic")?;
    if magic != LABEL_MAGIC {
        return Err(parse_error(path, 0, format!("bad magic {magic:#010x}, expected {LABEL_MAGIC:#010x}")));
    }
    let n = be_u32(bytes, 4, path, "label count")? as usize;
    let payload = &bytes[8..];
    if payload.len() < n {
        return Err(parse_error(path, bytes.len(), format!("truncated payload: {n} labels declared, {} present", payload.len())));
    }
    if payload.len() > n {
        return Err(parse_error(path, 8 + n, "trailing bytes after the last label"));
    }
    if let Some(i) = payload.iter().position(|&l| l > 9) {
        return Err(parse_error(path, 8 + i, format!("label {} outside 0..=9", payload[i])));
    }
    Ok(payload.to_vec())
}

/// `x = 2 v / 255 - 1`.
pub fn pixel_value(v: u8) -> f64 {
    2.0 * (f64::from(v) / 255.0) - 1.0
}

/// Images with labels from an image file and a label file of equal count.
pub fn load_idx(images: &Path, labels: &Path) -> Result<Vec<Image>> {
    let (rows, cols, raw) = parse_images(&read(images)?, images)?;
    let lab = parse_labels(&read(labels)?, labels)?;
    if lab.len() != raw.len() {
        return Err(Error::Format {
            path: labels.to_path_buf(),
            message: format!("{} labels for {} images in {}", lab.len(), raw.len(), images.display()),
        });
    }
    raw.iter()
        .zip(lab)
        .map(|(px, l)| {
            let pixels = px.iter().map(|&v| pixel_value(v)).collect();
            Ok(Image::new([rows, cols, 1], pixels, Some(l))?)
        })
        .collect()
}

/// Test split of an MNIST directory (`t10k-images-idx3-ubyte`, `t10k-labels-idx1-ubyte`).
pub fn load_mnist_test(dir: &Path) -> Result<Vec<Image>> {
    load_idx(&dir.join("t10k-images-idx3-ubyte"), &dir.join("t10k-labels-idx1-ubyte"))
}

pub fn encode_images(rows: usize, cols: usize, images: &[Vec<u8>]) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + images.len() * rows * cols);
    for v in [IMAGE_MAGIC, images.len() as u32, rows as u32, cols as u32] {
        out.extend_from_slice(&v.to_be_bytes());
    }
    for img in images {
        out.extend_from_slice(img);
    }
    out
}

pub fn encode_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABEL_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}
