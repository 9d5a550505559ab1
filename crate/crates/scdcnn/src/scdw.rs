//! The SCDW weight file: little-endian, filter-block grouped, bit-packed codes.
//!
//! ```text
//! "SCDW"  u16 version  u16 layer_count
//! per layer:   u8 precision  u32 filter_count  u32 height  u32 width  u32 channels
//!              per filter: ceil(h*w*c*precision / 64) u64 words
//! ```
//!
//! Codes are packed LSB first: code `j` of a filter occupies bits
//! `j*precision..(j+1)*precision` of the filter's word run. Padding bits must
//! be zero.

use std::path::Path;

use scdcnn_core::quant::{FilterBlock, QuantizedWeight, WeightLayer, WeightSet};

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"SCDW";
pub const VERSION: u16 = 1;

/// Decoding failure at a byte offset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormatError {
    pub offset: u64,
    pub message: String,
}

type Decoded<T> = std::result::Result<T, FormatError>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerHeader {
    pub precision: u32,
    pub filters: usize,
    pub shape: [usize; 3],
}

fn words_per_filter(shape: [usize; 3], precision: u32) -> usize {
    (shape.iter().product::<usize>() * precision as usize).div_ceil(64)
}

pub fn encode(ws: &WeightSet) -> Result<Vec<u8>> {
    let count = u16::try_from(ws.layers.len()).map_err(|_| Error::Config("too many layers for SCDW".into()))?;
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&count.to_le_bytes());
    for layer in &ws.layers {
        let p = layer.precision;
        let shape = layer.shape();
        out.push(p as u8);
        let filters = u32::try_from(layer.filters.len()).map_err(|_| Error::Config("too many filters".into()))?;
        out.extend_from_slice(&filters.to_le_bytes());
        for d in shape {
            let d = u32::try_from(d).map_err(|_| Error::Config("filter dimension too large".into()))?;
            out.extend_from_slice(&d.to_le_bytes());
        }
        for f in &layer.filters {
            let mut words = vec![0u64; words_per_filter(shape, p)];
            for (j, q) in f.codes().iter().enumerate() {
                put_bits(&mut words, j * p as usize, p, q.code());
            }
            for w in words {
                out.extend_from_slice(&w.to_le_bytes());
            }
        }
    }
    Ok(out)
}

fn put_bits(words: &mut [u64], at: usize, width: u32, value: u64) {
    let (i, s) = (at / 64, at % 64);
    words[i] |= value << s;
    if s + width as usize > 64 {
        words[i + 1] |= value >> (64 - s);
    }
}

fn get_bits(words: &[u64], at: usize, width: u32) -> u64 {
    let (i, s) = (at / 64, at % 64);
    let mut v = words[i] >> s;
    if s + width as usize > 64 {
        v |= words[i + 1] << (64 - s);
    }
    if width == 64 {
        v
    } else {
        v & ((1u64 << width) - 1)
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn fail<T>(&self, message: impl Into<String>) -> Decoded<T> {
        Err(FormatError {
            offset: self.pos as u64,
            message: message.into(),
        })
    }

    fn take(&mut self, n: usize, what: &str) -> Decoded<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return self.fail(format!("truncated file: expected {n} bytes of {what}"));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self, what: &str) -> Decoded<u8> {
        Ok(self.take(1, what)?[0])
    }

    fn u16(&mut self, what: &str) -> Decoded<u16> {
        Ok(u16::from_le_bytes(self.take(2, what)?.try_into().unwrap()))
    }

    fn u32(&mut self, what: &str) -> Decoded<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &str) -> Decoded<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn header(&mut self) -> Decoded<u16> {
        if self.take(4, "magic")? != MAGIC {
            self.pos = 0;
            return self.fail("bad magic, expected \"SCDW\"");
        }
        let at = self.pos;
        let version = self.u16("version")?;
        if version != VERSION {
            self.pos = at;
            return self.fail(format!("unsupported version {version}"));
        }
        self.u16("layer count")
    }

    fn layer_header(&mut self) -> Decoded<LayerHeader> {
        let at = self.pos;
        let precision = u32::from(self.u8("precision")?);
        if !(1..=64).contains(&precision) {
            self.pos = at;
            return self.fail(format!("precision {precision} outside 1..=64"));
        }
        let filters = self.u32("filter count")? as usize;
        let mut shape = [0usize; 3];
        for d in &mut shape {
            *d = self.u32("filter shape")? as usize;
        }
        Ok(LayerHeader {
            precision,
            filters,
            shape,
        })
    }
}

/// Layer headers only, skipping the code payload.
pub fn read_headers(bytes: &[u8]) -> Decoded<Vec<LayerHeader>> {
    let mut r = Reader { bytes, pos: 0 };
    let count = r.header()?;
    let mut out = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let h = r.layer_header()?;
        let payload = h.filters * words_per_filter(h.shape, h.precision) * 8;
        r.take(payload, "filter codes")?;
        out.push(h);
    }
    Ok(out)
}

pub fn decode(bytes: &[u8]) -> Decoded<WeightSet> {
    let mut r = Reader { bytes, pos: 0 };
    let count = r.header()?;
    let mut layers = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let h = r.layer_header()?;
        let size: usize = h.shape.iter().product();
        let per = words_per_filter(h.shape, h.precision);
        let mut filters = Vec::with_capacity(h.filters.min(1 << 16));
        for id in 0..h.filters {
            let at = r.pos;
            let words = (0..per).map(|_| r.u64("filter codes")).collect::<Decoded<Vec<u64>>>()?;
            let used = size * h.precision as usize;
            if !used.is_multiple_of(64) && words[per - 1] >> (used % 64) != 0 {
                r.pos = at + (per - 1) * 8;
                return r.fail("nonzero padding bits after the last code");
            }
            let codes: Vec<QuantizedWeight> = (0..size)
                .map(|j| {
                    let code = get_bits(&words, j * h.precision as usize, h.precision);
                    QuantizedWeight::new(code, h.precision).expect("code masked to its width")
                })
                .collect();
            let block = FilterBlock::from_codes(id, h.shape, codes).map_err(|e| FormatError {
                offset: at as u64,
                message: e.to_string(),
            })?;
            filters.push(block);
        }
        let layer = WeightLayer::new(h.precision, filters).map_err(|e| FormatError {
            offset: r.pos as u64,
            message: e.to_string(),
        })?;
        layers.push(layer);
    }
    if r.pos != bytes.len() {
        return r.fail(format!("{} trailing bytes", bytes.len() - r.pos));
    }
    Ok(WeightSet::new(layers))
}

pub fn save_weights(ws: &WeightSet, path: &Path) -> Result<()> {
    std::fs::write(path, encode(ws)?).map_err(|e| Error::io(path, e))
}

pub fn load_weights(path: &Path) -> Result<WeightSet> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        offset: e.offset,
        message: e.message,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bit_packing_straddles_words() {
        let mut w = vec![0u64; 2];
        put_bits(&mut w, 60, 7, 0b101_1011);
        assert_eq!(get_bits(&w, 60, 7), 0b101_1011);
        put_bits(&mut w, 0, 3, 0b111);
        assert_eq!(get_bits(&w, 0, 3), 0b111);
        assert_eq!(get_bits(&w, 60, 7), 0b101_1011);
    }

    #[test]
    fn full_width_codes() {
        let mut w = vec![0u64; 2];
        put_bits(&mut w, 64, 64, u64::MAX - 5);
        assert_eq!(get_bits(&w, 64, 64), u64::MAX - 5);
    }
}
