//! Fixed-point weight codes and filter-block weight sets.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{contract, Error, Result};
use crate::stream::Encoding;

pub const MAX_PRECISION: u32 = 64;

/// A `w`-bit weight code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QuantizedWeight {
    code: u64,
    bits: u32,
}

fn check_precision(w: u32) -> Result<()> {
    if !(1..=MAX_PRECISION).contains(&w) {
        return Err(Error::Precision(w));
    }
    Ok(())
}

/// Largest code of a `w`-bit word.
fn max_code(w: u32) -> u64 {
    if w == 64 {
        u64::MAX
    } else {
        (1u64 << w) - 1
    }
}

impl QuantizedWeight {
    pub fn new(code: u64, bits: u32) -> Result<Self> {
        check_precision(bits)?;
        if code > max_code(bits) {
            return contract("code does not fit the precision");
        }
        Ok(QuantizedWeight { code, bits })
    }

    pub fn code(&self) -> u64 {
        self.code
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }
}

/// Splits a finite `f64` into `(mantissa, exponent)` with `x = m * 2^e`.
fn decompose(x: f64) -> (i128, i32) {
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { -1 } else { 1 };
    let exp = ((bits >> 52) & 0x7FF) as i32;
    let frac = bits & ((1u64 << 52) - 1);
    let (m, e) = if exp == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), exp - 1075)
    };
    (sign * m as i128, e)
}

/// `Int(((x + 1) / 2) * 2^w)`, with `x = 1` clamped to `2^w - 1`.
///
/// The product is evaluated exactly: `x = m 2^e` gives
/// `floor((m 2^e + 1) 2^(w-1))`, computed in 128-bit integers.
pub fn quantize(x: f64, w: u32) -> Result<QuantizedWeight> {
    check_precision(w)?;
    if !Encoding::Bipolar.contains(x) {
        return Err(Error::Range {
            value: x,
            encoding: Encoding::Bipolar,
        });
    }
    let (m, e) = decompose(x);
    let half = 1i128 << (w - 1);
    // floor(m 2^(e + w - 1)) + 2^(w - 1); |x| <= 1 keeps every term in range.
    let shift = e + w as i32 - 1;
    let scaled = if m == 0 {
        0
    } else if shift >= 0 {
        m << shift
    } else if -shift >= 127 {
        if m < 0 {
            -1
        } else {
            0
        }
    } else {
        m >> -shift
    };
    let code = (scaled + half).clamp(0, max_code(w) as i128) as u64;
    QuantizedWeight::new(code, w)
}

/// `2 (code / 2^w) - 1`.
pub fn dequantize(q: QuantizedWeight) -> f64 {
    // (code - 2^(w-1)) / 2^(w-1), exact for every code up to w = 53 and
    // rounded once beyond that.
    let half = 1i128 << (q.bits - 1);
    let num = q.code as i128 - half;
    num as f64 / half as f64
}

/// One filter's weights in `(height, width, channels)` row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterBlock {
    pub id: usize,
    pub shape: [usize; 3],
    codes: Vec<QuantizedWeight>,
    originals: Vec<f64>,
}

impl FilterBlock {
    /// Quantizes `values` at precision `w`, keeping the originals for later
    /// re-quantization.
    pub fn from_values(id: usize, shape: [usize; 3], values: &[f64], w: u32) -> Result<Self> {
        if shape.iter().product::<usize>() != values.len() {
            return contract("filter values do not match the filter shape");
        }
        let codes = values.iter().map(|&v| quantize(v, w)).collect::<Result<_>>()?;
        Ok(FilterBlock {
            id,
            shape,
            codes,
            originals: values.to_vec(),
        })
    }

    /// Block read back from stored codes; the dequantized values stand in for
    /// the originals.
    pub fn from_codes(id: usize, shape: [usize; 3], codes: Vec<QuantizedWeight>) -> Result<Self> {
        if shape.iter().product::<usize>() != codes.len() {
            return contract("code count does not match the filter shape");
        }
        let originals = codes.iter().map(|&q| dequantize(q)).collect();
        Ok(FilterBlock {
            id,
            shape,
            codes,
            originals,
        })
    }

    pub fn codes(&self) -> &[QuantizedWeight] {
        &self.codes
    }

    pub fn originals(&self) -> &[f64] {
        &self.originals
    }

    pub fn values(&self) -> Vec<f64> {
        self.codes.iter().map(|&q| dequantize(q)).collect()
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightLayer {
    pub precision: u32,
    pub filters: Vec<FilterBlock>,
}

impl WeightLayer {
    pub fn new(precision: u32, filters: Vec<FilterBlock>) -> Result<Self> {
        check_precision(precision)?;
        if filters.iter().flat_map(|f| f.codes()).any(|q| q.bits() != precision) {
            return contract("every weight in a layer must share the layer precision");
        }
        if let Some(first) = filters.first() {
            if filters.iter().any(|f| f.shape != first.shape) {
                return contract("filters in one layer must share a shape");
            }
        }
        Ok(WeightLayer { precision, filters })
    }

    pub fn shape(&self) -> [usize; 3] {
        self.filters.first().map_or([0, 0, 0], |f| f.shape)
    }
}

/// Per-layer filter blocks, each layer at its own precision.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct WeightSet {
    pub layers: Vec<WeightLayer>,
}

impl WeightSet {
    pub fn new(layers: Vec<WeightLayer>) -> Self {
        WeightSet { layers }
    }

    pub fn precisions(&self) -> Vec<u32> {
        self.layers.iter().map(|l| l.precision).collect()
    }
}

/// Re-quantizes each layer from its stored real values at a new precision.
pub fn apply_layer_precisions(ws: &WeightSet, precisions: &[u32]) -> Result<WeightSet> {
    if precisions.len() != ws.layers.len() {
        return Err(Error::Shape {
            layer: precisions.len().min(ws.layers.len()),
            expected: format!("{} precisions", ws.layers.len()),
            actual: format!("{}", precisions.len()),
        });
    }
    let mut layers = Vec::with_capacity(ws.layers.len());
    for (layer, &w) in ws.layers.iter().zip(precisions) {
        check_precision(w)?;
        if w == layer.precision {
            layers.push(layer.clone());
            continue;
        }
        let filters = layer
            .filters
            .iter()
            .map(|f| {
                let codes = f.originals.iter().map(|&v| quantize(v, w)).collect::<Result<_>>()?;
                Ok(FilterBlock {
                    id: f.id,
                    shape: f.shape,
                    codes,
                    originals: f.originals.clone(),
                })
            })
            .collect::<Result<_>>()?;
        layers.push(WeightLayer { precision: w, filters });
    }
    Ok(WeightSet { layers })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn code(x: f64, w: u32) -> u64 {
        quantize(x, w).unwrap().code()
    }

    #[test]
    fn seven_bit_examples() {
        assert_eq!(code(0.0, 7), 64);
        assert_eq!(code(-1.0, 7), 0);
        assert_eq!(code(0.3, 7), 83);
        assert_eq!(code(1.0, 7), 127);
        assert_eq!(dequantize(QuantizedWeight::new(64, 7).unwrap()), 0.0);
        assert_eq!(dequantize(QuantizedWeight::new(0, 7).unwrap()), -1.0);
        assert_eq!(dequantize(QuantizedWeight::new(83, 7).unwrap()), 0.296875);
    }

    #[test]
    fn integer_part_below_zero() {
        // (-0.3 + 1) / 2 * 128 = 44.8
        assert_eq!(code(-0.3, 7), 44);
        assert_eq!(code(-1e-300, 7), 63);
        assert_eq!(code(1e-300, 7), 64);
    }

    #[test]
    fn full_precision_is_exact_to_2_pow_minus_63() {
        for &x in &[0.3, -0.7, 0.123456789, -1.0, 0.999, 1.0 - 1e-16] {
            let q = quantize(x, 64).unwrap();
            assert!((dequantize(q) - x).abs() <= libm::ldexp(1.0, -63), "{x}");
        }
    }

    #[test]
    fn out_of_range_and_bad_precision() {
        assert!(matches!(quantize(1.5, 7), Err(Error::Range { .. })));
        assert!(matches!(quantize(f64::NAN, 7), Err(Error::Range { .. })));
        assert_eq!(quantize(0.0, 0), Err(Error::Precision(0)));
        assert_eq!(quantize(0.0, 65), Err(Error::Precision(65)));
        assert!(QuantizedWeight::new(128, 7).is_err());
    }

    #[test]
    fn precision_change_requires_matching_length() {
        let f = FilterBlock::from_values(0, [1, 1, 2], &[0.1, -0.2], 7).unwrap();
        let ws = WeightSet::new(vec![WeightLayer::new(7, vec![f]).unwrap()]);
        assert!(apply_layer_precisions(&ws, &[7, 7]).is_err());
        assert_eq!(apply_layer_precisions(&ws, &[7]).unwrap(), ws);
        assert_eq!(apply_layer_precisions(&ws, &[0]), Err(Error::Precision(0)));
    }

    use alloc::vec;
}
