//! Stochastic number representations.
//!
//! A [`BitStream`] stores its bits packed little-endian into `u64` words: bit
//! `i` of the stream lives in bit `i % 64` of word `i / 64`. Bits past the
//! declared length are always zero, so word-level popcounts are exact.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{contract, Error, Result};

/// How a bit-stream maps to a real number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Encoding {
    /// `x = P(X = 1)`, range `[0, 1]`.
    Unipolar,
    /// `x = 2 P(X = 1) - 1`, range `[-1, 1]`.
    Bipolar,
}

impl Encoding {
    pub fn range(self) -> (f64, f64) {
        match self {
            Encoding::Unipolar => (0.0, 1.0),
            Encoding::Bipolar => (-1.0, 1.0),
        }
    }

    pub fn contains(self, value: f64) -> bool {
        let (lo, hi) = self.range();
        value >= lo && value <= hi
    }

    /// Probability of a one that encodes `value`.
    pub fn probability(self, value: f64) -> Result<f64> {
        if !self.contains(value) {
            return Err(Error::Range {
                value,
                encoding: self,
            });
        }
        Ok(match self {
            Encoding::Unipolar => value,
            Encoding::Bipolar => (value + 1.0) / 2.0,
        })
    }

    /// Value represented by a stream whose fraction of ones is `p`.
    pub fn value(self, p: f64) -> f64 {
        match self {
            Encoding::Unipolar => p,
            Encoding::Bipolar => 2.0 * p - 1.0,
        }
    }
}

pub(crate) fn words_for(len: usize) -> usize {
    len.div_ceil(64)
}

fn tail_mask(len: usize) -> u64 {
    match len % 64 {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

/// Fixed-length sequence of bits interpreted under an [`Encoding`].
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitStream {
    words: Vec<u64>,
    len: usize,
    encoding: Encoding,
}

impl BitStream {
    pub fn zeros(len: usize, encoding: Encoding) -> Self {
        BitStream {
            words: vec![0; words_for(len)],
            len,
            encoding,
        }
    }

    pub fn ones(len: usize, encoding: Encoding) -> Self {
        let mut s = Self::zeros(len, encoding);
        s.words.iter_mut().for_each(|w| *w = u64::MAX);
        s.clear_tail();
        s
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I, encoding: Encoding) -> Self {
        let mut words = Vec::new();
        let mut len = 0usize;
        for bit in bits {
            if len.is_multiple_of(64) {
                words.push(0);
            }
            if bit {
                words[len / 64] |= 1u64 << (len % 64);
            }
            len += 1;
        }
        BitStream {
            words,
            len,
            encoding,
        }
    }

    /// Builds a stream from packed words; bits beyond `len` are cleared.
    pub fn from_words(mut words: Vec<u64>, len: usize, encoding: Encoding) -> Result<Self> {
        if words.len() != words_for(len) {
            return contract("word count does not match stream length");
        }
        if let Some(last) = words.last_mut() {
            *last &= tail_mask(len);
        }
        Ok(BitStream {
            words,
            len,
            encoding,
        })
    }

    /// Parses a `0`/`1` string such as `"0100110100"`.
    pub fn parse(text: &str, encoding: Encoding) -> Result<Self> {
        let mut bits = Vec::with_capacity(text.len());
        for c in text.chars() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                '_' | ' ' => {}
                _ => return contract("bit strings may only contain '0' and '1'"),
            }
        }
        Ok(Self::from_bits(bits, encoding))
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn encoding(&self) -> Encoding {
        self.encoding
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, bit: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 1u64 << (i % 64);
        if bit {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Fraction of ones, `P(X = 1)`.
    pub fn probability(&self) -> f64 {
        if self.len == 0 {
            return 0.0;
        }
        self.count_ones() as f64 / self.len as f64
    }

    /// Decoded value: `ones / L` (unipolar) or `2 ones / L - 1` (bipolar).
    pub fn decode(&self) -> f64 {
        self.encoding.value(self.probability())
    }

    /// Copy of bits `[start, end)`.
    pub fn slice(&self, start: usize, end: usize) -> BitStream {
        assert!(start <= end && end <= self.len);
        BitStream::from_bits((start..end).map(|i| self.get(i)), self.encoding)
    }

    /// Same bits reinterpreted under another encoding.
    pub fn with_encoding(mut self, encoding: Encoding) -> BitStream {
        self.encoding = encoding;
        self
    }

    /// Bitwise complement.
    pub fn not(&self) -> BitStream {
        let mut out = self.clone();
        out.words.iter_mut().for_each(|w| *w = !*w);
        out.clear_tail();
        out
    }

    pub(crate) fn words_mut(&mut self) -> &mut [u64] {
        &mut self.words
    }

    pub(crate) fn clear_tail(&mut self) {
        let mask = tail_mask(self.len);
        if let Some(last) = self.words.last_mut() {
            *last &= mask;
        }
    }

    /// Pearson correlation of the two bit sequences, `0.0` when either is constant.
    pub fn correlation(&self, other: &BitStream) -> f64 {
        assert_eq!(self.len, other.len);
        let n = self.len as f64;
        let pa = self.count_ones() as f64 / n;
        let pb = other.count_ones() as f64 / n;
        let both: usize = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum();
        let cov = both as f64 / n - pa * pb;
        let var = pa * (1.0 - pa) * pb * (1.0 - pb);
        if var <= 0.0 {
            0.0
        } else {
            cov / libm::sqrt(var)
        }
    }

    pub fn to_bit_string(&self) -> String {
        self.iter().map(|b| if b { '1' } else { '0' }).collect()
    }
}

impl AsRef<BitStream> for BitStream {
    fn as_ref(&self) -> &BitStream {
        self
    }
}

impl fmt::Debug for BitStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        const SHOWN: usize = 64;
        let head: String = self
            .iter()
            .take(SHOWN)
            .map(|b| if b { '1' } else { '0' })
            .collect();
        let more = if self.len > SHOWN { "…" } else { "" };
        write!(f, "BitStream({:?}, L={}, {head}{more})", self.encoding, self.len)
    }
}

impl fmt::Display for BitStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Divides `value` by `factor` so the result fits `encoding`.
///
/// Callers keep `factor` around to scale results back.
pub fn prescale(value: f64, factor: f64, encoding: Encoding) -> Result<f64> {
    if !(factor > 0.0) || !factor.is_finite() {
        return contract("prescale factor must be a positive finite number");
    }
    let scaled = value / factor;
    if !encoding.contains(scaled) {
        return Err(Error::Range {
            value: scaled,
            encoding,
        });
    }
    Ok(scaled)
}

/// Signed stream made of a magnitude line and a sign line (1 = negative).
///
/// Each cycle carries one digit in `{-1, 0, +1}`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct TwoLineStream {
    magnitude: BitStream,
    sign: BitStream,
}

impl TwoLineStream {
    pub fn new(magnitude: BitStream, sign: BitStream) -> Result<Self> {
        if magnitude.len() != sign.len() {
            return contract("magnitude and sign lines must have equal length");
        }
        Ok(TwoLineStream {
            magnitude: magnitude.with_encoding(Encoding::Unipolar),
            sign: sign.with_encoding(Encoding::Unipolar),
        })
    }

    pub fn parse(magnitude: &str, sign: &str) -> Result<Self> {
        Self::new(
            BitStream::parse(magnitude, Encoding::Unipolar)?,
            BitStream::parse(sign, Encoding::Unipolar)?,
        )
    }

    /// Builds the stream from per-cycle digits in `{-1, 0, 1}`.
    pub fn from_digits<I: IntoIterator<Item = i8>>(digits: I) -> Self {
        let mut m = Vec::new();
        let mut s = Vec::new();
        for d in digits {
            m.push(d != 0);
            s.push(d < 0);
        }
        TwoLineStream {
            magnitude: BitStream::from_bits(m, Encoding::Unipolar),
            sign: BitStream::from_bits(s, Encoding::Unipolar),
        }
    }

    /// A bipolar stream viewed as ±1 digits: magnitude all ones, sign = !bit.
    pub fn from_bipolar(stream: &BitStream) -> Self {
        TwoLineStream {
            magnitude: BitStream::ones(stream.len(), Encoding::Unipolar),
            sign: stream.not().with_encoding(Encoding::Unipolar),
        }
    }

    pub fn len(&self) -> usize {
        self.magnitude.len()
    }

    pub fn is_empty(&self) -> bool {
        self.magnitude.is_empty()
    }

    pub fn magnitude(&self) -> &BitStream {
        &self.magnitude
    }

    pub fn sign(&self) -> &BitStream {
        &self.sign
    }

    /// Digit at cycle `i`.
    pub fn digit(&self, i: usize) -> i8 {
        match (self.magnitude.get(i), self.sign.get(i)) {
            (false, _) => 0,
            (true, false) => 1,
            (true, true) => -1,
        }
    }

    pub fn digits(&self) -> impl Iterator<Item = i8> + '_ {
        (0..self.len()).map(move |i| self.digit(i))
    }

    /// Sum of digits, i.e. `L` times the decoded value.
    pub fn digit_sum(&self) -> i64 {
        self.digits().map(i64::from).sum()
    }

    /// `(1/L) Σ (1 - 2 S_i) M_i`.
    pub fn decode(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        self.digit_sum() as f64 / self.len() as f64
    }
}

/// Decodes a two-line stream; see [`TwoLineStream::decode`].
pub fn two_line_decode(t: &TwoLineStream) -> f64 {
    t.decode()
}
