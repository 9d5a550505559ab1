//! Stochastic number generation.
//!
//! An SNG compares a target probability against a stream of `k`-bit
//! pseudo-random words: bit `t` is one iff `word_t / 2^k < p`. Two word
//! sources are provided:
//!
//! * [`SngMode::Lfsr`]: a Galois LFSR over a primitive feedback polynomial.
//!   Each word is the register after `stride` clocks, where `stride` is the
//!   smallest count `>= k` coprime to `2^k - 1`. Consecutive words therefore
//!   share no shifted bits and the word sequence still visits every nonzero
//!   register value once per period.
//! * [`SngMode::CounterExact`]: a `k`-bit counter read bit-reversed, which
//!   enumerates every `k`-bit value exactly once per `2^k` steps.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{contract, Result};
use crate::stream::{BitStream, Encoding};

pub const MIN_WIDTH: u32 = 8;
pub const MAX_WIDTH: u32 = 32;
pub const DEFAULT_WIDTH: u32 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SngMode {
    Lfsr,
    CounterExact,
}

/// SplitMix64 finalizer, used to derive seeds from stream identifiers.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Distinct prime factors of `n`.
fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut q = 2u64;
    while q * q <= n {
        if n.is_multiple_of(q) {
            out.push(q);
            while n.is_multiple_of(q) {
                n /= q;
            }
        }
        q += if q == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// `a * b mod poly` in GF(2)[x], `poly` of degree `width` (with its x^width bit set).
fn gf2_mulmod(mut a: u64, mut b: u64, poly: u64, width: u32) -> u64 {
    let top = 1u64 << width;
    let mut r = 0u64;
    while b != 0 {
        if b & 1 == 1 {
            r ^= a;
        }
        b >>= 1;
        a <<= 1;
        if a & top != 0 {
            a ^= poly;
        }
    }
    r
}

fn gf2_pow_x(mut e: u64, poly: u64, width: u32) -> u64 {
    let mut result = 1u64;
    let mut base = 2u64;
    while e != 0 {
        if e & 1 == 1 {
            result = gf2_mulmod(result, base, poly, width);
        }
        base = gf2_mulmod(base, base, poly, width);
        e >>= 1;
    }
    result
}

/// True when `poly` (degree `width`, x^width bit included) is primitive,
/// i.e. the multiplicative order of `x` is exactly `2^width - 1`.
pub fn is_primitive(poly: u64, width: u32) -> bool {
    if !(MIN_WIDTH..=MAX_WIDTH).contains(&width) || poly >> width != 1 || poly & 1 == 0 {
        return false;
    }
    let period = (1u64 << width) - 1;
    if gf2_pow_x(period, poly, width) != 1 {
        return false;
    }
    prime_factors(period)
        .into_iter()
        .all(|q| gf2_pow_x(period / q, poly, width) != 1)
}

/// Primitive polynomials of degree `width` in ascending numeric order.
pub fn primitive_polynomials(width: u32) -> impl Iterator<Item = u64> {
    let count = if (MIN_WIDTH..=MAX_WIDTH).contains(&width) {
        1u64 << (width - 1)
    } else {
        0
    };
    (0..count)
        .map(move |c| (1u64 << width) | (c << 1) | 1)
        .filter(move |&p| is_primitive(p, width))
}

/// A primitive feedback polynomial together with its `stride`-clock jump table.
#[derive(Debug)]
pub struct LfsrPolynomial {
    width: u32,
    poly: u64,
    stride: u32,
    // tables[b][v]: image of byte `v` at byte position `b` after `stride` clocks
    tables: Vec<[u32; 256]>,
}

impl LfsrPolynomial {
    pub fn new(width: u32, poly: u64) -> Result<Self> {
        if !is_primitive(poly, width) {
            return contract("LFSR feedback polynomial must be primitive");
        }
        Ok(Self::new_unchecked(width, poly))
    }

    fn new_unchecked(width: u32, poly: u64) -> Self {
        let period = (1u64 << width) - 1;
        let mut stride = width;
        while gcd(u64::from(stride), period) != 1 {
            stride += 1;
        }
        let taps = (poly >> 1) as u32;
        let clock = |mut s: u32| {
            for _ in 0..stride {
                let lsb = s & 1;
                s >>= 1;
                if lsb == 1 {
                    s ^= taps;
                }
            }
            s
        };
        let images: Vec<u32> = (0..width).map(|j| clock(1u32 << j)).collect();
        let bytes = width.div_ceil(8) as usize;
        let mut tables = Vec::with_capacity(bytes);
        for b in 0..bytes {
            let mut t = [0u32; 256];
            for (v, slot) in t.iter_mut().enumerate() {
                let mut acc = 0u32;
                for i in 0..8 {
                    let bit = b * 8 + i;
                    if bit < width as usize && (v >> i) & 1 == 1 {
                        acc ^= images[bit];
                    }
                }
                *slot = acc;
            }
            tables.push(t);
        }
        LfsrPolynomial {
            width,
            poly,
            stride,
            tables,
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    /// Feedback polynomial including the `x^width` and `x^0` terms.
    pub fn polynomial(&self) -> u64 {
        self.poly
    }

    /// Register clocks per emitted word.
    pub fn stride(&self) -> u32 {
        self.stride
    }

    #[inline]
    fn advance(&self, state: u32) -> u32 {
        let mut out = 0u32;
        for (b, t) in self.tables.iter().enumerate() {
            out ^= t[((state >> (8 * b)) & 0xFF) as usize];
        }
        out
    }
}

#[derive(Debug, Clone)]
enum Source {
    Lfsr {
        poly: Arc<LfsrPolynomial>,
        register: u32,
    },
    Counter {
        next: u64,
    },
}

/// Word generator feeding a stochastic number generator.
#[derive(Debug, Clone)]
pub struct SngState {
    width: u32,
    source: Source,
}

impl SngState {
    /// LFSR generator; `seed` is reduced into the nonzero register range.
    pub fn lfsr(width: u32, poly: u64, seed: u64) -> Result<Self> {
        let p = Arc::new(LfsrPolynomial::new(width, poly)?);
        Ok(Self::from_polynomial(p, seed))
    }

    pub fn from_polynomial(poly: Arc<LfsrPolynomial>, seed: u64) -> Self {
        let width = poly.width;
        let period = (1u64 << width) - 1;
        let register = (seed % period + 1) as u32;
        SngState {
            width,
            source: Source::Lfsr { poly, register },
        }
    }

    /// Bit-reversed counter starting at `start mod 2^width`.
    pub fn counter(width: u32, start: u64) -> Result<Self> {
        if !(MIN_WIDTH..=MAX_WIDTH).contains(&width) {
            return contract("SNG width must lie in 8..=32");
        }
        Ok(SngState {
            width,
            source: Source::Counter {
                next: start & ((1u64 << width) - 1),
            },
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn mode(&self) -> SngMode {
        match self.source {
            Source::Lfsr { .. } => SngMode::Lfsr,
            Source::Counter { .. } => SngMode::CounterExact,
        }
    }

    /// Current LFSR register (or counter value).
    pub fn register(&self) -> u64 {
        match &self.source {
            Source::Lfsr { register, .. } => u64::from(*register),
            Source::Counter { next } => *next,
        }
    }

    /// Feedback polynomial in LFSR mode.
    pub fn polynomial(&self) -> Option<u64> {
        match &self.source {
            Source::Lfsr { poly, .. } => Some(poly.poly),
            Source::Counter { .. } => None,
        }
    }

    /// Number of steps before the word sequence repeats.
    pub fn period(&self) -> u64 {
        match self.source {
            Source::Lfsr { .. } => (1u64 << self.width) - 1,
            Source::Counter { .. } => 1u64 << self.width,
        }
    }

    /// Next `k`-bit word.
    #[inline]
    pub fn next_word(&mut self) -> u64 {
        match &mut self.source {
            Source::Lfsr { poly, register } => {
                *register = poly.advance(*register);
                u64::from(*register)
            }
            Source::Counter { next } => {
                let c = *next;
                *next = (c + 1) & ((1u64 << self.width) - 1);
                c.reverse_bits() >> (64 - self.width)
            }
        }
    }

    /// Next word as a fraction in `[0, 1)`.
    pub fn next_fraction(&mut self) -> f64 {
        self.next_word() as f64 / (1u64 << self.width) as f64
    }

    /// Uniform choice in `[0, n)` derived from the next word.
    #[inline]
    pub fn select(&mut self, n: usize) -> usize {
        ((self.next_word() * n as u64) >> self.width) as usize
    }

    /// Comparator threshold: a word `w` produces a one iff `w < threshold`.
    pub fn threshold(&self, p: f64) -> u64 {
        libm::ceil(p * (1u64 << self.width) as f64) as u64
    }
}

/// Encodes `value` as a stream of `len` bits, advancing `gen` by `len` words.
pub fn generate_stream(
    value: f64,
    encoding: Encoding,
    len: usize,
    gen: &mut SngState,
) -> Result<BitStream> {
    if len == 0 {
        return contract("stream length must be at least 1");
    }
    let p = encoding.probability(value)?;
    let threshold = gen.threshold(p);
    let mut out = BitStream::zeros(len, encoding);
    let words = out.words_mut();
    for i in 0..len {
        if gen.next_word() < threshold {
            words[i / 64] |= 1u64 << (i % 64);
        }
    }
    Ok(out)
}

/// Hands out independent generators keyed by a stream identifier.
///
/// In LFSR mode, stream `id` uses polynomial `id mod P` from a fixed family
/// of `P` primitive polynomials and a nonzero seed derived from
/// `(seed, id)`, so every consumer owns its own reproducible SNG.
#[derive(Debug, Clone)]
pub struct SngBank {
    width: u32,
    mode: SngMode,
    seed: u64,
    family: Arc<Vec<Arc<LfsrPolynomial>>>,
}

impl SngBank {
    pub const FAMILY_SIZE: usize = 64;

    pub fn new(mode: SngMode, width: u32, seed: u64) -> Result<Self> {
        if !(MIN_WIDTH..=MAX_WIDTH).contains(&width) {
            return contract("SNG width must lie in 8..=32");
        }
        let family = match mode {
            SngMode::Lfsr => primitive_polynomials(width)
                .take(Self::FAMILY_SIZE)
                .map(|p| Arc::new(LfsrPolynomial::new_unchecked(width, p)))
                .collect(),
            SngMode::CounterExact => Vec::new(),
        };
        Ok(SngBank {
            width,
            mode,
            seed,
            family: Arc::new(family),
        })
    }

    /// Same polynomial family, different seed.
    pub fn reseeded(&self, seed: u64) -> Self {
        SngBank {
            seed,
            ..self.clone()
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn mode(&self) -> SngMode {
        self.mode
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn polynomials(&self) -> impl Iterator<Item = u64> + '_ {
        self.family.iter().map(|p| p.poly)
    }

    /// Generator for stream `id`.
    pub fn generator(&self, id: u64) -> SngState {
        let derived = mix64(self.seed ^ mix64(id));
        match self.mode {
            SngMode::Lfsr => {
                let poly = &self.family[(id % self.family.len() as u64) as usize];
                SngState::from_polynomial(poly.clone(), derived)
            }
            SngMode::CounterExact => SngState {
                width: self.width,
                source: Source::Counter {
                    next: derived & ((1u64 << self.width) - 1),
                },
            },
        }
    }

    /// Encodes `value` with the generator of stream `id`.
    pub fn stream(&self, id: u64, value: f64, encoding: Encoding, len: usize) -> Result<BitStream> {
        generate_stream(value, encoding, len, &mut self.generator(id))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::collections::BTreeSet;

    #[test]
    fn known_primitive_polynomials() {
        // x^8 + x^4 + x^3 + x^2 + 1 and x^10 + x^3 + 1
        assert!(is_primitive(0x11D, 8));
        assert!(is_primitive(0x409, 10));
        // x^8 + x^4 + x^3 + x + 1 (AES) is irreducible but not primitive
        assert!(!is_primitive(0x11B, 8));
        assert!(!is_primitive(0x400, 10));
    }

    #[test]
    fn primitive_counts_match_totient() {
        // phi(2^k - 1) / k
        assert_eq!(primitive_polynomials(8).count(), 16);
        assert_eq!(primitive_polynomials(10).count(), 60);
    }

    #[test]
    fn lfsr_visits_every_nonzero_state_once() {
        for width in [8u32, 10, 12] {
            let poly = primitive_polynomials(width).next().unwrap();
            let mut g = SngState::lfsr(width, poly, 5).unwrap();
            let period = g.period();
            let mut seen = BTreeSet::new();
            for _ in 0..period {
                let w = g.next_word();
                assert_ne!(w, 0);
                seen.insert(w);
            }
            assert_eq!(seen.len() as u64, period);
            let start = g.register();
            let mut again = g.clone();
            for _ in 0..period {
                again.next_word();
            }
            assert_eq!(again.register(), start);
        }
    }

    #[test]
    fn stride_is_coprime_to_period() {
        let p = LfsrPolynomial::new(12, primitive_polynomials(12).next().unwrap()).unwrap();
        assert_eq!(gcd(u64::from(p.stride()), 4095), 1);
        assert!(p.stride() >= 12);
    }

    #[test]
    fn counter_enumerates_all_values() {
        let mut g = SngState::counter(10, 77).unwrap();
        let seen: BTreeSet<u64> = (0..1024).map(|_| g.next_word()).collect();
        assert_eq!(seen.len(), 1024);
    }

    #[test]
    fn counter_exact_ones_count() {
        // direct count oracle: every comparator word 0..2^k appears once
        let k = 10u32;
        let expected = (0..1u64 << k).filter(|&w| (w as f64) / 1024.0 < 0.3).count();
        assert_eq!(expected, 308);
        let mut g = SngState::counter(k, 0).unwrap();
        let s = generate_stream(0.3, Encoding::Unipolar, 1024, &mut g).unwrap();
        assert_eq!(s.count_ones(), expected);
    }

    #[test]
    fn bipolar_one_is_all_ones() {
        let bank = SngBank::new(SngMode::Lfsr, 10, 3).unwrap();
        for l in [1usize, 7, 64, 1000] {
            let s = bank.stream(9, 1.0, Encoding::Bipolar, l).unwrap();
            assert_eq!(s.count_ones(), l);
            let z = bank.stream(9, -1.0, Encoding::Bipolar, l).unwrap();
            assert_eq!(z.count_ones(), 0);
        }
    }

    #[test]
    fn out_of_range_is_rejected() {
        let mut g = SngState::counter(10, 0).unwrap();
        assert!(generate_stream(1.2, Encoding::Unipolar, 8, &mut g).is_err());
        assert!(generate_stream(-1.01, Encoding::Bipolar, 8, &mut g).is_err());
        assert!(generate_stream(0.5, Encoding::Unipolar, 0, &mut g).is_err());
    }

    #[test]
    fn generation_is_deterministic() {
        let bank = SngBank::new(SngMode::Lfsr, 16, 42).unwrap();
        let a = bank.stream(3, 0.37, Encoding::Bipolar, 500).unwrap();
        let b = bank.stream(3, 0.37, Encoding::Bipolar, 500).unwrap();
        assert_eq!(a, b);
        let c = bank.stream(4, 0.37, Encoding::Bipolar, 500).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn generate_advances_by_length() {
        let bank = SngBank::new(SngMode::Lfsr, 12, 1).unwrap();
        let mut g = bank.generator(0);
        let mut h = g.clone();
        generate_stream(0.5, Encoding::Unipolar, 100, &mut g).unwrap();
        for _ in 0..100 {
            h.next_word();
        }
        assert_eq!(g.register(), h.register());
    }

    #[test]
    fn invalid_polynomial_rejected() {
        assert!(SngState::lfsr(10, 0x400 | 1, 1).is_err());
        assert!(SngState::lfsr(4, 0x13, 1).is_err());
    }
}
