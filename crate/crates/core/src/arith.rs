//! Elementary SC arithmetic: multiplication and the four addition schemes.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{contract, Result};
use crate::sng::SngState;
use crate::stream::{BitStream, Encoding, TwoLineStream};

fn check_compatible(streams: &[&BitStream]) -> Result<()> {
    let Some(first) = streams.first() else {
        return contract("at least one input stream is required");
    };
    for s in &streams[1..] {
        if s.len() != first.len() {
            return contract("input streams must have equal length");
        }
        if s.encoding() != first.encoding() {
            return contract("input streams must share one encoding");
        }
    }
    Ok(())
}

/// AND (unipolar) or XNOR (bipolar) of two streams.
pub fn multiply(a: &BitStream, b: &BitStream) -> Result<BitStream> {
    check_compatible(&[a, b])?;
    let mut out = a.clone();
    let bipolar = a.encoding() == Encoding::Bipolar;
    for (o, &w) in out.words_mut().iter_mut().zip(b.words()) {
        *o = if bipolar { !(*o ^ w) } else { *o & w };
    }
    out.clear_tail();
    Ok(out)
}

/// Positionwise OR of all inputs.
pub fn add_or(inputs: &[BitStream]) -> Result<BitStream> {
    let refs: Vec<&BitStream> = inputs.iter().collect();
    check_compatible(&refs)?;
    let mut out = inputs[0].clone();
    for s in &inputs[1..] {
        for (o, &w) in out.words_mut().iter_mut().zip(s.words()) {
            *o |= w;
        }
    }
    Ok(out)
}

/// `n`-to-1 multiplexer; each cycle forwards the bit of a uniformly chosen input.
pub fn add_mux(inputs: &[BitStream], select: &mut SngState) -> Result<BitStream> {
    let refs: Vec<&BitStream> = inputs.iter().collect();
    check_compatible(&refs)?;
    let n = inputs.len();
    let len = inputs[0].len();
    let mut out = BitStream::zeros(len, inputs[0].encoding());
    let words = out.words_mut();
    for i in 0..len {
        let chosen = select.select(n);
        let w = inputs[chosen].words()[i / 64];
        words[i / 64] |= w & (1u64 << (i % 64));
    }
    Ok(out)
}

/// Per-cycle counts emitted by a parallel counter.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryStream {
    counts: Vec<u32>,
    n: usize,
}

impl BinaryStream {
    pub fn new(counts: Vec<u32>, n: usize) -> Result<Self> {
        if counts.iter().any(|&c| c as usize > n) {
            return contract("per-cycle counts must lie in [0, n]");
        }
        Ok(BinaryStream { counts, n })
    }

    /// Every cycle carries the same count.
    pub fn constant(count: u32, n: usize, len: usize) -> Result<Self> {
        Self::new(vec![count; len], n)
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    /// Number of summed input lines.
    pub fn fan_in(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Output word width, `ceil(log2 n)` bits.
    pub fn width(&self) -> u32 {
        (self.n.max(1) as u64).next_power_of_two().trailing_zeros()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&c| u64::from(c)).sum()
    }

    /// Average count per cycle.
    pub fn mean_count(&self) -> f64 {
        if self.counts.is_empty() {
            return 0.0;
        }
        self.total() as f64 / self.counts.len() as f64
    }

    /// Bipolar sum estimate `(1/L) Σ (2 c_t - n)` of the `n` summed streams.
    pub fn decode_bipolar_sum(&self) -> f64 {
        2.0 * self.mean_count() - self.n as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ApcMode {
    /// True population count of every column.
    Exact,
    /// Approximate parallel counter built from 16-input units.
    Approximate,
}

/// Parallel counter over the columns of the `n x L` input bit-matrix.
///
/// The approximate unit takes inputs `A_0..A_7` (lines `16u..16u+8`) and
/// `B_0..B_7` (lines `16u+8..16u+16`), replaces the first adder layer by
/// `A_j & B_j` for even `j` and `A_j | B_j` for odd `j`, and sums the eight
/// gate outputs exactly. That sum is a 4-bit word whose least significant
/// bit has weight 2, so every unit reports an even approximation of its true
/// count in `0..=16`.
pub fn apc(inputs: &[BitStream], mode: ApcMode) -> Result<BinaryStream> {
    let n = inputs.len();
    if n < 2 {
        return contract("a parallel counter needs at least two inputs");
    }
    let len = inputs[0].len();
    if inputs.iter().any(|s| s.len() != len) {
        return contract("input streams must have equal length");
    }
    let words = inputs[0].words().len();
    let mut planes = BitPlanes::new(words, n);
    match mode {
        ApcMode::Exact => {
            for s in inputs {
                planes.add(s.words(), 0);
            }
        }
        ApcMode::Approximate => {
            if !n.is_multiple_of(16) {
                return contract("approximate APC input count must be a multiple of 16");
            }
            let mut gate = vec![0u64; words];
            for unit in inputs.chunks_exact(16) {
                let (a, b) = unit.split_at(8);
                for j in 0..8 {
                    let (wa, wb) = (a[j].words(), b[j].words());
                    for (g, (&x, &y)) in gate.iter_mut().zip(wa.iter().zip(wb)) {
                        *g = if j % 2 == 0 { x & y } else { x | y };
                    }
                    planes.add(&gate, 1);
                }
            }
        }
    }
    Ok(BinaryStream {
        counts: planes.counts(len),
        n,
    })
}

/// Bit-sliced column counters: plane `b` holds bit `b` of every column count.
struct BitPlanes {
    planes: Vec<Vec<u64>>,
}

impl BitPlanes {
    fn new(words: usize, n: usize) -> Self {
        let bits = (usize::BITS - n.leading_zeros()) as usize + 1;
        BitPlanes {
            planes: vec![vec![0u64; words]; bits],
        }
    }

    /// Adds the bit columns of `words`, each weighted by `2^shift`.
    fn add(&mut self, words: &[u64], shift: usize) {
        for (i, &w) in words.iter().enumerate() {
            let mut carry = w;
            let mut b = shift;
            while carry != 0 {
                let plane = &mut self.planes[b][i];
                let next = *plane & carry;
                *plane ^= carry;
                carry = next;
                b += 1;
            }
        }
    }

    fn counts(&self, len: usize) -> Vec<u32> {
        (0..len)
            .map(|t| {
                let (i, bit) = (t / 64, t % 64);
                self.planes
                    .iter()
                    .enumerate()
                    .map(|(b, p)| (((p[i] >> bit) & 1) as u32) << b)
                    .sum()
            })
            .collect()
    }
}

/// Saturating three-state carry store of the two-line adder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CarryCounter {
    state: i8,
}

impl CarryCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn state(&self) -> i8 {
        self.state
    }

    /// Adds two digits and the stored carry, returning the output digit.
    pub fn add_digits(&mut self, a: i8, b: i8) -> i8 {
        let s = a + b + self.state;
        let c = s.clamp(-1, 1);
        self.state = (s - c).clamp(-1, 1);
        c
    }
}

/// Non-scaled two-line addition.
///
/// Per cycle `s = a_i + b_i + carry`, the output digit is `s` clamped to
/// `{-1, 0, 1}` and the carry keeps the remainder, itself clamped. Anything
/// beyond that is lost, which is how overflow shows up.
pub fn two_line_add(
    a: &TwoLineStream,
    b: &TwoLineStream,
    carry: &mut CarryCounter,
) -> Result<TwoLineStream> {
    if a.len() != b.len() {
        return contract("two-line operands must have equal length");
    }
    let digits: Vec<i8> = a
        .digits()
        .zip(b.digits())
        .map(|(x, y)| carry.add_digits(x, y))
        .collect();
    Ok(TwoLineStream::from_digits(digits))
}
