use alloc::vec;
use alloc::vec::Vec;

use crate::arith::{add_mux, BinaryStream};
use crate::error::{contract, Result};
use crate::sng::SngState;
use crate::stream::BitStream;

/// Default max-pooling segment length in cycles.
pub const DEFAULT_SEGMENT: usize = 16;

fn check_four(n: usize) -> Result<()> {
    if n != 4 {
        return contract("average pooling takes exactly four inputs (2x2 window)");
    }
    Ok(())
}

/// 4-to-1 multiplexer: the output decodes to the mean of the inputs.
pub fn avg_pool(inputs: &[BitStream], select: &mut SngState) -> Result<BitStream> {
    check_four(inputs.len())?;
    add_mux(inputs, select)
}

/// Per-cycle `(c1 + c2 + c3 + c4) / 4`, fractional part dropped.
pub fn avg_pool_counts(inputs: &[BinaryStream]) -> Result<BinaryStream> {
    check_four(inputs.len())?;
    let n = inputs[0].fan_in();
    let len = inputs[0].len();
    if inputs.iter().any(|b| b.len() != len || b.fan_in() != n) {
        return contract("pooled count streams must share length and fan-in");
    }
    let counts = (0..len)
        .map(|t| inputs.iter().map(|b| b.counts()[t]).sum::<u32>() / 4)
        .collect();
    BinaryStream::new(counts, n)
}

/// Per-cycle mean of the bipolar sums `2c - n`, truncated toward zero.
///
/// This is the same divider applied to the sign-magnitude form of the sums, so
/// positive and negative means lose their fractional part symmetrically.
pub fn avg_pool_signed(inputs: &[BinaryStream]) -> Result<Vec<i32>> {
    check_four(inputs.len())?;
    let n = inputs[0].fan_in() as i32;
    let len = inputs[0].len();
    if inputs.iter().any(|b| b.len() != len || b.fan_in() != n as usize) {
        return contract("pooled count streams must share length and fan-in");
    }
    Ok((0..len)
        .map(|t| {
            let s: i32 = inputs.iter().map(|b| 2 * b.counts()[t] as i32 - n).sum();
            s / 4
        })
        .collect())
}

/// Segment-wise winner tracking for hardware-oriented max pooling.
///
/// During segment `t` the selector forwards the input that accumulated the
/// most ones (or the largest count sum) during segment `t - 1`. Ties go to the
/// lowest index. The source of segment 0 is supplied by the caller.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentSelector {
    c: usize,
    winner: usize,
    counters: Vec<u64>,
    phase: usize,
}

impl SegmentSelector {
    pub fn new(inputs: usize, c: usize, first: usize) -> Result<Self> {
        if inputs == 0 || c == 0 {
            return contract("segment selector needs inputs and a nonzero segment length");
        }
        if first >= inputs {
            return contract("first segment source out of range");
        }
        Ok(SegmentSelector {
            c,
            winner: first,
            counters: vec![0; inputs],
            phase: 0,
        })
    }

    pub fn segment_len(&self) -> usize {
        self.c
    }

    pub fn current_winner(&self) -> usize {
        self.winner
    }

    pub fn counters(&self) -> &[u64] {
        &self.counters
    }

    /// Accumulates one cycle of input values and returns the input whose value
    /// is forwarded this cycle.
    pub fn step(&mut self, values: &[u32]) -> usize {
        let source = self.winner;
        for (acc, &v) in self.counters.iter_mut().zip(values) {
            *acc += u64::from(v);
        }
        self.phase += 1;
        if self.phase == self.c {
            self.end_segment();
        }
        source
    }

    fn end_segment(&mut self) {
        let mut best = 0;
        for (i, &v) in self.counters.iter().enumerate() {
            if v > self.counters[best] {
                best = i;
            }
        }
        self.winner = best;
        self.counters.iter_mut().for_each(|a| *a = 0);
        self.phase = 0;
    }
}

fn check_segments(len: usize, c: usize) -> Result<()> {
    if c == 0 || !len.is_multiple_of(c) {
        return contract("stream length must be a multiple of the segment length");
    }
    Ok(())
}

/// Hardware-oriented max pooling over bit-streams.
pub fn max_pool_hw(inputs: &[BitStream], c: usize, first_pick: &mut SngState) -> Result<BitStream> {
    let Some(head) = inputs.first() else {
        return contract("max pooling needs at least one input");
    };
    let len = head.len();
    if inputs.iter().any(|s| s.len() != len) {
        return contract("pooled streams must have equal length");
    }
    check_segments(len, c)?;
    let mut sel = SegmentSelector::new(inputs.len(), c, first_pick.select(inputs.len()))?;
    let mut out = BitStream::zeros(len, head.encoding());
    let mut column = vec![0u32; inputs.len()];
    for t in 0..len {
        for (v, s) in column.iter_mut().zip(inputs) {
            *v = u32::from(s.get(t));
        }
        let src = sel.step(&column);
        if column[src] == 1 {
            out.set(t, true);
        }
    }
    Ok(out)
}

/// Hardware-oriented max pooling over parallel-counter outputs, with
/// accumulators in place of the ones counters.
pub fn max_pool_hw_counts(
    inputs: &[BinaryStream],
    c: usize,
    first_pick: &mut SngState,
) -> Result<BinaryStream> {
    let Some(head) = inputs.first() else {
        return contract("max pooling needs at least one input");
    };
    let (len, n) = (head.len(), head.fan_in());
    if inputs.iter().any(|b| b.len() != len || b.fan_in() != n) {
        return contract("pooled count streams must share length and fan-in");
    }
    check_segments(len, c)?;
    let mut sel = SegmentSelector::new(inputs.len(), c, first_pick.select(inputs.len()))?;
    let mut column = vec![0u32; inputs.len()];
    let mut counts = Vec::with_capacity(len);
    for t in 0..len {
        for (v, b) in column.iter_mut().zip(inputs) {
            *v = b.counts()[t];
        }
        counts.push(column[sel.step(&column)]);
    }
    BinaryStream::new(counts, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sng::{SngBank, SngMode};
    use crate::stream::Encoding;

    #[test]
    fn truncating_average() {
        let ins: Vec<BinaryStream> = [2, 3, 4, 5]
            .iter()
            .map(|&c| BinaryStream::constant(c, 8, 3).unwrap())
            .collect();
        assert_eq!(avg_pool_counts(&ins).unwrap().counts(), &[3, 3, 3]);
        // bipolar sums: -4, -2, 0, 2 -> mean -1
        assert_eq!(avg_pool_signed(&ins).unwrap(), vec![-1, -1, -1]);
    }

    #[test]
    fn signed_average_truncates_toward_zero() {
        // sums -6, -6, -6, 2 -> -16/4 = -4; sums -6, 0, 0, 0 -> -1.5 -> -1
        let a: Vec<BinaryStream> = [1, 1, 1, 5]
            .iter()
            .map(|&c| BinaryStream::constant(c, 8, 1).unwrap())
            .collect();
        assert_eq!(avg_pool_signed(&a).unwrap(), vec![-4]);
        let b: Vec<BinaryStream> = [1, 4, 4, 4]
            .iter()
            .map(|&c| BinaryStream::constant(c, 8, 1).unwrap())
            .collect();
        assert_eq!(avg_pool_signed(&b).unwrap(), vec![-1]);
    }

    #[test]
    fn identical_counts_pass_through() {
        let c = BinaryStream::new(vec![0, 5, 16, 7], 16).unwrap();
        let ins = vec![c.clone(); 4];
        assert_eq!(avg_pool_counts(&ins).unwrap(), c);
    }

    #[test]
    fn pooling_needs_four() {
        let s = BitStream::ones(16, Encoding::Bipolar);
        let mut g = SngBank::new(SngMode::Lfsr, 10, 0).unwrap().generator(0);
        assert!(avg_pool(&[s.clone(), s.clone(), s], &mut g).is_err());
    }

    #[test]
    fn all_ones_input_wins_from_second_segment() {
        let bank = SngBank::new(SngMode::Lfsr, 10, 11).unwrap();
        for k in 0..4 {
            let mut ins = vec![BitStream::zeros(64, Encoding::Bipolar); 4];
            ins[k] = BitStream::ones(64, Encoding::Bipolar);
            let out = max_pool_hw(&ins, 16, &mut bank.generator(k as u64)).unwrap();
            assert!((16..64).all(|t| out.get(t)));
        }
    }

    #[test]
    fn segments_copy_one_input_verbatim() {
        let bank = SngBank::new(SngMode::Lfsr, 12, 2).unwrap();
        let ins: Vec<BitStream> = (0..9)
            .map(|i| bank.stream(i, 0.1 * i as f64 - 0.4, Encoding::Bipolar, 128).unwrap())
            .collect();
        let out = max_pool_hw(&ins, 16, &mut bank.generator(50)).unwrap();
        for seg in 0..8 {
            let piece = out.slice(seg * 16, seg * 16 + 16);
            assert!(ins.iter().any(|s| s.slice(seg * 16, seg * 16 + 16) == piece));
        }
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let mut sel = SegmentSelector::new(3, 2, 2).unwrap();
        assert_eq!(sel.step(&[1, 1, 0]), 2);
        assert_eq!(sel.step(&[0, 0, 0]), 2);
        assert_eq!(sel.current_winner(), 0);
        assert_eq!(sel.counters(), &[0, 0, 0]);
    }

    #[test]
    fn segment_length_must_divide() {
        let s = vec![BitStream::ones(20, Encoding::Bipolar); 4];
        let mut g = SngBank::new(SngMode::Lfsr, 10, 0).unwrap().generator(0);
        assert!(max_pool_hw(&s, 16, &mut g).is_err());
    }
}
