use alloc::vec::Vec;

use crate::arith::{add_mux, add_or, apc, two_line_add, ApcMode, BinaryStream, CarryCounter};
use crate::error::{contract, Result};
use crate::sng::SngState;
use crate::stream::{BitStream, Encoding, TwoLineStream};

/// Summation stage of an inner-product block.
#[derive(Debug)]
pub enum IpVariant<'a> {
    /// OR over the products. Pre-scaling is the caller's job: divide the
    /// operands by a factor before encoding and multiply the decoded output
    /// by the same factor.
    Or,
    /// Scaled addition through an `n`-to-1 multiplexer.
    Mux(&'a mut SngState),
    /// Parallel counter over the product columns.
    Apc(ApcMode),
    /// Chain of non-scaled two-line adders, one carry counter per adder.
    TwoLine,
}

#[derive(Debug, Clone, PartialEq)]
pub enum IpOutput {
    Stream(BitStream),
    Counts(BinaryStream),
    TwoLine(TwoLineStream),
}

impl IpOutput {
    /// Estimate of `Σ x_i w_i` with any block scaling undone.
    ///
    /// OR and two-line outputs are reported as decoded, since neither block
    /// applies a fixed scale.
    pub fn sum_estimate(&self, n: usize, scaled: bool) -> f64 {
        match self {
            IpOutput::Stream(s) if scaled => n as f64 * s.decode(),
            IpOutput::Stream(s) => s.decode(),
            IpOutput::Counts(c) => c.decode_bipolar_sum(),
            IpOutput::TwoLine(t) => t.decode(),
        }
    }

    pub fn into_stream(self) -> Option<BitStream> {
        match self {
            IpOutput::Stream(s) => Some(s),
            _ => None,
        }
    }

    pub fn into_counts(self) -> Option<BinaryStream> {
        match self {
            IpOutput::Counts(c) => Some(c),
            _ => None,
        }
    }
}

/// XNOR products `x_i · w_i` of paired bipolar streams.
pub fn products<X, W>(xs: &[X], ws: &[W]) -> Result<Vec<BitStream>>
where
    X: AsRef<BitStream>,
    W: AsRef<BitStream>,
{
    if xs.is_empty() {
        return contract("inner product needs at least one input");
    }
    if xs.len() != ws.len() {
        return contract("inputs and weights must have the same count");
    }
    let len = xs[0].as_ref().len();
    let mut out = Vec::with_capacity(xs.len());
    for (x, w) in xs.iter().zip(ws) {
        let (x, w) = (x.as_ref(), w.as_ref());
        if x.len() != len || w.len() != len {
            return contract("input streams must have equal length");
        }
        if x.encoding() != Encoding::Bipolar || w.encoding() != Encoding::Bipolar {
            return contract("inner product operands must be bipolar");
        }
        let mut p = x.clone();
        for (o, &b) in p.words_mut().iter_mut().zip(w.words()) {
            *o = !(*o ^ b);
        }
        p.clear_tail();
        out.push(p);
    }
    Ok(out)
}

pub fn inner_product<X, W>(xs: &[X], ws: &[W], variant: IpVariant<'_>) -> Result<IpOutput>
where
    X: AsRef<BitStream>,
    W: AsRef<BitStream>,
{
    let prods = products(xs, ws)?;
    match variant {
        IpVariant::Or => Ok(IpOutput::Stream(add_or(&prods)?)),
        IpVariant::Mux(select) => Ok(IpOutput::Stream(add_mux(&prods, select)?)),
        IpVariant::Apc(mode) => {
            if prods.len() == 1 {
                // A single product needs no counter tree.
                let counts = prods[0].iter().map(u32::from).collect();
                return Ok(IpOutput::Counts(BinaryStream::new(counts, 1)?));
            }
            Ok(IpOutput::Counts(apc(&prods, mode)?))
        }
        IpVariant::TwoLine => {
            let mut acc = TwoLineStream::from_bipolar(&prods[0]);
            for p in &prods[1..] {
                let next = TwoLineStream::from_bipolar(p);
                acc = two_line_add(&acc, &next, &mut CarryCounter::new())?;
            }
            Ok(IpOutput::TwoLine(acc))
        }
    }
}
