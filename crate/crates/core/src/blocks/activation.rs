use crate::arith::BinaryStream;
use crate::error::{contract, Result};
use crate::stream::{BitStream, Encoding};

/// Output rule of the Stanh state machine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Boundary {
    /// One iff `state >= K/2`.
    Half,
    /// Zero iff `state < ceil(K/5)`; the re-designed machine for max pooling.
    Fifth,
}

/// Whether a cycle's output bit is read before or after its transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum SamplePoint {
    #[default]
    BeforeTransition,
    AfterTransition,
}

fn check_states(k: u32) -> Result<()> {
    if k < 2 || !k.is_multiple_of(2) {
        return contract("state count K must be even and at least 2");
    }
    Ok(())
}

/// Saturating `K`-state machine behind Stanh.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FsmActivation {
    k: u32,
    state: u32,
    boundary: Boundary,
    sample: SamplePoint,
}

impl FsmActivation {
    /// Starts in state `K/2`, sampling before each transition.
    pub fn new(k: u32, boundary: Boundary) -> Result<Self> {
        check_states(k)?;
        Ok(FsmActivation {
            k,
            state: k / 2,
            boundary,
            sample: SamplePoint::BeforeTransition,
        })
    }

    pub fn with_state(mut self, state: u32) -> Result<Self> {
        if state >= self.k {
            return contract("initial state out of range");
        }
        self.state = state;
        Ok(self)
    }

    pub fn with_sample_point(mut self, sample: SamplePoint) -> Self {
        self.sample = sample;
        self
    }

    pub fn states(&self) -> u32 {
        self.k
    }

    pub fn state(&self) -> u32 {
        self.state
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    fn output(&self) -> bool {
        match self.boundary {
            Boundary::Half => self.state >= self.k / 2,
            Boundary::Fifth => self.state >= self.k.div_ceil(5),
        }
    }

    #[inline]
    pub fn step(&mut self, bit: bool) -> bool {
        let before = self.output();
        if bit {
            self.state = (self.state + 1).min(self.k - 1);
        } else {
            self.state = self.state.saturating_sub(1);
        }
        match self.sample {
            SamplePoint::BeforeTransition => before,
            SamplePoint::AfterTransition => self.output(),
        }
    }

    pub fn run(&mut self, input: &BitStream) -> BitStream {
        let mut out = BitStream::zeros(input.len(), Encoding::Bipolar);
        for (t, bit) in input.iter().enumerate() {
            if self.step(bit) {
                out.set(t, true);
            }
        }
        out
    }
}

/// Stochastic tanh: decodes to roughly `tanh((K/2) x)` for a bipolar input `x`.
pub fn stanh(input: &BitStream, k: u32, boundary: Boundary) -> Result<BitStream> {
    if input.encoding() != Encoding::Bipolar {
        return contract("Stanh expects a bipolar stream");
    }
    Ok(FsmActivation::new(k, boundary)?.run(input))
}

/// Saturating up/down counter behind Btanh.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BtanhState {
    k: u32,
    n: u32,
    state: i64,
}

impl BtanhState {
    /// Starts in state `K/2` for counts of fan-in `n`.
    pub fn new(k: u32, n: u32) -> Result<Self> {
        check_states(k)?;
        Ok(BtanhState {
            k,
            n,
            state: i64::from(k / 2),
        })
    }

    pub fn states(&self) -> u32 {
        self.k
    }

    pub fn fan_in(&self) -> u32 {
        self.n
    }

    pub fn state(&self) -> u32 {
        self.state as u32
    }

    /// Adds a signed per-cycle sum and returns the bit emitted this cycle.
    #[inline]
    pub fn step_signed(&mut self, delta: i32) -> bool {
        let out = self.state >= i64::from(self.k / 2);
        self.state = (self.state + i64::from(delta)).clamp(0, i64::from(self.k) - 1);
        out
    }

    /// Feeds one count `c` in `[0, n]`, i.e. a step of `2c - n`.
    pub fn step(&mut self, count: u32) -> Result<bool> {
        if count > self.n {
            return contract("count exceeds the counter fan-in");
        }
        Ok(self.step_signed(2 * count as i32 - self.n as i32))
    }
}

/// Converts parallel-counter output back into a bipolar stream.
pub fn btanh(input: &BinaryStream, k: u32) -> Result<BitStream> {
    let mut st = BtanhState::new(k, input.fan_in() as u32)?;
    let mut out = BitStream::zeros(input.len(), Encoding::Bipolar);
    for (t, &c) in input.counts().iter().enumerate() {
        if st.step(c)? {
            out.set(t, true);
        }
    }
    Ok(out)
}

/// Btanh driven directly by signed per-cycle sums.
pub fn btanh_signed(sums: &[i32], k: u32) -> Result<BitStream> {
    let mut st = BtanhState::new(k, 0)?;
    let mut out = BitStream::zeros(sums.len(), Encoding::Bipolar);
    for (t, &d) in sums.iter().enumerate() {
        if st.step_signed(d) {
            out.set(t, true);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FebKind {
    MuxAvg,
    MuxMax,
    ApcAny,
}

/// Nearest even integer, halfway rounding up, never below 2.
fn nearest_even(v: f64) -> u32 {
    let k = 2.0 * libm::floor(v / 2.0 + 0.5);
    if k < 2.0 {
        2
    } else {
        k as u32
    }
}

/// Empirical state count for a feature-extraction block of input size `n`
/// and stream length `len`.
pub fn optimal_states(kind: FebKind, n: usize, len: usize) -> u32 {
    let lg_n = libm::log2(n as f64);
    let lg_l = libm::log2(len as f64);
    let v = match kind {
        FebKind::MuxAvg => 2.0 * lg_n + lg_l * n as f64 / (33.27 * lg_n),
        FebKind::MuxMax => {
            let log5_l = libm::log(len as f64) / libm::log(5.0);
            2.0 * (lg_n + lg_l) - 37.0 / lg_n - 16.5 / log5_l
        }
        FebKind::ApcAny => n as f64 / 2.0,
    };
    nearest_even(v)
}
