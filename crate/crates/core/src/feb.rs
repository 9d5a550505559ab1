//! Feature-extraction blocks: four inner products, one pooling block and one
//! activation block in cascade.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arith::{ApcMode, BinaryStream};
use crate::blocks::{
    avg_pool, avg_pool_counts, avg_pool_signed, btanh, btanh_signed, inner_product,
    max_pool_hw, max_pool_hw_counts, optimal_states, stanh, Boundary, FebKind, IpVariant,
    DEFAULT_SEGMENT,
};
use crate::error::{contract, Result};
use crate::sng::{mix64, SngBank};
use crate::stream::{BitStream, Encoding};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IpKind {
    Mux,
    Apc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PoolKind {
    Avg,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ActKind {
    Stanh,
    StanhFifth,
    Btanh,
}

/// How the binary average pool drops the fractional part of the mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum CountAverage {
    /// Integer division of the unsigned counts.
    Truncate,
    /// Integer division of the signed bipolar sums, rounding toward zero.
    #[default]
    TowardZero,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FebConfig {
    pub ip: IpKind,
    pub pool: PoolKind,
    pub act: ActKind,
    /// Inner-product input size.
    pub n: usize,
    /// Stream length.
    pub len: usize,
    /// Max-pooling segment length.
    pub segment: usize,
    /// State count; `None` picks the empirical optimum.
    pub states: Option<u32>,
    pub apc_mode: ApcMode,
    pub count_average: CountAverage,
}

impl FebConfig {
    /// The canonical pairing for an inner-product and pooling choice.
    pub fn standard(ip: IpKind, pool: PoolKind, n: usize, len: usize) -> Self {
        let act = match (ip, pool) {
            (IpKind::Mux, PoolKind::Avg) => ActKind::Stanh,
            (IpKind::Mux, PoolKind::Max) => ActKind::StanhFifth,
            (IpKind::Apc, _) => ActKind::Btanh,
        };
        FebConfig {
            ip,
            pool,
            act,
            n,
            len,
            segment: DEFAULT_SEGMENT,
            states: None,
            apc_mode: ApcMode::Approximate,
            count_average: CountAverage::default(),
        }
    }

    pub fn with_states(mut self, k: u32) -> Self {
        self.states = Some(k);
        self
    }

    pub fn validate(&self) -> Result<()> {
        match (self.ip, self.act) {
            (IpKind::Mux, ActKind::Stanh | ActKind::StanhFifth) | (IpKind::Apc, ActKind::Btanh) => {}
            _ => return contract("MUX blocks need Stanh and APC blocks need Btanh"),
        }
        if self.ip == IpKind::Mux && self.pool == PoolKind::Max && self.act != ActKind::StanhFifth {
            return contract("MUX max pooling requires the fifth-boundary Stanh");
        }
        if self.n == 0 || self.len == 0 {
            return contract("input size and stream length must be positive");
        }
        if self.pool == PoolKind::Max && (self.segment == 0 || !self.len.is_multiple_of(self.segment)) {
            return contract("stream length must be a multiple of the segment length");
        }
        if let Some(k) = self.states {
            if k < 2 || k % 2 != 0 {
                return contract("state count K must be even and at least 2");
            }
        }
        Ok(())
    }

    /// State count actually used.
    ///
    /// MUX blocks use the empirical fits for their pooling choice. APC with
    /// average pooling uses `N/2`. APC with max pooling drives the counter
    /// with unaveraged sums of `N` product bits; the walk then settles at
    /// `tanh(K mu / 2 sigma^2)` with `sigma^2` close to `N`, so `K = 2N` keeps
    /// the gain at one.
    pub fn state_count(&self) -> u32 {
        if let Some(k) = self.states {
            return k;
        }
        match (self.ip, self.pool) {
            (IpKind::Mux, PoolKind::Avg) => optimal_states(FebKind::MuxAvg, self.n, self.len),
            (IpKind::Mux, PoolKind::Max) => optimal_states(FebKind::MuxMax, self.n, self.len),
            (IpKind::Apc, PoolKind::Avg) => optimal_states(FebKind::ApcAny, self.n, self.len),
            (IpKind::Apc, PoolKind::Max) => 2 * self.n.max(1) as u32,
        }
    }

    /// Software output for a pooled real inner product: `tanh` of the
    /// unscaled sum, the value the floating-point network computes.
    pub fn reference(&self, pooled: f64) -> f64 {
        libm::tanh(pooled)
    }
}

/// Real inner products of the four receptive fields, pooled per `pool`.
pub fn pooled_reference(pool: PoolKind, fields: &[Vec<f64>], filter: &[f64]) -> f64 {
    let sums = fields
        .iter()
        .map(|f| f.iter().zip(filter).map(|(x, w)| x * w).sum::<f64>());
    match pool {
        PoolKind::Avg => sums.sum::<f64>() / fields.len() as f64,
        PoolKind::Max => sums.fold(f64::NEG_INFINITY, f64::max),
    }
}

// Stream identifiers inside one block instance.
fn field_id(n: usize, j: usize, i: usize) -> u64 {
    (j * n + i) as u64
}
fn weight_id(n: usize, i: usize) -> u64 {
    (4 * n + i) as u64
}
fn select_id(n: usize, j: usize) -> u64 {
    (5 * n + j) as u64
}

/// Runs one block on bipolar streams already generated by the caller.
///
/// `fields` holds the four receptive-field stream groups, `filter` the shared
/// weight streams. Returns the activation output stream.
pub fn feb_streams<X, W>(
    cfg: &FebConfig,
    fields: &[Vec<X>],
    filter: &[W],
    bank: &SngBank,
    select_base: u64,
) -> Result<BitStream>
where
    X: AsRef<BitStream>,
    W: AsRef<BitStream>,
{
    cfg.validate()?;
    if fields.len() != 4 {
        return contract("a feature-extraction block pools exactly four inner products");
    }
    let k = cfg.state_count();
    match cfg.ip {
        IpKind::Mux => {
            let mut pooled_in = Vec::with_capacity(4);
            for (j, xs) in fields.iter().enumerate() {
                let mut sel = bank.generator(select_base + j as u64);
                let out = inner_product(xs, filter, IpVariant::Mux(&mut sel))?;
                pooled_in.push(out.into_stream().expect("mux output is a stream"));
            }
            let mut sel = bank.generator(select_base + 4);
            let pooled = match cfg.pool {
                PoolKind::Avg => avg_pool(&pooled_in, &mut sel)?,
                PoolKind::Max => max_pool_hw(&pooled_in, cfg.segment, &mut sel)?,
            };
            let boundary = match cfg.act {
                ActKind::StanhFifth => Boundary::Fifth,
                _ => Boundary::Half,
            };
            stanh(&pooled, k, boundary)
        }
        IpKind::Apc => {
            let mut counts: Vec<BinaryStream> = Vec::with_capacity(4);
            for xs in fields {
                let out = inner_product(xs, filter, IpVariant::Apc(cfg.apc_mode))?;
                counts.push(out.into_counts().expect("apc output is a count stream"));
            }
            match cfg.pool {
                PoolKind::Avg => match cfg.count_average {
                    CountAverage::Truncate => btanh(&avg_pool_counts(&counts)?, k),
                    CountAverage::TowardZero => btanh_signed(&avg_pool_signed(&counts)?, k),
                },
                PoolKind::Max => {
                    let mut first = bank.generator(select_base + 4);
                    btanh(&max_pool_hw_counts(&counts, cfg.segment, &mut first)?, k)
                }
            }
        }
    }
}

/// Encodes the operands with independent generators from `bank` and returns
/// the decoded block output.
pub fn feb_forward(
    cfg: &FebConfig,
    fields: &[Vec<f64>],
    filter: &[f64],
    bank: &SngBank,
) -> Result<f64> {
    cfg.validate()?;
    let n = cfg.n;
    if fields.len() != 4 || fields.iter().any(|f| f.len() != n) || filter.len() != n {
        return contract("expected four receptive fields and one filter of size N");
    }
    let enc = Encoding::Bipolar;
    let mut xs = Vec::with_capacity(4);
    for (j, field) in fields.iter().enumerate() {
        let streams = field
            .iter()
            .enumerate()
            .map(|(i, &x)| bank.stream(field_id(n, j, i), x, enc, cfg.len))
            .collect::<Result<Vec<_>>>()?;
        xs.push(streams);
    }
    let ws = filter
        .iter()
        .enumerate()
        .map(|(i, &w)| bank.stream(weight_id(n, i), w, enc, cfg.len))
        .collect::<Result<Vec<_>>>()?;
    Ok(feb_streams(cfg, &xs, &ws, bank, select_id(n, 0))?.decode())
}

/// Summary of absolute errors over independent trials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorStats {
    pub mean_abs_error: f64,
    pub std_dev: f64,
    pub trials: usize,
    pub per_trial_seed_base: u64,
}

impl ErrorStats {
    /// Mean and population standard deviation of `errors` (absolute values
    /// are taken here).
    pub fn from_errors(errors: &[f64], seed: u64) -> Self {
        let n = errors.len().max(1) as f64;
        let mean = errors.iter().map(|e| e.abs()).sum::<f64>() / n;
        let var = errors.iter().map(|e| (e.abs() - mean) * (e.abs() - mean)).sum::<f64>() / n;
        ErrorStats {
            mean_abs_error: mean,
            std_dev: libm::sqrt(var),
            trials: errors.len(),
            per_trial_seed_base: seed,
        }
    }
}

/// Seed of trial `t` under base seed `seed`.
pub fn trial_seed(seed: u64, t: u64) -> u64 {
    mix64(seed.wrapping_add(mix64(t)))
}

/// One trial: uniform operands on `[-1, 1]`, block output and reference.
pub fn feb_trial(cfg: &FebConfig, bank: &SngBank, seed: u64, t: u64) -> Result<(f64, f64)> {
    let s = trial_seed(seed, t);
    let mut rng = ChaCha8Rng::seed_from_u64(s);
    let fields: Vec<Vec<f64>> = (0..4)
        .map(|_| (0..cfg.n).map(|_| rng.gen_range(-1.0..=1.0)).collect())
        .collect();
    let filter: Vec<f64> = (0..cfg.n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let out = feb_forward(cfg, &fields, &filter, &bank.reseeded(s))?;
    Ok((out, cfg.reference(pooled_reference(cfg.pool, &fields, &filter))))
}

/// Mean absolute error of the block against its software reference.
///
/// `bank` supplies the polynomial family; each trial reseeds it.
pub fn feb_inaccuracy(cfg: &FebConfig, trials: usize, bank: &SngBank, seed: u64) -> Result<ErrorStats> {
    if trials == 0 {
        return contract("at least one trial is required");
    }
    let mut errors = Vec::with_capacity(trials);
    for t in 0..trials as u64 {
        let (out, reference) = feb_trial(cfg, bank, seed, t)?;
        errors.push(out - reference);
    }
    Ok(ErrorStats::from_errors(&errors, seed))
}
