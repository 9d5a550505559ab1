//! The named experiment sweeps.
//!
//! Each trial draws its operands from `ChaCha8` seeded with
//! `trial_seed(seed, t)` and encodes them with the base bank reseeded to the
//! same value, so cells of one sweep share their random numbers trial by
//! trial. Trials run on the rayon pool and are collected in index order.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use scdcnn_core::arith::{add_mux, add_or, apc, multiply, ApcMode};
use scdcnn_core::blocks::{max_pool_hw, products, stanh, Boundary, DEFAULT_SEGMENT};
use scdcnn_core::feb::{feb_trial, trial_seed, FebConfig, IpKind, PoolKind};
use scdcnn_core::network::{argmax, classify, random_image, EvalMode, Image, Network, NetworkSpec, ScRunConfig};
use scdcnn_core::quant::{apply_layer_precisions, FilterBlock, WeightLayer, WeightSet, MAX_PRECISION};
use scdcnn_core::sng::{SngBank, SngMode};
use scdcnn_core::stream::{prescale, BitStream, Encoding};

use crate::error::{Error, Result};
use crate::netspec::{self, ip_name, pool_name};
use crate::report::{Cell, Report};
use crate::{idx, scdw};

pub const DEFAULT_TRIALS: usize = 500;

/// Prescale factors tried by the OR inner product.
pub const PRESCALE_FACTORS: [f64; 7] = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0];

/// Layer-group inner products of the twelve LeNet5 configurations:
/// `(pooling, stream length, [layer0, layer1, layer2])`.
pub const TABLE6_CONFIGS: [(PoolKind, usize, [IpKind; 3]); 12] = {
    use IpKind::{Apc as A, Mux as M};
    use PoolKind::{Avg, Max};
    [
        (Max, 1024, [M, M, A]),
        (Max, 1024, [M, A, A]),
        (Max, 512, [A, M, A]),
        (Max, 512, [A, A, A]),
        (Max, 256, [A, M, A]),
        (Max, 256, [A, A, A]),
        (Avg, 1024, [M, A, A]),
        (Avg, 1024, [A, A, A]),
        (Avg, 512, [M, A, A]),
        (Avg, 512, [A, A, A]),
        (Avg, 256, [M, A, A]),
        (Avg, 256, [A, A, A]),
    ]
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentId {
    Table1,
    Table2,
    Table3,
    Table4,
    Table5,
    Fig9,
    Fig10,
    Fig11,
    Table6,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 9] = [
        ExperimentId::Table1,
        ExperimentId::Table2,
        ExperimentId::Table3,
        ExperimentId::Table4,
        ExperimentId::Table5,
        ExperimentId::Fig9,
        ExperimentId::Fig10,
        ExperimentId::Fig11,
        ExperimentId::Table6,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentId::Table1 => "table1",
            ExperimentId::Table2 => "table2",
            ExperimentId::Table3 => "table3",
            ExperimentId::Table4 => "table4",
            ExperimentId::Table5 => "table5",
            ExperimentId::Fig9 => "fig9",
            ExperimentId::Fig10 => "fig10",
            ExperimentId::Fig11 => "fig11",
            ExperimentId::Table6 => "table6",
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub id: ExperimentId,
    /// Trials per cell; each experiment has its own default.
    pub trials: Option<usize>,
    pub seed: u64,
    pub lens: Option<Vec<usize>>,
    /// Input sizes (inner products, blocks) or pooled input counts.
    pub ns: Option<Vec<usize>>,
    /// Weight precisions for the precision sweep.
    pub ws: Option<Vec<u32>>,
    /// Stanh state counts.
    pub ks: Option<Vec<u32>>,
    /// Noise amplitudes for the layer sensitivity sweep.
    pub amplitudes: Option<Vec<f64>>,
    /// Max-pooling segment length.
    pub segment: usize,
    pub sng_width: u32,
    /// Scale trial counts by 0.1.
    pub quick: bool,
    pub weights: Option<PathBuf>,
    pub mnist: Option<PathBuf>,
    /// Network spec file; LeNet5 with max pooling when absent.
    pub net: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(id: ExperimentId) -> Self {
        ExperimentConfig {
            id,
            trials: None,
            seed: 1,
            lens: None,
            ns: None,
            ws: None,
            ks: None,
            amplitudes: None,
            segment: DEFAULT_SEGMENT,
            sng_width: 32,
            quick: false,
            weights: None,
            mnist: None,
            net: None,
        }
    }

    /// Trial count after the override and `--quick`.
    pub fn trials(&self, default: usize) -> usize {
        let t = self.trials.unwrap_or(default);
        if self.quick {
            t.div_ceil(10)
        } else {
            t
        }
    }

    fn validate(&self) -> Result<()> {
        if self.trials == Some(0) {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        let empty = |name: &str, n: Option<usize>| match n {
            Some(0) => Err(Error::Config(format!("{name} list must not be empty"))),
            _ => Ok(()),
        };
        empty("--len", self.lens.as_ref().map(Vec::len))?;
        empty("--n", self.ns.as_ref().map(Vec::len))?;
        empty("--w", self.ws.as_ref().map(Vec::len))?;
        empty("--k", self.ks.as_ref().map(Vec::len))?;
        empty("--amplitude", self.amplitudes.as_ref().map(Vec::len))?;
        if self.lens.iter().flatten().any(|&l| l == 0) {
            return Err(Error::Config("stream lengths must be positive".into()));
        }
        if self.ns.iter().flatten().any(|&n| n == 0) {
            return Err(Error::Config("input sizes must be positive".into()));
        }
        if self.segment == 0 {
            return Err(Error::Config("segment length must be positive".into()));
        }
        if self.amplitudes.iter().flatten().any(|a| !(a.is_finite() && *a >= 0.0)) {
            return Err(Error::Config("noise amplitudes must be finite and non-negative".into()));
        }
        Ok(())
    }

    fn bank(&self) -> Result<SngBank> {
        Ok(SngBank::new(SngMode::Lfsr, self.sng_width, self.seed)?)
    }

    fn lens_or(&self, default: &[usize]) -> Vec<usize> {
        self.lens.clone().unwrap_or_else(|| default.to_vec())
    }

    fn ns_or(&self, default: &[usize]) -> Vec<usize> {
        self.ns.clone().unwrap_or_else(|| default.to_vec())
    }
}

/// Caps the global rayon pool at `SCDCNN_THREADS` when set.
pub fn init_thread_pool() -> Result<()> {
    let Ok(v) = std::env::var("SCDCNN_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Config(format!("SCDCNN_THREADS must be a positive integer, got `{v}`")))?;
    // A second initialisation in the same process keeps the first pool.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let mut r = match cfg.id {
        ExperimentId::Table1 => table1(cfg)?,
        ExperimentId::Table2 => table2(cfg)?,
        ExperimentId::Table3 => table3(cfg)?,
        ExperimentId::Table4 => table4(cfg)?,
        ExperimentId::Table5 => table5(cfg)?,
        ExperimentId::Fig9 => fig9(cfg)?,
        ExperimentId::Fig10 => fig10(cfg)?,
        ExperimentId::Fig11 => fig11(cfg)?,
        ExperimentId::Table6 => table6(cfg)?,
    };
    r.sort();
    Ok(r)
}

fn par_trials<T, F>(trials: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    (0..trials as u64).into_par_iter().map(f).collect()
}

fn uniform(rng: &mut ChaCha8Rng, enc: Encoding, n: usize) -> Vec<f64> {
    let (lo, hi) = enc.range();
    (0..n).map(|_| rng.gen_range(lo..=hi)).collect()
}

fn encode_all(bank: &SngBank, first_id: u64, values: &[f64], enc: Encoding, len: usize) -> Result<Vec<BitStream>> {
    values
        .iter()
        .enumerate()
        .map(|(i, &v)| Ok(bank.stream(first_id + i as u64, v, enc, len)?))
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn enc_name(enc: Encoding) -> &'static str {
    match enc {
        Encoding::Unipolar => "unipolar",
        Encoding::Bipolar => "bipolar",
    }
}

fn table1(cfg: &ExperimentConfig) -> Result<Report> {
    let trials = cfg.trials(DEFAULT_TRIALS);
    let base = cfg.bank()?;
    let mut r = Report::new(
        "table1",
        "absolute error of the OR inner product after the best prescale factor",
        cfg.seed,
        trials,
        &["encoding", "n", "len"],
    );
    r.extra_keys = vec!["prescale".into()];
    for enc in [Encoding::Bipolar, Encoding::Unipolar] {
        for n in cfg.ns_or(&[16, 32, 64]) {
            for len in cfg.lens_or(&[1024]) {
                let per_trial = par_trials(trials, |t| {
                    let s = trial_seed(cfg.seed, t);
                    let mut rng = ChaCha8Rng::seed_from_u64(s);
                    let bank = base.reseeded(s);
                    let xs = uniform(&mut rng, enc, n);
                    let ws = uniform(&mut rng, enc, n);
                    let exact = dot(&xs, &ws);
                    let wst = encode_all(&bank, n as u64, &ws, enc, len)?;
                    PRESCALE_FACTORS
                        .iter()
                        .map(|&f| {
                            let scaled = xs.iter().map(|&x| prescale(x, f, enc)).collect::<std::result::Result<Vec<_>, _>>()?;
                            let xst = encode_all(&bank, 0, &scaled, enc, len)?;
                            let prods = xst.iter().zip(&wst).map(|(x, w)| multiply(x, w)).collect::<std::result::Result<Vec<_>, _>>()?;
                            Ok((f * add_or(&prods)?.decode() - exact).abs())
                        })
                        .collect::<Result<Vec<f64>>>()
                })?;
                let means: Vec<f64> = (0..PRESCALE_FACTORS.len())
                    .map(|j| per_trial.iter().map(|e| e[j]).sum::<f64>())
                    .collect();
                let best = (0..means.len()).min_by(|&a, &b| means[a].total_cmp(&means[b])).expect("factors");
                let errs: Vec<f64> = per_trial.iter().map(|e| e[best]).collect();
                let mut cell = Cell::new(vec![enc_name(enc).into(), n.into(), len.into()], &errs);
                cell.extras = vec![PRESCALE_FACTORS[best]];
                r.cells.push(cell);
            }
        }
    }
    Ok(r)
}

fn table2(cfg: &ExperimentConfig) -> Result<Report> {
    let trials = cfg.trials(DEFAULT_TRIALS);
    let base = cfg.bank()?;
    let mut r = Report::new(
        "table2",
        "absolute error of the MUX inner product, output scaled back by n",
        cfg.seed,
        trials,
        &["n", "len"],
    );
    for n in cfg.ns_or(&[16, 32, 64]) {
        for len in cfg.lens_or(&[512, 1024, 2048, 4096]) {
            let errs = par_trials(trials, |t| {
                let s = trial_seed(cfg.seed, t);
                let mut rng = ChaCha8Rng::seed_from_u64(s);
                let bank = base.reseeded(s);
                let xs = uniform(&mut rng, Encoding::Bipolar, n);
                let ws = uniform(&mut rng, Encoding::Bipolar, n);
                let prods = products(
                    &encode_all(&bank, 0, &xs, Encoding::Bipolar, len)?,
                    &encode_all(&bank, n as u64, &ws, Encoding::Bipolar, len)?,
                )?;
                let mut sel = bank.generator(2 * n as u64);
                let out = add_mux(&prods, &mut sel)?;
                Ok((n as f64 * out.decode() - dot(&xs, &ws)).abs())
            })?;
            r.cells.push(Cell::new(vec![n.into(), len.into()], &errs));
        }
    }
    Ok(r)
}

fn table3(cfg: &ExperimentConfig) -> Result<Report> {
    let trials = cfg.trials(DEFAULT_TRIALS);
    let base = cfg.bank()?;
    let mut r = Report::new(
        "table3",
        "percent: |approximate - exact| mean counter output over the counter range n",
        cfg.seed,
        trials,
        &["n", "len"],
    );
    for n in cfg.ns_or(&[16, 32, 64]) {
        if n < 2 {
            return Err(Error::Config("a parallel counter needs at least two inputs".into()));
        }
        for len in cfg.lens_or(&[128, 256, 384, 512]) {
            let errs = par_trials(trials, |t| {
                let s = trial_seed(cfg.seed, t);
                let mut rng = ChaCha8Rng::seed_from_u64(s);
                let bank = base.reseeded(s);
                let xs = uniform(&mut rng, Encoding::Bipolar, n);
                let ws = uniform(&mut rng, Encoding::Bipolar, n);
                let prods = products(
                    &encode_all(&bank, 0, &xs, Encoding::Bipolar, len)?,
                    &encode_all(&bank, n as u64, &ws, Encoding::Bipolar, len)?,
                )?;
                let e = apc(&prods, ApcMode::Exact)?.mean_count();
                let a = apc(&prods, ApcMode::Approximate)?.mean_count();
                Ok(100.0 * (a - e).abs() / n as f64)
            })?;
            r.cells.push(Cell::new(vec![n.into(), len.into()], &errs));
        }
    }
    Ok(r)
}

fn table4(cfg: &ExperimentConfig) -> Result<Report> {
    let trials = cfg.trials(DEFAULT_TRIALS);
    let base = cfg.bank()?;
    let mut r = Report::new(
        "table4",
        "absolute deviation of hardware max pooling from the true maximum",
        cfg.seed,
        trials,
        &["inputs", "len", "segment"],
    );
    for m in cfg.ns_or(&[4, 9, 16]) {
        for len in cfg.lens_or(&[128, 256, 384, 512]) {
            if len % cfg.segment != 0 {
                return Err(Error::Config(format!("stream length {len} is not a multiple of the segment {}", cfg.segment)));
            }
            let errs = par_trials(trials, |t| {
                let s = trial_seed(cfg.seed, t);
                let mut rng = ChaCha8Rng::seed_from_u64(s);
                let bank = base.reseeded(s);
                let xs = uniform(&mut rng, Encoding::Bipolar, m);
                let streams = encode_all(&bank, 0, &xs, Encoding::Bipolar, len)?;
                let mut first = bank.generator(m as u64);
                let out = max_pool_hw(&streams, cfg.segment, &mut first)?;
                let truth = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                Ok((out.decode() - truth).abs())
            })?;
            r.cells.push(Cell::new(vec![m.into(), len.into(), cfg.segment.into()], &errs));
        }
    }
    Ok(r)
}

/// Trials are points of a uniform midpoint grid on `[-1, 1]`; one input
/// stream per point drives every state count.
fn table5(cfg: &ExperimentConfig) -> Result<Report> {
    let points = cfg.trials(DEFAULT_TRIALS);
    let base = cfg.bank()?;
    let ks = cfg.ks.clone().unwrap_or_else(|| (8..=20).step_by(2).collect());
    if ks.iter().any(|&k| k < 2 || k % 2 != 0) {
        return Err(Error::Config("state counts must be even and at least 2".into()));
    }
    let mut r = Report::new(
        "table5",
        "percent: mean |Stanh(K) - tanh(K x / 2)| over mean |tanh(K x / 2)| on a uniform input grid",
        cfg.seed,
        points,
        &["states", "len"],
    );
    for len in cfg.lens_or(&[8192]) {
        let per_point = par_trials(points, |t| {
            let x = -1.0 + (2 * t + 1) as f64 / points as f64;
            let bank = base.reseeded(trial_seed(cfg.seed, t));
            let input = bank.stream(0, x, Encoding::Bipolar, len)?;
            ks.iter()
                .map(|&k| {
                    let target = (f64::from(k) * x / 2.0).tanh();
                    let out = stanh(&input, k, Boundary::Half)?.decode();
                    Ok(((out - target).abs(), target.abs()))
                })
                .collect::<Result<Vec<(f64, f64)>>>()
        })?;
        for (j, &k) in ks.iter().enumerate() {
            let scale = per_point.iter().map(|p| p[j].1).sum::<f64>() / points as f64;
            let rel: Vec<f64> = per_point.iter().map(|p| 100.0 * p[j].0 / scale).collect();
            r.cells.push(Cell::new(vec![k.into(), len.into()], &rel));
        }
    }
    Ok(r)
}

pub const FEB_KINDS: [(IpKind, PoolKind); 4] = [
    (IpKind::Apc, PoolKind::Avg),
    (IpKind::Apc, PoolKind::Max),
    (IpKind::Mux, PoolKind::Avg),
    (IpKind::Mux, PoolKind::Max),
];

pub fn feb_name(ip: IpKind, pool: PoolKind) -> String {
    let act = match ip {
        IpKind::Apc => "btanh",
        IpKind::Mux => "stanh",
    };
    format!("{}-{}-{act}", ip_name(ip), pool_name(pool))
}

fn fig9(cfg: &ExperimentConfig) -> Result<Report> {
    let trials = cfg.trials(DEFAULT_TRIALS);
    let base = cfg.bank()?;
    let mut r = Report::new(
        "fig9",
        "absolute error of the feature-extraction block against tanh of the pooled inner product",
        cfg.seed,
        trials,
        &["block", "n", "len"],
    );
    r.extra_keys = vec!["states".into()];
    for (ip, pool) in FEB_KINDS {
        for n in cfg.ns_or(&[16, 32, 64, 128, 256]) {
            for len in cfg.lens_or(&[256, 512, 1024]) {
                let mut feb = FebConfig::standard(ip, pool, n, len);
                feb.segment = cfg.segment;
                if let Some(ks) = &cfg.ks {
                    let [k] = ks[..] else {
                        return Err(Error::Config("fig9 takes a single --k".into()));
                    };
                    feb = feb.with_states(k);
                }
                feb.validate()?;
                let errs = par_trials(trials, |t| {
                    let (out, reference) = feb_trial(&feb, &base, cfg.seed, t)?;
                    Ok((out - reference).abs())
                })?;
                let mut cell = Cell::new(vec![feb_name(ip, pool).as_str().into(), n.into(), len.into()], &errs);
                cell.extras = vec![f64::from(feb.state_count())];
                r.cells.push(cell);
            }
        }
    }
    Ok(r)
}

/// Random weights uniform on `±sqrt(3 / fan_in)` per layer, stored at full
/// precision, so pre-activations have unit variance for unit-variance inputs.
pub fn random_weight_set(spec: &NetworkSpec, seed: u64) -> Result<WeightSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shapes = spec.filter_shapes()?;
    let mut layers = Vec::with_capacity(shapes.len());
    for (count, shape) in shapes {
        let size: usize = shape.iter().product();
        let a = (3.0 / size as f64).sqrt().min(1.0);
        let filters = (0..count)
            .map(|id| {
                let values: Vec<f64> = (0..size).map(|_| rng.gen_range(-a..=a)).collect();
                FilterBlock::from_values(id, shape, &values, MAX_PRECISION)
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        layers.push(WeightLayer::new(MAX_PRECISION, filters)?);
    }
    Ok(WeightSet::new(layers))
}

/// Network spec, weights and images for the network experiments.
struct NetData {
    spec: NetworkSpec,
    weights: WeightSet,
    images: Vec<Image>,
    /// Images carry labels and the weights were supplied.
    accuracy: bool,
    warnings: Vec<String>,
}

const IMAGE_STREAM: u64 = 0x1a6e;

fn net_data(cfg: &ExperimentConfig, count: usize, require_external: bool) -> Result<NetData> {
    let spec = match &cfg.net {
        Some(p) => netspec::parse(&std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?)?,
        None => NetworkSpec::lenet5(PoolKind::Max),
    };
    let mut warnings = Vec::new();
    let missing = match (&cfg.weights, &cfg.mnist) {
        (None, None) => Some("trained weights (--weights) and MNIST test data (--mnist)"),
        (None, Some(_)) => Some("trained weights (--weights)"),
        (Some(_), None) if require_external => Some("MNIST test data (--mnist)"),
        _ => None,
    };
    if let (Some(what), true) = (missing, require_external || cfg.mnist.is_some()) {
        return Err(Error::ExternalData(format!("{} requires {what}", cfg.id)));
    }
    let weights = match &cfg.weights {
        Some(p) => scdw::load_weights(p)?,
        None => {
            warnings.push("no trained weights supplied; using random weights and disagreement with the reference network as the metric".into());
            random_weight_set(&spec, trial_seed(cfg.seed, 0))?
        }
    };
    let images = match &cfg.mnist {
        Some(dir) => {
            let mut all = idx::load_mnist_test(dir)?;
            if all.len() < count {
                warnings.push(format!("only {} test images available", all.len()));
            }
            all.truncate(count);
            all
        }
        None => {
            if cfg.weights.is_some() {
                warnings.push("no MNIST data supplied; using random images and disagreement with the reference network as the metric".into());
            }
            (0..count as u64)
                .map(|i| random_image(spec.input, trial_seed(cfg.seed ^ IMAGE_STREAM, i)))
                .collect()
        }
    };
    if let Some(img) = images.iter().find(|img| img.pixels.shape != spec.input) {
        return Err(Error::Config(format!(
            "image shape {:?} does not match the network input {:?}",
            img.pixels.shape, spec.input
        )));
    }
    if let Err(e) = Network::build(spec.clone(), &weights) {
        return Err(match &cfg.weights {
            Some(p) => Error::Format { path: p.clone(), message: format!("weights do not fit the network: {e}") },
            None => e.into(),
        });
    }
    Ok(NetData {
        accuracy: cfg.weights.is_some() && cfg.mnist.is_some(),
        spec,
        weights,
        images,
        warnings,
    })
}

impl NetData {
    /// Per-image targets: labels in accuracy mode, else the float network's
    /// predictions with the weights as given.
    fn targets(&self) -> Result<Vec<usize>> {
        if self.accuracy {
            return self
                .images
                .iter()
                .map(|img| {
                    img.label
                        .map(usize::from)
                        .ok_or_else(|| Error::Format { path: "<mnist>".into(), message: "unlabelled image".into() })
                })
                .collect();
        }
        let net = Network::build(self.spec.clone(), &self.weights)?;
        self.images
            .par_iter()
            .map(|img| Ok(argmax(&net.forward_float(img)?)))
            .collect()
    }

    fn metric(&self, what: &str) -> String {
        if self.accuracy {
            format!("percent of test images misclassified ({what})")
        } else {
            format!("percent of images whose class differs from the unperturbed float network ({what})")
        }
    }
}

fn group_names(spec: &NetworkSpec) -> Vec<String> {
    (0..spec.group_count()).map(|g| format!("layer{g}")).collect()
}

fn mismatch_percent(pred: &[usize], targets: &[usize]) -> Vec<f64> {
    pred.iter()
        .zip(targets)
        .map(|(p, t)| if p == t { 0.0 } else { 100.0 })
        .collect()
}

/// Weights of one layer group (or every layer) quantized to `w` bits,
/// evaluated with the float forward pass.
fn fig10(cfg: &ExperimentConfig) -> Result<Report> {
    let count = cfg.trials(DEFAULT_TRIALS);
    let data = net_data(cfg, count, false)?;
    let targets = data.targets()?;
    let mut r = Report::new("fig10", &data.metric("float forward pass"), cfg.seed, data.images.len(), &["layer", "w"]);
    r.warnings = data.warnings.clone();
    let ws = cfg.ws.clone().unwrap_or_else(|| (2..=12).collect());
    if let Some(&w) = ws.iter().find(|&&w| w == 0 || w > MAX_PRECISION) {
        return Err(Error::Config(format!("precision {w} is outside 1..=64")));
    }
    let full = data.weights.precisions();
    let layers = data.spec.layers.len();
    let mut groups: Vec<(String, Vec<bool>)> = group_names(&data.spec)
        .into_iter()
        .enumerate()
        .map(|(g, name)| (name, (0..layers).map(|i| data.spec.group_of(i) == g).collect()))
        .collect();
    groups.push(("all".into(), vec![true; layers]));
    for (name, mask) in &groups {
        for &w in &ws {
            let precisions: Vec<u32> = mask.iter().zip(&full).map(|(&m, &p)| if m { w.min(p) } else { p }).collect();
            let net = Network::build(data.spec.clone(), &apply_layer_precisions(&data.weights, &precisions)?)?;
            let pred = data
                .images
                .par_iter()
                .map(|img| Ok(argmax(&net.forward_float(img)?)))
                .collect::<Result<Vec<usize>>>()?;
            r.cells.push(Cell::new(vec![name.as_str().into(), w.into()], &mismatch_percent(&pred, &targets)));
        }
    }
    Ok(r)
}

/// Uniform noise added to the outputs of one layer group of the float network.
fn fig11(cfg: &ExperimentConfig) -> Result<Report> {
    let count = cfg.trials(DEFAULT_TRIALS);
    let data = net_data(cfg, count, false)?;
    let targets = data.targets()?;
    let net = Network::build(data.spec.clone(), &data.weights)?;
    let mut r = Report::new("fig11", &data.metric("uniform noise on one layer group"), cfg.seed, data.images.len(), &["layer", "amplitude"]);
    r.warnings = data.warnings.clone();
    let amps = cfg.amplitudes.clone().unwrap_or_else(|| vec![0.02, 0.05, 0.1, 0.2]);
    for (g, name) in group_names(&data.spec).iter().enumerate() {
        for &a in &amps {
            let pred = data
                .images
                .par_iter()
                .enumerate()
                .map(|(i, img)| {
                    let outs = net.forward_float_layers(img, Some((g, a, trial_seed(cfg.seed, i as u64))))?;
                    Ok(argmax(&outs.last().expect("at least one layer").data))
                })
                .collect::<Result<Vec<usize>>>()?;
            r.cells.push(Cell::new(vec![name.as_str().into(), a.into()], &mismatch_percent(&pred, &targets)));
        }
    }
    Ok(r)
}

/// The twelve LeNet5 configurations, run in SC on the supplied test images.
fn table6(cfg: &ExperimentConfig) -> Result<Report> {
    let count = cfg.trials(DEFAULT_TRIALS);
    let data = net_data(cfg, count, true)?;
    let base = cfg.bank()?;
    let mut r = Report::new(
        "table6",
        "percent of test images misclassified by the SC network",
        cfg.seed,
        data.images.len(),
        &["no", "pooling", "len", "layer0", "layer1", "layer2"],
    );
    r.extra_keys = vec!["float_error".into()];
    r.warnings = data.warnings.clone();
    for (no, &(pool, len, ips)) in TABLE6_CONFIGS.iter().enumerate() {
        let mut spec = data.spec.clone().with_group_ips(&ips)?;
        spec.pool = pool;
        let net = Network::build(spec, &data.weights)?;
        let mut run = ScRunConfig::new(len, pool, base.clone());
        run.segment = cfg.segment;
        let session = net.sc_session(&run)?;
        let (sc, float) = data
            .images
            .par_iter()
            .enumerate()
            .map(|(i, img)| {
                let label = usize::from(img.label.unwrap_or(u8::MAX));
                let sc = classify(&net, img, i, EvalMode::Sc(&session))? != label;
                let float = classify(&net, img, i, EvalMode::Float)? != label;
                Ok((if sc { 100.0 } else { 0.0 }, if float { 100.0 } else { 0.0 }))
            })
            .collect::<Result<Vec<(f64, f64)>>>()?
            .into_iter()
            .unzip::<f64, f64, Vec<f64>, Vec<f64>>();
        let mut cell = Cell::new(
            vec![
                (no + 1).into(),
                pool_name(pool).into(),
                len.into(),
                ip_name(ips[0]).into(),
                ip_name(ips[1]).into(),
                ip_name(ips[2]).into(),
            ],
            &sc,
        );
        cell.extras = vec![float.iter().sum::<f64>() / float.len().max(1) as f64];
        r.cells.push(cell);
    }
    Ok(r)
}
