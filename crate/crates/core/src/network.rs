//! LeNet5-shaped networks: floating-point oracle and SC inference.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arith::ApcMode;
use crate::blocks::{
    btanh, inner_product, optimal_states, stanh, Boundary, FebKind, IpVariant, DEFAULT_SEGMENT,
};
use crate::error::{contract, Error, Result};
use crate::feb::{feb_streams, trial_seed, CountAverage, FebConfig, IpKind, PoolKind};
use crate::quant::WeightSet;
use crate::sng::SngBank;
use crate::stream::{BitStream, Encoding};

/// Height, width and channel count of an activation tensor.
pub type Shape = [usize; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerSpec {
    /// `kernel x kernel` valid convolution, stride 1, then 2x2 pooling and
    /// the block activation.
    ConvPool {
        filters: usize,
        kernel: usize,
        ip: IpKind,
    },
    /// Dense layer followed by tanh.
    FullyConnected { out: usize, ip: IpKind },
    /// Dense layer whose raw sums are the class scores.
    Output { classes: usize, ip: IpKind },
}

impl LayerSpec {
    pub fn ip(&self) -> IpKind {
        match *self {
            LayerSpec::ConvPool { ip, .. }
            | LayerSpec::FullyConnected { ip, .. }
            | LayerSpec::Output { ip, .. } => ip,
        }
    }

    fn with_ip(self, new: IpKind) -> Self {
        match self {
            LayerSpec::ConvPool { filters, kernel, .. } => LayerSpec::ConvPool {
                filters,
                kernel,
                ip: new,
            },
            LayerSpec::FullyConnected { out, .. } => LayerSpec::FullyConnected { out, ip: new },
            LayerSpec::Output { classes, .. } => LayerSpec::Output { classes, ip: new },
        }
    }

    /// Number of filter blocks (output channels or neurons).
    pub fn filters(&self) -> usize {
        match *self {
            LayerSpec::ConvPool { filters, .. } => filters,
            LayerSpec::FullyConnected { out, .. } => out,
            LayerSpec::Output { classes, .. } => classes,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSpec {
    pub input: Shape,
    pub pool: PoolKind,
    pub layers: Vec<LayerSpec>,
}

impl NetworkSpec {
    /// 28x28 input, conv 20@5x5, pool, conv 50@5x5, pool, FC 500, output 10.
    pub fn lenet5(pool: PoolKind) -> Self {
        NetworkSpec {
            input: [28, 28, 1],
            pool,
            layers: vec![
                LayerSpec::ConvPool {
                    filters: 20,
                    kernel: 5,
                    ip: IpKind::Apc,
                },
                LayerSpec::ConvPool {
                    filters: 50,
                    kernel: 5,
                    ip: IpKind::Apc,
                },
                LayerSpec::FullyConnected {
                    out: 500,
                    ip: IpKind::Apc,
                },
                LayerSpec::Output {
                    classes: 10,
                    ip: IpKind::Apc,
                },
            ],
        }
    }

    /// Assigns inner-product kinds per layer group: conv layers are groups
    /// 0, 1, ...; every dense layer after them is the last group.
    pub fn with_group_ips(mut self, ips: &[IpKind]) -> Result<Self> {
        let groups = self.group_count();
        if ips.len() != groups {
            return contract(format!("expected {groups} layer-group settings"));
        }
        for i in 0..self.layers.len() {
            let g = self.group_of(i);
            self.layers[i] = self.layers[i].with_ip(ips[g]);
        }
        Ok(self)
    }

    fn conv_count(&self) -> usize {
        self.layers
            .iter()
            .take_while(|l| matches!(l, LayerSpec::ConvPool { .. }))
            .count()
    }

    /// Number of layer groups (conv layers plus one dense group).
    pub fn group_count(&self) -> usize {
        let conv = self.conv_count();
        conv + usize::from(conv < self.layers.len())
    }

    /// Group index of layer `i`.
    pub fn group_of(&self, i: usize) -> usize {
        i.min(self.conv_count())
    }

    /// Expands one value per group to one value per layer.
    pub fn expand_groups<T: Copy>(&self, per_group: &[T]) -> Result<Vec<T>> {
        if per_group.len() != self.group_count() {
            return contract(format!("expected {} layer-group values", self.group_count()));
        }
        Ok((0..self.layers.len()).map(|i| per_group[self.group_of(i)]).collect())
    }

    /// Input and output shapes of every layer, checking that each fits.
    pub fn shapes(&self) -> Result<Vec<(Shape, Shape)>> {
        let mut cur = self.input;
        let mut out = Vec::with_capacity(self.layers.len());
        for (i, layer) in self.layers.iter().enumerate() {
            let next = match *layer {
                LayerSpec::ConvPool { filters, kernel, .. } => {
                    if kernel == 0 || cur[0] < kernel || cur[1] < kernel {
                        return Err(shape_error(i, "input at least as large as the kernel", cur));
                    }
                    let (h, w) = (cur[0] - kernel + 1, cur[1] - kernel + 1);
                    if h % 2 != 0 || w % 2 != 0 {
                        return Err(shape_error(i, "even convolution output for 2x2 pooling", cur));
                    }
                    [h / 2, w / 2, filters]
                }
                LayerSpec::FullyConnected { out, .. } => [1, 1, out],
                LayerSpec::Output { classes, .. } => [1, 1, classes],
            };
            out.push((cur, next));
            cur = next;
        }
        Ok(out)
    }

    /// Expected `(filter count, filter shape)` per layer.
    pub fn filter_shapes(&self) -> Result<Vec<(usize, Shape)>> {
        Ok(self
            .layers
            .iter()
            .zip(self.shapes()?)
            .map(|(layer, (input, _))| match *layer {
                LayerSpec::ConvPool { filters, kernel, .. } => (filters, [kernel, kernel, input[2]]),
                _ => (layer.filters(), input),
            })
            .collect())
    }

    /// Inner-product input size per layer.
    pub fn fan_ins(&self) -> Result<Vec<usize>> {
        Ok(self
            .filter_shapes()?
            .iter()
            .map(|(_, s)| s.iter().product())
            .collect())
    }

    /// Neuron counts: input, then conv and pooled sizes for conv layers and
    /// output sizes for dense layers.
    pub fn neuron_counts(&self) -> Result<Vec<usize>> {
        let mut counts = vec![self.input.iter().product()];
        for (layer, (input, output)) in self.layers.iter().zip(self.shapes()?) {
            if let LayerSpec::ConvPool { kernel, .. } = *layer {
                let conv = (input[0] - kernel + 1) * (input[1] - kernel + 1) * output[2];
                counts.push(conv);
            }
            counts.push(output.iter().product());
        }
        Ok(counts)
    }
}

fn shape_error(layer: usize, expected: &str, actual: Shape) -> Error {
    Error::Shape {
        layer,
        expected: String::from(expected),
        actual: format!("{actual:?}"),
    }
}

/// Row-major `(y, x, channel)` activation tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub shape: Shape,
    pub data: Vec<f64>,
}

impl Tensor {
    pub fn new(shape: Shape, data: Vec<f64>) -> Result<Self> {
        if shape.iter().product::<usize>() != data.len() {
            return contract("tensor data does not match its shape");
        }
        Ok(Tensor { shape, data })
    }

    pub fn at(&self, y: usize, x: usize, c: usize) -> f64 {
        self.data[index(self.shape, y, x, c)]
    }
}

fn index(shape: Shape, y: usize, x: usize, c: usize) -> usize {
    (y * shape[1] + x) * shape[2] + c
}

#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    pub pixels: Tensor,
    pub label: Option<u8>,
}

impl Image {
    pub fn new(shape: Shape, pixels: Vec<f64>, label: Option<u8>) -> Result<Self> {
        if let Some(&bad) = pixels.iter().find(|p| !Encoding::Bipolar.contains(**p)) {
            return Err(Error::Range {
                value: bad,
                encoding: Encoding::Bipolar,
            });
        }
        Ok(Image {
            pixels: Tensor::new(shape, pixels)?,
            label,
        })
    }
}

/// Per-layer adjustments on top of the network's own layer settings.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LayerOverride {
    pub ip: Option<IpKind>,
    pub states: Option<u32>,
    pub apc_mode: Option<ApcMode>,
}

#[derive(Debug, Clone)]
pub struct ScRunConfig {
    pub len: usize,
    pub pooling: PoolKind,
    pub segment: usize,
    pub count_average: CountAverage,
    /// Generator family; its seed is the run seed.
    pub bank: SngBank,
    pub overrides: Vec<LayerOverride>,
}

impl ScRunConfig {
    pub fn new(len: usize, pooling: PoolKind, bank: SngBank) -> Self {
        ScRunConfig {
            len,
            pooling,
            segment: DEFAULT_SEGMENT,
            count_average: CountAverage::default(),
            bank,
            overrides: Vec::new(),
        }
    }

    pub fn seed(&self) -> u64 {
        self.bank.seed()
    }

    fn overrides_for(&self, layer: usize) -> LayerOverride {
        self.overrides.get(layer).copied().unwrap_or_default()
    }
}

/// Validated network with dequantized weights cached per filter block.
#[derive(Debug, Clone)]
pub struct Network {
    spec: NetworkSpec,
    shapes: Vec<(Shape, Shape)>,
    /// `weights[layer][filter]`, filter values in `(y, x, c)` order.
    weights: Vec<Vec<Vec<f64>>>,
}

impl Network {
    pub fn build(spec: NetworkSpec, ws: &WeightSet) -> Result<Network> {
        let expected = spec.filter_shapes()?;
        if ws.layers.len() != expected.len() {
            return Err(Error::Shape {
                layer: ws.layers.len().min(expected.len()),
                expected: format!("{} weight layers", expected.len()),
                actual: format!("{}", ws.layers.len()),
            });
        }
        let mut weights = Vec::with_capacity(expected.len());
        for (i, (layer, &(count, shape))) in ws.layers.iter().zip(&expected).enumerate() {
            if layer.filters.len() != count {
                return Err(Error::Shape {
                    layer: i,
                    expected: format!("{count} filters"),
                    actual: format!("{} filters", layer.filters.len()),
                });
            }
            if let Some(f) = layer.filters.iter().find(|f| f.shape != shape) {
                return Err(Error::Shape {
                    layer: i,
                    expected: format!("filter shape {shape:?}"),
                    actual: format!("{:?}", f.shape),
                });
            }
            weights.push(layer.filters.iter().map(|f| f.values()).collect());
        }
        Ok(Network {
            shapes: spec.shapes()?,
            spec,
            weights,
        })
    }

    /// Network with weights given directly as reals.
    pub fn from_values(spec: NetworkSpec, weights: Vec<Vec<Vec<f64>>>) -> Result<Network> {
        let expected = spec.filter_shapes()?;
        for (i, (&(count, shape), layer)) in expected.iter().zip(&weights).enumerate() {
            let size: usize = shape.iter().product();
            if layer.len() != count || layer.iter().any(|f| f.len() != size) {
                return Err(Error::Shape {
                    layer: i,
                    expected: format!("{count} filters of {size} weights"),
                    actual: format!("{} filters", layer.len()),
                });
            }
        }
        if weights.len() != expected.len() {
            return Err(Error::Shape {
                layer: weights.len().min(expected.len()),
                expected: format!("{} weight layers", expected.len()),
                actual: format!("{}", weights.len()),
            });
        }
        Ok(Network {
            shapes: spec.shapes()?,
            spec,
            weights,
        })
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn weights(&self) -> &[Vec<Vec<f64>>] {
        &self.weights
    }

    pub fn neuron_counts(&self) -> Vec<usize> {
        self.spec.neuron_counts().expect("validated at build time")
    }

    fn check_input(&self, img: &Image) -> Result<()> {
        if img.pixels.shape != self.spec.input {
            return Err(shape_error(0, "image shape matching the network input", img.pixels.shape));
        }
        Ok(())
    }

    /// Double-precision reference: class scores of the last layer.
    pub fn forward_float(&self, img: &Image) -> Result<Vec<f64>> {
        Ok(self.forward_float_layers(img, None)?.pop().expect("at least one layer").data)
    }

    /// Every layer's output, optionally with uniform noise of amplitude `a`
    /// added to the outputs of one layer group: `Some((group, a, seed))`.
    pub fn forward_float_layers(
        &self,
        img: &Image,
        noise: Option<(usize, f64, u64)>,
    ) -> Result<Vec<Tensor>> {
        self.check_input(img)?;
        let mut rng = noise.map(|(_, _, s)| ChaCha8Rng::seed_from_u64(s));
        let mut cur = img.pixels.clone();
        let mut outs = Vec::with_capacity(self.spec.layers.len());
        for (i, layer) in self.spec.layers.iter().enumerate() {
            let (_, out_shape) = self.shapes[i];
            let w = &self.weights[i];
            let mut data = match *layer {
                LayerSpec::ConvPool { kernel, .. } => conv_pool_float(&cur, w, kernel, self.spec.pool),
                LayerSpec::FullyConnected { .. } => {
                    w.iter().map(|f| libm::tanh(dot(f, &cur.data))).collect()
                }
                LayerSpec::Output { .. } => w.iter().map(|f| dot(f, &cur.data)).collect(),
            };
            if let (Some((g, a, _)), Some(rng)) = (noise, rng.as_mut()) {
                if self.spec.group_of(i) == g {
                    for v in &mut data {
                        *v += rng.gen_range(-a..=a);
                    }
                }
            }
            cur = Tensor::new(out_shape, data)?;
            outs.push(cur.clone());
        }
        Ok(outs)
    }

    /// SC inference; every receptive field drives its layer's block.
    pub fn forward_sc(&self, img: &Image, run: &ScRunConfig) -> Result<Vec<f64>> {
        self.sc_session(run)?.forward(img, &run.bank)
    }

    /// Encodes every weight once under `run`, for reuse across images.
    pub fn sc_session(&self, run: &ScRunConfig) -> Result<ScSession<'_>> {
        let weights = (0..self.weights.len())
            .map(|i| self.weight_streams(i, run))
            .collect::<Result<_>>()?;
        Ok(ScSession {
            net: self,
            run: run.clone(),
            weights,
        })
    }

    /// Weight streams of layer `i`, one stream per weight, shared by every
    /// receptive field of the layer.
    fn weight_streams(&self, i: usize, run: &ScRunConfig) -> Result<Vec<Vec<BitStream>>> {
        let size = self.weights[i].first().map_or(0, |f| f.len());
        self.weights[i]
            .iter()
            .enumerate()
            .map(|(f, filter)| {
                filter
                    .iter()
                    .enumerate()
                    .map(|(e, &w)| {
                        let id = stream_id(i + 1, Kind::Weight, f * size + e);
                        run.bank.stream(id, w, Encoding::Bipolar, run.len)
                    })
                    .collect()
            })
            .collect()
    }
}

/// A network with its weight streams generated for one run configuration.
#[derive(Debug, Clone)]
pub struct ScSession<'a> {
    net: &'a Network,
    run: ScRunConfig,
    weights: Vec<Vec<Vec<BitStream>>>,
}

impl ScSession<'_> {
    pub fn run(&self) -> &ScRunConfig {
        &self.run
    }

    /// Class scores of one image. `bank` drives the pixel encoders and the
    /// selection generators; the weight streams come from the session.
    pub fn forward(&self, img: &Image, bank: &SngBank) -> Result<Vec<f64>> {
        let (net, run) = (self.net, &self.run);
        net.check_input(img)?;
        let fan_ins = net.spec.fan_ins()?;
        let enc = Encoding::Bipolar;
        let mut streams = img
            .pixels
            .data
            .iter()
            .enumerate()
            .map(|(p, &v)| bank.stream(stream_id(0, Kind::Input, p), v, enc, run.len))
            .collect::<Result<Vec<_>>>()?;
        let last = net.spec.layers.len() - 1;
        for (i, layer) in net.spec.layers.iter().enumerate() {
            let ov = run.overrides_for(i);
            let ip = ov.ip.unwrap_or(layer.ip());
            let n = fan_ins[i];
            let apc_mode = ov.apc_mode.unwrap_or(if n % 16 == 0 {
                ApcMode::Approximate
            } else {
                ApcMode::Exact
            });
            let filters = &self.weights[i];
            let (in_shape, out_shape) = net.shapes[i];
            match *layer {
                LayerSpec::ConvPool { kernel, .. } => {
                    let mut cfg = FebConfig::standard(ip, run.pooling, n, run.len);
                    cfg.segment = run.segment;
                    cfg.states = ov.states;
                    cfg.apc_mode = apc_mode;
                    cfg.count_average = run.count_average;
                    let mut next = Vec::with_capacity(out_shape.iter().product());
                    for py in 0..out_shape[0] {
                        for px in 0..out_shape[1] {
                            let fields: Vec<Vec<&BitStream>> = (0..4)
                                .map(|q| {
                                    let (y, x) = (2 * py + q / 2, 2 * px + q % 2);
                                    receptive_field(&streams, in_shape, y, x, kernel)
                                })
                                .collect();
                            for (f, filter) in filters.iter().enumerate() {
                                let unit = index(out_shape, py, px, f);
                                let base = stream_id(i + 1, Kind::Select, unit * 8);
                                next.push(feb_streams(&cfg, &fields, filter, bank, base)?);
                            }
                        }
                    }
                    streams = next;
                }
                LayerSpec::FullyConnected { .. } | LayerSpec::Output { .. } => {
                    let is_output = matches!(layer, LayerSpec::Output { .. });
                    let mut next = Vec::with_capacity(filters.len());
                    let mut scores = Vec::with_capacity(filters.len());
                    for (o, filter) in filters.iter().enumerate() {
                        let states = ov.states;
                        match ip {
                            IpKind::Mux => {
                                let mut sel = bank.generator(stream_id(i + 1, Kind::Select, o));
                                let s = inner_product(&streams, filter, IpVariant::Mux(&mut sel))?
                                    .into_stream()
                                    .expect("mux output is a stream");
                                if is_output {
                                    scores.push(n as f64 * s.decode());
                                } else {
                                    let k = states
                                        .unwrap_or_else(|| optimal_states(FebKind::MuxAvg, n, run.len));
                                    next.push(stanh(&s, k, Boundary::Half)?);
                                }
                            }
                            IpKind::Apc => {
                                let c = inner_product(&streams, filter, IpVariant::Apc(apc_mode))?
                                    .into_counts()
                                    .expect("apc output is a count stream");
                                if is_output {
                                    scores.push(c.decode_bipolar_sum());
                                } else {
                                    let k = states.unwrap_or(2 * n as u32);
                                    next.push(btanh(&c, k)?);
                                }
                            }
                        }
                    }
                    if i == last && !is_output {
                        return Ok(next.iter().map(|s| s.decode()).collect());
                    }
                    if is_output {
                        return Ok(scores);
                    }
                    streams = next;
                }
            }
        }
        Ok(streams.iter().map(|s| s.decode()).collect())
    }
}

#[derive(Clone, Copy)]
enum Kind {
    Input = 0,
    Weight = 1,
    Select = 2,
}

fn stream_id(layer: usize, kind: Kind, index: usize) -> u64 {
    ((layer as u64) << 48) | ((kind as u64) << 40) | index as u64
}

fn receptive_field(
    streams: &[BitStream],
    shape: Shape,
    y: usize,
    x: usize,
    kernel: usize,
) -> Vec<&BitStream> {
    let mut out = Vec::with_capacity(kernel * kernel * shape[2]);
    for dy in 0..kernel {
        for dx in 0..kernel {
            for c in 0..shape[2] {
                out.push(&streams[index(shape, y + dy, x + dx, c)]);
            }
        }
    }
    out
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn conv_pool_float(input: &Tensor, filters: &[Vec<f64>], kernel: usize, pool: PoolKind) -> Vec<f64> {
    let [h, w, c] = input.shape;
    let (ch, cw) = (h - kernel + 1, w - kernel + 1);
    let conv = |y: usize, x: usize, f: &[f64]| {
        let mut s = 0.0;
        let mut k = 0;
        for dy in 0..kernel {
            for dx in 0..kernel {
                for ci in 0..c {
                    s += f[k] * input.at(y + dy, x + dx, ci);
                    k += 1;
                }
            }
        }
        s
    };
    let out_shape = [ch / 2, cw / 2, filters.len()];
    let mut out = vec![0.0; out_shape.iter().product()];
    for py in 0..ch / 2 {
        for px in 0..cw / 2 {
            for (fi, f) in filters.iter().enumerate() {
                let vals = [
                    conv(2 * py, 2 * px, f),
                    conv(2 * py, 2 * px + 1, f),
                    conv(2 * py + 1, 2 * px, f),
                    conv(2 * py + 1, 2 * px + 1, f),
                ];
                let pooled = match pool {
                    PoolKind::Max => vals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                    PoolKind::Avg => vals.iter().sum::<f64>() / 4.0,
                };
                out[index(out_shape, py, px, fi)] = libm::tanh(pooled);
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy)]
pub enum EvalMode<'a> {
    Float,
    Sc(&'a ScSession<'a>),
}

/// Index of the largest score; ties go to the lowest index.
pub fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

/// Predicted class of one image under `mode`. Image `i` of a dataset uses
/// the run seed mixed with `i`.
pub fn classify(net: &Network, img: &Image, i: usize, mode: EvalMode<'_>) -> Result<usize> {
    let scores = match mode {
        EvalMode::Float => net.forward_float(img)?,
        EvalMode::Sc(session) => {
            let bank = session.run.bank.reseeded(trial_seed(session.run.seed(), i as u64));
            session.forward(img, &bank)?
        }
    };
    Ok(argmax(&scores))
}

/// Fraction of labelled images whose predicted class differs from the label.
pub fn evaluate(net: &Network, dataset: &[Image], mode: EvalMode<'_>) -> Result<f64> {
    if dataset.is_empty() {
        return contract("dataset must not be empty");
    }
    let mut wrong = 0usize;
    for (i, img) in dataset.iter().enumerate() {
        let Some(label) = img.label else {
            return contract("evaluation needs labelled images");
        };
        if classify(net, img, i, mode)? != usize::from(label) {
            wrong += 1;
        }
    }
    Ok(wrong as f64 / dataset.len() as f64)
}

/// Random weights uniform on `[-scale, scale]` for every filter of `spec`.
pub fn random_weights(spec: &NetworkSpec, scale: f64, seed: u64) -> Result<Vec<Vec<Vec<f64>>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(spec
        .filter_shapes()?
        .iter()
        .map(|&(count, shape)| {
            let size: usize = shape.iter().product();
            (0..count)
                .map(|_| (0..size).map(|_| rng.gen_range(-scale..=scale)).collect())
                .collect()
        })
        .collect())
}

/// Random image of `shape` with pixels uniform on `[-1, 1]`.
pub fn random_image(shape: Shape, seed: u64) -> Image {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = shape.iter().product();
    let pixels = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    Image::new(shape, pixels, None).expect("pixels drawn in range")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quant::{FilterBlock, WeightLayer};
    use crate::sng::SngMode;

    fn toy_fc() -> NetworkSpec {
        NetworkSpec {
            input: [1, 1, 4],
            pool: PoolKind::Max,
            layers: vec![LayerSpec::FullyConnected {
                out: 1,
                ip: IpKind::Apc,
            }],
        }
    }

    #[test]
    fn lenet5_neuron_counts() {
        let spec = NetworkSpec::lenet5(PoolKind::Max);
        assert_eq!(
            spec.neuron_counts().unwrap(),
            vec![784, 11520, 2880, 3200, 800, 500, 10]
        );
        assert_eq!(spec.fan_ins().unwrap(), vec![25, 500, 800, 500]);
        assert_eq!(spec.group_count(), 3);
        assert_eq!(spec.expand_groups(&[7, 7, 6]).unwrap(), vec![7, 7, 6, 6]);
    }

    #[test]
    fn toy_float_score_by_hand() {
        let net = Network::from_values(toy_fc(), vec![vec![vec![0.5, -0.25, 1.0, 0.0]]]).unwrap();
        let img = Image::new([1, 1, 4], vec![0.2, 0.4, -0.6, 1.0], None).unwrap();
        // 0.1 - 0.1 - 0.6 + 0 = -0.6
        assert_eq!(net.forward_float(&img).unwrap(), vec![libm::tanh(-0.6)]);
    }

    #[test]
    fn wrong_filter_count_names_layer_zero() {
        let spec = NetworkSpec::lenet5(PoolKind::Max);
        let f = FilterBlock::from_values(0, [5, 5, 1], &[0.0; 25], 7).unwrap();
        let ws = WeightSet::new(vec![
            WeightLayer::new(7, vec![f; 19]).unwrap(),
            WeightLayer::new(7, vec![]).unwrap(),
            WeightLayer::new(7, vec![]).unwrap(),
            WeightLayer::new(7, vec![]).unwrap(),
        ]);
        match Network::build(spec, &ws) {
            Err(Error::Shape { layer, .. }) => assert_eq!(layer, 0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sc_is_deterministic() {
        let net = Network::from_values(toy_fc(), vec![vec![vec![0.5, -0.25, 1.0, 0.0]]]).unwrap();
        let img = Image::new([1, 1, 4], vec![0.2, 0.4, -0.6, 1.0], None).unwrap();
        let bank = SngBank::new(SngMode::Lfsr, 16, 4).unwrap();
        let run = ScRunConfig::new(256, PoolKind::Max, bank);
        assert_eq!(net.forward_sc(&img, &run).unwrap(), net.forward_sc(&img, &run).unwrap());
    }

    #[test]
    fn argmax_ties_lowest() {
        assert_eq!(argmax(&[0.1, 0.3, 0.3]), 1);
        assert_eq!(argmax(&[0.0; 10]), 0);
    }
}
