//! Text form of a network spec: `key=value` pairs, one layer per line.
//!
//! ```text
//! input=28x28x1
//! pool=max
//! layer=conv filters=20 kernel=5 ip=apc
//! layer=conv filters=50 kernel=5 ip=apc
//! layer=fc out=500 ip=apc
//! layer=output classes=10 ip=apc
//! ```
//!
//! `#` starts a comment.

use std::collections::BTreeMap;
use std::fmt::Write;

use scdcnn_core::feb::{IpKind, PoolKind};
use scdcnn_core::network::{LayerSpec, NetworkSpec};

use crate::error::{Error, Result};

fn bad(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("network spec line {line}: {msg}"))
}

pub fn parse_ip(s: &str) -> Option<IpKind> {
    match s.to_ascii_lowercase().as_str() {
        "mux" => Some(IpKind::Mux),
        "apc" => Some(IpKind::Apc),
        _ => None,
    }
}

pub fn parse_pool(s: &str) -> Option<PoolKind> {
    match s.to_ascii_lowercase().as_str() {
        "max" => Some(PoolKind::Max),
        "avg" | "average" => Some(PoolKind::Avg),
        _ => None,
    }
}

pub fn ip_name(ip: IpKind) -> &'static str {
    match ip {
        IpKind::Mux => "mux",
        IpKind::Apc => "apc",
    }
}

pub fn pool_name(pool: PoolKind) -> &'static str {
    match pool {
        PoolKind::Max => "max",
        PoolKind::Avg => "avg",
    }
}

fn pairs(line: usize, text: &str) -> Result<Vec<(&str, &str)>> {
    text.split_whitespace()
        .map(|tok| tok.split_once('=').ok_or_else(|| bad(line, format!("expected key=value, found `{tok}`"))))
        .collect()
}

fn number(line: usize, fields: &BTreeMap<&str, &str>, key: &str) -> Result<usize> {
    let v = fields.get(key).ok_or_else(|| bad(line, format!("missing `{key}`")))?;
    match v.parse::<usize>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(bad(line, format!("`{key}` must be a positive integer, found `{v}`"))),
    }
}

fn layer(line: usize, kv: &[(&str, &str)]) -> Result<LayerSpec> {
    let kind = kv[0].1;
    let fields: BTreeMap<&str, &str> = kv[1..].iter().copied().collect();
    let allowed: &[&str] = match kind {
        "conv" => &["filters", "kernel", "ip"],
        "fc" => &["out", "ip"],
        "output" => &["classes", "ip"],
        _ => return Err(bad(line, format!("unknown layer kind `{kind}`"))),
    };
    if let Some(k) = fields.keys().find(|k| !allowed.contains(k)) {
        return Err(bad(line, format!("unknown key `{k}` for a {kind} layer")));
    }
    let ip = match fields.get("ip") {
        Some(v) => parse_ip(v).ok_or_else(|| bad(line, format!("unknown inner product `{v}`")))?,
        None => IpKind::Apc,
    };
    Ok(match kind {
        "conv" => LayerSpec::ConvPool {
            filters: number(line, &fields, "filters")?,
            kernel: number(line, &fields, "kernel")?,
            ip,
        },
        "fc" => LayerSpec::FullyConnected {
            out: number(line, &fields, "out")?,
            ip,
        },
        _ => LayerSpec::Output {
            classes: number(line, &fields, "classes")?,
            ip,
        },
    })
}

pub fn parse(text: &str) -> Result<NetworkSpec> {
    let mut input = None;
    let mut pool = None;
    let mut layers = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let kv = pairs(line, body)?;
        match kv[0].0 {
            "input" if kv.len() == 1 => {
                let dims: Vec<usize> = kv[0]
                    .1
                    .split('x')
                    .map(|d| d.parse().map_err(|_| bad(line, format!("bad dimension `{d}`"))))
                    .collect::<Result<_>>()?;
                let [h, w, c] = dims[..] else {
                    return Err(bad(line, "input must be HxWxC"));
                };
                input = Some([h, w, c]);
            }
            "pool" if kv.len() == 1 => {
                pool = Some(parse_pool(kv[0].1).ok_or_else(|| bad(line, format!("unknown pooling `{}`", kv[0].1)))?);
            }
            "layer" => layers.push(layer(line, &kv)?),
            k => return Err(bad(line, format!("unexpected `{k}`"))),
        }
    }
    let spec = NetworkSpec {
        input: input.ok_or_else(|| Error::Config("network spec needs an `input=HxWxC` line".into()))?,
        pool: pool.unwrap_or(PoolKind::Max),
        layers,
    };
    if spec.layers.is_empty() {
        return Err(Error::Config("network spec has no layers".into()));
    }
    spec.shapes()?;
    Ok(spec)
}

pub fn format(spec: &NetworkSpec) -> String {
    let [h, w, c] = spec.input;
    let mut out = format!("input={h}x{w}x{c}\npool={}\n", pool_name(spec.pool));
    for l in &spec.layers {
        let _ = match *l {
            LayerSpec::ConvPool { filters, kernel, ip } => {
                writeln!(out, "layer=conv filters={filters} kernel={kernel} ip={}", ip_name(ip))
            }
            LayerSpec::FullyConnected { out: o, ip } => writeln!(out, "layer=fc out={o} ip={}", ip_name(ip)),
            LayerSpec::Output { classes, ip } => writeln!(out, "layer=output classes={classes} ip={}", ip_name(ip)),
        };
    }
    out
}
