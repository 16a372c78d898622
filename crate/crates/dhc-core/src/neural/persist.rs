//! Plain-text model persistence.
//!
//! Format: a header line
//! `mlp v1 <n_layers> <sizes...> <hidden_act> <out_act>`
//! followed by one line per parameter array (weights then biases, layer by
//! layer) of space-separated decimal values. Values are written with Rust's
//! shortest round-trip formatting, so a load reproduces the saved parameters
//! bit for bit.

use std::fmt::Write as _;
use std::path::Path;

use super::{Activation, Mlp};
use crate::{Error, Result};

pub fn mlp_to_string(net: &Mlp) -> String {
    let mut out = String::new();
    write!(out, "mlp v1 {}", net.layer_sizes().len()).unwrap();
    for s in net.layer_sizes() {
        write!(out, " {s}").unwrap();
    }
    writeln!(
        out,
        " {} {}",
        net.hidden_activation().name(),
        net.output_activation().name()
    )
    .unwrap();
    for k in 0..net.num_layers() {
        for arr in [&net.weights()[k], &net.biases()[k]] {
            let mut first = true;
            for v in arr.iter() {
                if !first {
                    out.push(' ');
                }
                write!(out, "{v}").unwrap();
                first = false;
            }
            out.push('\n');
        }
    }
    out
}

pub fn mlp_from_str(text: &str) -> Result<Mlp> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty model file".into()))?;
    let mut tok = header.split_whitespace();
    if tok.next() != Some("mlp") || tok.next() != Some("v1") {
        return Err(Error::Parse("expected `mlp v1` header".into()));
    }
    let n_layers: usize = tok
        .next()
        .ok_or_else(|| Error::Parse("missing layer count".into()))?
        .parse()
        .map_err(|_| Error::Parse("bad layer count".into()))?;
    let mut sizes = Vec::with_capacity(n_layers);
    for _ in 0..n_layers {
        let s: usize = tok
            .next()
            .ok_or_else(|| Error::Parse("missing layer size".into()))?
            .parse()
            .map_err(|_| Error::Parse("bad layer size".into()))?;
        sizes.push(s);
    }
    let hidden = Activation::from_name(
        tok.next()
            .ok_or_else(|| Error::Parse("missing hidden activation".into()))?,
    )?;
    let output = Activation::from_name(
        tok.next()
            .ok_or_else(|| Error::Parse("missing output activation".into()))?,
    )?;

    let parse_line = |line: &str, expected: usize| -> Result<Vec<f64>> {
        let vals: std::result::Result<Vec<f64>, _> =
            line.split_whitespace().map(str::parse::<f64>).collect();
        let vals = vals.map_err(|_| Error::Parse("bad parameter value".into()))?;
        if vals.len() != expected {
            return Err(Error::Parse(format!(
                "parameter line has {} values, expected {expected}",
                vals.len()
            )));
        }
        Ok(vals)
    };

    let mut weights = Vec::with_capacity(n_layers.saturating_sub(1));
    let mut biases = Vec::with_capacity(n_layers.saturating_sub(1));
    for k in 0..n_layers.saturating_sub(1) {
        let wline = lines
            .next()
            .ok_or_else(|| Error::Parse(format!("missing weights for layer {k}")))?;
        weights.push(parse_line(wline, sizes[k] * sizes[k + 1])?);
        let bline = lines
            .next()
            .ok_or_else(|| Error::Parse(format!("missing biases for layer {k}")))?;
        biases.push(parse_line(bline, sizes[k + 1])?);
    }
    Mlp::from_parts(sizes, weights, biases, hidden, output)
}

pub fn save_mlp(net: &Mlp, path: &Path) -> Result<()> {
    std::fs::write(path, mlp_to_string(net))?;
    Ok(())
}

pub fn load_mlp(path: &Path) -> Result<Mlp> {
    let text = std::fs::read_to_string(path)?;
    mlp_from_str(&text)
}
