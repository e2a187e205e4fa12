//! Scorer weight files.
//!
//! Binary layout, little-endian:
//!
//! ```text
//! b"QPW1"
//! u32       number of layer sizes (input and output included)
//! u32 x n   layer sizes, input first
//! f64 ...   per dense layer: weights row-major (outputs x inputs), then biases
//! ```

use std::fmt::Write as _;
use std::path::Path;

use super::mlp::{Dense, QScorer};
use crate::error::{Error, Result};

pub const WEIGHTS_MAGIC: &[u8; 4] = b"QPW1";

const MAX_LAYER_WIDTH: usize = 1 << 16;

pub fn encode_weights(q: &QScorer) -> Vec<u8> {
    let sizes = q.sizes();
    let mut out = Vec::with_capacity(8 + 4 * sizes.len() + 8 * q.parameter_count());
    out.extend_from_slice(WEIGHTS_MAGIC);
    out.extend_from_slice(&(sizes.len() as u32).to_le_bytes());
    for s in &sizes {
        out.extend_from_slice(&(*s as u32).to_le_bytes());
    }
    for p in q.parameters() {
        out.extend_from_slice(&p.to_le_bytes());
    }
    out
}

pub fn decode_weights(bytes: &[u8]) -> Result<QScorer> {
    let mut cur = bytes;
    let mut take = |n: usize| -> Result<&[u8]> {
        if cur.len() < n {
            return Err(Error::Weights("truncated".into()));
        }
        let (head, rest) = cur.split_at(n);
        cur = rest;
        Ok(head)
    };
    if take(4)? != WEIGHTS_MAGIC {
        return Err(Error::Weights("bad magic, expected QPW1".into()));
    }
    let read_u32 = |b: &[u8]| u32::from_le_bytes(b.try_into().unwrap()) as usize;
    let n = read_u32(take(4)?);
    if !(2..=64).contains(&n) {
        return Err(Error::Weights(format!("implausible layer count {n}")));
    }
    let mut sizes = Vec::with_capacity(n);
    for _ in 0..n {
        let s = read_u32(take(4)?);
        if s == 0 || s > MAX_LAYER_WIDTH {
            return Err(Error::Weights(format!("implausible layer size {s}")));
        }
        sizes.push(s);
    }
    let mut layers = Vec::with_capacity(n - 1);
    for w in sizes.windows(2) {
        let (inputs, outputs) = (w[0], w[1]);
        let mut read_f64s = |count: usize| -> Result<Vec<f64>> {
            let raw = take(8 * count)?;
            Ok(raw
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect())
        };
        let weights = read_f64s(inputs * outputs)?;
        let biases = read_f64s(outputs)?;
        layers.push(Dense {
            inputs,
            outputs,
            weights,
            biases,
        });
    }
    if !cur.is_empty() {
        return Err(Error::Weights(format!("{} trailing bytes", cur.len())));
    }
    QScorer::from_layers(layers).map_err(|e| Error::Weights(e.to_string()))
}

pub fn write_weights(q: &QScorer, path: &Path) -> Result<()> {
    std::fs::write(path, encode_weights(q)).map_err(|e| Error::io(path, e))
}

pub fn read_weights(path: &Path) -> Result<QScorer> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_weights(&bytes).map_err(|e| Error::parse(path, e))
}

/// Human-readable mirror of the binary file, for diffing.
pub fn weights_to_text(q: &QScorer) -> String {
    let mut out = String::from("QPW1\n");
    let sizes = q.sizes();
    let _ = writeln!(
        out,
        "sizes {}",
        sizes.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" ")
    );
    for (i, l) in q.layers().iter().enumerate() {
        let _ = writeln!(out, "layer {i} weights {}x{}", l.outputs, l.inputs);
        for row in l.weights.chunks_exact(l.inputs) {
            let line: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        let _ = writeln!(out, "layer {i} biases {}", l.outputs);
        let line: Vec<String> = l.biases.iter().map(|v| format!("{v:e}")).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    out
}
