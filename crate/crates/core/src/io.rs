// SPDX-License-Identifier: Apache-2.0

//! JSON formats and the canonical channel hash.
//!
//! Channels are stored as `{"dim": d, "states": [[[re, im], ...], ...]}`.
//! The channel hash is the hex SHA-256 of: `dim` and the alphabet size as
//! little-endian `u64`, followed by every amplitude of every normalized state
//! as little-endian `f64` real and imaginary parts, in symbol order.
//!
//! Emitted JSON has sorted keys and floats rounded to 12 significant digits.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::channel::{make_channel, ChannelSpec};
use crate::code::{Codebook, ExpurgationCertificate};
use crate::error::{Error, Result};
use crate::simplex::SimplexDistribution;

pub const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    pub dim: usize,
    pub states: Vec<Vec<[f64; 2]>>,
}

impl From<&ChannelSpec> for ChannelFile {
    fn from(ch: &ChannelSpec) -> Self {
        ChannelFile {
            dim: ch.dim(),
            states: ch
                .states()
                .iter()
                .map(|s| s.iter().map(|z| [z.re, z.im]).collect())
                .collect(),
        }
    }
}

impl ChannelFile {
    pub fn into_channel(self) -> Result<ChannelSpec> {
        if self.dim == 0 {
            return Err(Error::Parse("dim must be positive".into()));
        }
        let vectors = self
            .states
            .into_iter()
            .map(|s| s.into_iter().map(|[re, im]| num_complex::Complex64::new(re, im)).collect())
            .collect::<Vec<Vec<_>>>();
        if let Some((index, v)) = vectors.iter().enumerate().find(|(_, v)| v.len() != self.dim) {
            return Err(Error::DimensionMismatch {
                index,
                expected: self.dim,
                found: v.len(),
            });
        }
        make_channel(vectors)
    }
}

fn parse_error(e: serde_json::Error) -> Error {
    Error::Parse(e.to_string())
}

pub fn parse_channel(text: &str) -> Result<ChannelSpec> {
    serde_json::from_str::<ChannelFile>(text).map_err(parse_error)?.into_channel()
}

/// Channel JSON at full precision, so that re-reading reproduces the hash.
pub fn channel_to_json(ch: &ChannelSpec) -> String {
    let mut s = serde_json::to_string_pretty(&ChannelFile::from(ch)).expect("channels serialize");
    s.push('\n');
    s
}

pub fn channel_hash(ch: &ChannelSpec) -> String {
    let mut h = Sha256::new();
    h.update((ch.dim() as u64).to_le_bytes());
    h.update((ch.alphabet_size() as u64).to_le_bytes());
    for s in ch.states() {
        for z in s.iter() {
            h.update(z.re.to_le_bytes());
            h.update(z.im.to_le_bytes());
        }
    }
    hex::encode(h.finalize())
}

/// Codebook together with its sampling parameters and certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodebookFile {
    pub n: usize,
    pub codewords: Vec<Vec<usize>>,
    pub seed: u64,
    #[serde(rename = "P")]
    pub p: SimplexDistribution,
    pub channel_hash: String,
    pub certificate: ExpurgationCertificate,
}

impl CodebookFile {
    pub fn new(code: &Codebook, p: &SimplexDistribution, cert: &ExpurgationCertificate) -> Self {
        CodebookFile {
            n: code.n,
            codewords: code.codewords.clone(),
            seed: cert.seed,
            p: p.clone(),
            channel_hash: code.channel_hash.clone(),
            certificate: cert.clone(),
        }
    }

    pub fn codebook(&self) -> Codebook {
        Codebook {
            n: self.n,
            codewords: self.codewords.clone(),
            channel_hash: self.channel_hash.clone(),
        }
    }
}

/// Rounds `x` to `digits` significant decimal digits.
pub fn round_significant(x: f64, digits: usize) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x).parse().unwrap_or(x)
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(x) = n.as_f64() {
                let r = round_significant(x, SIGNIFICANT_DIGITS);
                if let Some(num) = serde_json::Number::from_f64(r) {
                    *n = num;
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

/// Serializable value as a [`Value`] with floats rounded.
pub fn to_canonical_value<T: Serialize + ?Sized>(value: &T) -> Value {
    let mut v = serde_json::to_value(value).expect("in-memory types serialize to JSON");
    round_value(&mut v);
    v
}

/// Pretty-printed canonical JSON, newline terminated.
pub fn to_canonical_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(&to_canonical_value(value)).expect("values print");
    s.push('\n');
    s
}

pub fn from_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(parse_error)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{binary_channel, trine_channel};

    #[test]
    fn channel_round_trip() {
        let t = trine_channel();
        let text = channel_to_json(&t);
        let back = parse_channel(&text).unwrap();
        assert_eq!(back.alphabet_size(), 3);
        for x in 0..3 {
            assert!((back.state(x) - t.state(x)).norm() < 1e-15);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(parse_channel("{\"dim\": 2, \"states\": [[[1,0],[0,0]]"), Err(Error::Parse(_))));
        assert!(matches!(parse_channel("{\"dim\": 2, \"states\": [[[NaN,0],[0,0]]]}"), Err(Error::Parse(_))));
        assert!(matches!(
            parse_channel("{\"dim\": 2, \"states\": [[[2,0],[0,0]]]}"),
            Err(Error::NotNormalized { .. })
        ));
        assert!(matches!(
            parse_channel("{\"dim\": 2, \"states\": [[[1,0]]]}"),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(parse_channel("{\"dim\": 2, \"states\": []}"), Err(Error::EmptyChannel)));
        let msg = parse_channel("{\"dim\": 2,\n \"states\": x}").unwrap_err().to_string();
        assert!(msg.contains("line 2"), "{msg}");
    }

    #[test]
    fn hash_distinguishes_channels() {
        let a = channel_hash(&binary_channel(0.5).unwrap());
        let b = channel_hash(&binary_channel(0.5000001).unwrap());
        assert_eq!(a.len(), 64);
        assert_ne!(a, b);
        assert_eq!(a, channel_hash(&binary_channel(0.5).unwrap()));
    }

    #[test]
    fn rounding() {
        assert_eq!(round_significant(0.584_962_500_721_156_2, 12), 0.584962500721);
        assert_eq!(round_significant(1.0, 12), 1.0);
        assert_eq!(round_significant(-1.234_567_890_123_4e-20, 12), -1.23456789012e-20);
        let v = to_canonical_json(&serde_json::json!({"b": 1, "a": [0.1234567890123456]}));
        assert_eq!(v, "{\n  \"a\": [\n    0.123456789012\n  ],\n  \"b\": 1\n}\n");
    }
}
