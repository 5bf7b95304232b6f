//! Fixed-width binary codecs and bit strings.
//!
//! Everything downstream (context trees, decision rules, the planner's state
//! keys) works on [`BitString`] values produced here. Conventions, stated
//! once and relied on everywhere:
//!
//! * Bit index 1 is the most significant bit. `BitString::bit(i)` uses that
//!   1-based convention; the internal `Vec<bool>` stores bits in the same
//!   order, so `bits[0]` is the MSB.
//! * Symbols are encoded MSB-first at the fixed width of their
//!   [`SymbolSpace`] (`bit_width >= 1` even for one-symbol spaces).
//! * Real values are quantized by uniform bucketing over a closed value
//!   range, clipping out-of-range inputs to the boundary buckets. Decoding
//!   returns the bucket midpoint.

use serde::{Deserialize, Serialize};
use std::fmt;

/// Errors from symbol and value codecs.
#[derive(Debug, thiserror::Error, PartialEq)]
pub enum CodecError {
    #[error("symbol id {id} out of range for cardinality {cardinality}")]
    SymbolOutOfRange { id: u64, cardinality: u64 },
    #[error("bit width mismatch: expected {expected}, got {got}")]
    WidthMismatch { expected: u32, got: u32 },
    #[error("space has no value range; real-valued coding unavailable")]
    NoValueRange,
    #[error("reward {0} is not one of the declared reward levels")]
    UnknownRewardLevel(f64),
    #[error("invalid symbol space: {0}")]
    InvalidSpace(String),
}

/// A finite, ordered sequence of bits. MSB first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct BitString {
    bits: Vec<bool>,
}

impl BitString {
    pub fn new() -> Self {
        BitString { bits: Vec::new() }
    }

    pub fn zeros(len: usize) -> Self {
        BitString { bits: vec![false; len] }
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        BitString { bits }
    }

    /// Parse from a string of `0`/`1` characters (leftmost = bit 1 = MSB).
    pub fn parse(s: &str) -> Option<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Some(false),
                '1' => Some(true),
                _ => None,
            })
            .collect::<Option<Vec<bool>>>()
            .map(Self::from_bits)
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// 1-based accessor matching the "bit 1 = MSB" convention.
    pub fn bit(&self, i: usize) -> bool {
        assert!(i >= 1 && i <= self.bits.len(), "bit index {i} out of 1..={}", self.bits.len());
        self.bits[i - 1]
    }

    /// 0-based accessor (index 0 = MSB).
    pub fn get(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn push(&mut self, b: bool) {
        self.bits.push(b);
    }

    pub fn extend(&mut self, other: &BitString) {
        self.bits.extend_from_slice(&other.bits);
    }

    pub fn concat(&self, other: &BitString) -> BitString {
        let mut bits = self.bits.clone();
        bits.extend_from_slice(&other.bits);
        BitString { bits }
    }

    pub fn slice(&self, range: std::ops::Range<usize>) -> BitString {
        BitString { bits: self.bits[range].to_vec() }
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.bits
    }

    /// Interpret as an unsigned integer, MSB first. Panics above 64 bits.
    pub fn to_u64(&self) -> u64 {
        assert!(self.bits.len() <= 64, "bit string too wide for u64");
        self.bits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64)
    }

    /// Encode `value` into `width` bits, MSB first. Panics if the value does
    /// not fit.
    pub fn from_u64(value: u64, width: u32) -> Self {
        assert!(width <= 64);
        assert!(width == 64 || value < (1u64 << width), "value {value} does not fit in {width} bits");
        let bits = (0..width).rev().map(|i| (value >> i) & 1 == 1).collect();
        BitString { bits }
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            write!(f, "{}", if b { '1' } else { '0' })?;
        }
        Ok(())
    }
}

/// Description of one symbol stream: how many distinct symbols exist, how
/// wide their binary code is, and (for quantized real streams) the value
/// range the buckets cover.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolSpace {
    cardinality: u64,
    bit_width: u32,
    value_range: Option<(f64, f64)>,
}

impl SymbolSpace {
    /// Space of `cardinality` discrete symbols, coded at the minimal width
    /// (at least one bit).
    pub fn discrete(cardinality: u64) -> Result<Self, CodecError> {
        if cardinality == 0 {
            return Err(CodecError::InvalidSpace("cardinality must be positive".into()));
        }
        let bit_width = (64 - (cardinality - 1).leading_zeros()).max(1);
        Ok(SymbolSpace { cardinality, bit_width, value_range: None })
    }

    /// Space of `2^bits` uniform buckets over `[lo, hi]`.
    pub fn quantized(lo: f64, hi: f64, bits: u32) -> Result<Self, CodecError> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(CodecError::InvalidSpace(format!("bad value range [{lo}, {hi}]")));
        }
        if bits == 0 || bits > 32 {
            return Err(CodecError::InvalidSpace(format!("bucket bits {bits} out of 1..=32")));
        }
        Ok(SymbolSpace { cardinality: 1u64 << bits, bit_width: bits, value_range: Some((lo, hi)) })
    }

    pub fn cardinality(&self) -> u64 {
        self.cardinality
    }

    pub fn bit_width(&self) -> u32 {
        self.bit_width
    }

    pub fn value_range(&self) -> Option<(f64, f64)> {
        self.value_range
    }

    /// Fixed-width MSB-first code of a symbol id.
    pub fn encode(&self, id: u64) -> Result<BitString, CodecError> {
        if id >= self.cardinality {
            return Err(CodecError::SymbolOutOfRange { id, cardinality: self.cardinality });
        }
        Ok(BitString::from_u64(id, self.bit_width))
    }

    /// Inverse of [`SymbolSpace::encode`]; checks width and range.
    pub fn decode(&self, bits: &BitString) -> Result<u64, CodecError> {
        if bits.len() as u32 != self.bit_width {
            return Err(CodecError::WidthMismatch { expected: self.bit_width, got: bits.len() as u32 });
        }
        let id = bits.to_u64();
        if id >= self.cardinality {
            return Err(CodecError::SymbolOutOfRange { id, cardinality: self.cardinality });
        }
        Ok(id)
    }

    /// Bucket index of a real value: uniform buckets over the value range,
    /// with out-of-range values clipped to the boundary buckets.
    pub fn bucket_of(&self, x: f64) -> Result<u64, CodecError> {
        let (lo, hi) = self.value_range.ok_or(CodecError::NoValueRange)?;
        let n = self.cardinality as f64;
        let raw = ((x - lo) / (hi - lo) * n).floor();
        Ok(raw.clamp(0.0, n - 1.0) as u64)
    }

    /// Encode a real value as its clipped bucket's fixed-width code.
    pub fn encode_value(&self, x: f64) -> Result<BitString, CodecError> {
        self.encode(self.bucket_of(x)?)
    }

    /// Midpoint of the bucket with the given index.
    pub fn bucket_midpoint(&self, id: u64) -> Result<f64, CodecError> {
        let (lo, hi) = self.value_range.ok_or(CodecError::NoValueRange)?;
        if id >= self.cardinality {
            return Err(CodecError::SymbolOutOfRange { id, cardinality: self.cardinality });
        }
        let width = (hi - lo) / self.cardinality as f64;
        Ok(lo + (id as f64 + 0.5) * width)
    }
}

/// Reward coding used by the environment model and the cost accounting.
///
/// Small domains use exact level coding (each distinct reward value gets an
/// id); real-valued domains use bucket quantization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RewardCodec {
    /// Exact coding of a small, fixed set of reward values.
    Levels(Vec<f64>),
    /// Uniform bucket quantization over `[lo, hi]` at `bits` wide.
    Quantized { lo: f64, hi: f64, bits: u32 },
}

impl RewardCodec {
    pub fn bit_width(&self) -> u32 {
        match self {
            RewardCodec::Levels(levels) => {
                let n = levels.len().max(2) as u64;
                64 - (n - 1).leading_zeros()
            }
            RewardCodec::Quantized { bits, .. } => *bits,
        }
    }

    pub fn num_ids(&self) -> u64 {
        match self {
            RewardCodec::Levels(levels) => levels.len() as u64,
            RewardCodec::Quantized { bits, .. } => 1u64 << bits,
        }
    }

    pub fn to_id(&self, r: f64) -> Result<u32, CodecError> {
        match self {
            RewardCodec::Levels(levels) => levels
                .iter()
                .position(|&l| l == r)
                .map(|i| i as u32)
                .ok_or(CodecError::UnknownRewardLevel(r)),
            RewardCodec::Quantized { lo, hi, bits } => {
                let space = SymbolSpace::quantized(*lo, *hi, *bits)?;
                Ok(space.bucket_of(r)? as u32)
            }
        }
    }

    /// Reward value represented by an id: the exact level, or the bucket
    /// midpoint for quantized codecs.
    pub fn from_id(&self, id: u32) -> Result<f64, CodecError> {
        match self {
            RewardCodec::Levels(levels) => levels
                .get(id as usize)
                .copied()
                .ok_or(CodecError::SymbolOutOfRange { id: id as u64, cardinality: levels.len() as u64 }),
            RewardCodec::Quantized { lo, hi, bits } => {
                let space = SymbolSpace::quantized(*lo, *hi, *bits)?;
                space.bucket_midpoint(id as u64)
            }
        }
    }

    pub fn encode(&self, r: f64) -> Result<BitString, CodecError> {
        Ok(BitString::from_u64(self.to_id(r)? as u64, self.bit_width()))
    }

    /// Smallest and largest representable reward values (used by the planner
    /// to normalize returns).
    pub fn bounds(&self) -> (f64, f64) {
        match self {
            RewardCodec::Levels(levels) => {
                let lo = levels.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = levels.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                (lo, hi)
            }
            RewardCodec::Quantized { lo, hi, .. } => (*lo, *hi),
        }
    }
}
