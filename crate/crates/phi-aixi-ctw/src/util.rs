//! Small numeric helpers shared across the crate: log-space arithmetic,
//! counter-based deterministic hashing, exact RNG state capture, and the
//! paired one-sided t-test used by the evaluation harnesses.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use statrs::distribution::{ContinuousCDF, StudentsT};

/// Natural-log-space addition: returns `ln(exp(a) + exp(b))` without
/// intermediate overflow/underflow.
pub fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// SplitMix64 mixer. Used as a counter-based generator for per-(key, step)
/// deterministic noise: the same inputs always produce the same output,
/// independent of evaluation order.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Deterministic Bernoulli(0.5) draw keyed by `(seed, id, t)`.
pub fn keyed_coin(seed: u64, id: u64, t: u64) -> bool {
    let mixed = splitmix64(seed ^ splitmix64(id) ^ splitmix64(t.wrapping_mul(0x9e37_79b9)));
    mixed & 1 == 1
}

/// Deterministic uniform draw in `[0, 1)` keyed by `(seed, id, t)`.
pub fn keyed_unit(seed: u64, id: u64, t: u64) -> f64 {
    let mixed = splitmix64(seed ^ splitmix64(id ^ 0x5851_f42d) ^ splitmix64(t));
    (mixed >> 11) as f64 / (1u64 << 53) as f64
}

/// Exact position of a ChaCha12 stream: seed, stream id and word offset.
/// Capturing and replaying it continues the stream bit-for-bit, which is
/// what checkpoint resume needs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngState {
    pub seed: [u8; 32],
    pub stream: u64,
    pub word_pos: u128,
}

impl RngState {
    pub fn of(rng: &ChaCha12Rng) -> RngState {
        RngState { seed: rng.get_seed(), stream: rng.get_stream(), word_pos: rng.get_word_pos() }
    }

    pub fn into_rng(self) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::from_seed(self.seed);
        rng.set_stream(self.stream);
        rng.set_word_pos(self.word_pos);
        rng
    }

    /// Fixed-width encoding: seed, stream, then the word position split
    /// into low and high 64-bit halves, all little-endian.
    pub fn to_bytes(self) -> [u8; 56] {
        let mut out = [0u8; 56];
        out[..32].copy_from_slice(&self.seed);
        out[32..40].copy_from_slice(&self.stream.to_le_bytes());
        out[40..48].copy_from_slice(&(self.word_pos as u64).to_le_bytes());
        out[48..56].copy_from_slice(&((self.word_pos >> 64) as u64).to_le_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8; 56]) -> RngState {
        let mut seed = [0u8; 32];
        seed.copy_from_slice(&bytes[..32]);
        let stream = u64::from_le_bytes(bytes[32..40].try_into().unwrap());
        let lo = u64::from_le_bytes(bytes[40..48].try_into().unwrap());
        let hi = u64::from_le_bytes(bytes[48..56].try_into().unwrap());
        RngState { seed, stream, word_pos: ((hi as u128) << 64) | lo as u128 }
    }
}

/// Result of a paired one-sided t-test of `H1: mean(xs - ys) > 0`.
#[derive(Debug, Clone, Copy)]
pub struct PairedTTest {
    pub mean_diff: f64,
    pub t_stat: f64,
    pub p_value: f64,
}

/// Paired one-sided t-test over per-seed summaries. Returns `None` when
/// fewer than two pairs exist or the differences have zero variance with a
/// non-positive mean (in which case no evidence can be claimed).
pub fn paired_t_test(xs: &[f64], ys: &[f64]) -> Option<PairedTTest> {
    assert_eq!(xs.len(), ys.len(), "paired test needs equal-length samples");
    let n = xs.len();
    if n < 2 {
        return None;
    }
    let diffs: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| x - y).collect();
    let mean = diffs.iter().sum::<f64>() / n as f64;
    let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
    if var == 0.0 {
        // Identical differences: degenerate but decidable by sign.
        return Some(PairedTTest {
            mean_diff: mean,
            t_stat: if mean > 0.0 { f64::INFINITY } else { f64::NEG_INFINITY },
            p_value: if mean > 0.0 { 0.0 } else { 1.0 },
        });
    }
    let se = (var / n as f64).sqrt();
    let t = mean / se;
    let dist = StudentsT::new(0.0, 1.0, (n - 1) as f64).ok()?;
    Some(PairedTTest {
        mean_diff: mean,
        t_stat: t,
        p_value: 1.0 - dist.cdf(t),
    })
}

/// Moving average of `series` with the given window. Windows longer than the
/// series produce an empty result; otherwise entry `i` averages
/// `series[i .. i + window]`, giving `len - window + 1` points.
pub fn moving_average(series: &[f64], window: usize) -> Vec<f64> {
    if window == 0 || series.len() < window {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(series.len() - window + 1);
    let mut acc: f64 = series[..window].iter().sum();
    out.push(acc / window as f64);
    for i in window..series.len() {
        acc += series[i] - series[i - window];
        out.push(acc / window as f64);
    }
    out
}
