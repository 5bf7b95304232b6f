//! Logical predicates over histories and the candidate abstraction pools.
//!
//! A predicate is a deterministic boolean function of the history prefix.
//! Most are built by composing a real-valued feature with a bucket
//! encoding and a bit test:
//!
//! ```text
//! feature : History -> R        (infection rate, action percentage, ...)
//! Encode_i : R -> {0,1}^i       (2^i equal buckets over a declared range)
//! Bit_j . (=1) : {0,1}^i -> B   (is the j-th encoded bit set?)
//! ```
//!
//! Because the encoding is a binary expansion, `Bit_1` of an encoded value
//! answers "is the value in the upper half of the range?", `Bit_2` refines
//! each half into quarters, and so on — each predicate is a union of
//! aligned value intervals.
//!
//! A [`PredicatePool`] bundles a generated predicate family for one
//! environment together with the shared machinery some predicates need
//! (particle filters, centrality-band node subsets, cached infection
//! rates). Pools for the sensing domain must be kept in step with the
//! history via [`PredicatePool::begin_episode`] /
//! [`PredicatePool::push_step`]; pools for the simple domains are
//! stateless and those calls are no-ops.

use crate::bits::{BitString, SymbolSpace};
use crate::envs::belief::ParticleFilter;
use crate::envs::epidemic::{ranking_band, EpidemicParams};
use crate::envs::graph::Graph;
use crate::history::{History, NodeTest, ObsPayload, Step};
use crate::util::{keyed_coin, splitmix64};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use std::collections::{BTreeMap, BTreeSet, HashMap};

/// Weight given to untested nodes when estimating an infection rate.
pub const UNKNOWN_WEIGHT: f64 = 0.5;
/// Particles per belief filter.
pub const FILTER_PARTICLES: usize = 100;

const INFECTION_RATE_BITS: u32 = 5;
const RATE_CHANGE_BITS: u32 = 7;
const RATE_CHANGE_RANGE: (f64, f64) = (-0.2, 0.2);
const PERCENT_ACTION_BITS: u32 = 8;

#[derive(Debug, thiserror::Error)]
pub enum PredicateError {
    #[error("no predicate pool defined for environment '{0}'")]
    UnknownEnv(String),
    #[error("environment '{0}' needs graph and dynamics context to build its pool")]
    MissingContext(String),
}

/// Bucket number of `x` over `[lo, hi]` as an `i`-bit string; out-of-range
/// values clip into the boundary buckets.
pub fn encode_bucket(x: f64, lo: f64, hi: f64, bits: u32) -> BitString {
    SymbolSpace::quantized(lo, hi, bits)
        .and_then(|sp| sp.encode_value(x))
        .expect("valid bucket encoding parameters")
}

/// `Bit_bit . (=1)` of the bucket encoding of `x` (bit 1 = most
/// significant, i.e. the top half of the range).
pub fn encoded_bit(x: f64, lo: f64, hi: f64, bits: u32, bit: u32) -> bool {
    assert!((1..=bits).contains(&bit), "bit index {bit} outside 1..={bits}");
    encode_bucket(x, lo, hi, bits).bit(bit as usize)
}

/// Fraction of the last `window` steps (fewer while warming up) whose
/// action equals `action`; 0 on an empty history.
pub fn percent_action(h: &History, action: u32, window: u32) -> f64 {
    let (count, n) = h.recent_action_count(window as usize, action);
    if n == 0 {
        0.0
    } else {
        count as f64 / n as f64
    }
}

/// Fraction of the last `window` steps whose observation symbol equals
/// `obs`; 0 on an empty history.
pub fn percent_obs(h: &History, obs: u32, window: u32) -> f64 {
    let n = (window as usize).min(h.len());
    if n == 0 {
        return 0.0;
    }
    let hits = h.steps()[h.len() - n..]
        .iter()
        .filter(|s| s.obs == ObsPayload::Sym(obs))
        .count();
    hits as f64 / n as f64
}

/// True when the last `seq.len()` actions equal `seq` (oldest first);
/// false while the history is shorter than the sequence.
pub fn action_sequence_matches(h: &History, seq: &[u32]) -> bool {
    if seq.is_empty() || h.len() < seq.len() {
        return false;
    }
    h.steps()[h.len() - seq.len()..]
        .iter()
        .zip(seq)
        .all(|(s, &a)| s.action == a)
}

/// Moving average of the reward over the last `window` steps, dividing by
/// the number of steps actually present; 0 on an empty history.
pub fn ma_reward(h: &History, window: u32) -> f64 {
    let (sum, n) = h.recent_reward_sum(window as usize);
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Ratio of the short-window to long-window reward moving averages; 0
/// when the long-window average vanishes.
pub fn reward_ratio(h: &History, recent: u32, baseline: u32) -> f64 {
    let denom = ma_reward(h, baseline);
    if denom.abs() < 1e-12 {
        0.0
    } else {
        ma_reward(h, recent) / denom
    }
}

/// Observed infection rate over a node subset: positives count 1, untested
/// nodes count `unknown_weight`, negatives 0, averaged over the subset.
pub fn naive_infection_rate(tests: &[NodeTest], subset: &[u32], unknown_weight: f64) -> f64 {
    if subset.is_empty() {
        return 0.0;
    }
    let mut score = 0.0;
    for &v in subset {
        score += match tests[v as usize] {
            NodeTest::Positive => 1.0,
            NodeTest::Unknown => unknown_weight,
            NodeTest::Negative => 0.0,
        };
    }
    score / subset.len() as f64
}

/// One predicate family instance.
#[derive(Debug, Clone, PartialEq)]
pub enum PredicateKind {
    /// The `offset`-th bit back in the binarized history (1 = last bit).
    SuffixBit { offset: u32 },
    /// Seeded Bernoulli(1/2) noise keyed by (predicate id, step count).
    Noise,
    /// Step count is a multiple of `divisor`.
    CountMultiple { divisor: u64 },
    /// Fraction of recent steps observing symbol `obs` reaches `threshold`.
    PercentObs { obs: u32, window: u32, threshold: f64 },
    /// A bit of the encoded recent-usage percentage of one action.
    PercentAction { action: u32, window: u32, bit: u32 },
    /// The last `seq.len()` actions equal `seq`.
    ActionSequence { seq: Vec<u32> },
    /// Short-/long-window reward moving-average ratio is at least one.
    RewardRatio { recent: u32, baseline: u32 },
    /// A bit of the encoded naive infection rate over a node subset.
    InfectionRate { subset: u32, bit: u32 },
    /// A bit of the encoded change in infection rate over `lag` steps.
    InfectionRateChange { subset: u32, lag: u32, bit: u32 },
    /// A bit of the encoded particle-filter expected infection rate.
    ParticleRate { variant: u32, bit: u32 },
    /// The opponent played rock and won in the previous round.
    RockLoss,
}

impl PredicateKind {
    pub fn name(&self) -> &'static str {
        match self {
            PredicateKind::SuffixBit { .. } => "suffix_bit",
            PredicateKind::Noise => "noise",
            PredicateKind::CountMultiple { .. } => "count_multiple",
            PredicateKind::PercentObs { .. } => "percent_obs",
            PredicateKind::PercentAction { .. } => "percent_action",
            PredicateKind::ActionSequence { .. } => "action_sequence",
            PredicateKind::RewardRatio { .. } => "reward_ratio",
            PredicateKind::InfectionRate { .. } => "infection_rate",
            PredicateKind::InfectionRateChange { .. } => "infection_rate_change",
            PredicateKind::ParticleRate { .. } => "particle_rate",
            PredicateKind::RockLoss => "rock_loss",
        }
    }

    fn params(&self) -> String {
        match self {
            PredicateKind::SuffixBit { offset } => format!("offset={offset}"),
            PredicateKind::Noise => String::new(),
            PredicateKind::CountMultiple { divisor } => format!("divisor={divisor}"),
            PredicateKind::PercentObs { obs, window, threshold } => {
                format!("obs={obs} window={window} threshold={threshold}")
            }
            PredicateKind::PercentAction { action, window, bit } => {
                format!("action={action} window={window} bit={bit}")
            }
            PredicateKind::ActionSequence { seq } => {
                let parts: Vec<String> = seq.iter().map(|a| a.to_string()).collect();
                format!("seq={}", parts.join(","))
            }
            PredicateKind::RewardRatio { recent, baseline } => {
                format!("recent={recent} baseline={baseline}")
            }
            PredicateKind::InfectionRate { subset, bit } => {
                format!("subset={subset} bit={bit}")
            }
            PredicateKind::InfectionRateChange { subset, lag, bit } => {
                format!("subset={subset} lag={lag} bit={bit}")
            }
            PredicateKind::ParticleRate { variant, bit } => {
                format!("variant={variant} bit={bit}")
            }
            PredicateKind::RockLoss => String::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Predicate {
    pub id: u32,
    pub kind: PredicateKind,
}

/// Recent per-subset infection rates, newest last; enough to serve the
/// largest change lag.
const RATE_MEMORY: usize = 4;

/// A generated predicate family plus the shared evaluation machinery.
#[derive(Debug, Clone)]
pub struct PredicatePool {
    env: String,
    seed: u64,
    predicates: Vec<Predicate>,
    /// Node subsets for infection-rate features (sensing domain only).
    node_subsets: Vec<Vec<u32>>,
    /// One belief filter per dynamics-parameter variant.
    filters: Vec<ParticleFilter>,
    filter_params: Vec<EpidemicParams>,
    graph: Option<Graph>,
    filter_rates: Vec<f64>,
    /// Sliding windows of naive infection rates per subset, newest last.
    rate_history: Vec<Vec<f64>>,
    last_tests: Option<Vec<NodeTest>>,
    episodes: u64,
    steps_seen: u64,
}

impl PredicatePool {
    pub fn env(&self) -> &str {
        &self.env
    }

    pub fn len(&self) -> usize {
        self.predicates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.predicates.is_empty()
    }

    pub fn predicates(&self) -> &[Predicate] {
        &self.predicates
    }

    pub fn node_subsets(&self) -> &[Vec<u32>] {
        &self.node_subsets
    }

    /// Predicate counts per family, for reports.
    pub fn kind_counts(&self) -> BTreeMap<&'static str, usize> {
        let mut counts = BTreeMap::new();
        for p in &self.predicates {
            *counts.entry(p.kind.name()).or_insert(0) += 1;
        }
        counts
    }

    /// One predicate per line: `id<TAB>kind<TAB>parameters`.
    pub fn manifest(&self) -> String {
        let mut out = String::new();
        for p in &self.predicates {
            out.push_str(&format!("{}\t{}\t{}\n", p.id, p.kind.name(), p.kind.params()));
        }
        out
    }

    /// Start a new episode: belief filters restart from their prior (with
    /// an episode-derived seed) and rate memory is cleared, then the
    /// episode's initial observation is folded in. No-op for pools
    /// without shared state.
    pub fn begin_episode(&mut self, reset_obs: &ObsPayload) {
        self.episodes += 1;
        if self.filter_params.is_empty() && self.node_subsets.is_empty() {
            return;
        }
        let graph = self.graph.as_ref().expect("sensing pools carry their graph");
        self.filters = self
            .filter_params
            .iter()
            .enumerate()
            .map(|(i, params)| {
                let seed = splitmix64(self.seed ^ (self.episodes << 8) ^ i as u64);
                ParticleFilter::new(graph.clone(), params.clone(), FILTER_PARTICLES, seed)
                    .expect("validated filter parameters")
            })
            .collect();
        for rates in &mut self.rate_history {
            rates.clear();
        }
        if let ObsPayload::Tests(tests) = reset_obs {
            for filter in &mut self.filters {
                filter.observe(tests);
            }
            self.record_tests(tests.clone());
        }
        self.filter_rates = self.filters.iter().map(|f| f.infection_rate()).collect();
    }

    /// Fold one completed step into the shared state. Must be called once
    /// per [`History::push`] for sensing-domain pools.
    pub fn push_step(&mut self, step: &Step) {
        self.steps_seen += 1;
        if self.filters.is_empty() && self.node_subsets.is_empty() {
            return;
        }
        for filter in &mut self.filters {
            filter.advance(step.action);
        }
        if let ObsPayload::Tests(tests) = &step.obs {
            for filter in &mut self.filters {
                filter.observe(tests);
            }
            self.record_tests(tests.clone());
        }
        self.filter_rates = self.filters.iter().map(|f| f.infection_rate()).collect();
    }

    fn record_tests(&mut self, tests: Vec<NodeTest>) {
        for (subset, rates) in self.node_subsets.iter().zip(&mut self.rate_history) {
            rates.push(naive_infection_rate(&tests, subset, UNKNOWN_WEIGHT));
            if rates.len() > RATE_MEMORY {
                rates.remove(0);
            }
        }
        self.last_tests = Some(tests);
    }

    fn current_rate(&self, subset: u32) -> f64 {
        self.rate_history[subset as usize].last().copied().unwrap_or(0.0)
    }

    fn rate_change(&self, subset: u32, lag: u32) -> f64 {
        let rates = &self.rate_history[subset as usize];
        match rates.last() {
            None => 0.0,
            Some(&now) => {
                // While warming up, fall back to the oldest rate on record.
                let back = rates.len().saturating_sub(1 + lag as usize);
                now - rates[back]
            }
        }
    }

    /// Evaluate every predicate, oldest id first.
    pub fn eval_all(&self, h: &History) -> BitString {
        let frame = Frame::build(h, self.predicates.iter());
        let mut bits = BitString::new();
        for p in &self.predicates {
            bits.push(self.eval_in_frame(p, &frame));
        }
        bits
    }

    /// Evaluate the listed predicate ids in the given order.
    pub fn eval_ids(&self, h: &History, ids: &[u32]) -> BitString {
        let preds: Vec<&Predicate> = ids
            .iter()
            .map(|&id| &self.predicates[id as usize])
            .collect();
        let frame = Frame::build(h, preds.iter().copied());
        let mut bits = BitString::new();
        for p in preds {
            bits.push(self.eval_in_frame(p, &frame));
        }
        bits
    }

    pub fn eval_one(&self, h: &History, id: u32) -> bool {
        let p = &self.predicates[id as usize];
        let frame = Frame::build(h, std::iter::once(p));
        self.eval_in_frame(p, &frame)
    }

    fn eval_in_frame(&self, p: &Predicate, frame: &Frame) -> bool {
        match &p.kind {
            PredicateKind::SuffixBit { offset } => {
                frame.h.suffix_bit(*offset as usize).unwrap_or(false)
            }
            PredicateKind::Noise => {
                keyed_coin(self.seed, u64::from(p.id), frame.h.len() as u64)
            }
            PredicateKind::CountMultiple { divisor } => frame.h.len() as u64 % divisor == 0,
            PredicateKind::PercentObs { obs, window, threshold } => {
                frame.percent_obs(*obs, *window) >= *threshold
            }
            PredicateKind::PercentAction { action, window, bit } => encoded_bit(
                frame.percent_action(*action, *window),
                0.0,
                1.0,
                PERCENT_ACTION_BITS,
                *bit,
            ),
            PredicateKind::ActionSequence { seq } => action_sequence_matches(frame.h, seq),
            PredicateKind::RewardRatio { recent, baseline } => {
                let denom = frame.ma_reward(*baseline);
                if denom.abs() < 1e-12 {
                    false
                } else {
                    frame.ma_reward(*recent) / denom >= 1.0
                }
            }
            PredicateKind::InfectionRate { subset, bit } => {
                encoded_bit(self.current_rate(*subset), 0.0, 1.0, INFECTION_RATE_BITS, *bit)
            }
            PredicateKind::InfectionRateChange { subset, lag, bit } => encoded_bit(
                self.rate_change(*subset, *lag),
                RATE_CHANGE_RANGE.0,
                RATE_CHANGE_RANGE.1,
                RATE_CHANGE_BITS,
                *bit,
            ),
            PredicateKind::ParticleRate { variant, bit } => encoded_bit(
                self.filter_rates.get(*variant as usize).copied().unwrap_or(0.0),
                0.0,
                1.0,
                INFECTION_RATE_BITS,
                *bit,
            ),
            PredicateKind::RockLoss => frame
                .h
                .last()
                .is_some_and(|s| s.obs == ObsPayload::Sym(0) && s.reward < 0.0),
        }
    }
}

/// Shared per-evaluation scratch: window statistics computed in one
/// backward pass over the history, so that many predicates over the same
/// windows do not rescan it.
struct Frame<'a> {
    h: &'a History,
    /// window -> (per-action counts, per-symbol obs counts, reward sum,
    /// steps actually covered)
    windows: HashMap<u32, WindowStats>,
}

#[derive(Default, Clone)]
struct WindowStats {
    actions: HashMap<u32, u64>,
    obs: HashMap<u32, u64>,
    reward_sum: f64,
    covered: u64,
}

impl<'a> Frame<'a> {
    fn build<'p>(h: &'a History, preds: impl Iterator<Item = &'p Predicate>) -> Frame<'a> {
        let mut wanted: BTreeSet<u32> = BTreeSet::new();
        for p in preds {
            match &p.kind {
                PredicateKind::PercentObs { window, .. }
                | PredicateKind::PercentAction { window, .. } => {
                    wanted.insert(*window);
                }
                PredicateKind::RewardRatio { recent, baseline } => {
                    wanted.insert(*recent);
                    wanted.insert(*baseline);
                }
                _ => {}
            }
        }
        let mut windows = HashMap::new();
        if !wanted.is_empty() {
            let targets: Vec<u32> = wanted.iter().copied().collect();
            let mut next = 0usize;
            let mut acc = WindowStats::default();
            for step in h.steps().iter().rev() {
                while next < targets.len() && acc.covered == u64::from(targets[next]) {
                    windows.insert(targets[next], acc.clone());
                    next += 1;
                }
                if next >= targets.len() {
                    break;
                }
                *acc.actions.entry(step.action).or_insert(0) += 1;
                if let ObsPayload::Sym(sym) = step.obs {
                    *acc.obs.entry(sym).or_insert(0) += 1;
                }
                acc.reward_sum += step.reward;
                acc.covered += 1;
            }
            while next < targets.len() {
                windows.insert(targets[next], acc.clone());
                next += 1;
            }
        }
        Frame { h, windows }
    }

    fn stats(&self, window: u32) -> &WindowStats {
        self.windows.get(&window).expect("window registered at frame build")
    }

    fn percent_action(&self, action: u32, window: u32) -> f64 {
        let st = self.stats(window);
        if st.covered == 0 {
            0.0
        } else {
            st.actions.get(&action).copied().unwrap_or(0) as f64 / st.covered as f64
        }
    }

    fn percent_obs(&self, obs: u32, window: u32) -> f64 {
        let st = self.stats(window);
        if st.covered == 0 {
            0.0
        } else {
            st.obs.get(&obs).copied().unwrap_or(0) as f64 / st.covered as f64
        }
    }

    fn ma_reward(&self, window: u32) -> f64 {
        let st = self.stats(window);
        if st.covered == 0 {
            0.0
        } else {
            st.reward_sum / st.covered as f64
        }
    }
}

/// Extra context some pools need at generation time.
pub enum PoolContext<'a> {
    None,
    Sensing { graph: &'a Graph, params: &'a EpidemicParams },
}

/// Build the predicate pool for a named environment. Pool contents are a
/// deterministic function of (environment, seed).
pub fn generate_pool(
    env: &str,
    ctx: PoolContext<'_>,
    seed: u64,
) -> Result<PredicatePool, PredicateError> {
    match env {
        "rps" => Ok(suffix_noise_pool(env, seed, 60, 1000)),
        "taxi" => Ok(suffix_noise_pool(env, seed, 56, 1000)),
        "jackpot" => Ok(jackpot_pool(seed)),
        "stop_heist" => Ok(stop_heist_pool(seed)),
        "epidemic" => match ctx {
            PoolContext::Sensing { graph, params } => Ok(epidemic_pool(graph, params, seed)),
            PoolContext::None => Err(PredicateError::MissingContext(env.to_string())),
        },
        other => Err(PredicateError::UnknownEnv(other.to_string())),
    }
}

/// Build a pool from caller-chosen predicate kinds (ids are assigned in
/// order). Only history-driven kinds are allowed here; belief and
/// infection-rate kinds need the sensing machinery that [`generate_pool`]
/// wires up.
pub fn custom_pool(
    env: &str,
    seed: u64,
    kinds: Vec<PredicateKind>,
) -> Result<PredicatePool, PredicateError> {
    for kind in &kinds {
        if matches!(
            kind,
            PredicateKind::InfectionRate { .. }
                | PredicateKind::InfectionRateChange { .. }
                | PredicateKind::ParticleRate { .. }
        ) {
            return Err(PredicateError::MissingContext(env.to_string()));
        }
    }
    let predicates = kinds
        .into_iter()
        .enumerate()
        .map(|(id, kind)| Predicate { id: id as u32, kind })
        .collect();
    Ok(stateless_pool(env, seed, predicates))
}

fn stateless_pool(env: &str, seed: u64, predicates: Vec<Predicate>) -> PredicatePool {
    PredicatePool {
        env: env.to_string(),
        seed,
        predicates,
        node_subsets: Vec::new(),
        filters: Vec::new(),
        filter_params: Vec::new(),
        graph: None,
        filter_rates: Vec::new(),
        rate_history: Vec::new(),
        last_tests: None,
        episodes: 0,
        steps_seen: 0,
    }
}

/// Suffix-bit predicates over the recent binarized history, padded to
/// `total` with seeded noise.
fn suffix_noise_pool(env: &str, seed: u64, suffix_bits: u32, total: usize) -> PredicatePool {
    let mut predicates = Vec::with_capacity(total);
    for offset in 1..=suffix_bits {
        predicates.push(Predicate {
            id: predicates.len() as u32,
            kind: PredicateKind::SuffixBit { offset },
        });
    }
    pad_with_noise(&mut predicates, total);
    stateless_pool(env, seed, predicates)
}

fn jackpot_pool(seed: u64) -> PredicatePool {
    let mut predicates = Vec::with_capacity(1000);
    for divisor in 2..=101u64 {
        predicates.push(Predicate {
            id: predicates.len() as u32,
            kind: PredicateKind::CountMultiple { divisor },
        });
    }
    pad_with_noise(&mut predicates, 1000);
    stateless_pool("jackpot", seed, predicates)
}

fn stop_heist_pool(seed: u64) -> PredicatePool {
    let windows = [1u32, 2, 5, 10, 20];
    let thresholds = [0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.95];
    let mut predicates = Vec::with_capacity(1000);
    for obs in 0..2u32 {
        for &window in &windows {
            for &threshold in &thresholds {
                predicates.push(Predicate {
                    id: predicates.len() as u32,
                    kind: PredicateKind::PercentObs { obs, window, threshold },
                });
            }
        }
    }
    pad_with_noise(&mut predicates, 1000);
    stateless_pool("stop_heist", seed, predicates)
}

fn pad_with_noise(predicates: &mut Vec<Predicate>, total: usize) {
    while predicates.len() < total {
        predicates.push(Predicate { id: predicates.len() as u32, kind: PredicateKind::Noise });
    }
}

/// Dynamics-parameter variants for the belief filters: the nominal model
/// plus perturbed transmission and incubation rates.
fn filter_variants(params: &EpidemicParams) -> Vec<EpidemicParams> {
    let mut variants = Vec::with_capacity(4);
    variants.push(params.clone());
    let mut slow = params.clone();
    slow.beta = (params.beta * 0.5).clamp(0.0, 1.0);
    variants.push(slow);
    let mut fast = params.clone();
    fast.beta = (params.beta * 1.5).clamp(0.0, 1.0);
    variants.push(fast);
    let mut sluggish = params.clone();
    sluggish.sigma = (params.sigma * 0.5).clamp(0.0, 1.0);
    variants.push(sluggish);
    variants
}

const EPIDEMIC_ACTIONS: u32 = 11;
/// Domain separator for the seeded choice of length-3 action sequences.
const TRIPLE_SAMPLE_SALT: u64 = 0x7031_5e90;
const PERCENT_ACTION_WINDOWS: [u32; 9] = [2, 5, 10, 20, 50, 100, 200, 500, 1000];
const REWARD_RATIO_PAIRS: [(u32, u32); 8] = [
    (5, 25),
    (5, 50),
    (10, 50),
    (10, 100),
    (20, 100),
    (20, 200),
    (50, 200),
    (50, 500),
];

fn epidemic_pool(graph: &Graph, params: &EpidemicParams, seed: u64) -> PredicatePool {
    // Node subsets: everything, then 20%-wide bands of the betweenness
    // ranking, then of the degree ranking — 11 subsets.
    let mut node_subsets: Vec<Vec<u32>> = Vec::with_capacity(11);
    node_subsets.push((0..graph.num_nodes() as u32).collect());
    let by_betweenness = graph.betweenness_ranking();
    let by_degree = graph.degree_ranking();
    for ranking in [&by_betweenness, &by_degree] {
        for band in 0..5u8 {
            node_subsets.push(ranking_band(ranking, band).to_vec());
        }
    }

    let mut predicates = Vec::with_capacity(1489);
    // (1) Infection rate over each subset, 5 encoded bits: 11 * 5 = 55.
    for subset in 0..node_subsets.len() as u32 {
        for bit in 1..=INFECTION_RATE_BITS {
            predicates.push(Predicate {
                id: predicates.len() as u32,
                kind: PredicateKind::InfectionRate { subset, bit },
            });
        }
    }
    // (2) Infection-rate change over the 10 centrality bands, two lags,
    // top 4 encoded bits: 10 * 2 * 4 = 80.
    for subset in 1..node_subsets.len() as u32 {
        for lag in 1..=2u32 {
            for bit in 1..=4u32 {
                predicates.push(Predicate {
                    id: predicates.len() as u32,
                    kind: PredicateKind::InfectionRateChange { subset, lag, bit },
                });
            }
        }
    }
    // (3) Recent-usage percentage per action, 9 windows, top 7 encoded
    // bits: 11 * 9 * 7 = 693.
    for action in 0..EPIDEMIC_ACTIONS {
        for &window in &PERCENT_ACTION_WINDOWS {
            for bit in 1..=7u32 {
                predicates.push(Predicate {
                    id: predicates.len() as u32,
                    kind: PredicateKind::PercentAction { action, window, bit },
                });
            }
        }
    }
    // (4) Action-sequence indicators: all length-1 and length-2 sequences
    // plus a seeded sample of length-3 ones: 11 + 121 + 501 = 633.
    for a in 0..EPIDEMIC_ACTIONS {
        predicates.push(Predicate {
            id: predicates.len() as u32,
            kind: PredicateKind::ActionSequence { seq: vec![a] },
        });
    }
    for a in 0..EPIDEMIC_ACTIONS {
        for b in 0..EPIDEMIC_ACTIONS {
            predicates.push(Predicate {
                id: predicates.len() as u32,
                kind: PredicateKind::ActionSequence { seq: vec![a, b] },
            });
        }
    }
    let mut rng = ChaCha12Rng::seed_from_u64(splitmix64(seed ^ TRIPLE_SAMPLE_SALT));
    let total_triples = (EPIDEMIC_ACTIONS * EPIDEMIC_ACTIONS * EPIDEMIC_ACTIONS) as usize;
    let mut chosen = rand::seq::index::sample(&mut rng, total_triples, 501).into_vec();
    chosen.sort_unstable();
    for code in chosen {
        let c = code as u32;
        let seq = vec![c / 121, (c / 11) % 11, c % 11];
        predicates.push(Predicate {
            id: predicates.len() as u32,
            kind: PredicateKind::ActionSequence { seq },
        });
    }
    // (5) Reward moving-average ratios: 8 window pairs.
    for (recent, baseline) in REWARD_RATIO_PAIRS {
        predicates.push(Predicate {
            id: predicates.len() as u32,
            kind: PredicateKind::RewardRatio { recent, baseline },
        });
    }
    // (6) Particle-filter expected infection rate under 4 dynamics
    // variants, 5 encoded bits: 4 * 5 = 20.
    let filter_params = filter_variants(params);
    for variant in 0..filter_params.len() as u32 {
        for bit in 1..=INFECTION_RATE_BITS {
            predicates.push(Predicate {
                id: predicates.len() as u32,
                kind: PredicateKind::ParticleRate { variant, bit },
            });
        }
    }

    let rate_history = vec![Vec::new(); node_subsets.len()];
    PredicatePool {
        env: "epidemic".to_string(),
        seed,
        predicates,
        node_subsets,
        filters: Vec::new(),
        filter_params,
        graph: Some(graph.clone()),
        filter_rates: Vec::new(),
        rate_history,
        last_tests: None,
        episodes: 0,
        steps_seen: 0,
    }
}
