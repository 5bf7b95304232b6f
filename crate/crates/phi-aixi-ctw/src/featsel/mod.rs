//! Reward-predictability feature selection.
//!
//! Frequency statistics over `(reward, state, action)` triples feed a
//! per-reward *decision rule*: cell `(s, a)` is classed 1 when the
//! empirical odds `p(r | s,a) / p(r^c | s,a)` exceed a sharpness threshold
//! `D`. The threshold has a definitional floor — the marginal odds
//! `p(r) / p(r^c)` — below which every rule degenerates; we set
//! `D = max(c * floor, epsilon)` with a configurable multiplier.
//!
//! Each rule is a boolean function over (predicate bits ++ action bits)
//! and is compiled to a canonical reduced [`Bdd`]; the variables that
//! survive reduction are exactly those the rule depends on, so reduction
//! deletes conditionally redundant predicates for free.
//!
//! A single reduction inspects one variable ordering of one predicate
//! subset; sparsely observed cells make it noisy. The randomized-forest
//! wrapper [`rf_bdd`] repeats the reduction on many random predicate
//! subsets, counts for each predicate how often it survives relative to
//! how often it was drawn (its *retention*), and keeps predicates whose
//! retention clears a threshold, per reward; the final selection is the
//! union over rewards.

pub mod bdd;

pub use bdd::Bdd;

use crate::bits::BitString;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum FeatselError {
    #[error("truth table length {0} is not a power of two")]
    BadTableLength(usize),
    #[error("bad variable order: {0}")]
    BadOrder(String),
    #[error("sharpness threshold {given} for reward {reward} is not above the floor {floor}")]
    ThresholdBelowFloor { reward: u32, floor: f64, given: f64 },
    #[error("subset size {m} exceeds pool size {pool}")]
    SubsetTooLarge { m: usize, pool: usize },
    #[error("invalid feature-selection config: {0}")]
    InvalidConfig(String),
    #[error("no rewards observed; nothing to select on")]
    NoRewardsObserved,
}

/// Frequency counts of rewards conditioned on abstract state and action.
#[derive(Debug, Clone, Default)]
pub struct RewardStats {
    counts: HashMap<(u32, BitString, u32), u64>,
    cell_totals: HashMap<(BitString, u32), u64>,
    reward_totals: BTreeMap<u32, u64>,
    steps: u64,
}

/// The marginal-odds floor for one reward, with a degenerate-input flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SharpnessFloor {
    /// `p(r) / p(r^c)` from the marginal counts; `+inf` when the reward is
    /// the only one ever observed.
    pub odds: f64,
    /// False when the reward was never observed (odds reported as 0); such
    /// rewards are unpredictable from these statistics.
    pub observed: bool,
}

impl RewardStats {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn update(&mut self, state: &BitString, action: u32, reward: u32) {
        *self.counts.entry((reward, state.clone(), action)).or_insert(0) += 1;
        *self.cell_totals.entry((state.clone(), action)).or_insert(0) += 1;
        *self.reward_totals.entry(reward).or_insert(0) += 1;
        self.steps += 1;
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Reward ids seen at least once, ascending.
    pub fn observed_rewards(&self) -> Vec<u32> {
        self.reward_totals.keys().copied().collect()
    }

    /// Empirical odds of reward `r` against all others at cell `(s, a)`:
    /// 0 for unobserved cells, `+inf` when the cell saw only `r`.
    pub fn cell_odds(&self, r: u32, state: &BitString, action: u32) -> f64 {
        let n = *self.cell_totals.get(&(state.clone(), action)).unwrap_or(&0);
        if n == 0 {
            return 0.0;
        }
        let n_r = *self.counts.get(&(r, state.clone(), action)).unwrap_or(&0);
        if n_r == n {
            f64::INFINITY
        } else {
            n_r as f64 / (n - n_r) as f64
        }
    }

    /// Marginal odds `p(r) / p(r^c)` — the definitional lower bound for
    /// any usable sharpness threshold on reward `r`.
    pub fn sharpness_floor(&self, r: u32) -> SharpnessFloor {
        let n_r = *self.reward_totals.get(&r).unwrap_or(&0);
        if n_r == 0 {
            return SharpnessFloor { odds: 0.0, observed: false };
        }
        let odds = if n_r == self.steps {
            f64::INFINITY
        } else {
            n_r as f64 / (self.steps - n_r) as f64
        };
        SharpnessFloor { odds, observed: true }
    }

    /// Collapse states onto the given predicate positions (ascending
    /// output order follows `subset` order).
    pub fn project(&self, subset: &[usize]) -> RewardStats {
        let mut out = RewardStats::new();
        for ((r, s, a), &n) in &self.counts {
            let proj = BitString::from_bits(subset.iter().map(|&i| s.get(i)).collect());
            *out.counts.entry((*r, proj.clone(), *a)).or_insert(0) += n;
            *out.cell_totals.entry((proj, *a)).or_insert(0) += n;
            *out.reward_totals.entry(*r).or_insert(0) += n;
            out.steps += n;
        }
        out
    }
}

/// A thresholded reward-predictability classifier stored as a complete
/// truth table over (state bits ++ action bits), most significant first.
#[derive(Debug, Clone)]
pub struct DecisionRule {
    pub reward: u32,
    pub threshold: f64,
    pub state_bits: usize,
    pub action_bits: usize,
    table: Vec<bool>,
}

impl DecisionRule {
    /// Classify every `(state, action)` cell by whether its empirical odds
    /// of `reward` exceed `threshold`. Unobserved cells (including action
    /// bit patterns outside the real action set) class as 0.
    pub fn build(
        stats: &RewardStats,
        reward: u32,
        threshold: f64,
        state_bits: usize,
        action_bits: usize,
    ) -> Result<DecisionRule, FeatselError> {
        let floor = stats.sharpness_floor(reward);
        if !(threshold > floor.odds) {
            return Err(FeatselError::ThresholdBelowFloor {
                reward,
                floor: floor.odds,
                given: threshold,
            });
        }
        let n_vars = state_bits + action_bits;
        assert!(n_vars <= 24, "decision-rule truth table over {n_vars} variables");
        let mut table = vec![false; 1 << n_vars];
        // Only observed cells can class 1; enumerate them instead of the
        // whole table.
        for ((r, s, a), _) in stats.counts.iter() {
            if *r != reward || s.len() != state_bits {
                continue;
            }
            if (*a as u64) >= 1 << action_bits {
                continue;
            }
            if stats.cell_odds(reward, s, *a) > threshold {
                let row = (s.to_u64() as usize) << action_bits | *a as usize;
                table[row] = true;
            }
        }
        Ok(DecisionRule { reward, threshold, state_bits, action_bits, table })
    }

    pub fn table(&self) -> &[bool] {
        &self.table
    }

    pub fn classify(&self, state: &BitString, action: u32) -> bool {
        let row = (state.to_u64() as usize) << self.action_bits | action as usize;
        self.table[row]
    }

    /// Canonical reduced BDD of the rule; variables `0..state_bits` are the
    /// predicates, the rest are action bits.
    pub fn to_bdd(&self) -> Result<Bdd, FeatselError> {
        Bdd::from_truth_table(&self.table)
    }
}

/// Configuration of the randomized-forest selection procedure.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RfBddConfig {
    /// Number of random predicate subsets per reward.
    pub num_subsets: usize,
    /// Predicates drawn per subset (without replacement).
    pub subset_size: usize,
    /// Minimum retention (votes / selections) for a predicate to be kept.
    pub threshold: f64,
    /// Sharpness threshold multiplier: `D = max(c * floor, epsilon)`.
    #[serde(default = "default_sharpness_multiplier")]
    pub sharpness_multiplier: f64,
    /// Lower guard for `D` when the floor is tiny.
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    pub seed: u64,
}

fn default_sharpness_multiplier() -> f64 {
    2.0
}

fn default_epsilon() -> f64 {
    1e-6
}

impl RfBddConfig {
    pub fn validate(&self, pool_size: usize) -> Result<(), FeatselError> {
        if self.num_subsets == 0 {
            return Err(FeatselError::InvalidConfig("num_subsets must be at least 1".into()));
        }
        if self.subset_size == 0 {
            return Err(FeatselError::InvalidConfig("subset_size must be at least 1".into()));
        }
        if self.subset_size > pool_size {
            return Err(FeatselError::SubsetTooLarge { m: self.subset_size, pool: pool_size });
        }
        if !(self.threshold > 0.0 && self.threshold <= 1.0) {
            return Err(FeatselError::InvalidConfig(format!(
                "threshold must be in (0, 1], got {}",
                self.threshold
            )));
        }
        if !(self.sharpness_multiplier > 1.0) {
            return Err(FeatselError::InvalidConfig(format!(
                "sharpness_multiplier must exceed 1, got {}",
                self.sharpness_multiplier
            )));
        }
        if !(self.epsilon > 0.0) {
            return Err(FeatselError::InvalidConfig("epsilon must be positive".into()));
        }
        Ok(())
    }
}

/// Vote tally for one reward's forest.
#[derive(Debug, Clone)]
pub struct RewardVotes {
    pub reward: u32,
    /// The sharpness threshold the forest used.
    pub threshold_d: f64,
    /// votes[p] = number of subsets whose reduced rule kept predicate p.
    pub votes: BTreeMap<usize, u64>,
    /// selections[p] = number of subsets that drew predicate p.
    pub selections: BTreeMap<usize, u64>,
    /// Predicates with retention >= the configured threshold.
    pub kept: BTreeSet<usize>,
}

impl RewardVotes {
    pub fn retention(&self, p: usize) -> f64 {
        let sel = *self.selections.get(&p).unwrap_or(&0);
        if sel == 0 {
            return 0.0;
        }
        *self.votes.get(&p).unwrap_or(&0) as f64 / sel as f64
    }
}

/// Full report of a randomized-forest run: per-reward tallies plus the
/// union of kept predicates.
#[derive(Debug, Clone)]
pub struct RfBddReport {
    pub per_reward: Vec<RewardVotes>,
    pub selected: BTreeSet<usize>,
    pub diagnostics: Vec<String>,
}

impl RfBddReport {
    /// CSV rows `(reward, predicate, votes, selections, retention, kept)`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("reward,predicate,votes,selections,retention,kept\n");
        for rv in &self.per_reward {
            for (&p, &sel) in &rv.selections {
                let votes = *rv.votes.get(&p).unwrap_or(&0);
                let retention = rv.retention(p);
                let kept = rv.kept.contains(&p) as u8;
                s.push_str(&format!(
                    "{},{},{},{},{:.6},{}\n",
                    rv.reward, p, votes, sel, retention, kept
                ));
            }
        }
        s
    }
}

/// Randomized-forest BDD feature selection over a predicate pool.
///
/// For each observed reward: draw `num_subsets` random `subset_size`-subsets
/// of `0..pool_size`, build the projected decision rule with threshold
/// `D = max(c * floor, epsilon)`, reduce its BDD, and vote for the
/// predicates that survive. Predicates whose per-reward retention reaches
/// the configured threshold are kept; the final selection is the union over
/// rewards. Action bits participate in the diagrams but are never reported.
pub fn rf_bdd(
    pool_size: usize,
    action_bits: usize,
    stats: &RewardStats,
    config: &RfBddConfig,
) -> Result<RfBddReport, FeatselError> {
    config.validate(pool_size)?;
    let rewards = stats.observed_rewards();
    if rewards.is_empty() {
        return Err(FeatselError::NoRewardsObserved);
    }
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
    let mut per_reward = Vec::new();
    let mut diagnostics = Vec::new();
    let mut selected = BTreeSet::new();
    for r in rewards {
        let floor = stats.sharpness_floor(r);
        if !floor.odds.is_finite() {
            diagnostics.push(format!(
                "reward {r} was the only reward observed; no finite sharpness threshold exists"
            ));
            continue;
        }
        let d = (config.sharpness_multiplier * floor.odds).max(config.epsilon);
        // Draw all subsets up front so results do not depend on the
        // parallel schedule.
        let subsets: Vec<Vec<usize>> = (0..config.num_subsets)
            .map(|_| {
                let mut s = rand::seq::index::sample(&mut rng, pool_size, config.subset_size)
                    .into_vec();
                s.sort_unstable();
                s
            })
            .collect();
        let kept_per_subset: Vec<BTreeSet<usize>> = subsets
            .par_iter()
            .map(|subset| {
                let projected = stats.project(subset);
                let rule =
                    DecisionRule::build(&projected, r, d, subset.len(), action_bits)
                        .expect("threshold above floor by construction");
                let bdd = rule.to_bdd().expect("rule tables are power-of-two length");
                bdd.informative_vars()
                    .into_iter()
                    .filter(|&v| (v as usize) < subset.len())
                    .map(|v| subset[v as usize])
                    .collect()
            })
            .collect();
        let mut votes: BTreeMap<usize, u64> = BTreeMap::new();
        let mut selections: BTreeMap<usize, u64> = BTreeMap::new();
        for (subset, kept) in subsets.iter().zip(&kept_per_subset) {
            for &p in subset {
                *selections.entry(p).or_insert(0) += 1;
            }
            for &p in kept {
                *votes.entry(p).or_insert(0) += 1;
            }
        }
        let kept: BTreeSet<usize> = selections
            .keys()
            .filter(|&&p| {
                let sel = selections[&p];
                sel > 0 && *votes.get(&p).unwrap_or(&0) as f64 / sel as f64 >= config.threshold
            })
            .copied()
            .collect();
        selected.extend(kept.iter().copied());
        per_reward.push(RewardVotes { reward: r, threshold_d: d, votes, selections, kept });
    }
    if per_reward.is_empty() {
        diagnostics.push("no reward admitted a usable sharpness threshold".into());
    }
    Ok(RfBddReport { per_reward, selected, diagnostics })
}
