//! Benchmark environments behind one episodic interface.
//!
//! Five domains exercise different failure modes of history abstraction:
//!
//! * [`rps`] — biased rock-paper-scissors; one short-memory predicate
//!   captures the opponent's tell.
//! * [`jackpot`] — a betting game paying on multiples of hidden numbers;
//!   needs arithmetic predicates on the step counter.
//! * [`stop_heist`] — self-exciting arrivals (Hawkes process) where threat
//!   builds with recent activity; needs windowed history statistics.
//! * [`taxi`] — a 2x5 pickup/dropoff gridworld; needs the observation bits
//!   recovered from the history suffix.
//! * [`epidemic`] — a SEIRS process on a contact network with noisy
//!   per-node testing, quarantine and vaccination actions.
//!
//! An environment owns its RNG (seeded at [`Environment::reset`]) so
//! episodes replay bit-for-bit from a seed. `step` panics on out-of-range
//! actions — passing one is a caller bug, not a runtime condition.
//!
//! Each environment also fixes its own symbol encodings: how observations
//! binarize ([`Environment::obs_bits`]) and how rewards map to ids
//! ([`Environment::reward_codec`]), so every downstream consumer agrees on
//! the bit-level alphabet.

pub mod belief;
pub mod epidemic;
pub mod graph;
pub mod jackpot;
pub mod rps;
pub mod stop_heist;
pub mod taxi;

pub use graph::{Graph, GraphError};

use crate::bits::{BitString, RewardCodec};
use crate::history::ObsPayload;

/// Result of one environment step.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvStep {
    pub obs: ObsPayload,
    pub reward: f64,
    pub terminal: bool,
}

/// Common episodic simulator interface.
pub trait Environment {
    fn name(&self) -> &'static str;

    fn num_actions(&self) -> u32;

    /// Bits needed to binarize an action id.
    fn action_bits(&self) -> u32 {
        let n = self.num_actions();
        assert!(n >= 1);
        32 - (n - 1).leading_zeros()
    }

    /// Start a fresh episode deterministically from `seed` and return the
    /// initial observation.
    fn reset(&mut self, seed: u64) -> ObsPayload;

    /// Advance one step. Panics on an out-of-range action id.
    fn step(&mut self, action: u32) -> EnvStep;

    /// Inclusive reward range, used for planner normalization.
    fn reward_bounds(&self) -> (f64, f64);

    /// The environment's canonical reward binarization.
    fn reward_codec(&self) -> RewardCodec;

    /// The environment's canonical observation binarization.
    fn obs_bits(&self, obs: &ObsPayload) -> BitString;

    fn action_name(&self, action: u32) -> String {
        format!("action{action}")
    }
}

/// Binarize one transition as `[action][observation][reward]`, the layout
/// used for history suffix predicates.
pub fn encode_step_bits(
    env: &dyn Environment,
    action: u32,
    obs: &ObsPayload,
    reward: f64,
) -> BitString {
    let mut bits = BitString::from_u64(action as u64, env.action_bits());
    bits.extend(&env.obs_bits(obs));
    bits.extend(&env.reward_codec().encode(reward).expect("reward within declared range"));
    bits
}
