//! Jackpot betting game.
//!
//! Steps are numbered 1, 2, 3, ... and the house fixes a list of lucky
//! divisors (default {3, 5}). Betting on a step that is a multiple of any
//! divisor pays +1 with probability 0.7 (else 0); betting on any other
//! step pays -1 with probability 0.7 (else 0); passing always pays 0.
//! The observation channel is constant and carries no information — the
//! only way to win is to keep count of the clock.

use super::{EnvStep, Environment};
use crate::bits::{BitString, RewardCodec};
use crate::history::ObsPayload;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

pub const PASS: u32 = 0;
pub const BET: u32 = 1;

#[derive(Debug, Clone)]
pub struct JackpotEnv {
    divisors: Vec<u64>,
    payout_prob: f64,
    rng: ChaCha12Rng,
    /// Steps completed; the upcoming step is `t + 1`.
    t: u64,
}

impl JackpotEnv {
    pub fn new(divisors: Vec<u64>) -> JackpotEnv {
        assert!(!divisors.is_empty(), "need at least one divisor");
        assert!(divisors.iter().all(|&d| d >= 1), "divisors must be positive");
        JackpotEnv {
            divisors,
            payout_prob: 0.7,
            rng: ChaCha12Rng::seed_from_u64(0),
            t: 0,
        }
    }

    /// True if step number `t` is a multiple of any configured divisor.
    pub fn is_lucky(&self, t: u64) -> bool {
        self.divisors.iter().any(|&d| t % d == 0)
    }

    /// Fraction of steps that are lucky over one full divisor cycle.
    pub fn lucky_fraction(&self) -> f64 {
        let cycle = self.divisors.iter().fold(1u64, |acc, &d| lcm(acc, d));
        let lucky = (1..=cycle).filter(|&t| self.is_lucky(t)).count();
        lucky as f64 / cycle as f64
    }

    pub fn steps_taken(&self) -> u64 {
        self.t
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

impl Default for JackpotEnv {
    fn default() -> Self {
        JackpotEnv::new(vec![3, 5])
    }
}

impl Environment for JackpotEnv {
    fn name(&self) -> &'static str {
        "jackpot"
    }

    fn num_actions(&self) -> u32 {
        2
    }

    fn reset(&mut self, seed: u64) -> ObsPayload {
        self.rng = ChaCha12Rng::seed_from_u64(seed);
        self.t = 0;
        ObsPayload::Unit
    }

    fn step(&mut self, action: u32) -> EnvStep {
        assert!(action < 2, "jackpot action {action} out of range");
        self.t += 1;
        let reward = if action == BET {
            let stake = if self.is_lucky(self.t) { 1.0 } else { -1.0 };
            if self.rng.random_bool(self.payout_prob) {
                stake
            } else {
                0.0
            }
        } else {
            0.0
        };
        EnvStep { obs: ObsPayload::Unit, reward, terminal: false }
    }

    fn reward_bounds(&self) -> (f64, f64) {
        (-1.0, 1.0)
    }

    fn reward_codec(&self) -> RewardCodec {
        RewardCodec::Levels(vec![-1.0, 0.0, 1.0])
    }

    fn obs_bits(&self, obs: &ObsPayload) -> BitString {
        match obs {
            ObsPayload::Unit => BitString::new(),
            other => panic!("jackpot observations are empty, got {other:?}"),
        }
    }

    fn action_name(&self, action: u32) -> String {
        ["Pass", "Bet"][action as usize].to_string()
    }
}
