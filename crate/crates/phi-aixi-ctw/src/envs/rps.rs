//! Biased rock-paper-scissors.
//!
//! The opponent plays uniformly at random, except immediately after a
//! round it won playing rock: then it plays rock again with certainty.
//! A player that spots the tell can deliberately lose with scissors and
//! cash in with paper, averaging +0.25 per round; oblivious play earns 0.
//!
//! Rewards are +1 / 0 / -1 for win / draw / loss, and the observation is
//! the opponent's play for the round.

use super::{EnvStep, Environment};
use crate::bits::{BitString, RewardCodec, SymbolSpace};
use crate::history::ObsPayload;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

pub const ROCK: u32 = 0;
pub const PAPER: u32 = 1;
pub const SCISSORS: u32 = 2;

/// True if play `a` beats play `b`.
pub fn beats(a: u32, b: u32) -> bool {
    a == (b + 1) % 3
}

/// Round outcome for the agent: +1 win, 0 draw, -1 loss.
pub fn round_reward(action: u32, env_play: u32) -> f64 {
    if beats(action, env_play) {
        1.0
    } else if beats(env_play, action) {
        -1.0
    } else {
        0.0
    }
}

#[derive(Debug, Clone)]
pub struct RpsEnv {
    rng: ChaCha12Rng,
    env_won_with_rock: bool,
}

impl RpsEnv {
    pub fn new() -> RpsEnv {
        RpsEnv { rng: ChaCha12Rng::seed_from_u64(0), env_won_with_rock: false }
    }
}

impl Default for RpsEnv {
    fn default() -> Self {
        RpsEnv::new()
    }
}

impl Environment for RpsEnv {
    fn name(&self) -> &'static str {
        "rps"
    }

    fn num_actions(&self) -> u32 {
        3
    }

    fn reset(&mut self, seed: u64) -> ObsPayload {
        self.rng = ChaCha12Rng::seed_from_u64(seed);
        self.env_won_with_rock = false;
        ObsPayload::Sym(self.rng.random_range(0..3))
    }

    fn step(&mut self, action: u32) -> EnvStep {
        assert!(action < 3, "rps action {action} out of range");
        let env_play = if self.env_won_with_rock {
            ROCK
        } else {
            self.rng.random_range(0..3)
        };
        let reward = round_reward(action, env_play);
        self.env_won_with_rock = env_play == ROCK && reward < 0.0;
        EnvStep { obs: ObsPayload::Sym(env_play), reward, terminal: false }
    }

    fn reward_bounds(&self) -> (f64, f64) {
        (-1.0, 1.0)
    }

    fn reward_codec(&self) -> RewardCodec {
        RewardCodec::Levels(vec![-1.0, 0.0, 1.0])
    }

    fn obs_bits(&self, obs: &ObsPayload) -> BitString {
        match obs {
            ObsPayload::Sym(s) => SymbolSpace::discrete(3)
                .and_then(|sp| sp.encode(u64::from(*s)))
                .expect("play in 0..3"),
            other => panic!("rps observes plays, got {other:?}"),
        }
    }

    fn action_name(&self, action: u32) -> String {
        ["Rock", "Paper", "Scissors"][action as usize].to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn outcome_matrix_is_standard_rps() {
        // (action, env, reward)
        let table = [
            (ROCK, ROCK, 0.0),
            (ROCK, PAPER, -1.0),
            (ROCK, SCISSORS, 1.0),
            (PAPER, ROCK, 1.0),
            (PAPER, PAPER, 0.0),
            (PAPER, SCISSORS, -1.0),
            (SCISSORS, ROCK, -1.0),
            (SCISSORS, PAPER, 1.0),
            (SCISSORS, SCISSORS, 0.0),
        ];
        for (a, e, r) in table {
            assert_eq!(round_reward(a, e), r, "agent {a} vs env {e}");
        }
    }

    #[test]
    fn after_winning_with_rock_the_env_always_plays_rock() {
        let mut env = RpsEnv::new();
        env.reset(17);
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let mut tells = 0;
        let mut prev_env_won_with_rock = false;
        for _ in 0..5000 {
            let a = rng.random_range(0..3);
            let step = env.step(a);
            let env_play = match step.obs {
                ObsPayload::Sym(s) => s,
                _ => unreachable!(),
            };
            if prev_env_won_with_rock {
                tells += 1;
                assert_eq!(env_play, ROCK, "the tell must fire with certainty");
            }
            prev_env_won_with_rock = env_play == ROCK && step.reward < 0.0;
        }
        assert!(tells > 100, "random play should trigger the tell often");
    }

    #[test]
    fn env_plays_uniformly_when_unbiased() {
        let mut env = RpsEnv::new();
        env.reset(5);
        let mut counts = [0u32; 3];
        let trials = 30_000;
        for _ in 0..trials {
            // Always play paper: the env can never win with rock, so the
            // tell never arms and every play is a fresh uniform draw.
            let step = env.step(PAPER);
            let env_play = match step.obs {
                ObsPayload::Sym(s) => s,
                _ => unreachable!(),
            };
            assert!(!(env_play == ROCK && step.reward < 0.0), "paper never loses to rock");
            counts[env_play as usize] += 1;
        }
        for c in counts {
            let freq = c as f64 / trials as f64;
            let sigma3 = 3.0 * ((1.0 / 3.0) * (2.0 / 3.0) / trials as f64).sqrt();
            assert!((freq - 1.0 / 3.0).abs() < sigma3, "freq {freq}");
        }
    }

    #[test]
    fn exploit_strategy_averages_a_quarter_point_per_round() {
        // Lose on purpose with scissors; once the env wins with rock,
        // punish the guaranteed rock with paper. Stationary value 1/4.
        let mut env = RpsEnv::new();
        env.reset(11);
        let steps = 200_000;
        let mut total = 0.0;
        let mut tell_armed = false;
        for _ in 0..steps {
            let a = if tell_armed { PAPER } else { SCISSORS };
            let step = env.step(a);
            total += step.reward;
            let env_play = match step.obs {
                ObsPayload::Sym(s) => s,
                _ => unreachable!(),
            };
            tell_armed = env_play == ROCK && step.reward < 0.0;
        }
        let mean = total / steps as f64;
        assert!((mean - 0.25).abs() < 0.01, "exploit mean {mean}");
    }

    #[test]
    fn observation_bits_encode_the_play_in_two_bits() {
        let env = RpsEnv::new();
        for play in 0..3 {
            let bits = env.obs_bits(&ObsPayload::Sym(play));
            assert_eq!(bits.len(), 2);
            assert_eq!(bits.to_u64(), play as u64);
        }
        assert_eq!(env.action_bits(), 2);
    }

    #[test]
    fn seeded_runs_replay_identically() {
        let mut a = RpsEnv::new();
        let mut b = RpsEnv::new();
        assert_eq!(a.reset(99), b.reset(99));
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        for _ in 0..200 {
            let act = rng.random_range(0..3);
            assert_eq!(a.step(act), b.step(act));
        }
    }
}
