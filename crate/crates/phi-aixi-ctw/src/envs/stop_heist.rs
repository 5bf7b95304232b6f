//! Stop Heist surveillance game.
//!
//! A suspect arrives at the bank according to a discrete-time Hawkes
//! process: the arrival intensity at step `t` is
//!
//! ```text
//! lambda_t = mu0 + sum_{t_i < t} alpha * exp(-beta * (t - t_i))
//! ```
//!
//! over past arrival times `t_i`, and an arrival occurs with probability
//! `1 - exp(-lambda_t)`. Whether an arriving suspect actually attempts a
//! heist is governed by a second self-exciting propensity, also driven by
//! past arrivals, so heists concentrate inside arrival bursts. With the
//! default parameters roughly 1% of steps carry a heist.
//!
//! Per step the agent chooses Do Nothing or Stop Suspect before seeing
//! this step's arrival. Missing a heist costs -100, stopping one earns
//! +100, stopping an innocent visit costs -1, and otherwise the reward is
//! 0. The observation is the arrival indicator.

use super::{EnvStep, Environment};
use crate::bits::{BitString, RewardCodec, SymbolSpace};
use crate::history::ObsPayload;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

pub const DO_NOTHING: u32 = 0;
pub const STOP_SUSPECT: u32 = 1;

/// Exponential-kernel Hawkes parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HawkesParams {
    pub mu0: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl Default for HawkesParams {
    fn default() -> Self {
        HawkesParams { mu0: 0.05, alpha: 0.3, beta: 0.5 }
    }
}

/// Intensity at integer time `t` given strictly earlier event times.
pub fn hawkes_intensity(events: &[u64], t: u64, params: &HawkesParams) -> f64 {
    params.mu0
        + events
            .iter()
            .filter(|&&ti| ti < t)
            .map(|&ti| params.alpha * (-params.beta * (t - ti) as f64).exp())
            .sum::<f64>()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StopHeistParams {
    pub arrival: HawkesParams,
    /// Scale of the heist propensity: P(heist | arrival) = 1 - exp(-scale * s)
    /// with `s` the decayed count of past arrivals.
    pub heist_scale: f64,
    /// Decay rate of the heist propensity accumulator.
    pub heist_decay: f64,
}

impl Default for StopHeistParams {
    fn default() -> Self {
        StopHeistParams { arrival: HawkesParams::default(), heist_scale: 0.3, heist_decay: 0.5 }
    }
}

/// Reward table: the agent is punished -100 for ignoring a heist, paid
/// +100 for stopping one, and charged -1 for stopping an innocent visit.
pub fn heist_reward(stopped: bool, heist: bool) -> f64 {
    match (stopped, heist) {
        (false, true) => -100.0,
        (true, true) => 100.0,
        (true, false) => -1.0,
        (false, false) => 0.0,
    }
}

#[derive(Debug, Clone)]
pub struct StopHeistEnv {
    params: StopHeistParams,
    rng: ChaCha12Rng,
    /// Decayed sum over past arrivals feeding the arrival intensity.
    arrival_excitation: f64,
    /// Decayed sum over past arrivals feeding the heist propensity.
    heist_excitation: f64,
    t: u64,
}

impl StopHeistEnv {
    pub fn new(params: StopHeistParams) -> StopHeistEnv {
        StopHeistEnv {
            params,
            rng: ChaCha12Rng::seed_from_u64(0),
            arrival_excitation: 0.0,
            heist_excitation: 0.0,
            t: 0,
        }
    }

    /// Arrival intensity that will apply to the upcoming step.
    pub fn current_intensity(&self) -> f64 {
        self.params.arrival.mu0 + self.params.arrival.alpha * self.arrival_excitation
    }

    /// Heist probability the upcoming step would carry, given an arrival.
    pub fn current_heist_prob(&self) -> f64 {
        1.0 - (-self.params.heist_scale * self.heist_excitation).exp()
    }
}

impl Default for StopHeistEnv {
    fn default() -> Self {
        StopHeistEnv::new(StopHeistParams::default())
    }
}

impl Environment for StopHeistEnv {
    fn name(&self) -> &'static str {
        "stop_heist"
    }

    fn num_actions(&self) -> u32 {
        2
    }

    fn reset(&mut self, seed: u64) -> ObsPayload {
        self.rng = ChaCha12Rng::seed_from_u64(seed);
        self.arrival_excitation = 0.0;
        self.heist_excitation = 0.0;
        self.t = 0;
        ObsPayload::Sym(0)
    }

    fn step(&mut self, action: u32) -> EnvStep {
        assert!(action < 2, "stop-heist action {action} out of range");
        self.t += 1;
        let lambda = self.current_intensity();
        let arrival = self.rng.random_bool(1.0 - (-lambda).exp());
        let heist = arrival && self.rng.random_bool(self.current_heist_prob());
        let reward = heist_reward(action == STOP_SUSPECT, heist);
        let bump = if arrival { 1.0 } else { 0.0 };
        self.arrival_excitation =
            (self.arrival_excitation + bump) * (-self.params.arrival.beta).exp();
        self.heist_excitation = (self.heist_excitation + bump) * (-self.params.heist_decay).exp();
        EnvStep { obs: ObsPayload::Sym(arrival as u32), reward, terminal: false }
    }

    fn reward_bounds(&self) -> (f64, f64) {
        (-100.0, 100.0)
    }

    fn reward_codec(&self) -> RewardCodec {
        RewardCodec::Levels(vec![-100.0, -1.0, 0.0, 100.0])
    }

    fn obs_bits(&self, obs: &ObsPayload) -> BitString {
        match obs {
            ObsPayload::Sym(s) => SymbolSpace::discrete(2)
                .and_then(|sp| sp.encode(u64::from(*s)))
                .expect("arrival bit"),
            other => panic!("stop-heist observes an arrival bit, got {other:?}"),
        }
    }

    fn action_name(&self, action: u32) -> String {
        ["DoNothing", "StopSuspect"][action as usize].to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn intensity_with_no_history_is_the_base_rate() {
        let p = HawkesParams::default();
        for t in [1, 5, 1000] {
            assert_eq!(hawkes_intensity(&[], t, &p), 0.05);
        }
        // Future or simultaneous events contribute nothing.
        assert_eq!(hawkes_intensity(&[7, 9], 7, &p), 0.05);
    }

    #[test]
    fn recursive_excitation_matches_the_event_sum() {
        let p = HawkesParams::default();
        let mut rng = ChaCha12Rng::seed_from_u64(10);
        let mut excitation = 0.0f64;
        let mut events: Vec<u64> = Vec::new();
        for t in 1..=300u64 {
            let recursive = p.mu0 + p.alpha * excitation;
            let direct = hawkes_intensity(&events, t, &p);
            assert!(
                (recursive - direct).abs() < 1e-12,
                "t={t}: recursive {recursive} vs direct {direct}"
            );
            let arrival = rng.random_bool(1.0 - (-recursive).exp());
            if arrival {
                events.push(t);
            }
            excitation = (excitation + if arrival { 1.0 } else { 0.0 }) * (-p.beta).exp();
        }
        assert!(events.len() > 10, "should observe a healthy number of arrivals");
    }

    #[test]
    fn reward_table_is_exact() {
        assert_eq!(heist_reward(false, true), -100.0);
        assert_eq!(heist_reward(true, true), 100.0);
        assert_eq!(heist_reward(true, false), -1.0);
        assert_eq!(heist_reward(false, false), 0.0);
    }

    #[test]
    fn heists_hit_about_one_percent_of_steps() {
        let mut env = StopHeistEnv::default();
        env.reset(1);
        let steps = 200_000;
        let mut heists = 0u32;
        let mut arrivals = 0u32;
        for _ in 0..steps {
            let s = env.step(DO_NOTHING);
            if s.reward == -100.0 {
                heists += 1;
            }
            if s.obs == ObsPayload::Sym(1) {
                arrivals += 1;
            }
        }
        let heist_rate = heists as f64 / steps as f64;
        let arrival_rate = arrivals as f64 / steps as f64;
        assert!(
            (0.005..=0.02).contains(&heist_rate),
            "heist rate {heist_rate} outside the tuned band"
        );
        assert!(
            (0.04..=0.15).contains(&arrival_rate),
            "arrival rate {arrival_rate} looks wrong"
        );
    }

    #[test]
    fn arrivals_cluster_in_time() {
        let mut env = StopHeistEnv::default();
        env.reset(6);
        let steps = 100_000;
        let mut prev = false;
        let mut after_arrival = [0u32; 2];
        let mut after_quiet = [0u32; 2];
        for _ in 0..steps {
            let s = env.step(DO_NOTHING);
            let arrival = s.obs == ObsPayload::Sym(1);
            if prev {
                after_arrival[arrival as usize] += 1;
            } else {
                after_quiet[arrival as usize] += 1;
            }
            prev = arrival;
        }
        let p_after_arrival =
            after_arrival[1] as f64 / (after_arrival[0] + after_arrival[1]) as f64;
        let p_after_quiet = after_quiet[1] as f64 / (after_quiet[0] + after_quiet[1]) as f64;
        assert!(
            p_after_arrival > p_after_quiet + 0.05,
            "self-excitation missing: {p_after_arrival} vs {p_after_quiet}"
        );
    }

    #[test]
    fn action_determines_which_rewards_are_reachable() {
        let mut env = StopHeistEnv::default();
        env.reset(2);
        for _ in 0..20_000 {
            let r = env.step(STOP_SUSPECT).reward;
            assert!(r == 100.0 || r == -1.0 || r == 0.0);
            assert_ne!(r, -100.0, "stopping can never miss a heist");
        }
        env.reset(2);
        for _ in 0..20_000 {
            let r = env.step(DO_NOTHING).reward;
            assert!(r == -100.0 || r == 0.0, "doing nothing never pays or fines 1");
        }
    }

    #[test]
    fn observation_is_one_arrival_bit() {
        let env = StopHeistEnv::default();
        assert_eq!(env.obs_bits(&ObsPayload::Sym(0)).len(), 1);
        assert_eq!(env.obs_bits(&ObsPayload::Sym(1)).to_u64(), 1);
        assert_eq!(env.action_bits(), 1);
    }

    #[test]
    fn seeded_runs_replay_identically() {
        let mut a = StopHeistEnv::default();
        let mut b = StopHeistEnv::default();
        assert_eq!(a.reset(33), b.reset(33));
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        for _ in 0..1000 {
            let act = rng.random_range(0..2);
            assert_eq!(a.step(act), b.step(act));
        }
    }
}
