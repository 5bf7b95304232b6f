//! The full agent lifecycle: exploratory data collection, feature
//! selection, model building over the selected predicates, and planned
//! acting with decaying ε-greedy exploration.
//!
//! The agent lives through three phases:
//!
//! 1. **Collecting** — acts uniformly at random while recording, for every
//!    step, the full predicate-pool state vector together with the action
//!    taken and the reward received.
//! 2. **Selected** — at the configured step, runs randomized-forest
//!    feature selection over the recorded statistics, fixes the surviving
//!    predicates as the abstraction φ, builds a fresh context-tree
//!    mixture model over φ's state bits, and replays the collected
//!    history into it so the model starts warm.
//! 3. **Acting** — on every percept, folds `(s_prev, a, s, r)` into the
//!    model, then either explores uniformly (with probability
//!    `max(ε₀·α^t, floor)`) or plans with the Monte-Carlo tree search.
//!
//! The abstraction is immutable once selected: every later model update
//! uses the same state width, and the planner's node table keeps
//! accumulating statistics for revisited abstract states.

use crate::bits::{BitString, RewardCodec};
use crate::ctw::PhiBctwModel;
use crate::envs::{encode_step_bits, Environment};
use crate::featsel::{rf_bdd, FeatselError, RewardStats, RfBddConfig, RfBddReport};
use crate::history::{History, ObsPayload, Step};
use crate::planner::{BctwRollout, Planner, PlannerConfig, PlannerError};
use crate::predicates::PredicatePool;
use crate::util::{moving_average, splitmix64, RngState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum AgentError {
    #[error("invalid agent configuration: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Planner(#[from] PlannerError),
    #[error(transparent)]
    Selection(#[from] FeatselError),
}

/// Decaying ε-greedy schedule with a floor.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplorationSchedule {
    /// ε₀, the exploration probability at t = 0.
    pub initial: f64,
    /// α, the per-step decay factor.
    pub decay: f64,
    /// Lower bound the probability never drops below.
    pub floor: f64,
}

impl Default for ExplorationSchedule {
    fn default() -> Self {
        ExplorationSchedule { initial: 1.0, decay: 0.9999, floor: 0.03 }
    }
}

impl ExplorationSchedule {
    pub fn validate(&self) -> Result<(), AgentError> {
        if !(self.initial >= 0.0 && self.initial <= 1.0) {
            return Err(AgentError::BadConfig(format!(
                "initial exploration {} outside [0, 1]",
                self.initial
            )));
        }
        if !(self.decay > 0.0 && self.decay < 1.0) {
            return Err(AgentError::BadConfig(format!(
                "exploration decay {} outside (0, 1)",
                self.decay
            )));
        }
        if !(self.floor > 0.0 && self.floor < 1.0) {
            return Err(AgentError::BadConfig(format!(
                "exploration floor {} outside (0, 1)",
                self.floor
            )));
        }
        Ok(())
    }
}

/// Exploration probability at life step `t`: `max(ε₀·α^t, floor)`.
pub fn exploration_rate(t: u64, schedule: &ExplorationSchedule) -> f64 {
    (schedule.initial * schedule.decay.powf(t as f64)).max(schedule.floor)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AgentConfig {
    /// Steps of uniform-random data collection before feature selection.
    pub collection_steps: u64,
    pub selection: RfBddConfig,
    pub planner: PlannerConfig,
    pub exploration: ExplorationSchedule,
    /// Optional bound on the model's per-tree context depth. Caps the
    /// cost of model updates when selection keeps many predicates.
    #[serde(default)]
    pub context_cap: Option<usize>,
    pub seed: u64,
}

impl AgentConfig {
    pub fn validate(&self, pool_size: usize) -> Result<(), AgentError> {
        if self.collection_steps < 1 {
            return Err(AgentError::BadConfig("collection_steps must be at least 1".into()));
        }
        self.exploration.validate()?;
        self.planner.validate()?;
        self.selection.validate(pool_size)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    /// Uniform-random acting; gathering feature-selection statistics.
    Collecting,
    /// Abstraction fixed and model built, but no percept folded in yet.
    Selected,
    /// Model updating and planning.
    Acting,
}

/// What feature selection produced, kept for reporting.
#[derive(Debug, Clone)]
pub struct SelectionOutcome {
    pub report: RfBddReport,
    /// Selected predicate ids, ascending; the abstraction φ.
    pub chosen: Vec<u32>,
    /// Life step at which selection ran.
    pub at_step: u64,
}

/// One percept as the agent consumes it: the observation and reward that
/// answered the agent's last action, plus the step's canonical
/// binarization (action, observation and reward bits).
#[derive(Debug, Clone)]
pub struct Percept {
    pub obs: ObsPayload,
    pub reward: f64,
    pub terminal: bool,
    pub step_bits: BitString,
}

pub struct Agent {
    config: AgentConfig,
    pool: PredicatePool,
    codec: RewardCodec,
    num_actions: u32,
    action_bits: usize,
    history: History,
    stats: RewardStats,
    /// Per collection step: (full-pool state before the action, action,
    /// reward id). Replayed into the model at selection, then dropped.
    collected: Vec<(BitString, u32, u32)>,
    phase: Phase,
    selection: Option<SelectionOutcome>,
    model: Option<PhiBctwModel>,
    planner: Option<Planner>,
    rng: ChaCha12Rng,
    last_action: Option<u32>,
    /// Pool state vector at the moment the last action was chosen.
    state_before_action: Option<BitString>,
    /// Abstract state after the most recent percept (invalidated when a
    /// new episode begins, since pool-side features reset).
    cached_state: Option<BitString>,
    exploration_override: Option<f64>,
    began: bool,
    /// Lifetime steps lived before this process (nonzero only for agents
    /// restored from a checkpoint, whose in-memory history starts empty).
    age_offset: u64,
}

impl Agent {
    pub fn new(
        env: &dyn Environment,
        pool: PredicatePool,
        mut config: AgentConfig,
    ) -> Result<Agent, AgentError> {
        config.planner.reward_range = env.reward_bounds();
        config.validate(pool.len())?;
        let rng = ChaCha12Rng::seed_from_u64(splitmix64(config.seed ^ 0xa6e7));
        Ok(Agent {
            codec: env.reward_codec(),
            num_actions: env.num_actions(),
            action_bits: env.action_bits() as usize,
            pool,
            config,
            history: History::new(),
            stats: RewardStats::new(),
            collected: Vec::new(),
            phase: Phase::Collecting,
            selection: None,
            model: None,
            planner: None,
            rng,
            last_action: None,
            state_before_action: None,
            cached_state: None,
            exploration_override: None,
            began: false,
            age_offset: 0,
        })
    }

    /// Rebuild an acting-phase agent from checkpointed parts: the fixed
    /// abstraction, the trained model, the planner (with its search table),
    /// the policy RNG state and the lifetime step count. The caller
    /// supplies the same environment and pool the original run used, then
    /// resumes at an episode boundary (`reset` + [`Agent::begin_episode`]).
    /// Selection statistics and raw history are not carried over: the
    /// abstraction is already fixed, so they have no further role.
    #[allow(clippy::too_many_arguments)]
    pub fn restore(
        env: &dyn Environment,
        pool: PredicatePool,
        config: AgentConfig,
        chosen: Vec<u32>,
        model: PhiBctwModel,
        planner: Planner,
        rng_state: RngState,
        age: u64,
    ) -> Result<Agent, AgentError> {
        let mut agent = Agent::new(env, pool, config)?;
        if model.state_bits() != chosen.len() {
            return Err(AgentError::BadConfig(format!(
                "model was trained on {} state bits but {} predicates are selected",
                model.state_bits(),
                chosen.len()
            )));
        }
        agent.rng = rng_state.into_rng();
        agent.age_offset = age;
        agent.selection = Some(SelectionOutcome {
            report: RfBddReport {
                per_reward: Vec::new(),
                selected: chosen.iter().map(|&p| p as usize).collect(),
                diagnostics: vec!["restored from checkpoint; vote tallies not retained".into()],
            },
            chosen,
            at_step: agent.config.collection_steps,
        });
        agent.model = Some(model);
        agent.planner = Some(planner);
        agent.phase = Phase::Acting;
        Ok(agent)
    }

    /// Lifetime interaction steps, surviving checkpoint round-trips.
    pub fn age(&self) -> u64 {
        self.age_offset + self.history.len() as u64
    }

    /// The policy RNG's exact position, for checkpointing.
    pub fn rng_state(&self) -> RngState {
        RngState::of(&self.rng)
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn history(&self) -> &History {
        &self.history
    }

    pub fn pool(&self) -> &PredicatePool {
        &self.pool
    }

    pub fn selection(&self) -> Option<&SelectionOutcome> {
        self.selection.as_ref()
    }

    /// The selected predicate ids, once the abstraction is fixed.
    pub fn abstraction(&self) -> Option<&[u32]> {
        self.selection.as_ref().map(|s| s.chosen.as_slice())
    }

    pub fn model(&self) -> Option<&PhiBctwModel> {
        self.model.as_ref()
    }

    pub fn planner(&self) -> Option<&Planner> {
        self.planner.as_ref()
    }

    /// Pin the exploration probability (e.g. to 0 for determinism tests);
    /// `None` restores the configured schedule.
    pub fn override_exploration(&mut self, eps: Option<f64>) {
        self.exploration_override = eps;
    }

    /// Action width used in the model's context: at least one bit, so a
    /// single-action environment still has a well-formed chain.
    fn model_action_bits(&self) -> usize {
        self.action_bits.max(1)
    }

    fn current_exploration(&self) -> f64 {
        self.exploration_override
            .unwrap_or_else(|| exploration_rate(self.age(), &self.config.exploration))
    }

    /// Start (or restart) an episode: resets the pool's episodic state.
    /// History, statistics, model and planner persist for life.
    pub fn begin_episode(&mut self, reset_obs: &ObsPayload) {
        self.pool.begin_episode(reset_obs);
        self.cached_state = None;
        self.last_action = None;
        self.began = true;
    }

    /// Fold one percept into the agent: record the step, update phase
    /// statistics or the model, and run feature selection when the
    /// collection budget is exactly used up.
    pub fn absorb(&mut self, percept: Percept) {
        assert!(self.began, "absorb called before the first begin_episode");
        let action = self.last_action.expect("a percept must answer a chosen action");
        let reward_id = self
            .codec
            .to_id(percept.reward)
            .expect("environment rewards are representable by their codec");
        let step = Step {
            action,
            obs: percept.obs,
            reward: percept.reward,
            terminal: percept.terminal,
        };
        self.pool.push_step(&step);
        self.history.push(step, percept.step_bits);
        self.last_action = None;

        match self.phase {
            Phase::Collecting => {
                let state = self
                    .state_before_action
                    .take()
                    .expect("state recorded when the action was chosen");
                self.stats.update(&state, action, reward_id);
                self.collected.push((state, action, reward_id));
                if self.history.len() as u64 == self.config.collection_steps {
                    self.select().expect("selection config validated at construction");
                }
            }
            Phase::Selected | Phase::Acting => {
                let chosen = self.selection.as_ref().expect("selected phase").chosen.clone();
                let state = self.pool.eval_ids(&self.history, &chosen);
                let mut symbol = state.clone();
                symbol.extend(&BitString::from_u64(u64::from(reward_id), self.codec.bit_width()));
                let action_bits =
                    BitString::from_u64(u64::from(action), self.model_action_bits() as u32);
                self.model
                    .as_mut()
                    .expect("model exists after selection")
                    .update_chained(&action_bits, &symbol)
                    .expect("abstraction width is fixed");
                self.cached_state = Some(state);
                self.phase = Phase::Acting;
            }
        }
    }

    /// Choose the next action for the current history.
    pub fn choose(&mut self) -> u32 {
        assert!(self.began, "choose called before the first begin_episode");
        let action = match self.phase {
            Phase::Collecting => {
                // Record the full pool state the action is taken in; the
                // selection statistics are keyed by it.
                self.state_before_action = Some(self.pool.eval_all(&self.history));
                self.rng.random_range(0..self.num_actions)
            }
            Phase::Selected | Phase::Acting => {
                let chosen = self.selection.as_ref().expect("selected phase").chosen.clone();
                let state = self
                    .cached_state
                    .take()
                    .unwrap_or_else(|| self.pool.eval_ids(&self.history, &chosen));
                if self.rng.random::<f64>() < self.current_exploration() {
                    self.rng.random_range(0..self.num_actions)
                } else {
                    let planner = self.planner.as_mut().expect("planner exists after selection");
                    let model = self.model.as_mut().expect("model exists after selection");
                    let mut rollout = BctwRollout::new(model, self.codec.clone());
                    planner.search(&mut rollout, &state)
                }
            }
        };
        self.last_action = Some(action);
        action
    }

    /// Consume a percept and choose the next action in one call.
    pub fn act(&mut self, percept: Option<Percept>) -> u32 {
        if let Some(p) = percept {
            self.absorb(p);
        }
        self.choose()
    }

    /// Run feature selection over the collected statistics, fix the
    /// abstraction, build the model, and replay the collection history
    /// into it so the first planned decisions start from a trained model.
    fn select(&mut self) -> Result<(), AgentError> {
        let report = rf_bdd(self.pool.len(), self.action_bits, &self.stats, &self.config.selection)?;
        let chosen: Vec<u32> = report.selected.iter().map(|&p| p as u32).collect();
        let at_step = self.history.len() as u64;

        let mut model = PhiBctwModel::with_depth_cap(
            chosen.len(),
            self.model_action_bits(),
            self.codec.bit_width() as usize,
            self.config.context_cap,
        );
        let project = |full: &BitString| -> BitString {
            let mut s = BitString::new();
            for &id in &chosen {
                s.push(full.get(id as usize));
            }
            s
        };
        // Replay: symbol t is (φ-state after percept t, reward t), in the
        // context of (φ-state before the action, the action).
        let current_full = self.pool.eval_all(&self.history);
        for (t, (full_before, action, reward_id)) in self.collected.iter().enumerate() {
            let state_after = match self.collected.get(t + 1) {
                Some((next_full, _, _)) => project(next_full),
                None => project(&current_full),
            };
            let mut symbol = state_after;
            symbol.extend(&BitString::from_u64(u64::from(*reward_id), self.codec.bit_width()));
            let action_bits =
                BitString::from_u64(u64::from(*action), self.model_action_bits() as u32);
            model
                .update(&project(full_before), &action_bits, &symbol)
                .expect("projection width matches the fresh model");
        }
        self.collected = Vec::new();

        let planner = Planner::new(
            self.num_actions,
            self.config.planner.clone(),
            splitmix64(self.config.seed ^ 0x9ca5),
        )?;
        self.cached_state = Some(project(&current_full));
        self.model = Some(model);
        self.planner = Some(planner);
        self.selection = Some(SelectionOutcome { report, chosen, at_step });
        self.phase = Phase::Selected;
        Ok(())
    }
}

/// How long to drive the agent and which windows to summarize with.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalConfig {
    pub steps: u64,
    /// Moving-average window for the per-step reward curve.
    pub reward_window: usize,
    /// Moving-average window for the action-mix percentages.
    pub action_window: usize,
    pub env_seed: u64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig { steps: 100_000, reward_window: 5000, action_window: 500, env_seed: 0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpisodeSummary {
    /// Life step at which the episode started.
    pub start_step: u64,
    pub steps: u64,
    pub total_reward: f64,
    /// True when the episode ended in a terminal state (as opposed to
    /// being cut off by the step budget).
    pub terminated: bool,
}

/// Everything one evaluation run produces.
#[derive(Debug, Clone)]
pub struct EvalRecord {
    pub rewards: Vec<f64>,
    pub actions: Vec<u32>,
    pub episodes: Vec<EpisodeSummary>,
    /// Moving-average reward (length `steps − reward_window + 1`).
    pub reward_ma: Vec<f64>,
    /// Per-action usage fraction series, one inner vector per action.
    pub action_mix: Vec<Vec<f64>>,
}

/// One evaluated step, handed to the observer of [`evaluate_with`] before
/// the percept is folded into the agent.
#[derive(Debug)]
pub struct StepLog<'a> {
    /// Zero-based step index within the evaluation run.
    pub t: u64,
    /// Zero-based episode index within the evaluation run.
    pub episode: usize,
    pub action: u32,
    pub reward: f64,
    pub terminal: bool,
    pub obs: &'a ObsPayload,
}

/// Drive `agent` in `env` for `steps` environment steps, resetting the
/// environment whenever an episode terminates, and summarize the run.
pub fn evaluate(agent: &mut Agent, env: &mut dyn Environment, config: &EvalConfig) -> EvalRecord {
    evaluate_with(agent, env, config, |_| {})
}

/// [`evaluate`] with a per-step observer, for callers that stream logs.
pub fn evaluate_with(
    agent: &mut Agent,
    env: &mut dyn Environment,
    config: &EvalConfig,
    mut on_step: impl FnMut(&StepLog<'_>),
) -> EvalRecord {
    let mut rewards = Vec::with_capacity(config.steps as usize);
    let mut actions = Vec::with_capacity(config.steps as usize);
    let mut episodes = Vec::new();

    let mut episode_seed = config.env_seed;
    let obs = env.reset(episode_seed);
    agent.begin_episode(&obs);
    let mut action = agent.choose();
    let mut episode_start = 0u64;
    let mut episode_reward = 0.0;

    for t in 0..config.steps {
        let step = env.step(action);
        rewards.push(step.reward);
        actions.push(action);
        episode_reward += step.reward;
        on_step(&StepLog {
            t,
            episode: episodes.len(),
            action,
            reward: step.reward,
            terminal: step.terminal,
            obs: &step.obs,
        });
        let percept = Percept {
            step_bits: encode_step_bits(env, action, &step.obs, step.reward),
            obs: step.obs,
            reward: step.reward,
            terminal: step.terminal,
        };
        agent.absorb(percept);
        if step.terminal {
            episodes.push(EpisodeSummary {
                start_step: episode_start,
                steps: t + 1 - episode_start,
                total_reward: episode_reward,
                terminated: true,
            });
            episode_start = t + 1;
            episode_reward = 0.0;
            episode_seed = splitmix64(episode_seed);
            let obs = env.reset(episode_seed);
            agent.begin_episode(&obs);
        }
        if t + 1 < config.steps {
            action = agent.choose();
        }
    }
    if episode_start < config.steps {
        episodes.push(EpisodeSummary {
            start_step: episode_start,
            steps: config.steps - episode_start,
            total_reward: episode_reward,
            terminated: false,
        });
    }

    let reward_ma = moving_average(&rewards, config.reward_window);
    let action_mix = (0..env.num_actions())
        .map(|a| {
            let indicator: Vec<f64> =
                actions.iter().map(|&x| if x == a { 1.0 } else { 0.0 }).collect();
            moving_average(&indicator, config.action_window)
        })
        .collect();

    EvalRecord { rewards, actions, episodes, reward_ma, action_mix }
}
