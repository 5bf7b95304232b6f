//! Feature-abstracted AIXI agent toolkit.
//!
//! The crate implements a complete pipeline for general reinforcement
//! learning over abstracted histories:
//!
//! * [`bits`] / [`history`] — fixed-width symbol codecs, packed bit strings,
//!   and the append-only action/observation/reward log.
//! * [`predicates`] — logical predicates over histories, combinator-built
//!   feature pools, and the abstraction map from histories to bit states.
//! * [`ctw`] — Krichevsky-Trofimov estimators, context-tree weighting, and
//!   the per-bit chained CTW mixture used as the environment model.
//! * [`featsel`] — reward-conditioned decision rules, reduced ordered binary
//!   decision diagrams, and randomized-forest feature selection.
//! * [`cost`] — code-length scoring of abstractions from transition counts.
//! * [`envs`] — benchmark environments: biased rock-paper-scissors, Jackpot,
//!   Stop Heist, a 2x5 taxi grid, and a SEIRS epidemic process on contact
//!   networks, plus contact-network utilities and a particle-filter belief.
//! * [`planner`] — rho-UCT Monte-Carlo tree search over a generative model.
//! * [`agent`] — the collect / select / act lifecycle tying it all together.
//! * [`runner`] — experiment configs, seed sweeps, and run artifacts.

pub mod bits;
pub mod cost;
pub mod ctw;
pub mod envs;
pub mod featsel;
pub mod agent;
pub mod history;
pub mod planner;
pub mod predicates;
pub mod util;
