//! The agent-environment interaction log.
//!
//! A [`History`] is an append-only sequence of steps, each pairing the action
//! taken with the observation and reward it produced. Observation payloads
//! are environment-defined structured values; this module stores them
//! without interpreting them — only predicates look inside.
//!
//! Each step also carries a cached binarization (action bits, observation
//! bits, reward bits, in that order) supplied by the harness at append time,
//! so suffix predicates can address "the n-th bit back" in constant time.

use crate::bits::BitString;

/// Per-node test outcome in sensing domains: a positive test, a negative
/// test, or no test result at all.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeTest {
    Positive,
    Negative,
    Unknown,
}

/// Environment-defined observation payload. Opaque to this module.
#[derive(Debug, Clone, PartialEq)]
pub enum ObsPayload {
    /// No observation content (reward-only domains).
    Unit,
    /// A single discrete symbol.
    Sym(u32),
    /// Three small discrete components (e.g. position / passenger / goal).
    Triple(u8, u8, u8),
    /// One test outcome per network node.
    Tests(Vec<NodeTest>),
}

/// One interaction cycle: the action taken, what was observed, and the
/// reward received. `terminal` marks episode boundaries.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub action: u32,
    pub obs: ObsPayload,
    pub reward: f64,
    pub terminal: bool,
}

/// Append-only interaction log with cached per-step binarizations.
#[derive(Debug, Clone, Default)]
pub struct History {
    steps: Vec<Step>,
    step_bits: Vec<BitString>,
}

impl History {
    pub fn new() -> Self {
        History::default()
    }

    /// Number of completed steps.
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Append one step together with its binarized form.
    pub fn push(&mut self, step: Step, bits: BitString) {
        self.steps.push(step);
        self.step_bits.push(bits);
    }

    /// 0-based access; `step(len()-1)` is the most recent step.
    pub fn step(&self, i: usize) -> &Step {
        &self.steps[i]
    }

    pub fn last(&self) -> Option<&Step> {
        self.steps.last()
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    /// The `offset`-th bit counting back from the end of the concatenated
    /// per-step bit stream (`offset = 1` is the final bit of the most recent
    /// step). Returns `None` when the stream is shorter than `offset`.
    pub fn suffix_bit(&self, offset: usize) -> Option<bool> {
        if offset == 0 {
            return None;
        }
        let mut remaining = offset;
        for bits in self.step_bits.iter().rev() {
            if remaining <= bits.len() {
                return Some(bits.get(bits.len() - remaining));
            }
            remaining -= bits.len();
        }
        None
    }

    /// Sum of rewards over the most recent `window` steps (fewer if the
    /// history is shorter), together with the number of steps summed.
    pub fn recent_reward_sum(&self, window: usize) -> (f64, usize) {
        let n = window.min(self.steps.len());
        let sum = self.steps[self.steps.len() - n..].iter().map(|s| s.reward).sum();
        (sum, n)
    }

    /// Number of the most recent `window` steps whose action satisfies the
    /// predicate, together with the number of steps examined.
    pub fn recent_action_count(&self, window: usize, action: u32) -> (usize, usize) {
        let n = window.min(self.steps.len());
        let count = self.steps[self.steps.len() - n..]
            .iter()
            .filter(|s| s.action == action)
            .count();
        (count, n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step(action: u32, reward: f64) -> Step {
        Step { action, obs: ObsPayload::Unit, reward, terminal: false }
    }

    #[test]
    fn suffix_bits_count_back_across_steps() {
        let mut h = History::new();
        h.push(step(0, 0.0), BitString::parse("101").unwrap());
        h.push(step(1, 1.0), BitString::parse("011").unwrap());
        // Stream is 101011; offset 1 = last bit.
        let got: Vec<Option<bool>> = (1..=7).map(|o| h.suffix_bit(o)).collect();
        assert_eq!(
            got,
            vec![Some(true), Some(true), Some(false), Some(true), Some(false), Some(true), None]
        );
        assert_eq!(h.suffix_bit(0), None);
    }

    #[test]
    fn window_helpers_use_available_prefix() {
        let mut h = History::new();
        for i in 0..5 {
            h.push(step(i % 2, i as f64), BitString::parse("0").unwrap());
        }
        let (sum, n) = h.recent_reward_sum(3);
        assert_eq!((sum, n), (2.0 + 3.0 + 4.0, 3));
        let (sum, n) = h.recent_reward_sum(100);
        assert_eq!((sum, n), (10.0, 5));
        let (count, n) = h.recent_action_count(4, 1);
        assert_eq!((count, n), (2, 4));
    }
}
