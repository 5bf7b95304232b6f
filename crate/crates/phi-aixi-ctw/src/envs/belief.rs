//! Particle-filter belief over hidden epidemic labels.
//!
//! The epidemic environment reveals only noisy per-node test results, so
//! downstream features that want the latent infection level maintain a
//! bootstrap particle filter. Each particle is a full label vector; node
//! immunity is a deterministic function of the action history and is
//! therefore shared across particles rather than sampled.
//!
//! Per step: `advance(action)` pushes every particle through the same
//! transition kernel as the environment (quarantine masking included),
//! then `observe(tests)` multiplies each particle's weight by the
//! likelihood of the reported tests and resamples systematically when the
//! effective sample size drops below half the particle count. If an
//! observation has zero likelihood under every particle the weights are
//! reset to uniform and a degeneracy flag is raised instead of dividing
//! by zero.

use super::epidemic::{
    apply_action_effects, observation_prob, propagate_labels, sample_initial_labels,
    EpidemicAction, EpidemicError, EpidemicParams, Label,
};
use super::graph::Graph;
use crate::history::NodeTest;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// Bootstrap filter tracking P(labels | tests, actions).
#[derive(Debug, Clone)]
pub struct ParticleFilter {
    graph: Graph,
    params: EpidemicParams,
    ranking: Vec<u32>,
    particles: Vec<Vec<Label>>,
    /// Normalized weights, summing to one.
    weights: Vec<f64>,
    immunity: Vec<f64>,
    rng: ChaCha12Rng,
    degenerate: bool,
}

impl ParticleFilter {
    pub fn new(
        graph: Graph,
        params: EpidemicParams,
        num_particles: usize,
        seed: u64,
    ) -> Result<ParticleFilter, EpidemicError> {
        params.validate()?;
        if graph.num_nodes() == 0 {
            return Err(EpidemicError::BadConfig("graph has no nodes".into()));
        }
        if num_particles == 0 {
            return Err(EpidemicError::BadConfig("need at least one particle".into()));
        }
        let n = graph.num_nodes();
        let ranking = graph.betweenness_ranking();
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let particles: Vec<Vec<Label>> = (0..num_particles)
            .map(|_| sample_initial_labels(n, &params, &mut rng))
            .collect();
        Ok(ParticleFilter {
            graph,
            params,
            ranking,
            weights: vec![1.0 / num_particles as f64; num_particles],
            particles,
            immunity: vec![1.0; n],
            rng,
            degenerate: false,
        })
    }

    pub fn num_particles(&self) -> usize {
        self.particles.len()
    }

    pub fn particles(&self) -> &[Vec<Label>] {
        &self.particles
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn immunity(&self) -> &[f64] {
        &self.immunity
    }

    /// True if the last observation had zero likelihood under every
    /// particle, forcing a uniform reset.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    /// Push all particles through one environment transition.
    pub fn advance(&mut self, action: u32) {
        let action = EpidemicAction::from_id(action);
        let params = self.params.clone();
        let (_cost, quarantined) =
            apply_action_effects(action, &self.ranking, &params, &mut self.immunity);
        for particle in &mut self.particles {
            propagate_labels(
                particle,
                &self.graph,
                &quarantined,
                &self.immunity,
                &params,
                &mut self.rng,
            );
        }
    }

    /// Condition on one round of test results.
    pub fn observe(&mut self, tests: &[NodeTest]) {
        assert_eq!(
            tests.len(),
            self.graph.num_nodes(),
            "one test per node expected"
        );
        let m = self.particles.len();
        // Log-likelihoods: over hundreds of nodes the direct product
        // underflows f64.
        let log_lik: Vec<f64> = self
            .particles
            .iter()
            .map(|labels| {
                labels
                    .iter()
                    .zip(tests)
                    .map(|(&l, &t)| observation_prob(l, t, &self.params).ln())
                    .sum::<f64>()
            })
            .collect();
        let top = log_lik
            .iter()
            .zip(&self.weights)
            .filter(|&(_, &w)| w > 0.0)
            .map(|(&ll, _)| ll)
            .fold(f64::NEG_INFINITY, f64::max);
        if top == f64::NEG_INFINITY {
            self.weights = vec![1.0 / m as f64; m];
            self.degenerate = true;
            return;
        }
        self.degenerate = false;
        for (w, ll) in self.weights.iter_mut().zip(&log_lik) {
            *w *= (ll - top).exp();
        }
        let total: f64 = self.weights.iter().sum();
        if total <= 0.0 {
            self.weights = vec![1.0 / m as f64; m];
            self.degenerate = true;
            return;
        }
        for w in &mut self.weights {
            *w /= total;
        }
        let ess = 1.0 / self.weights.iter().map(|w| w * w).sum::<f64>();
        if ess < m as f64 / 2.0 {
            self.resample();
        }
    }

    /// Systematic resampling; leaves uniform weights.
    fn resample(&mut self) {
        let m = self.particles.len();
        let u0: f64 = self.rng.random::<f64>() / m as f64;
        let mut new_particles = Vec::with_capacity(m);
        let mut i = 0usize;
        let mut cum = self.weights[0];
        for j in 0..m {
            let u = u0 + j as f64 / m as f64;
            while u > cum && i + 1 < m {
                i += 1;
                cum += self.weights[i];
            }
            new_particles.push(self.particles[i].clone());
        }
        self.particles = new_particles;
        self.weights = vec![1.0 / m as f64; m];
    }

    /// Weighted posterior mean of the Infectious fraction.
    pub fn infection_rate(&self) -> f64 {
        let n = self.graph.num_nodes() as f64;
        self.particles
            .iter()
            .zip(&self.weights)
            .map(|(labels, &w)| {
                w * labels.iter().filter(|&&l| l == Label::Infectious).count() as f64 / n
            })
            .sum()
    }

    /// Posterior P(label) for one node, indexed S, E, I, R.
    pub fn label_marginal(&self, node: u32) -> [f64; 4] {
        let mut out = [0.0f64; 4];
        for (labels, &w) in self.particles.iter().zip(&self.weights) {
            let idx = match labels[node as usize] {
                Label::Susceptible => 0,
                Label::Exposed => 1,
                Label::Infectious => 2,
                Label::Recovered => 3,
            };
            out[idx] += w;
        }
        out
    }
}
