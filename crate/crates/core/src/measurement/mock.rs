//! In-process synthetic agents with known ground truth.
//!
//! Each agent scores an instance through a latent utility
//!
//! ```text
//! z = intercept + sign(sentiment)·beta_m·v + label_bias[label] + noise + word_noise
//! logprob = ln σ(z)
//! ```
//!
//! where `v` is the evaluated strategy's value and `beta_m` the member's
//! value sensitivity. Noise is keyed on (member, context, strategy) and is
//! shared by both evaluation words, like a base-rate effect; an optional
//! `word_noise_sd` term is drawn independently per word. Every draw
//! comes from a ChaCha stream seeded by a hash of the profile seed and the
//! cell, so scores are bit-reproducible and independent of call order.
//! Draws for members `1..=N` also depend on the population seed; the base
//! model (member 0) does not.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU32, AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{Backend, ModelInfo, PopulationSpec, ScoreResponse, TokenLogprob, BASE_MEMBER};
use crate::error::{Error, Result};
use crate::promptgen::PromptInstance;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MockKind {
    /// Probability tracks strategy value.
    ValueAgent,
    /// Probability tracks the display label only.
    LabelAgent,
    /// Value agent whose members perturb the value sensitivity.
    NoisyPopulationAgent,
    /// Value agent whose members lose the value signal per instance with
    /// probability `ablation_prob`; the base model is intact.
    BrittleAgent,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MockProfile {
    pub kind: MockKind,
    #[serde(default)]
    pub beta: f64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub label_bias: BTreeMap<String, f64>,
    #[serde(default)]
    pub member_noise_sd: f64,
    #[serde(default)]
    pub context_noise_sd: f64,
    /// Extra noise drawn independently for each evaluation word.
    #[serde(default)]
    pub word_noise_sd: f64,
    #[serde(default)]
    pub ablation_prob: f64,
    /// Overrides `Strategy::value` per strategy id (e.g. to encode a
    /// cooperative agent on the prisoner's dilemma).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub strategy_values: BTreeMap<String, f64>,
    #[serde(default = "default_intercept")]
    pub intercept: f64,
    pub seed: u64,
}

fn default_intercept() -> f64 {
    -2.0
}

impl MockProfile {
    fn base(kind: MockKind, seed: u64) -> Self {
        Self {
            kind,
            beta: 0.0,
            label_bias: BTreeMap::new(),
            member_noise_sd: 0.0,
            context_noise_sd: 0.0,
            word_noise_sd: 0.0,
            ablation_prob: 0.0,
            strategy_values: BTreeMap::new(),
            intercept: default_intercept(),
            seed,
        }
    }

    pub fn value_agent(beta: f64, seed: u64) -> Self {
        Self { beta, ..Self::base(MockKind::ValueAgent, seed) }
    }

    pub fn label_agent(label_bias: BTreeMap<String, f64>, seed: u64) -> Self {
        Self { label_bias, context_noise_sd: 0.1, ..Self::base(MockKind::LabelAgent, seed) }
    }

    pub fn noisy_population_agent(beta: f64, member_noise_sd: f64, seed: u64) -> Self {
        Self { beta, member_noise_sd, context_noise_sd: 0.2, ..Self::base(MockKind::NoisyPopulationAgent, seed) }
    }

    pub fn brittle_agent(beta: f64, ablation_prob: f64, seed: u64) -> Self {
        Self { beta, ablation_prob, context_noise_sd: 0.05, ..Self::base(MockKind::BrittleAgent, seed) }
    }

    pub fn with_strategy_values(mut self, values: BTreeMap<String, f64>) -> Self {
        self.strategy_values = values;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.beta,
            self.member_noise_sd,
            self.context_noise_sd,
            self.word_noise_sd,
            self.ablation_prob,
            self.intercept,
        ]
        .iter()
        .chain(self.label_bias.values())
        .chain(self.strategy_values.values())
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidBackend("mock profile has non-finite parameters".into()));
        }
        if self.member_noise_sd < 0.0 || self.context_noise_sd < 0.0 || self.word_noise_sd < 0.0 {
            return Err(Error::InvalidBackend("noise scales must be non-negative".into()));
        }
        if !(0.0..=1.0).contains(&self.ablation_prob) {
            return Err(Error::InvalidBackend("ablation_prob must lie in [0, 1]".into()));
        }
        if self.ablation_prob > 0.0 && self.kind != MockKind::BrittleAgent {
            return Err(Error::InvalidBackend("ablation_prob only applies to brittle_agent".into()));
        }
        Ok(())
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for b in bytes {
        hash ^= u64::from(*b);
        hash = hash.wrapping_mul(0x0100_0000_01b3);
    }
    hash
}

fn stream(seed: u64, key: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(fnv1a(key.as_bytes()) ^ seed.rotate_left(17))
}

fn log_sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        -(-z).exp().ln_1p()
    } else {
        z - z.exp().ln_1p()
    }
}

pub struct MockBackend {
    profile: MockProfile,
    model_name: String,
    param_count: u64,
    population: AtomicU32,
    population_seed: AtomicU64,
}

impl MockBackend {
    pub fn new(profile: MockProfile, model_name: impl Into<String>, param_count: u64) -> Self {
        Self {
            profile,
            model_name: model_name.into(),
            param_count,
            population: AtomicU32::new(0),
            population_seed: AtomicU64::new(0),
        }
    }

    pub fn profile(&self) -> &MockProfile {
        &self.profile
    }

    fn member_tag(&self, member: u32) -> String {
        if member == BASE_MEMBER {
            "base".to_string()
        } else {
            format!("{member}@{}", self.population_seed.load(Ordering::SeqCst))
        }
    }

    fn member_beta(&self, member: u32) -> f64 {
        let p = &self.profile;
        if member == BASE_MEMBER || p.member_noise_sd == 0.0 {
            return p.beta;
        }
        let mut rng = stream(p.seed, &format!("member|{}", self.member_tag(member)));
        let draw: f64 = rng.sample(StandardNormal);
        p.beta + p.member_noise_sd * draw
    }

    /// Latent utility before the log-sigmoid link.
    pub fn utility(&self, member: u32, instance: &PromptInstance) -> f64 {
        let p = &self.profile;
        let value = p
            .strategy_values
            .get(&instance.evaluated_strategy)
            .copied()
            .or(instance.value.map(|v| v as f64))
            .unwrap_or(0.0);
        let sign = instance.evaluation_word.sentiment.sign();

        let cell = format!(
            "cell|{}|{}|{}|{}|{}",
            self.member_tag(member),
            instance.game,
            instance.permutation.label_order,
            instance.permutation.assignment,
            instance.evaluated_strategy
        );
        let mut rng = stream(p.seed, &cell);
        let noise: f64 = rng.sample(StandardNormal);
        let ablation_draw: f64 = rng.random();

        let ablated = p.kind == MockKind::BrittleAgent && member != BASE_MEMBER && ablation_draw < p.ablation_prob;
        let value_term = if ablated { 0.0 } else { sign * self.member_beta(member) * value };
        let label_term = p.label_bias.get(&instance.label).copied().unwrap_or(0.0);
        let word_term = if p.word_noise_sd > 0.0 {
            let mut rng = stream(p.seed, &format!("{cell}|{}", instance.evaluation_word.sentiment));
            p.word_noise_sd * rng.sample::<f64, _>(StandardNormal)
        } else {
            0.0
        };
        p.intercept + value_term + label_term + p.context_noise_sd * noise + word_term
    }
}

impl Backend for MockBackend {
    fn model_info(&self) -> Result<ModelInfo> {
        Ok(ModelInfo { name: self.model_name.clone(), param_count: self.param_count })
    }

    fn init_population(&self, population: &PopulationSpec) -> Result<Vec<u32>> {
        population.validate()?;
        self.population_seed.store(population.seed, Ordering::SeqCst);
        self.population.store(population.size, Ordering::SeqCst);
        Ok((1..=population.size).collect())
    }

    fn score(&self, member: u32, instance: &PromptInstance) -> Result<ScoreResponse> {
        if member > self.population.load(Ordering::SeqCst) {
            return Err(Error::UnknownMember(member));
        }
        let logprob = log_sigmoid(self.utility(member, instance));
        Ok(ScoreResponse { logprob, tokens: vec![TokenLogprob { text: instance.continuation.clone(), logprob }] })
    }

    fn wall_clock(&self) -> bool {
        false
    }
}
