//! Scoring prompt instances against log-probability backends.
//!
//! A backend answers one question: the natural-log probability of a
//! continuation given a context, for one population member. Member 0 is the
//! unperturbed base model; members `1..=N` are the perturbed population.

mod mock;
mod remote;
mod store;
mod sweep;

use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::Sentiment;
use crate::promptgen::{PermutationId, PromptInstance};

pub use mock::{MockBackend, MockKind, MockProfile};
pub use remote::{InitRequest, InitResponse, ModelInfo, RemoteBackend, ScoreRequest, ScoreResponse, TokenLogprob};
pub(crate) use store::write_atomic;
pub use store::{read_jsonl, write_jsonl_atomic};
pub use sweep::{run_sweep, Dataset, SweepOptions};

pub const BASE_MEMBER: u32 = 0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    Remote,
    Mock,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackendDescriptor {
    pub kind: BackendKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mock_profile: Option<MockProfile>,
    #[serde(default)]
    pub model_name: String,
    #[serde(default)]
    pub param_count: u64,
}

impl BackendDescriptor {
    pub fn remote(endpoint: impl Into<String>) -> Self {
        Self {
            kind: BackendKind::Remote,
            endpoint: Some(endpoint.into()),
            mock_profile: None,
            model_name: String::new(),
            param_count: 0,
        }
    }

    pub fn mock(model_name: impl Into<String>, param_count: u64, profile: MockProfile) -> Self {
        Self {
            kind: BackendKind::Mock,
            endpoint: None,
            mock_profile: Some(profile),
            model_name: model_name.into(),
            param_count,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match (self.kind, &self.endpoint, &self.mock_profile) {
            (BackendKind::Remote, Some(url), None) if !url.is_empty() => Ok(()),
            (BackendKind::Mock, None, Some(profile)) => profile.validate(),
            _ => {
                Err(Error::InvalidBackend("exactly one of endpoint (remote) or mock_profile (mock) must be set".into()))
            }
        }
    }

    /// Builds the backend. Remote descriptors pick up `model_name` and
    /// `param_count` from `GET /v1/model` when those are unset.
    pub fn connect(&mut self) -> Result<Box<dyn Backend>> {
        self.validate()?;
        let backend: Box<dyn Backend> = match self.kind {
            BackendKind::Mock => Box::new(MockBackend::new(
                self.mock_profile.clone().expect("validated"),
                self.model_name.clone(),
                self.param_count,
            )),
            BackendKind::Remote => Box::new(RemoteBackend::new(self.endpoint.clone().expect("validated"))?),
        };
        if self.kind == BackendKind::Remote && (self.model_name.is_empty() || self.param_count == 0) {
            let info = backend.model_info()?;
            self.model_name = info.name;
            self.param_count = info.param_count;
        }
        Ok(backend)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PopulationSpec {
    pub size: u32,
    pub dropout_rate: f64,
    pub seed: u64,
    /// Also score member 0, the unperturbed base model.
    #[serde(default = "default_true")]
    pub include_base: bool,
}

fn default_true() -> bool {
    true
}

impl PopulationSpec {
    pub fn new(size: u32, dropout_rate: f64, seed: u64) -> Self {
        Self { size, dropout_rate, seed, include_base: true }
    }

    pub fn validate(&self) -> Result<()> {
        if self.size < 2 {
            return Err(Error::Config(format!("population size must be at least 2, got {}", self.size)));
        }
        if !(self.dropout_rate > 0.0 && self.dropout_rate < 1.0) {
            return Err(Error::Config(format!("dropout rate must lie in (0, 1), got {}", self.dropout_rate)));
        }
        Ok(())
    }

    /// Member ids scored by a sweep, base first when included.
    pub fn members(&self) -> Vec<u32> {
        let first = if self.include_base { BASE_MEMBER } else { 1 };
        (first..=self.size).collect()
    }
}

/// One scored probability, the atomic datum every statistic is built from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub experiment_id: String,
    pub game: String,
    pub permutation: PermutationId,
    pub evaluated_strategy: String,
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<i64>,
    pub sentiment: Sentiment,
    pub member_id: u32,
    pub logprob: f64,
    /// Milliseconds since the Unix epoch; logical (zero) for mock backends.
    pub timestamp: u64,
}

/// Cache identity of a record within one experiment.
pub type CellKey = (String, String, u32, PermutationId, String, Sentiment);

impl MeasurementRecord {
    pub fn cell_key(&self) -> CellKey {
        (
            self.experiment_id.clone(),
            self.game.clone(),
            self.member_id,
            self.permutation,
            self.evaluated_strategy.clone(),
            self.sentiment,
        )
    }

    /// Sort key giving the canonical on-disk order.
    pub(crate) fn sort_key(&self) -> (&str, u32, Sentiment, PermutationId, &str) {
        (&self.game, self.member_id, self.sentiment, self.permutation, &self.evaluated_strategy)
    }
}

pub trait Backend: Send + Sync {
    fn model_info(&self) -> Result<ModelInfo>;

    /// Registers the population; returns the member ids `1..=size`.
    fn init_population(&self, population: &PopulationSpec) -> Result<Vec<u32>>;

    fn score(&self, member: u32, instance: &PromptInstance) -> Result<ScoreResponse>;

    /// Whether record timestamps should come from the wall clock.
    fn wall_clock(&self) -> bool {
        true
    }
}

/// Scores one instance for one member and wraps it as a record.
pub fn score(
    backend: &dyn Backend,
    experiment_id: &str,
    member: u32,
    instance: &PromptInstance,
) -> Result<MeasurementRecord> {
    let response = backend.score(member, instance)?;
    response.check()?;
    let timestamp = if backend.wall_clock() {
        SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis() as u64).unwrap_or(0)
    } else {
        0
    };
    Ok(MeasurementRecord {
        experiment_id: experiment_id.to_string(),
        game: instance.game.clone(),
        permutation: instance.permutation,
        evaluated_strategy: instance.evaluated_strategy.clone(),
        label: instance.label.clone(),
        value: instance.value,
        sentiment: instance.evaluation_word.sentiment,
        member_id: member,
        logprob: response.logprob,
        timestamp,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn descriptor_needs_exactly_one_source() {
        let mut d = BackendDescriptor::remote("http://localhost:1");
        assert!(d.validate().is_ok());
        d.mock_profile = Some(MockProfile::value_agent(1.0, 1));
        assert!(matches!(d.validate(), Err(Error::InvalidBackend(_))));
        let mut m = BackendDescriptor::mock("m", 1, MockProfile::value_agent(1.0, 1));
        assert!(m.validate().is_ok());
        m.endpoint = Some("http://x".into());
        assert!(m.validate().is_err());
    }

    #[test]
    fn population_validation() {
        assert!(PopulationSpec::new(2, 0.1, 0).validate().is_ok());
        assert!(PopulationSpec::new(1, 0.1, 0).validate().is_err());
        assert!(PopulationSpec::new(5, 0.0, 0).validate().is_err());
        assert!(PopulationSpec::new(5, 1.0, 0).validate().is_err());
        let mut p = PopulationSpec::new(3, 0.1, 0);
        assert_eq!(p.members(), [0, 1, 2, 3]);
        p.include_base = false;
        assert_eq!(p.members(), [1, 2, 3]);
    }
}
