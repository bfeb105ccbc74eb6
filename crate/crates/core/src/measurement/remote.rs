//! JSON-over-HTTP scoring protocol.
//!
//! ```text
//! POST /v1/population/init  {"size": N, "dropout": r, "seed": s} -> {"members": [1..N]}
//! POST /v1/score            {"context": c, "continuation": w, "member": m}
//!                           -> {"logprob": f, "tokens": [{"text": t, "logprob": f}]}
//! GET  /v1/model            -> {"name": n, "param_count": p}
//! ```
//!
//! A 404 from `/v1/score` means the member is unknown; 5xx and connection
//! failures are transport errors and may be retried.

use std::time::Duration;

use reqwest::blocking::Client;
use reqwest::StatusCode;
use serde::{Deserialize, Serialize};

use super::{Backend, PopulationSpec};
use crate::error::{Error, Result};
use crate::promptgen::PromptInstance;

/// Tolerance between the reported total and the sum of token log-probs.
const TOKEN_SUM_TOLERANCE: f64 = 1e-4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitRequest {
    pub size: u32,
    pub dropout: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InitResponse {
    pub members: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreRequest {
    pub context: String,
    pub continuation: String,
    pub member: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TokenLogprob {
    pub text: String,
    pub logprob: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreResponse {
    pub logprob: f64,
    #[serde(default)]
    pub tokens: Vec<TokenLogprob>,
}

impl ScoreResponse {
    /// Rejects positive or non-finite totals and token breakdowns that do
    /// not add up to the total.
    pub fn check(&self) -> Result<()> {
        if !self.logprob.is_finite() || self.logprob > 0.0 {
            return Err(Error::MalformedResponse(format!("logprob must be finite and <= 0, got {}", self.logprob)));
        }
        if !self.tokens.is_empty() {
            let sum: f64 = self.tokens.iter().map(|t| t.logprob).sum();
            if (sum - self.logprob).abs() > TOKEN_SUM_TOLERANCE {
                return Err(Error::MalformedResponse(format!(
                    "token logprobs sum to {sum}, total says {}",
                    self.logprob
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelInfo {
    pub name: String,
    pub param_count: u64,
}

pub struct RemoteBackend {
    endpoint: String,
    client: Client,
}

impl RemoteBackend {
    pub fn new(endpoint: impl Into<String>) -> Result<Self> {
        let endpoint = endpoint.into().trim_end_matches('/').to_string();
        let client = Client::builder()
            .timeout(Duration::from_secs(120))
            .build()
            .map_err(|e| Error::Transport { endpoint: endpoint.clone(), reason: e.to_string() })?;
        Ok(Self { endpoint, client })
    }

    fn url(&self, path: &str) -> String {
        format!("{}{path}", self.endpoint)
    }

    fn transport(&self, e: impl ToString) -> Error {
        Error::Transport { endpoint: self.endpoint.clone(), reason: e.to_string() }
    }

    fn decode<T: for<'de> Deserialize<'de>>(&self, response: reqwest::blocking::Response) -> Result<T> {
        let status = response.status();
        if status.is_server_error() {
            return Err(self.transport(format!("server returned {status}")));
        }
        if !status.is_success() {
            let body = response.text().unwrap_or_default();
            return Err(Error::MalformedResponse(format!("status {status}: {body}")));
        }
        let body = response.text().map_err(|e| self.transport(e))?;
        serde_json::from_str(&body).map_err(|e| Error::MalformedResponse(format!("{e}: {body}")))
    }
}

impl Backend for RemoteBackend {
    fn model_info(&self) -> Result<ModelInfo> {
        let response = self.client.get(self.url("/v1/model")).send().map_err(|e| self.transport(e))?;
        self.decode(response)
    }

    fn init_population(&self, population: &PopulationSpec) -> Result<Vec<u32>> {
        let request = InitRequest { size: population.size, dropout: population.dropout_rate, seed: population.seed };
        let response =
            self.client.post(self.url("/v1/population/init")).json(&request).send().map_err(|e| self.transport(e))?;
        let init: InitResponse = self.decode(response)?;
        let expected: Vec<u32> = (1..=population.size).collect();
        if init.members != expected {
            return Err(Error::MalformedResponse(format!(
                "population init returned {} members, expected ids 1..={}",
                init.members.len(),
                population.size
            )));
        }
        Ok(init.members)
    }

    fn score(&self, member: u32, instance: &PromptInstance) -> Result<ScoreResponse> {
        let request = ScoreRequest {
            context: instance.rendered_context.clone(),
            continuation: instance.continuation.clone(),
            member,
        };
        let response = self.client.post(self.url("/v1/score")).json(&request).send().map_err(|e| self.transport(e))?;
        if response.status() == StatusCode::NOT_FOUND {
            return Err(Error::UnknownMember(member));
        }
        self.decode(response)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wire_shapes() {
        let req = ScoreRequest { context: "A1 is ".into(), continuation: "best".into(), member: 3 };
        assert_eq!(serde_json::to_string(&req).unwrap(), r#"{"context":"A1 is ","continuation":"best","member":3}"#);
        let init = InitRequest { size: 50, dropout: 0.1, seed: 7 };
        assert_eq!(serde_json::to_string(&init).unwrap(), r#"{"size":50,"dropout":0.1,"seed":7}"#);
        let resp: ScoreResponse = serde_json::from_str(
            r#"{"logprob": -1.5, "tokens": [{"text": "be", "logprob": -1.0}, {"text": "st", "logprob": -0.5}]}"#,
        )
        .unwrap();
        assert!(resp.check().is_ok());
    }

    #[test]
    fn malformed_scores_rejected() {
        let positive = ScoreResponse { logprob: 0.5, tokens: vec![] };
        assert!(matches!(positive.check(), Err(Error::MalformedResponse(_))));
        let mismatch =
            ScoreResponse { logprob: -2.0, tokens: vec![TokenLogprob { text: "best".into(), logprob: -1.0 }] };
        assert!(mismatch.check().is_err());
        let nan = ScoreResponse { logprob: f64::NAN, tokens: vec![] };
        assert!(nan.check().is_err());
    }

    #[test]
    fn unreachable_is_transport_error() {
        let backend = RemoteBackend::new("http://127.0.0.1:9").unwrap();
        let err = backend.model_info().unwrap_err();
        assert!(err.is_retryable(), "{err}");
    }
}
