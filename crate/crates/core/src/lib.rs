//! Counterfactual measurement of strategic preferences in language models.
//!
//! The pipeline runs [`game`] specs through [`promptgen`] into prompt
//! instances, scores them with a [`measurement`] backend, and derives
//! verdicts with [`stats`] and [`preference`]. [`analysis`] supplies the
//! game-theoretic reference answers; [`experiment`] and [`report`] wrap it
//! all into reproducible experiment directories.

pub mod analysis;
pub mod error;
pub mod experiment;
pub mod game;
pub mod measurement;
pub mod preference;
pub mod promptgen;
pub mod report;
pub mod stats;

pub use error::{Error, Result};
pub use experiment::{run_experiment, Analysis, ExperimentConfig, Manifest};
pub use game::{EvaluationWord, GameSpec, Sentiment, Strategy};
pub use measurement::{BackendDescriptor, Dataset, MeasurementRecord, MockProfile, PopulationSpec, BASE_MEMBER};
pub use preference::{Decision, PreferenceOutcome, Relation, SpeciesReport, VbpVerdict};
pub use promptgen::{PermutationId, PromptInstance};
pub use stats::{TestResult, WilcoxonKind};
