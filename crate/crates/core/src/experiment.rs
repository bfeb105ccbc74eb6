//! Batch runner: config, sweep, analysis and on-disk experiment layout.
//!
//! An experiment directory holds
//!
//! ```text
//! manifest.json          config, config hash, resolved backend, store digest
//! store.jsonl            every MeasurementRecord, canonical order
//! species_report.json    VBP / brittleness / label sensitivity per valued game
//! relations.json         preference relations per game
//! vbp.csv, species.csv, relations.csv
//! rho_<game>.svg         member rho scatter per valued game
//! ```
//!
//! The manifest is written last; its presence marks a completed run.

use std::fs;
use std::path::{Path, PathBuf};

use log::{info, warn};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::game::{builtin_game, EvaluationWord, GameSpec};
use crate::measurement::{
    read_jsonl, run_sweep, write_jsonl_atomic, BackendDescriptor, Dataset, MeasurementRecord, PopulationSpec,
    SweepOptions, BASE_MEMBER,
};
use crate::preference::{
    relation_matrix, species_report, PreferenceOutcome, SpeciesReport, DEFAULT_ALPHA, DEFAULT_THRESHOLD,
};
use crate::promptgen::expand_all;
use crate::report;
use crate::stats::WilcoxonKind;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const STORE_FILE: &str = "store.jsonl";
pub const SPECIES_FILE: &str = "species_report.json";
pub const RELATIONS_FILE: &str = "relations.json";

fn default_alpha() -> f64 {
    DEFAULT_ALPHA
}

fn default_threshold() -> f64 {
    DEFAULT_THRESHOLD
}

fn default_in_flight() -> usize {
    8
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment_id: String,
    /// Built-in game names or paths to game spec JSON files.
    pub games: Vec<String>,
    /// Replaces every game's evaluation words when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evaluation_words: Option<Vec<EvaluationWord>>,
    pub backend: BackendDescriptor,
    pub population: PopulationSpec,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default)]
    pub test: WilcoxonKind,
    #[serde(default = "default_in_flight")]
    pub max_in_flight: usize,
    pub out: PathBuf,
}

#[derive(Serialize)]
struct SemanticFields<'a> {
    experiment_id: &'a str,
    games: &'a [GameSpec],
    backend: &'a BackendDescriptor,
    population: &'a PopulationSpec,
    alpha: f64,
    threshold: f64,
    test: WilcoxonKind,
}

impl ExperimentConfig {
    pub fn from_json(json: &str) -> Result<Self> {
        serde_json::from_str(json).map_err(|e| Error::Config(format!("parsing config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        Self::from_json(&text)
    }

    /// Resolves game names, applying any evaluation-word override.
    pub fn resolve_games(&self) -> Result<Vec<GameSpec>> {
        if self.games.is_empty() {
            return Err(Error::Config("at least one game is required".into()));
        }
        let mut specs = Vec::new();
        for name in &self.games {
            let mut spec = match builtin_game(name) {
                Ok(spec) => spec,
                Err(Error::UnknownGame(_)) if Path::new(name).is_file() => GameSpec::load(Path::new(name))?,
                Err(e) => return Err(e),
            };
            if let Some(words) = &self.evaluation_words {
                spec.evaluation_words = words.clone();
                spec.validate()?;
            }
            if specs.iter().any(|s: &GameSpec| s.name == spec.name) {
                return Err(Error::Config(format!("game `{}` listed twice", spec.name)));
            }
            specs.push(spec);
        }
        Ok(specs)
    }

    pub fn validate(&self) -> Result<Vec<GameSpec>> {
        if self.experiment_id.trim().is_empty() {
            return Err(Error::Config("experiment_id must not be empty".into()));
        }
        for (name, v) in [("alpha", self.alpha), ("threshold", self.threshold)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Config(format!("{name} must lie in (0, 1), got {v}")));
            }
        }
        if self.max_in_flight == 0 {
            return Err(Error::Config("max_in_flight must be at least 1".into()));
        }
        self.population.validate()?;
        self.backend.validate()?;
        self.resolve_games()
    }

    /// SHA-256 over every field that affects measurements or verdicts.
    /// Output location and concurrency are excluded.
    pub fn hash(&self) -> Result<String> {
        let games = self.resolve_games()?;
        let fields = SemanticFields {
            experiment_id: &self.experiment_id,
            games: &games,
            backend: &self.backend,
            population: &self.population,
            alpha: self.alpha,
            threshold: self.threshold,
            test: self.test,
        };
        let bytes = serde_json::to_vec(&fields).map_err(|e| Error::json("hashing config", e))?;
        Ok(hex::encode(Sha256::digest(&bytes)))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub experiment_id: String,
    pub config_hash: String,
    pub config: ExperimentConfig,
    /// Backend with model name and size as reported at run time.
    pub backend: BackendDescriptor,
    pub games: Vec<String>,
    pub record_count: usize,
    pub store_sha256: String,
    pub tool_version: String,
}

impl Manifest {
    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        serde_json::from_str(&text).map_err(|e| Error::json(format!("parsing {}", path.display()), e))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOptions {
    pub alpha: f64,
    pub threshold: f64,
    pub test: WilcoxonKind,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self { alpha: DEFAULT_ALPHA, threshold: DEFAULT_THRESHOLD, test: WilcoxonKind::RankSum }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameRelations {
    pub game: String,
    /// Members whose measurements were pooled into the tests.
    pub members: Vec<u32>,
    pub outcomes: Vec<PreferenceOutcome>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub species: Vec<SpeciesReport>,
    pub relations: Vec<GameRelations>,
}

fn has_values(spec: &GameSpec) -> bool {
    spec.strategies.iter().all(|s| s.value.is_some())
}

/// Derives every verdict and relation from a committed dataset.
///
/// Relations pool the population members (ids above 0), falling back to the
/// base model when no population was scored. Species reports cover games
/// whose strategies carry values and need the base model.
pub fn analyze(
    dataset: &Dataset,
    games: &[GameSpec],
    model_name: &str,
    param_count: u64,
    opts: AnalysisOptions,
) -> Result<Analysis> {
    let records: Vec<&MeasurementRecord> = dataset.records.iter().collect();
    let mut species = Vec::new();
    let mut relations = Vec::new();
    for spec in games {
        let present = dataset.members(&spec.name);
        if present.is_empty() {
            return Err(Error::IncompleteDesign(format!("no records for `{}`", spec.name)));
        }
        let population: Vec<u32> = present.iter().copied().filter(|m| *m != BASE_MEMBER).collect();
        let members = if population.is_empty() { vec![BASE_MEMBER] } else { population };
        relations.push(GameRelations {
            game: spec.name.clone(),
            outcomes: relation_matrix(&records, spec, &members, opts.alpha, opts.test)?,
            members,
        });
        if has_values(spec) {
            if present.contains(&BASE_MEMBER) {
                species.push(species_report(&records, spec, model_name, param_count, opts.threshold)?);
            } else {
                warn!("no base-model records for `{}`; species report skipped", spec.name);
            }
        }
    }
    Ok(Analysis { species, relations })
}

#[derive(Clone, Debug)]
pub struct ExperimentOutcome {
    pub dir: PathBuf,
    pub manifest: Manifest,
    pub dataset: Dataset,
    pub analysis: Analysis,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut body =
        serde_json::to_vec_pretty(value).map_err(|e| Error::json(format!("encoding {}", path.display()), e))?;
    body.push(b'\n');
    crate::measurement::write_atomic(path, &body)
}

/// Reads a completed experiment back from disk.
pub fn load_experiment(dir: &Path) -> Result<(Manifest, Dataset)> {
    let manifest = Manifest::load(dir)?;
    let records: Vec<MeasurementRecord> = read_jsonl(&dir.join(STORE_FILE))?;
    Ok((manifest, Dataset::new(records)))
}

/// Runs (or resumes) an experiment and writes its directory.
///
/// A directory with a manifest is complete and is only replaced when
/// `overwrite` is set. When the old manifest has the same config hash its
/// store seeds the sweep cache, so no cell is scored twice.
pub fn run_experiment(config: &ExperimentConfig, overwrite: bool) -> Result<ExperimentOutcome> {
    let games = config.validate()?;
    let hash = config.hash()?;
    let dir = config.out.clone();
    let manifest_path = dir.join(MANIFEST_FILE);

    let mut cache = None;
    if manifest_path.exists() {
        if !overwrite {
            return Err(Error::AlreadyCompleted(dir));
        }
        match load_experiment(&dir) {
            Ok((old, ds)) if old.config_hash == hash => cache = Some(ds),
            Ok(_) => info!("config changed; previous store in {} discarded", dir.display()),
            Err(e) => warn!("previous experiment unreadable, rescoring: {e}"),
        }
    }

    let mut descriptor = config.backend.clone();
    let backend = descriptor.connect()?;
    let mut instances = Vec::new();
    for spec in &games {
        instances.extend(expand_all(spec)?);
    }
    let opts = SweepOptions { max_in_flight: config.max_in_flight, ..SweepOptions::new(config.experiment_id.clone()) };
    let dataset = run_sweep(backend.as_ref(), &config.population, &instances, &opts, cache.as_ref())?;
    info!("{} records scored for {}", dataset.len(), config.experiment_id);

    let analysis = analyze(
        &dataset,
        &games,
        &descriptor.model_name,
        descriptor.param_count,
        AnalysisOptions { alpha: config.alpha, threshold: config.threshold, test: config.test },
    )?;

    if manifest_path.exists() {
        fs::remove_file(&manifest_path).map_err(|e| Error::io(format!("removing {}", manifest_path.display()), e))?;
    }
    let store_path = dir.join(STORE_FILE);
    write_jsonl_atomic(&store_path, &dataset.records)?;
    write_json(&dir.join(SPECIES_FILE), &analysis.species)?;
    write_json(&dir.join(RELATIONS_FILE), &analysis.relations)?;
    report::write_tables(&dir, &analysis)?;

    let store_bytes = fs::read(&store_path).map_err(|e| Error::io(format!("reading {}", store_path.display()), e))?;
    let manifest = Manifest {
        experiment_id: config.experiment_id.clone(),
        config_hash: hash,
        config: config.clone(),
        backend: descriptor,
        games: games.iter().map(|g| g.name.clone()).collect(),
        record_count: dataset.len(),
        store_sha256: hex::encode(Sha256::digest(&store_bytes)),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
    };
    write_json(&manifest_path, &manifest)?;
    Ok(ExperimentOutcome { dir, manifest, dataset, analysis })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::MockProfile;
    use crate::preference::Relation;
    use std::collections::BTreeMap;

    fn config(out: &Path, games: &[&str], profile: MockProfile, size: u32) -> ExperimentConfig {
        ExperimentConfig {
            experiment_id: "test".into(),
            games: games.iter().map(|g| g.to_string()).collect(),
            evaluation_words: None,
            backend: BackendDescriptor::mock("mock-1b", 1_000_000_000, profile),
            population: PopulationSpec::new(size, 0.1, 7),
            alpha: 0.05,
            threshold: 0.3,
            test: WilcoxonKind::RankSum,
            max_in_flight: 4,
            out: out.to_path_buf(),
        }
    }

    #[test]
    fn value_agent_end_to_end() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("run");
        let cfg = config(&out, &["value_rank"], MockProfile::value_agent(0.1, 1), 10);
        let result = run_experiment(&cfg, false).unwrap();
        assert_eq!(result.dataset.len(), 11 * 216);
        assert!(result.analysis.species[0].base_verdict.has_vbp);
        for file in
            [MANIFEST_FILE, STORE_FILE, SPECIES_FILE, RELATIONS_FILE, "vbp.csv", "relations.csv", "rho_value_rank.svg"]
        {
            assert!(out.join(file).is_file(), "{file} missing");
        }
        let (manifest, ds) = load_experiment(&out).unwrap();
        assert_eq!(manifest.record_count, ds.len());
        assert_eq!(ds, result.dataset);
    }

    #[test]
    fn refuses_overwrite_and_reuses_cache() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("run");
        let cfg = config(&out, &["pd_low_stakes"], MockProfile::value_agent(0.1, 1), 3);
        let first = run_experiment(&cfg, false).unwrap();
        assert!(matches!(run_experiment(&cfg, false), Err(Error::AlreadyCompleted(_))));
        let second = run_experiment(&cfg, true).unwrap();
        assert_eq!(first.dataset, second.dataset);
        assert_eq!(first.manifest, second.manifest);
    }

    #[test]
    fn unknown_game_writes_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("run");
        let cfg = config(&out, &["chess"], MockProfile::value_agent(0.1, 1), 3);
        let err = run_experiment(&cfg, false).unwrap_err();
        assert!(err.is_validation(), "{err}");
        assert!(!out.exists());
    }

    #[test]
    fn hash_tracks_semantic_fields_only() {
        let base = config(Path::new("a"), &["value_rank"], MockProfile::value_agent(0.1, 1), 3);
        let h = base.hash().unwrap();
        let mut moved = base.clone();
        moved.out = PathBuf::from("b");
        moved.max_in_flight = 1;
        assert_eq!(moved.hash().unwrap(), h);
        let mut changed = base.clone();
        changed.population.seed = 8;
        assert_ne!(changed.hash().unwrap(), h);
        let mut changed = base.clone();
        changed.alpha = 0.01;
        assert_ne!(changed.hash().unwrap(), h);
        let mut changed = base;
        changed.backend.mock_profile.as_mut().unwrap().beta = 0.2;
        assert_ne!(changed.hash().unwrap(), h);
    }

    #[test]
    fn config_validation() {
        let mut cfg = config(Path::new("x"), &["value_rank"], MockProfile::value_agent(0.1, 1), 3);
        assert!(cfg.validate().is_ok());
        cfg.alpha = 1.0;
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        cfg.alpha = 0.05;
        cfg.games.push("value_rank".into());
        assert!(cfg.validate().is_err());
        cfg.games.pop();
        cfg.evaluation_words = Some(vec![EvaluationWord::best()]);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn cooperative_agent_prefers_silent() {
        let dir = tempfile::tempdir().unwrap();
        let values = BTreeMap::from([("silent".to_string(), 10.0), ("betray".to_string(), 0.0)]);
        let profile = MockProfile::noisy_population_agent(0.1, 0.02, 4).with_strategy_values(values);
        let cfg = config(&dir.path().join("pd"), &["pd_low_stakes"], profile, 10);
        let result = run_experiment(&cfg, false).unwrap();
        let outcome = &result.analysis.relations[0].outcomes[0];
        assert_eq!(outcome.right, "silent");
        assert_eq!(outcome.relation, Relation::StrictRight);
        assert!(result.analysis.species.is_empty());
    }

    #[test]
    fn config_json_defaults() {
        let json = r#"{
            "experiment_id": "x",
            "games": ["value_rank"],
            "backend": {"kind": "remote", "endpoint": "http://localhost:8000"},
            "population": {"size": 50, "dropout_rate": 0.1, "seed": 0},
            "out": "runs/x"
        }"#;
        let cfg = ExperimentConfig::from_json(json).unwrap();
        assert_eq!((cfg.alpha, cfg.threshold, cfg.max_in_flight), (0.05, 0.3, 8));
        assert!(cfg.population.include_base);
        assert!(cfg.validate().is_ok());
    }
}
