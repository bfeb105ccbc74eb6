use std::collections::BTreeSet;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::thread;
use std::time::Duration;

use log::{debug, warn};
use serde::{Deserialize, Serialize};

use super::{score, Backend, CellKey, MeasurementRecord, PopulationSpec};
use crate::error::{Error, Result};
use crate::game::Sentiment;
use crate::promptgen::PromptInstance;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub experiment_id: String,
    pub max_in_flight: usize,
    pub max_retries: u32,
    pub retry_backoff: Duration,
}

impl SweepOptions {
    pub fn new(experiment_id: impl Into<String>) -> Self {
        Self {
            experiment_id: experiment_id.into(),
            max_in_flight: 8,
            max_retries: 3,
            retry_backoff: Duration::from_millis(100),
        }
    }
}

/// A set of measurement records in canonical order.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub records: Vec<MeasurementRecord>,
}

impl Dataset {
    pub fn new(mut records: Vec<MeasurementRecord>) -> Self {
        records.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        Self { records }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn keys(&self) -> BTreeSet<CellKey> {
        self.records.iter().map(MeasurementRecord::cell_key).collect()
    }

    pub fn for_game<'a>(&'a self, game: &'a str) -> impl Iterator<Item = &'a MeasurementRecord> + 'a {
        self.records.iter().filter(move |r| r.game == game)
    }

    pub fn select(&self, game: &str, member: u32, sentiment: Sentiment) -> Vec<&MeasurementRecord> {
        self.records.iter().filter(|r| r.game == game && r.member_id == member && r.sentiment == sentiment).collect()
    }

    pub fn members(&self, game: &str) -> BTreeSet<u32> {
        self.for_game(game).map(|r| r.member_id).collect()
    }

    /// Applies `f` to every stored log-probability.
    pub fn map_logprobs(&self, f: impl Fn(f64) -> f64) -> Dataset {
        let records = self.records.iter().map(|r| MeasurementRecord { logprob: f(r.logprob), ..r.clone() }).collect();
        Dataset { records }
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("record serializes"));
            out.push('\n');
        }
        out
    }
}

fn score_with_retries(
    backend: &dyn Backend,
    opts: &SweepOptions,
    member: u32,
    instance: &PromptInstance,
) -> Result<MeasurementRecord> {
    let mut attempt = 0;
    loop {
        match score(backend, &opts.experiment_id, member, instance) {
            Ok(record) => return Ok(record),
            Err(e) if e.is_retryable() && attempt < opts.max_retries => {
                attempt += 1;
                debug!("retry {attempt} for member {member}: {e}");
                thread::sleep(opts.retry_backoff * attempt);
            }
            Err(e) => return Err(e),
        }
    }
}

/// Scores every (member, instance) cell not already present in `existing`.
///
/// Requests run on up to `max_in_flight` worker threads. Transport errors are
/// retried; if any cell is still unscored afterwards the whole sweep fails
/// and nothing is returned, since the statistics need a complete design.
pub fn run_sweep(
    backend: &dyn Backend,
    population: &PopulationSpec,
    instances: &[PromptInstance],
    opts: &SweepOptions,
    existing: Option<&Dataset>,
) -> Result<Dataset> {
    population.validate()?;
    if opts.max_in_flight == 0 {
        return Err(Error::Config("max_in_flight must be at least 1".into()));
    }
    let members = backend.init_population(population)?;
    if members != (1..=population.size).collect::<Vec<_>>() {
        return Err(Error::MalformedResponse("backend registered unexpected member ids".into()));
    }

    let cached = existing.map(Dataset::keys).unwrap_or_default();
    let mut cells: Vec<(u32, &PromptInstance)> = Vec::new();
    for member in population.members() {
        for instance in instances {
            let key = (
                opts.experiment_id.clone(),
                instance.game.clone(),
                member,
                instance.permutation,
                instance.evaluated_strategy.clone(),
                instance.evaluation_word.sentiment,
            );
            if !cached.contains(&key) {
                cells.push((member, instance));
            }
        }
    }
    debug!("{} cells to score, {} cached", cells.len(), cached.len());

    let next = AtomicUsize::new(0);
    let workers = opts.max_in_flight.min(cells.len()).max(1);
    let outcomes: Vec<(usize, Result<MeasurementRecord>)> = thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|_| {
                scope.spawn(|| {
                    let mut local = Vec::new();
                    loop {
                        let i = next.fetch_add(1, Ordering::Relaxed);
                        let Some(&(member, instance)) = cells.get(i) else {
                            break;
                        };
                        local.push((i, score_with_retries(backend, opts, member, instance)));
                    }
                    local
                })
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("sweep worker panicked")).collect()
    });

    let mut records = Vec::with_capacity(outcomes.len());
    let mut failures = Vec::new();
    for (i, outcome) in outcomes {
        match outcome {
            Ok(r) => records.push(r),
            Err(e) => failures.push((i, e)),
        }
    }
    if !failures.is_empty() {
        failures.sort_by_key(|(i, _)| *i);
        let (i, err) = &failures[0];
        let (member, instance) = cells[*i];
        warn!("{} cells failed; first: {err}", failures.len());
        return Err(Error::SweepIncomplete {
            missing: failures.len(),
            total: cells.len(),
            first: format!(
                "member {member}, {} {:?} {} ({}): {err}",
                instance.game, instance.permutation, instance.evaluated_strategy, instance.evaluation_word.sentiment
            ),
        });
    }

    if let Some(existing) = existing {
        records.extend(existing.records.iter().cloned());
    }
    Ok(Dataset::new(records))
}
