use std::collections::BTreeMap;
use std::fs;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use log::info;
use serde::{Deserialize, Serialize};

use stratpref_core::experiment::{analyze, load_experiment, AnalysisOptions};
use stratpref_core::game::{builtin_game, builtin_games};
use stratpref_core::measurement::write_jsonl_atomic;
use stratpref_core::promptgen::expand_all;
use stratpref_core::report::{write_registry, write_tables, SpeciesRegistryEntry};
use stratpref_core::stats::exact_perm_oracle;
use stratpref_core::{
    run_experiment, Analysis, BackendDescriptor, ExperimentConfig, GameSpec, Manifest, PromptInstance, WilcoxonKind,
};

use crate::args::{Cli, Command, Global, TestArg};
use crate::{game_view, Usage};

pub fn dispatch(cli: Cli) -> Result<()> {
    let g = cli.global;
    match cli.command {
        Command::Generate { games } => generate(&g, &games),
        Command::Run { overwrite, games, test } => run(&g, overwrite, &games, test),
        Command::Stats { dir, test } => stats(&g, &dir, test),
        Command::Report { dirs } => report(&g, &dirs),
        Command::Game { name, format } => game_view::show(&name, format),
        Command::Oracle { input } => oracle(input.as_deref()),
    }
}

pub fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

fn check_unit(name: &str, v: Option<f64>) -> Result<()> {
    match v {
        Some(v) if !(v > 0.0 && v < 1.0) => Err(Usage(format!("--{name} must lie in (0, 1), got {v}")).into()),
        _ => Ok(()),
    }
}

/// Loads the config, resolving game spec paths against the config's directory.
fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let mut config = ExperimentConfig::load(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    for game in &mut config.games {
        let local = base.join(&*game);
        if builtin_game(game).is_err() && !Path::new(game).is_file() && local.is_file() {
            *game = local.to_string_lossy().into_owned();
        }
    }
    Ok(config)
}

fn resolve_games(names: &[String]) -> Result<Vec<GameSpec>> {
    names
        .iter()
        .map(|name| match builtin_game(name) {
            Err(_) if Path::new(name).is_file() => Ok(GameSpec::load(Path::new(name))?),
            other => Ok(other?),
        })
        .collect()
}

fn generate(g: &Global, names: &[String]) -> Result<()> {
    let games = if !names.is_empty() {
        resolve_games(names)?
    } else if let Some(path) = &g.config {
        load_config(path)?.resolve_games()?
    } else {
        builtin_games()
    };
    let mut instances: Vec<PromptInstance> = Vec::new();
    for spec in &games {
        instances.extend(expand_all(spec)?);
    }
    match &g.out {
        Some(path) => {
            write_jsonl_atomic(path, &instances)?;
            info!("wrote {} instances to {}", instances.len(), path.display());
        }
        None => {
            let mut out = BufWriter::new(io::stdout().lock());
            for inst in &instances {
                serde_json::to_writer(&mut out, inst)?;
                out.write_all(b"\n")?;
            }
            out.flush()?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct SpeciesSummary<'a> {
    game: &'a str,
    model_name: &'a str,
    rho_pos: f64,
    rho_neg: f64,
    has_vbp: bool,
    self_consistent: bool,
    population_median_rho: f64,
    population_has_vbp: bool,
    brittle: bool,
    label_p_value: f64,
}

#[derive(Serialize)]
struct RunSummary<'a> {
    dir: &'a Path,
    experiment_id: &'a str,
    config_hash: &'a str,
    record_count: usize,
    species: Vec<SpeciesSummary<'a>>,
}

fn apply_overrides(config: &mut ExperimentConfig, g: &Global, games: &[String], test: Option<TestArg>) -> Result<()> {
    check_unit("alpha", g.alpha)?;
    check_unit("threshold", g.threshold)?;
    if let Some(url) = &g.backend_url {
        let mut backend = BackendDescriptor::remote(url.clone());
        // Keep a configured name and size; the server fills in blanks.
        backend.model_name = config.backend.model_name.clone();
        backend.param_count = config.backend.param_count;
        config.backend = backend;
    }
    if let Some(n) = g.population {
        config.population.size = n;
    }
    if let Some(seed) = g.seed {
        config.population.seed = seed;
    }
    if let Some(a) = g.alpha {
        config.alpha = a;
    }
    if let Some(t) = g.threshold {
        config.threshold = t;
    }
    if let Some(out) = &g.out {
        config.out = out.clone();
    }
    if let Some(k) = g.max_in_flight {
        config.max_in_flight = k;
    }
    if !games.is_empty() {
        config.games = games.to_vec();
    }
    if let Some(t) = test {
        config.test = t.into();
    }
    Ok(())
}

fn run(g: &Global, overwrite: bool, games: &[String], test: Option<TestArg>) -> Result<()> {
    let path = g.config.as_ref().ok_or_else(|| Usage("`run` needs --config".into()))?;
    let mut config = load_config(path).with_context(|| format!("loading {}", path.display()))?;
    apply_overrides(&mut config, g, games, test)?;
    let outcome = run_experiment(&config, overwrite)?;
    let summary = RunSummary {
        dir: &outcome.dir,
        experiment_id: &outcome.manifest.experiment_id,
        config_hash: &outcome.manifest.config_hash,
        record_count: outcome.manifest.record_count,
        species: outcome
            .analysis
            .species
            .iter()
            .map(|s| SpeciesSummary {
                game: &s.game,
                model_name: &s.model_name,
                rho_pos: s.base_verdict.rho_pos,
                rho_neg: s.base_verdict.rho_neg,
                has_vbp: s.base_verdict.has_vbp,
                self_consistent: s.base_verdict.self_consistent,
                population_median_rho: s.population_median_rho,
                population_has_vbp: s.population_has_vbp,
                brittle: s.brittle,
                label_p_value: s.label_sensitivity.p_value,
            })
            .collect(),
    };
    print_json(&summary)?;
    Ok(())
}

fn analysis_options(g: &Global, manifest: &Manifest, test: Option<TestArg>) -> Result<AnalysisOptions> {
    Ok(AnalysisOptions {
        alpha: g.alpha.unwrap_or(manifest.config.alpha),
        threshold: g.threshold.unwrap_or(manifest.config.threshold),
        test: test.map(WilcoxonKind::from).unwrap_or(manifest.config.test),
    })
}

fn reanalyze(dir: &Path, opts: impl FnOnce(&Manifest) -> Result<AnalysisOptions>) -> Result<(Manifest, Analysis)> {
    let (manifest, dataset) = load_experiment(dir).with_context(|| format!("reading experiment {}", dir.display()))?;
    let opts = opts(&manifest)?;
    let games = manifest.config.resolve_games()?;
    let analysis = analyze(&dataset, &games, &manifest.backend.model_name, manifest.backend.param_count, opts)?;
    Ok((manifest, analysis))
}

fn stats(g: &Global, dir: &Path, test: Option<TestArg>) -> Result<()> {
    check_unit("alpha", g.alpha)?;
    check_unit("threshold", g.threshold)?;
    let (_, analysis) = reanalyze(dir, |m| analysis_options(g, m, test))?;
    print_json(&analysis)?;
    Ok(())
}

fn report(g: &Global, dirs: &[PathBuf]) -> Result<()> {
    check_unit("alpha", g.alpha)?;
    check_unit("threshold", g.threshold)?;
    let mut registry: BTreeMap<String, Vec<SpeciesRegistryEntry>> = BTreeMap::new();
    let mut threshold = g.threshold;
    for dir in dirs {
        let (manifest, analysis) = reanalyze(dir, |m| analysis_options(g, m, None))?;
        threshold.get_or_insert(manifest.config.threshold);
        write_tables(dir, &analysis)?;
        info!("tables written to {}", dir.display());
        for s in &analysis.species {
            registry.entry(s.game.clone()).or_default().push(SpeciesRegistryEntry::from(s));
        }
    }
    if dirs.len() < 3 {
        return Ok(());
    }
    let out = g.out.clone().unwrap_or_else(|| PathBuf::from("registry"));
    let threshold = threshold.unwrap_or(stratpref_core::preference::DEFAULT_THRESHOLD);
    let mut correlations = BTreeMap::new();
    for (game, entries) in &registry {
        if entries.len() < 3 {
            log::warn!("`{game}` has {} species; size correlation skipped", entries.len());
            continue;
        }
        let dir = out.join(game);
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        correlations.insert(game.clone(), write_registry(&dir, entries, threshold)?);
    }
    print_json(&correlations)?;
    Ok(())
}

#[derive(Deserialize)]
struct OracleInput {
    a: Vec<f64>,
    b: Vec<f64>,
}

fn oracle(input: Option<&Path>) -> Result<()> {
    let reader: Box<dyn BufRead> = match input {
        Some(path) => {
            Box::new(BufReader::new(fs::File::open(path).with_context(|| format!("opening {}", path.display()))?))
        }
        None => Box::new(io::stdin().lock()),
    };
    let mut out = BufWriter::new(io::stdout().lock());
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row: OracleInput = serde_json::from_str(&line).map_err(|e| Usage(format!("line {}: {e}", i + 1)))?;
        let result = exact_perm_oracle(&row.a, &row.b).map_err(|e| Usage(format!("line {}: {e}", i + 1)))?;
        serde_json::to_writer(&mut out, &result)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}
