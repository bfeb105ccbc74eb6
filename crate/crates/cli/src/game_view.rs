//! The `game` subcommand: payoff tables and dominance analysis.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use anyhow::Result;
use serde::Serialize;

use stratpref_core::analysis::{
    dominance_report, iterated_elimination, matrix_row_payoff, pareto_optimal, pure_nash, td_elimination,
    td_payoff_checked, DominanceKind, DominanceReport, Elimination, Profile,
};
use stratpref_core::game::{builtin_game, matrix, Orientation, Payoff, PayoffMatrix, TdGame};
use stratpref_core::GameSpec;

use crate::args::Format;
use crate::Usage;

#[derive(Serialize)]
struct MatrixView {
    matrix: PayoffMatrix,
    dominance: Vec<DominanceReport<String>>,
    elimination: Elimination<String>,
    pure_nash: Vec<Profile>,
    pareto_optimal: Vec<Profile>,
}

#[derive(Serialize)]
struct TdView {
    game: String,
    params: TdGame,
    /// Quotes named by the game's strategies.
    strategies: Vec<(String, i64)>,
    /// `payoffs[i][j]` when strategy i meets strategy j.
    payoffs: Vec<Vec<(i64, i64)>>,
    /// Dominance among the named quotes, against the named quotes.
    dominance: Vec<DominanceReport<i64>>,
    /// Elimination over the full quote range.
    elimination: Elimination<i64>,
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum View {
    Matrix(MatrixView),
    Td(TdView),
}

fn matrix_view(m: PayoffMatrix) -> MatrixView {
    let payoff = matrix_row_payoff(&m);
    let dominance = dominance_report(&m.row_strategies, &m.col_strategies, m.orientation, &payoff);
    let elimination = iterated_elimination(&m.row_strategies, m.orientation, &payoff);
    let (pure_nash, pareto_optimal) = (pure_nash(&m), pareto_optimal(&m));
    drop(payoff);
    MatrixView { matrix: m, dominance, elimination, pure_nash, pareto_optimal }
}

fn td_view(spec: &GameSpec, game: TdGame) -> Result<TdView> {
    let strategies: Vec<(String, i64)> =
        spec.strategies.iter().filter_map(|s| s.value.map(|v| (s.id.clone(), v))).collect();
    let quotes: Vec<i64> = strategies.iter().map(|s| s.1).collect();
    let mut payoffs = Vec::new();
    for &a in &quotes {
        payoffs.push(quotes.iter().map(|&b| td_payoff_checked(a, b, &game)).collect::<Result<Vec<_>, _>>()?);
    }
    let dominance = dominance_report(&quotes, &quotes, Orientation::Maximize, |a, b| {
        td_payoff_checked(*a, *b, &game).map(|p| p.0 as f64).unwrap_or(f64::NAN)
    });
    Ok(TdView {
        game: spec.name.clone(),
        params: game,
        strategies,
        payoffs,
        dominance,
        elimination: td_elimination(&game),
    })
}

fn resolve(name: &str) -> Result<View> {
    if let Ok(m) = matrix(name) {
        return Ok(View::Matrix(matrix_view(m)));
    }
    let spec = match builtin_game(name) {
        Err(_) if Path::new(name).is_file() => GameSpec::load(Path::new(name))?,
        other => other?,
    };
    match spec.payoff.clone() {
        Some(Payoff::Matrix(m)) => Ok(View::Matrix(matrix_view(m))),
        Some(Payoff::Td(td)) => Ok(View::Td(td_view(&spec, td)?)),
        None => Err(Usage(format!("game `{}` has no payoff structure", spec.name)).into()),
    }
}

fn kind_word(kind: DominanceKind) -> &'static str {
    match kind {
        DominanceKind::Strict => "strictly",
        DominanceKind::Weak => "weakly",
    }
}

fn table(out: &mut String, rows: &[String], cols: &[String], cell: impl Fn(usize, usize) -> String) {
    let width = rows
        .iter()
        .chain(cols)
        .map(String::len)
        .chain((0..rows.len()).flat_map(|r| (0..cols.len()).map(move |c| (r, c))).map(|(r, c)| cell(r, c).len()))
        .max()
        .unwrap_or(0)
        + 2;
    let _ = write!(out, "{:width$}", "");
    for c in cols {
        let _ = write!(out, "{c:>width$}");
    }
    out.push('\n');
    for (r, name) in rows.iter().enumerate() {
        let _ = write!(out, "{name:width$}");
        for c in 0..cols.len() {
            let _ = write!(out, "{:>width$}", cell(r, c));
        }
        out.push('\n');
    }
}

fn elimination_text<S: std::fmt::Display>(out: &mut String, e: &Elimination<S>) {
    let join = |xs: &[S]| xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ");
    let _ = writeln!(out, "iterated elimination ({} rounds):", e.trace.len());
    let shown = if e.trace.len() > 12 { 5 } else { e.trace.len() };
    for round in &e.trace[..shown] {
        let _ = writeln!(out, "  round {}: removed {}", round.round, join(&round.removed));
    }
    if shown < e.trace.len() {
        let _ = writeln!(out, "  ...");
        let last = &e.trace[e.trace.len() - 1];
        let _ = writeln!(out, "  round {}: removed {}", last.round, join(&last.removed));
    }
    let _ = writeln!(out, "  survivors: {}", join(&e.survivors));
}

fn dominance_text<S: std::fmt::Display>(out: &mut String, d: &[DominanceReport<S>]) {
    let _ = writeln!(out, "dominance:");
    if d.is_empty() {
        let _ = writeln!(out, "  none");
    }
    for r in d {
        let _ = writeln!(out, "  {} {} dominates {}", r.dominator, kind_word(r.kind), r.dominated);
    }
}

fn profiles(ps: &[Profile]) -> String {
    ps.iter().map(|(a, b)| format!("({a}, {b})")).collect::<Vec<_>>().join(" ")
}

fn render_text(view: &View) -> String {
    let mut out = String::new();
    match view {
        View::Matrix(v) => {
            let m = &v.matrix;
            let goal = match m.orientation {
                Orientation::Maximize => "higher is better",
                Orientation::Minimize => "lower is better",
            };
            let _ = writeln!(out, "{} ({goal})", m.name);
            table(&mut out, &m.row_strategies, &m.col_strategies, |r, c| {
                let (a, b) = m.cells[r][c];
                format!("{a}, {b}")
            });
            dominance_text(&mut out, &v.dominance);
            elimination_text(&mut out, &v.elimination);
            let _ = writeln!(out, "pure nash: {}", profiles(&v.pure_nash));
            let _ = writeln!(out, "pareto optimal: {}", profiles(&v.pareto_optimal));
        }
        View::Td(v) => {
            let p = &v.params;
            let _ = writeln!(out, "{} (quotes {}..={}, penalty {})", v.game, p.quote_min, p.quote_max, p.penalty);
            let names: Vec<String> = v.strategies.iter().map(|s| s.1.to_string()).collect();
            table(&mut out, &names, &names, |r, c| {
                let (a, b) = v.payoffs[r][c];
                format!("{a}, {b}")
            });
            dominance_text(&mut out, &v.dominance);
            elimination_text(&mut out, &v.elimination);
        }
    }
    out
}

pub fn show(name: &str, format: Format) -> Result<()> {
    let view = resolve(name)?;
    match format {
        Format::Json => crate::commands::print_json(&view)?,
        Format::Text => {
            let mut out = std::io::stdout().lock();
            out.write_all(render_text(&view).as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}
