//! CSV tables, SVG scatter plots and the cross-species size analysis.
//!
//! Everything here is a pure view over analysed data; numbers are printed
//! with Rust's shortest round-trip float formatting so files are stable.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiment::Analysis;
use crate::measurement::write_atomic;
use crate::preference::{SpeciesReport, VbpVerdict};
use crate::stats::{spearman, StatsError};

pub fn vbp_csv(species: &[SpeciesReport]) -> String {
    let mut out = String::from("game,model_name,member_id,rho_pos,rho_neg,has_vbp,self_consistent\n");
    let mut row = |game: &str, model: &str, member: u32, v: &VbpVerdict| {
        let _ =
            writeln!(out, "{game},{model},{member},{},{},{},{}", v.rho_pos, v.rho_neg, v.has_vbp, v.self_consistent);
    };
    for s in species {
        row(&s.game, &s.model_name, 0, &s.base_verdict);
        for (id, v) in s.member_ids.iter().zip(&s.member_verdicts) {
            row(&s.game, &s.model_name, *id, v);
        }
    }
    out
}

pub fn species_csv(species: &[SpeciesReport]) -> String {
    let mut out = String::from(
        "game,model_name,param_count,base_rho_pos,base_rho_neg,base_has_vbp,base_self_consistent,\
         population_median_rho,population_has_vbp,brittle,label_h,label_p\n",
    );
    for s in species {
        let b = &s.base_verdict;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            s.game,
            s.model_name,
            s.param_count,
            b.rho_pos,
            b.rho_neg,
            b.has_vbp,
            b.self_consistent,
            s.population_median_rho,
            s.population_has_vbp,
            s.brittle,
            s.label_sensitivity.statistic,
            s.label_sensitivity.p_value
        );
    }
    out
}

fn name<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v).ok().and_then(|j| j.as_str().map(str::to_string)).unwrap_or_default()
}

pub fn relations_csv(analysis: &Analysis) -> String {
    let mut out = String::from(
        "game,left,right,relation,pos_decision,neg_decision,pos_statistic,pos_p,neg_statistic,neg_p,alpha\n",
    );
    for g in &analysis.relations {
        for o in &g.outcomes {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                g.game,
                o.left,
                o.right,
                name(&o.relation),
                name(&o.pos_decision),
                name(&o.neg_decision),
                o.pos_test.statistic,
                o.pos_test.p_value,
                o.neg_test.statistic,
                o.neg_test.p_value,
                o.alpha
            );
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Marker {
    Dot,
    Star,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
    pub marker: Marker,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScatterPlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub points: Vec<Point>,
    /// Dashed horizontal guide, e.g. the VBP threshold.
    pub hline: Option<f64>,
    /// Fixed y range; derived from the data when unset.
    pub y_range: Option<(f64, f64)>,
    /// Categorical x tick labels at the given positions.
    pub x_ticks: Vec<(f64, String)>,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 70.0;

fn padded_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values.filter(|v| v.is_finite()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = (hi - lo) * 0.05;
    (lo - pad, hi + pad)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn star_path(cx: f64, cy: f64, r: f64) -> String {
    let mut d = String::new();
    for i in 0..10 {
        let radius = if i % 2 == 0 { r } else { r * 0.45 };
        let angle = std::f64::consts::PI * (i as f64) / 5.0 - std::f64::consts::FRAC_PI_2;
        let (x, y) = (cx + radius * angle.cos(), cy + radius * angle.sin());
        let _ = write!(d, "{}{x:.2},{y:.2} ", if i == 0 { "M" } else { "L" });
    }
    d.push('Z');
    d
}

impl ScatterPlot {
    pub fn to_svg(&self) -> String {
        let (x0, x1) = padded_range(self.points.iter().map(|p| p.x).chain(self.x_ticks.iter().map(|t| t.0)));
        let (y0, y1) = self.y_range.unwrap_or_else(|| padded_range(self.points.iter().map(|p| p.y).chain(self.hline)));
        let plot_w = WIDTH - LEFT - RIGHT;
        let plot_h = HEIGHT - TOP - BOTTOM;
        let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * plot_w;
        let sy = |y: f64| TOP + (y1 - y) / (y1 - y0) * plot_h;

        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            svg,
            r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
        );
        for i in 0..=4 {
            let y = y0 + (y1 - y0) * f64::from(i) / 4.0;
            let _ =
                writeln!(svg, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{y:.2}</text>"#, LEFT - 6.0, sy(y) + 4.0);
        }
        if self.x_ticks.is_empty() {
            for i in 0..=4 {
                let x = x0 + (x1 - x0) * f64::from(i) / 4.0;
                let _ = writeln!(
                    svg,
                    r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{x:.2}</text>"#,
                    sx(x),
                    TOP + plot_h + 16.0
                );
            }
        } else {
            for (x, label) in &self.x_ticks {
                let _ = writeln!(
                    svg,
                    r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                    sx(*x),
                    TOP + plot_h + 16.0,
                    escape(label)
                );
            }
        }
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            LEFT + plot_w / 2.0,
            HEIGHT - 20.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            svg,
            r#"<text transform="translate(18 {:.2}) rotate(-90)" text-anchor="middle">{}</text>"#,
            TOP + plot_h / 2.0,
            escape(&self.y_label)
        );
        if let Some(h) = self.hline {
            let _ = writeln!(
                svg,
                r#"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="grey" stroke-dasharray="6 4"/>"#,
                LEFT + plot_w,
                y = sy(h)
            );
        }
        for p in self.points.iter().filter(|p| p.x.is_finite() && p.y.is_finite()) {
            match p.marker {
                Marker::Dot => {
                    let _ = writeln!(
                        svg,
                        r##"<circle cx="{:.2}" cy="{:.2}" r="3" fill="#1f77b4" fill-opacity="0.6"/>"##,
                        sx(p.x),
                        sy(p.y)
                    );
                }
                Marker::Star => {
                    let _ = writeln!(
                        svg,
                        r##"<path d="{}" fill="#d62728" stroke="black" stroke-width="0.5"/>"##,
                        star_path(sx(p.x), sy(p.y), 8.0)
                    );
                }
            }
        }
        svg.push_str("</svg>\n");
        svg
    }
}

/// Member `rho_pos` against member id, base model as a star at 0.
pub fn member_rho_plot(species: &SpeciesReport) -> ScatterPlot {
    let mut points = vec![Point { x: 0.0, y: species.base_verdict.rho_pos, marker: Marker::Star }];
    points.extend(species.member_ids.iter().zip(&species.member_verdicts).map(|(id, v)| Point {
        x: f64::from(*id),
        y: v.rho_pos,
        marker: Marker::Dot,
    }));
    ScatterPlot {
        title: format!("{} / {}: value-preference correlation", species.model_name, species.game),
        x_label: "member (0 = base model)".into(),
        y_label: "Spearman rho (positive word)".into(),
        points,
        hline: Some(species.threshold),
        y_range: Some((-1.05, 1.05)),
        x_ticks: Vec::new(),
    }
}

/// Writes the per-experiment CSV tables and plots into `dir`.
pub fn write_tables(dir: &Path, analysis: &Analysis) -> Result<()> {
    write_atomic(&dir.join("vbp.csv"), vbp_csv(&analysis.species).as_bytes())?;
    write_atomic(&dir.join("species.csv"), species_csv(&analysis.species).as_bytes())?;
    write_atomic(&dir.join("relations.csv"), relations_csv(analysis).as_bytes())?;
    for s in &analysis.species {
        let name = format!("rho_{}.svg", s.game);
        write_atomic(&dir.join(name), member_rho_plot(s).to_svg().as_bytes())?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpeciesRegistryEntry {
    pub model_name: String,
    pub param_count: u64,
    pub base_rho_pos: f64,
    pub member_rho_pos: Vec<f64>,
    pub label_statistic: f64,
    pub label_p_value: f64,
}

impl From<&SpeciesReport> for SpeciesRegistryEntry {
    fn from(s: &SpeciesReport) -> Self {
        Self {
            model_name: s.model_name.clone(),
            param_count: s.param_count,
            base_rho_pos: s.base_verdict.rho_pos,
            member_rho_pos: s.member_verdicts.iter().map(|v| v.rho_pos).collect(),
            label_statistic: s.label_sensitivity.statistic,
            label_p_value: s.label_sensitivity.p_value,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SizeCorrelation {
    pub n_species: usize,
    /// log10 size against base-model rho_pos.
    pub rho_size_vbp: f64,
    /// log10 size against the label-sensitivity H statistic.
    pub rho_size_label: f64,
    /// log10 size against member rho_pos, pooling every (species, member) pair.
    pub rho_size_population: Option<f64>,
}

fn log_size(entry: &SpeciesRegistryEntry) -> Result<f64> {
    if entry.param_count == 0 {
        return Err(Error::Config(format!("species `{}` has no parameter count", entry.model_name)));
    }
    Ok((entry.param_count as f64).log10())
}

fn size_rho(x: &[f64], y: &[f64]) -> Result<f64> {
    match spearman(x, y) {
        Ok(c) => Ok(c.rho),
        Err(StatsError::Undefined(reason)) => Err(Error::Config(format!("size correlation is degenerate: {reason}"))),
        Err(e) => Err(e.into()),
    }
}

pub fn size_correlation(registry: &[SpeciesRegistryEntry]) -> Result<SizeCorrelation> {
    if registry.len() < 3 {
        return Err(Error::Config(format!("size correlation needs at least 3 species, got {}", registry.len())));
    }
    let sizes = registry.iter().map(log_size).collect::<Result<Vec<_>>>()?;
    let base: Vec<f64> = registry.iter().map(|e| e.base_rho_pos).collect();
    let label: Vec<f64> = registry.iter().map(|e| e.label_statistic).collect();
    let mut pooled_x = Vec::new();
    let mut pooled_y = Vec::new();
    for (size, e) in sizes.iter().zip(registry) {
        for rho in &e.member_rho_pos {
            pooled_x.push(*size);
            pooled_y.push(*rho);
        }
    }
    Ok(SizeCorrelation {
        n_species: registry.len(),
        rho_size_vbp: size_rho(&sizes, &base)?,
        rho_size_label: size_rho(&sizes, &label)?,
        rho_size_population: spearman(&pooled_x, &pooled_y).ok().map(|c| c.rho),
    })
}

pub fn registry_csv(registry: &[SpeciesRegistryEntry]) -> String {
    let mut out = String::from(
        "model_name,param_count,log10_params,base_rho_pos,median_member_rho_pos,label_statistic,label_p_value\n",
    );
    for e in registry {
        let median = crate::preference::median(&e.member_rho_pos).unwrap_or(f64::NAN);
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            e.model_name,
            e.param_count,
            (e.param_count as f64).log10(),
            e.base_rho_pos,
            median,
            e.label_statistic,
            e.label_p_value
        );
    }
    out
}

fn size_plot(
    registry: &[SpeciesRegistryEntry],
    title: &str,
    y_label: &str,
    y: impl Fn(&SpeciesRegistryEntry) -> f64,
) -> ScatterPlot {
    ScatterPlot {
        title: title.into(),
        x_label: "log10(parameters)".into(),
        y_label: y_label.into(),
        points: registry
            .iter()
            .map(|e| Point { x: (e.param_count as f64).log10(), y: y(e), marker: Marker::Star })
            .collect(),
        ..ScatterPlot::default()
    }
}

/// Panel with one column per species ordered by size, members as
/// dots, base model as a star, threshold as a dashed line.
pub fn species_panel(registry: &[SpeciesRegistryEntry], threshold: f64) -> ScatterPlot {
    let mut order: Vec<&SpeciesRegistryEntry> = registry.iter().collect();
    order.sort_by_key(|e| e.param_count);
    let mut points = Vec::new();
    let mut ticks = Vec::new();
    for (i, e) in order.iter().enumerate() {
        let x = i as f64;
        ticks.push((x, e.model_name.clone()));
        points.extend(e.member_rho_pos.iter().map(|&y| Point { x, y, marker: Marker::Dot }));
        points.push(Point { x, y: e.base_rho_pos, marker: Marker::Star });
    }
    ScatterPlot {
        title: "Value-preference correlation by species".into(),
        x_label: "species (by size)".into(),
        y_label: "Spearman rho (positive word)".into(),
        points,
        hline: Some(threshold),
        y_range: Some((-1.05, 1.05)),
        x_ticks: ticks,
    }
}

/// Writes registry.csv, size_correlation.json and the size plots.
pub fn write_registry(dir: &Path, registry: &[SpeciesRegistryEntry], threshold: f64) -> Result<SizeCorrelation> {
    let corr = size_correlation(registry)?;
    write_atomic(&dir.join("registry.csv"), registry_csv(registry).as_bytes())?;
    let json = serde_json::to_vec_pretty(&corr).map_err(|e| Error::json("encoding size correlation", e))?;
    write_atomic(&dir.join("size_correlation.json"), &json)?;
    let vbp = size_plot(registry, &format!("Size vs base VBP (rho={:.2})", corr.rho_size_vbp), "base rho_pos", |e| {
        e.base_rho_pos
    });
    write_atomic(&dir.join("size_vbp.svg"), vbp.to_svg().as_bytes())?;
    let label = size_plot(
        registry,
        &format!("Size vs label sensitivity (rho={:.2})", corr.rho_size_label),
        "Kruskal-Wallis H",
        |e| e.label_statistic,
    );
    write_atomic(&dir.join("size_label.svg"), label.to_svg().as_bytes())?;
    write_atomic(&dir.join("species_rho.svg"), species_panel(registry, threshold).to_svg().as_bytes())?;
    Ok(corr)
}
