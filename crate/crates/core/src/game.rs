//! Scenario descriptions shared by every other module.
//!
//! A [`GameSpec`] is pure data: strategies, the two evaluation words, a slot
//! template and (for the dilemmas) the payoff structure used for reference
//! answers. The builtin scenarios are embedded JSON and can be replaced or
//! extended with user-authored files of the same schema.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sentiment {
    Positive,
    Negative,
}

impl Sentiment {
    /// +1 for positive words, -1 for negative words.
    pub fn sign(self) -> f64 {
        match self {
            Sentiment::Positive => 1.0,
            Sentiment::Negative => -1.0,
        }
    }
}

impl fmt::Display for Sentiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sentiment::Positive => "positive",
            Sentiment::Negative => "negative",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EvaluationWord {
    pub text: String,
    pub sentiment: Sentiment,
}

impl EvaluationWord {
    pub fn new(text: impl Into<String>, sentiment: Sentiment) -> Self {
        Self { text: text.into(), sentiment }
    }

    pub fn best() -> Self {
        Self::new("best", Sentiment::Positive)
    }

    pub fn worst() -> Self {
        Self::new("worst", Sentiment::Negative)
    }
}

/// One option a player can take.
///
/// `text` holds strategy-specific template fields (e.g. `action`), which may
/// themselves reference `{label}` and `{value}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Strategy {
    pub id: String,
    pub display_label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<i64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub text: BTreeMap<String, String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    Maximize,
    Minimize,
}

impl Orientation {
    /// True when payoff `a` is strictly better than `b` for the receiving player.
    pub fn better(self, a: f64, b: f64) -> bool {
        match self {
            Orientation::Maximize => a > b,
            Orientation::Minimize => a < b,
        }
    }

    pub fn at_least_as_good(self, a: f64, b: f64) -> bool {
        match self {
            Orientation::Maximize => a >= b,
            Orientation::Minimize => a <= b,
        }
    }
}

/// Two-player normal-form payoffs; `cells[r][c] = (row payoff, column payoff)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PayoffMatrix {
    pub name: String,
    pub row_strategies: Vec<String>,
    pub col_strategies: Vec<String>,
    pub cells: Vec<Vec<(f64, f64)>>,
    pub orientation: Orientation,
}

impl PayoffMatrix {
    pub fn validate(&self) -> Result<()> {
        let bad = |reason: String| Error::InvalidSpec { game: self.name.clone(), reason };
        if self.row_strategies.is_empty() || self.col_strategies.is_empty() {
            return Err(bad("payoff matrix needs at least one row and column".into()));
        }
        if self.cells.len() != self.row_strategies.len() {
            return Err(bad(format!(
                "{} rows of cells for {} row strategies",
                self.cells.len(),
                self.row_strategies.len()
            )));
        }
        if let Some(row) = self.cells.iter().find(|row| row.len() != self.col_strategies.len()) {
            return Err(bad(format!(
                "row with {} cells for {} column strategies",
                row.len(),
                self.col_strategies.len()
            )));
        }
        Ok(())
    }

    pub fn row_index(&self, id: &str) -> Option<usize> {
        self.row_strategies.iter().position(|s| s == id)
    }

    pub fn col_index(&self, id: &str) -> Option<usize> {
        self.col_strategies.iter().position(|s| s == id)
    }
}

/// Traveler's dilemma parameters. Quotes are whole dollars in `[quote_min, quote_max]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TdGame {
    pub quote_min: i64,
    pub quote_max: i64,
    pub penalty: i64,
    #[serde(default)]
    pub floor_at_zero: bool,
}

impl TdGame {
    pub fn new(quote_min: i64, quote_max: i64, penalty: i64) -> Result<Self> {
        let game = Self { quote_min, quote_max, penalty, floor_at_zero: false };
        game.validate()?;
        Ok(game)
    }

    pub fn validate(&self) -> Result<()> {
        let reason = if self.quote_min < 0 {
            "quote_min must be non-negative"
        } else if self.quote_min >= self.quote_max {
            "quote_min must be below quote_max"
        } else if self.penalty <= 0 {
            "penalty must be positive"
        } else {
            return Ok(());
        };
        Err(Error::InvalidSpec { game: "traveler's dilemma".into(), reason: reason.into() })
    }

    pub fn quotes(&self) -> impl Iterator<Item = i64> {
        self.quote_min..=self.quote_max
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Payoff {
    Matrix(PayoffMatrix),
    Td(TdGame),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GameKind {
    ValueRank,
    Pd,
    Td,
}

/// A piece of a prompt template.
///
/// Slots are written `{name}`. Inside `each_option` and `evaluated` parts the
/// slots `{label}`, `{Label}` (first letter upper-cased) and `{value}` refer to
/// the option being rendered; any other name is looked up in that strategy's
/// `text` fields.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemplatePart {
    /// Fixed text, no slots.
    Text(String),
    /// Rendered once per option, in presentation order.
    EachOption(String),
    /// The closing sentence naming the evaluated option. Must come last.
    Evaluated(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Template {
    pub parts: Vec<TemplatePart>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameSpec {
    pub name: String,
    pub kind: GameKind,
    pub strategies: Vec<Strategy>,
    pub evaluation_words: Vec<EvaluationWord>,
    pub template: Template,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payoff: Option<Payoff>,
}

impl GameSpec {
    pub fn from_json(json: &str) -> Result<Self> {
        let spec: GameSpec = serde_json::from_str(json).map_err(|e| Error::json("parsing game spec", e))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("game spec serializes")
    }

    pub fn strategy(&self, id: &str) -> Result<&Strategy> {
        self.strategies.iter().find(|s| s.id == id).ok_or_else(|| Error::UnknownStrategy(id.to_string()))
    }

    pub fn strategy_index(&self, id: &str) -> Option<usize> {
        self.strategies.iter().position(|s| s.id == id)
    }

    pub fn word(&self, sentiment: Sentiment) -> Option<&EvaluationWord> {
        self.evaluation_words.iter().find(|w| w.sentiment == sentiment)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |reason: String| Error::InvalidSpec { game: self.name.clone(), reason };
        if self.name.is_empty() {
            return Err(bad("name must be non-empty".into()));
        }
        if self.strategies.is_empty() {
            return Err(bad("no strategies".into()));
        }
        let mut ids = BTreeSet::new();
        let mut labels = BTreeSet::new();
        for s in &self.strategies {
            if !ids.insert(s.id.as_str()) {
                return Err(bad(format!("duplicate strategy id `{}`", s.id)));
            }
            if s.display_label.is_empty() {
                return Err(bad(format!("strategy `{}` has an empty label", s.id)));
            }
            if !labels.insert(s.display_label.as_str()) {
                return Err(bad(format!("duplicate label `{}`", s.display_label)));
            }
        }

        let positive = self.evaluation_words.iter().filter(|w| w.sentiment == Sentiment::Positive).count();
        let negative = self.evaluation_words.len() - positive;
        if positive != 1 || negative != 1 {
            return Err(bad("exactly one positive and one negative evaluation word required".into()));
        }
        if self.evaluation_words.iter().any(|w| w.text.is_empty()) {
            return Err(bad("evaluation word text must be non-empty".into()));
        }

        match self.kind {
            GameKind::ValueRank => {
                if self.strategies.len() != 3 {
                    return Err(bad("value_rank needs exactly 3 strategies".into()));
                }
                let values: BTreeSet<i64> = self.strategies.iter().filter_map(|s| s.value).collect();
                if values.len() != 3 {
                    return Err(bad("value_rank strategies need 3 distinct values".into()));
                }
            }
            GameKind::Pd => {
                if self.strategies.len() != 2 {
                    return Err(bad("pd needs exactly 2 strategies".into()));
                }
            }
            GameKind::Td => {
                let values: BTreeSet<i64> = self.strategies.iter().filter_map(|s| s.value).collect();
                if self.strategies.len() != 2 || values != BTreeSet::from([99, 100]) {
                    return Err(bad("td evaluates exactly the quotes 99 and 100".into()));
                }
            }
        }

        match &self.payoff {
            Some(Payoff::Matrix(m)) => m.validate()?,
            Some(Payoff::Td(td)) => td.validate()?,
            None => {}
        }

        self.validate_template()
    }

    fn validate_template(&self) -> Result<()> {
        let bad = |reason: String| Error::Template { game: self.name.clone(), reason };
        let parts = &self.template.parts;
        let has_label = |s: &str| s.contains("{label}") || s.contains("{Label}");

        let options_with_label = parts
            .iter()
            .filter(|p| matches!(p, TemplatePart::EachOption(t) if has_label(t) || self.field_mentions_label(t)))
            .count();
        if options_with_label == 0 {
            return Err(bad("no `each_option` part binds {label}".into()));
        }
        match parts.last() {
            Some(TemplatePart::Evaluated(t)) if has_label(t) => {}
            _ => return Err(bad("template must end with an `evaluated` part using {label}".into())),
        }
        if parts.iter().filter(|p| matches!(p, TemplatePart::Evaluated(_))).count() != 1 {
            return Err(bad("exactly one `evaluated` part allowed".into()));
        }

        for part in parts {
            let body = match part {
                TemplatePart::Text(t) => {
                    if let Some(slot) = slots(t).next() {
                        return Err(bad(format!("slot {{{slot}}} not allowed in fixed text")));
                    }
                    continue;
                }
                TemplatePart::EachOption(t) | TemplatePart::Evaluated(t) => t,
            };
            for slot in slots(body) {
                if matches!(slot, "label" | "Label") {
                    continue;
                }
                for s in &self.strategies {
                    if slot == "value" {
                        if s.value.is_none() {
                            return Err(bad(format!("strategy `{}` has no value for {{value}}", s.id)));
                        }
                    } else if !s.text.contains_key(slot) {
                        return Err(bad(format!("strategy `{}` lacks field for slot {{{slot}}}", s.id)));
                    }
                }
            }
        }
        Ok(())
    }

    fn field_mentions_label(&self, part: &str) -> bool {
        slots(part).any(|slot| {
            self.strategies
                .iter()
                .all(|s| s.text.get(slot).is_some_and(|t| t.contains("{label}") || t.contains("{Label}")))
        })
    }
}

/// Iterates the `{name}` slot names in a template string.
pub(crate) fn slots(text: &str) -> impl Iterator<Item = &str> {
    text.split('{').skip(1).filter_map(|chunk| chunk.split_once('}').map(|(name, _)| name))
}

const BUILTIN_JSON: [&str; 5] = [
    include_str!("../games/value_rank.json"),
    include_str!("../games/pd_low_stakes.json"),
    include_str!("../games/pd_high_stakes.json"),
    include_str!("../games/td_low_penalty.json"),
    include_str!("../games/td_high_penalty.json"),
];

const REFERENCE_MATRICES_JSON: &str = include_str!("../games/reference_matrices.json");

/// The five shipped scenarios: value ranking, low/high-stakes prisoner's
/// dilemma and low/high-penalty traveler's dilemma.
pub fn builtin_games() -> Vec<GameSpec> {
    BUILTIN_JSON.iter().map(|json| GameSpec::from_json(json).expect("builtin game spec is valid")).collect()
}

pub fn builtin_game(name: &str) -> Result<GameSpec> {
    builtin_games().into_iter().find(|g| g.name == name).ok_or_else(|| Error::UnknownGame(name.to_string()))
}

/// Payoff matrices that are used only for reference checks (never prompted),
/// currently the time-in-jail matrix.
pub fn reference_matrices() -> Vec<PayoffMatrix> {
    let matrices: Vec<PayoffMatrix> = serde_json::from_str(REFERENCE_MATRICES_JSON).expect("reference matrices parse");
    for m in &matrices {
        m.validate().expect("reference matrix is valid");
    }
    matrices
}

/// Every named matrix: the prompted PD scenarios plus the reference-only ones.
pub fn all_matrices() -> Vec<PayoffMatrix> {
    let mut out: Vec<PayoffMatrix> = builtin_games()
        .into_iter()
        .filter_map(|g| match g.payoff {
            Some(Payoff::Matrix(m)) => Some(m),
            _ => None,
        })
        .collect();
    out.extend(reference_matrices());
    out
}

pub fn matrix(name: &str) -> Result<PayoffMatrix> {
    all_matrices().into_iter().find(|m| m.name == name).ok_or_else(|| Error::UnknownGame(name.to_string()))
}
