//! Classification layer: value-based preference, brittleness, label
//! sensitivity and the two-sided preference relation between strategies.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{GameSpec, Sentiment};
use crate::measurement::{MeasurementRecord, BASE_MEMBER};
use crate::promptgen::{expand, PermutationId};
use crate::stats::{
    kruskal_wallis, rank_shift, rank_sum_default, signed_rank, signed_shift, spearman, StatsError, TestResult,
    WilcoxonKind,
};

pub const DEFAULT_THRESHOLD: f64 = 0.3;
pub const DEFAULT_ALPHA: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VbpVerdict {
    pub rho_pos: f64,
    pub rho_neg: f64,
    pub has_vbp: bool,
    pub self_consistent: bool,
}

impl VbpVerdict {
    pub fn from_rhos(rho_pos: f64, rho_neg: f64, threshold: f64) -> Self {
        let has_vbp = rho_pos >= threshold;
        Self { rho_pos, rho_neg, has_vbp, self_consistent: has_vbp && rho_neg <= -threshold }
    }
}

/// Checks that `records` cover every (permutation, strategy) cell of the
/// design for both evaluation words, exactly once, for a single member.
fn check_design(records: &[&MeasurementRecord], spec: &GameSpec) -> Result<()> {
    let mut expected = BTreeSet::new();
    for word in &spec.evaluation_words {
        for inst in expand(spec, word)? {
            expected.insert((word.sentiment, inst.permutation, inst.evaluated_strategy));
        }
    }
    let mut seen = BTreeSet::new();
    let members: BTreeSet<u32> = records.iter().map(|r| r.member_id).collect();
    if members.len() > 1 {
        return Err(Error::IncompleteDesign(format!("records span {} members, expected one", members.len())));
    }
    for r in records {
        if r.game != spec.name {
            return Err(Error::IncompleteDesign(format!(
                "record for game `{}` passed with spec `{}`",
                r.game, spec.name
            )));
        }
        let key = (r.sentiment, r.permutation, r.evaluated_strategy.clone());
        if !expected.contains(&key) {
            return Err(Error::IncompleteDesign(format!(
                "record outside the design: {:?} {} ({})",
                r.permutation, r.evaluated_strategy, r.sentiment
            )));
        }
        if !seen.insert(key) {
            return Err(Error::IncompleteDesign(format!(
                "duplicate record: {:?} {} ({})",
                r.permutation, r.evaluated_strategy, r.sentiment
            )));
        }
    }
    if seen.len() != expected.len() {
        return Err(Error::IncompleteDesign(format!(
            "{} of {} cells present for `{}`",
            seen.len(),
            expected.len(),
            spec.name
        )));
    }
    Ok(())
}

fn record_value(r: &MeasurementRecord, spec: &GameSpec) -> Result<f64> {
    r.value.or_else(|| spec.strategy(&r.evaluated_strategy).ok().and_then(|s| s.value)).map(|v| v as f64).ok_or_else(
        || Error::InvalidSpec {
            game: spec.name.clone(),
            reason: format!("strategy `{}` has no value", r.evaluated_strategy),
        },
    )
}

/// Spearman rho, with constant probabilities read as no association.
fn rho_or_zero(x: &[f64], y: &[f64]) -> Result<f64> {
    match spearman(x, y) {
        Ok(c) => Ok(c.rho),
        Err(StatsError::Undefined(_)) if x.iter().any(|v| *v != x[0]) => Ok(0.0),
        Err(e) => Err(e.into()),
    }
}

/// VBP verdict for one member from its complete design.
pub fn classify_vbp(records: &[&MeasurementRecord], spec: &GameSpec, threshold: f64) -> Result<VbpVerdict> {
    check_design(records, spec)?;
    let mut rhos = [0.0; 2];
    for (slot, sentiment) in [Sentiment::Positive, Sentiment::Negative].into_iter().enumerate() {
        let mut values = Vec::new();
        let mut logprobs = Vec::new();
        for r in records.iter().filter(|r| r.sentiment == sentiment) {
            values.push(record_value(r, spec)?);
            logprobs.push(r.logprob);
        }
        rhos[slot] = rho_or_zero(&values, &logprobs)?;
    }
    Ok(VbpVerdict::from_rhos(rhos[0], rhos[1], threshold))
}

pub fn median(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len().is_multiple_of(2) { (v[mid - 1] + v[mid]) / 2.0 } else { v[mid] })
}

/// A population has VBP when its median member `rho_pos` reaches the threshold.
pub fn population_has_vbp(members: &[VbpVerdict], threshold: f64) -> bool {
    let rhos: Vec<f64> = members.iter().map(|m| m.rho_pos).collect();
    median(&rhos).is_some_and(|m| m >= threshold)
}

/// Brittle: the base model has VBP but its perturbed population does not.
pub fn classify_brittleness(base: &VbpVerdict, members: &[VbpVerdict], threshold: f64) -> Result<bool> {
    if members.len() < 2 {
        return Err(Error::Config(format!("brittleness needs at least 2 members, got {}", members.len())));
    }
    Ok(base.has_vbp && !population_has_vbp(members, threshold))
}

/// Kruskal-Wallis over log-probabilities grouped by display label.
pub fn label_sensitivity(records: &[&MeasurementRecord]) -> Result<TestResult> {
    let mut groups: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for r in records {
        groups.entry(&r.label).or_default().push(r.logprob);
    }
    if groups.len() < 2 {
        return Err(Error::IncompleteDesign(format!(
            "label sensitivity needs at least 2 labels, got {}",
            groups.len()
        )));
    }
    let groups: Vec<Vec<f64>> = groups.into_values().collect();
    Ok(kruskal_wallis(&groups)?)
}

/// Outcome of one directional test between strategies L and M.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Left,
    Right,
    Indifferent,
}

impl Decision {
    pub fn mirror(self) -> Self {
        match self {
            Decision::Left => Decision::Right,
            Decision::Right => Decision::Left,
            Decision::Indifferent => Decision::Indifferent,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    StrictLeft,
    StrictRight,
    WeakLeft,
    WeakRight,
    Indifferent,
}

impl Relation {
    /// Combines the positive-word and negative-word decisions.
    pub fn combine(pos: Decision, neg: Decision) -> Self {
        use Decision::*;
        match (pos, neg) {
            (Left, Left) => Relation::StrictLeft,
            (Right, Right) => Relation::StrictRight,
            (Left, Indifferent) | (Indifferent, Left) => Relation::WeakLeft,
            (Right, Indifferent) | (Indifferent, Right) => Relation::WeakRight,
            (Left, Right) | (Right, Left) | (Indifferent, Indifferent) => Relation::Indifferent,
        }
    }

    pub fn mirror(self) -> Self {
        match self {
            Relation::StrictLeft => Relation::StrictRight,
            Relation::StrictRight => Relation::StrictLeft,
            Relation::WeakLeft => Relation::WeakRight,
            Relation::WeakRight => Relation::WeakLeft,
            Relation::Indifferent => Relation::Indifferent,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::StrictLeft => "L > M",
            Relation::StrictRight => "M > L",
            Relation::WeakLeft => "L >= M",
            Relation::WeakRight => "M >= L",
            Relation::Indifferent => "L ~ M",
        }
    }
}

/// Log-probabilities for strategies L and M under both evaluation words.
/// Index `i` of each list belongs to the same (member, permutation) cell.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PairedSamples {
    pub pos_left: Vec<f64>,
    pub pos_right: Vec<f64>,
    pub neg_left: Vec<f64>,
    pub neg_right: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreferenceOutcome {
    pub left: String,
    pub right: String,
    pub relation: Relation,
    pub pos_decision: Decision,
    pub neg_decision: Decision,
    pub pos_test: TestResult,
    pub neg_test: TestResult,
    pub alpha: f64,
    pub test: WilcoxonKind,
}

/// Which strategy the data favour. `Greater` means L scored higher.
fn directional_test(l: &[f64], m: &[f64], kind: WilcoxonKind) -> Result<(TestResult, Ordering)> {
    match kind {
        WilcoxonKind::RankSum => Ok((rank_sum_default(l, m)?, rank_shift(l, m))),
        WilcoxonKind::SignedRank => {
            let diffs: Vec<f64> = l.iter().zip(m).map(|(a, b)| a - b).collect();
            Ok((signed_rank(&diffs)?, signed_shift(&diffs)))
        }
    }
}

fn decide(test: &TestResult, shift: Ordering, alpha: f64) -> Decision {
    if !test.significant(alpha) {
        return Decision::Indifferent;
    }
    match shift {
        Ordering::Greater => Decision::Left,
        Ordering::Less => Decision::Right,
        Ordering::Equal => Decision::Indifferent,
    }
}

/// Tests L against M under each evaluation word and combines the results.
///
/// Under the negative word a higher probability marks the anti-preferred
/// strategy, so that side's direction is inverted before combining.
pub fn build_relation(
    left: &str,
    right: &str,
    samples: &PairedSamples,
    alpha: f64,
    kind: WilcoxonKind,
) -> Result<PreferenceOutcome> {
    let s = samples;
    for (a, b) in [(&s.pos_left, &s.pos_right), (&s.neg_left, &s.neg_right)] {
        if a.len() != b.len() || a.is_empty() {
            return Err(Error::Unpaired { left: a.len(), right: b.len() });
        }
    }
    let (pos_test, pos_shift) = directional_test(&s.pos_left, &s.pos_right, kind)?;
    let (neg_test, neg_shift) = directional_test(&s.neg_left, &s.neg_right, kind)?;
    let pos_decision = decide(&pos_test, pos_shift, alpha);
    let neg_decision = decide(&neg_test, neg_shift.reverse(), alpha);
    Ok(PreferenceOutcome {
        left: left.to_string(),
        right: right.to_string(),
        relation: Relation::combine(pos_decision, neg_decision),
        pos_decision,
        neg_decision,
        pos_test,
        neg_test,
        alpha,
        test: kind,
    })
}

/// Collects L/M samples paired by (member, permutation) from `records`.
pub fn paired_samples(
    records: &[&MeasurementRecord],
    left: &str,
    right: &str,
    members: &[u32],
) -> Result<PairedSamples> {
    type Cell = (Sentiment, u32, PermutationId);
    let mut cells: BTreeMap<Cell, (Option<f64>, Option<f64>)> = BTreeMap::new();
    for r in records {
        if !members.contains(&r.member_id) {
            continue;
        }
        let key = (r.sentiment, r.member_id, r.permutation);
        let slot = cells.entry(key).or_default();
        if r.evaluated_strategy == left {
            slot.0 = Some(r.logprob);
        } else if r.evaluated_strategy == right {
            slot.1 = Some(r.logprob);
        }
    }
    let mut out = PairedSamples::default();
    for ((sentiment, member, perm), pair) in cells {
        let (Some(l), Some(m)) = pair else {
            return Err(Error::IncompleteDesign(format!(
                "member {member} {perm:?} ({sentiment}) lacks `{left}` or `{right}`"
            )));
        };
        let (ls, ms) = match sentiment {
            Sentiment::Positive => (&mut out.pos_left, &mut out.pos_right),
            Sentiment::Negative => (&mut out.neg_left, &mut out.neg_right),
        };
        ls.push(l);
        ms.push(m);
    }
    if out.pos_left.is_empty() || out.neg_left.is_empty() {
        return Err(Error::IncompleteDesign(format!(
            "no paired measurements for `{left}` vs `{right}` under both words"
        )));
    }
    Ok(out)
}

/// One outcome per unordered strategy pair, in spec order (L before M).
pub fn relation_matrix(
    records: &[&MeasurementRecord],
    spec: &GameSpec,
    members: &[u32],
    alpha: f64,
    kind: WilcoxonKind,
) -> Result<Vec<PreferenceOutcome>> {
    let ids: Vec<&str> = spec.strategies.iter().map(|s| s.id.as_str()).collect();
    let game_records: Vec<&MeasurementRecord> = records.iter().copied().filter(|r| r.game == spec.name).collect();
    let mut out = Vec::new();
    for (i, left) in ids.iter().enumerate() {
        for right in &ids[i + 1..] {
            let samples = paired_samples(&game_records, left, right, members)?;
            out.push(build_relation(left, right, &samples, alpha, kind)?);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpeciesReport {
    pub model_name: String,
    pub param_count: u64,
    pub game: String,
    pub threshold: f64,
    pub base_verdict: VbpVerdict,
    pub member_ids: Vec<u32>,
    pub member_verdicts: Vec<VbpVerdict>,
    pub population_median_rho: f64,
    pub population_has_vbp: bool,
    pub brittle: bool,
    /// Kruskal-Wallis by label over the base member's positive-word scores.
    pub label_sensitivity: TestResult,
}

/// Per-member verdicts, brittleness and label sensitivity for one game.
///
/// Member 0 is the base model; every other member present in `records`
/// forms the population.
pub fn species_report(
    records: &[&MeasurementRecord],
    spec: &GameSpec,
    model_name: &str,
    param_count: u64,
    threshold: f64,
) -> Result<SpeciesReport> {
    let mut by_member: BTreeMap<u32, Vec<&MeasurementRecord>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.game == spec.name) {
        by_member.entry(r.member_id).or_default().push(r);
    }
    let base_records = by_member
        .remove(&BASE_MEMBER)
        .ok_or_else(|| Error::IncompleteDesign(format!("no base-model records for `{}`", spec.name)))?;
    let base_verdict = classify_vbp(&base_records, spec, threshold)?;
    let member_verdicts = by_member.values().map(|rs| classify_vbp(rs, spec, threshold)).collect::<Result<Vec<_>>>()?;
    let brittle = classify_brittleness(&base_verdict, &member_verdicts, threshold)?;
    let rhos: Vec<f64> = member_verdicts.iter().map(|v| v.rho_pos).collect();
    let positive: Vec<&MeasurementRecord> =
        base_records.iter().copied().filter(|r| r.sentiment == Sentiment::Positive).collect();
    Ok(SpeciesReport {
        model_name: model_name.to_string(),
        param_count,
        game: spec.name.clone(),
        threshold,
        base_verdict,
        member_ids: by_member.keys().copied().collect(),
        population_median_rho: median(&rhos).unwrap_or(f64::NAN),
        population_has_vbp: population_has_vbp(&member_verdicts, threshold),
        member_verdicts,
        brittle,
        label_sensitivity: label_sensitivity(&positive)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::builtin_game;
    use crate::measurement::{run_sweep, Dataset, MockBackend, MockProfile, PopulationSpec, SweepOptions};
    use crate::promptgen::expand_all;
    use proptest::prelude::*;

    fn dataset(profile: MockProfile, game: &str, size: u32) -> (GameSpec, Dataset) {
        let spec = builtin_game(game).unwrap();
        let backend = MockBackend::new(profile, "mock", 1_000_000);
        let ds = run_sweep(
            &backend,
            &PopulationSpec::new(size, 0.1, 1),
            &expand_all(&spec).unwrap(),
            &SweepOptions::new("t"),
            None,
        )
        .unwrap();
        (spec, ds)
    }

    fn refs(ds: &Dataset) -> Vec<&MeasurementRecord> {
        ds.records.iter().collect()
    }

    #[test]
    fn verdict_thresholds() {
        let v = VbpVerdict::from_rhos(0.5, -0.5, 0.3);
        assert!(v.has_vbp && v.self_consistent);
        assert!(!VbpVerdict::from_rhos(0.2, -0.5, 0.3).has_vbp);
        let v = VbpVerdict::from_rhos(0.5, 0.4, 0.3);
        assert!(v.has_vbp && !v.self_consistent);
        assert!(VbpVerdict::from_rhos(0.3, -0.3, 0.3).self_consistent);
    }

    #[test]
    fn table_two_is_total() {
        use Decision::*;
        let expected = [
            ((Left, Left), Relation::StrictLeft),
            ((Right, Right), Relation::StrictRight),
            ((Left, Indifferent), Relation::WeakLeft),
            ((Indifferent, Left), Relation::WeakLeft),
            ((Right, Indifferent), Relation::WeakRight),
            ((Indifferent, Right), Relation::WeakRight),
            ((Left, Right), Relation::Indifferent),
            ((Right, Left), Relation::Indifferent),
            ((Indifferent, Indifferent), Relation::Indifferent),
        ];
        for ((p, n), r) in expected {
            assert_eq!(Relation::combine(p, n), r, "{p:?}/{n:?}");
            assert_eq!(Relation::combine(p.mirror(), n.mirror()), r.mirror());
        }
    }

    #[test]
    fn value_agent_has_vbp_and_no_label_effect() {
        let (spec, ds) = dataset(MockProfile::value_agent(0.1, 5), "value_rank", 4);
        let report = species_report(&refs(&ds), &spec, "mock", 1, DEFAULT_THRESHOLD).unwrap();
        assert!(report.base_verdict.has_vbp && report.base_verdict.self_consistent);
        assert!(report.population_has_vbp && !report.brittle);
        assert!(report.label_sensitivity.p_value > 0.05);
        assert_eq!(report.member_verdicts.len(), 4);
    }

    #[test]
    fn label_agent_is_label_sensitive() {
        let bias = BTreeMap::from([("A1".to_string(), 1.5), ("A3".to_string(), -1.0)]);
        let (spec, ds) = dataset(MockProfile::label_agent(bias, 5), "value_rank", 3);
        let report = species_report(&refs(&ds), &spec, "mock", 1, DEFAULT_THRESHOLD).unwrap();
        assert!(report.label_sensitivity.p_value < 0.05);
        assert!(!report.base_verdict.has_vbp);
    }

    #[test]
    fn incomplete_design_rejected() {
        let (spec, ds) = dataset(MockProfile::value_agent(0.1, 5), "value_rank", 2);
        let base: Vec<&MeasurementRecord> = ds.records.iter().filter(|r| r.member_id == 0).collect();
        assert!(classify_vbp(&base, &spec, 0.3).is_ok());
        assert!(matches!(classify_vbp(&base[1..], &spec, 0.3), Err(Error::IncompleteDesign(_))));
        let mut dup = base.clone();
        dup[0] = base[1];
        assert!(classify_vbp(&dup, &spec, 0.3).is_err());
    }

    #[test]
    fn constant_scores_give_degenerate_label_test() {
        let (_, ds) = dataset(MockProfile::value_agent(0.0, 5), "value_rank", 2);
        let flat = ds.map_logprobs(|_| -1.0);
        let base: Vec<&MeasurementRecord> = flat.records.iter().filter(|r| r.member_id == 0).collect();
        let t = label_sensitivity(&base).unwrap();
        assert_eq!((t.statistic, t.p_value), (0.0, 1.0));
    }

    #[test]
    fn brittleness_definition() {
        let base = VbpVerdict::from_rhos(0.6, -0.6, 0.3);
        let flat = vec![VbpVerdict::from_rhos(0.0, 0.0, 0.3); 5];
        assert!(classify_brittleness(&base, &flat, 0.3).unwrap());
        let weak_base = VbpVerdict::from_rhos(0.1, 0.0, 0.3);
        assert!(!classify_brittleness(&weak_base, &flat, 0.3).unwrap());
        assert!(classify_brittleness(&base, &flat[..1], 0.3).is_err());
        let strong = vec![VbpVerdict::from_rhos(0.5, -0.5, 0.3); 5];
        assert!(!classify_brittleness(&base, &strong, 0.3).unwrap());
    }

    #[test]
    fn cooperative_agent_prefers_silence() {
        let values = BTreeMap::from([("silent".to_string(), 10.0), ("betray".to_string(), 0.0)]);
        let profile = MockProfile::noisy_population_agent(0.1, 0.02, 3).with_strategy_values(values);
        let (spec, ds) = dataset(profile, "pd_low_stakes", 10);
        let members: Vec<u32> = (1..=10).collect();
        let rel = relation_matrix(&refs(&ds), &spec, &members, 0.05, WilcoxonKind::RankSum).unwrap();
        assert_eq!(rel.len(), 1);
        assert_eq!((rel[0].left.as_str(), rel[0].right.as_str()), ("betray", "silent"));
        assert_eq!(rel[0].relation, Relation::StrictRight);
    }

    #[test]
    fn identical_strategies_are_indifferent() {
        let samples = PairedSamples {
            pos_left: vec![-1.0, -2.0, -3.0, -4.0],
            pos_right: vec![-1.0, -2.0, -3.0, -4.0],
            neg_left: vec![-2.0, -1.0, -3.0, -4.0],
            neg_right: vec![-2.0, -1.0, -3.0, -4.0],
        };
        for kind in [WilcoxonKind::RankSum, WilcoxonKind::SignedRank] {
            let out = build_relation("a", "b", &samples, 0.05, kind).unwrap();
            assert_eq!(out.relation, Relation::Indifferent);
        }
    }

    #[test]
    fn unpaired_lists_rejected() {
        let samples = PairedSamples {
            pos_left: vec![-1.0, -2.0],
            pos_right: vec![-1.0],
            neg_left: vec![-1.0],
            neg_right: vec![-1.0],
        };
        assert!(matches!(
            build_relation("a", "b", &samples, 0.05, WilcoxonKind::RankSum),
            Err(Error::Unpaired { left: 2, right: 1 })
        ));
    }

    #[test]
    fn td_has_one_pair() {
        let (spec, ds) = dataset(MockProfile::value_agent(0.05, 2), "td_low_penalty", 3);
        let rel = relation_matrix(&refs(&ds), &spec, &[1, 2, 3], 0.05, WilcoxonKind::RankSum).unwrap();
        assert_eq!(rel.len(), 1);
    }

    fn samples_strategy() -> impl Strategy<Value = PairedSamples> {
        (2usize..30).prop_flat_map(|n| {
            let v = || prop::collection::vec(-20.0f64..0.0, n);
            (v(), v(), v(), v()).prop_map(|(a, b, c, d)| PairedSamples {
                pos_left: a,
                pos_right: b,
                neg_left: c,
                neg_right: d,
            })
        })
    }

    proptest! {
        #[test]
        fn swapping_sides_mirrors_relation(s in samples_strategy(), signed in any::<bool>()) {
            let kind = if signed { WilcoxonKind::SignedRank } else { WilcoxonKind::RankSum };
            let fwd = build_relation("l", "m", &s, 0.05, kind).unwrap();
            let swapped = PairedSamples {
                pos_left: s.pos_right.clone(),
                pos_right: s.pos_left.clone(),
                neg_left: s.neg_right.clone(),
                neg_right: s.neg_left.clone(),
            };
            let back = build_relation("m", "l", &swapped, 0.05, kind).unwrap();
            prop_assert_eq!(fwd.relation, back.relation.mirror());
        }

        #[test]
        fn rank_sum_relation_invariant_under_exp(s in samples_strategy()) {
            let f = |v: &Vec<f64>| v.iter().map(|x| x.exp()).collect::<Vec<_>>();
            let t = PairedSamples {
                pos_left: f(&s.pos_left),
                pos_right: f(&s.pos_right),
                neg_left: f(&s.neg_left),
                neg_right: f(&s.neg_right),
            };
            let a = build_relation("l", "m", &s, 0.05, WilcoxonKind::RankSum).unwrap();
            let b = build_relation("l", "m", &t, 0.05, WilcoxonKind::RankSum).unwrap();
            prop_assert_eq!(a.relation, b.relation);
            prop_assert_eq!(a.pos_test.p_value, b.pos_test.p_value);
        }

        #[test]
        fn classify_vbp_ignores_record_order(seed in 0u64..1000, rot in 0usize..216) {
            let spec = builtin_game("value_rank").unwrap();
            let backend = MockBackend::new(MockProfile::noisy_population_agent(0.05, 0.05, seed), "m", 1);
            let mut records = Vec::new();
            for inst in expand_all(&spec).unwrap() {
                records.push(crate::measurement::score(&backend, "t", 0, &inst).unwrap());
            }
            let mut refs: Vec<&MeasurementRecord> = records.iter().collect();
            let a = classify_vbp(&refs, &spec, 0.3).unwrap();
            refs.rotate_left(rot);
            refs.reverse();
            let b = classify_vbp(&refs, &spec, 0.3).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
