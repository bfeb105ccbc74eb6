//! Expansion of a scenario into its permutation-controlled prompt set.
//!
//! With `k` strategies the design is `k!` presentation orders of the labels,
//! times `k!` assignments of labels to strategies, times `k` evaluated
//! strategies. Label slot `j` always shows the `j`-th strategy's default
//! `display_label`; the assignment decides which strategy it names and the
//! presentation order decides where its sentences appear.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{slots, EvaluationWord, GameSpec, Strategy, TemplatePart};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PermutationId {
    pub label_order: usize,
    pub assignment: usize,
}

impl PermutationId {
    pub const IDENTITY: PermutationId = PermutationId { label_order: 0, assignment: 0 };

    pub fn new(label_order: usize, assignment: usize) -> Self {
        Self { label_order, assignment }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptInstance {
    pub game: String,
    pub permutation: PermutationId,
    pub evaluated_strategy: String,
    /// Label the evaluated strategy carries under this permutation.
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<i64>,
    pub evaluation_word: EvaluationWord,
    pub rendered_context: String,
    pub continuation: String,
}

pub fn factorial(k: usize) -> usize {
    (1..=k).product()
}

/// The `index`-th permutation of `0..k` in lexicographic order.
pub fn nth_permutation(k: usize, index: usize) -> Result<Vec<usize>> {
    let limit = factorial(k);
    if index >= limit {
        return Err(Error::InvalidPermutation { index, k, limit });
    }
    let mut pool: Vec<usize> = (0..k).collect();
    let mut out = Vec::with_capacity(k);
    let mut rest = index;
    for remaining in (1..=k).rev() {
        let block = factorial(remaining - 1);
        out.push(pool.remove(rest / block));
        rest %= block;
    }
    Ok(out)
}

/// Resolved bindings for one permutation.
struct Binding<'a> {
    /// Label slots in presentation order.
    order: Vec<usize>,
    /// `assignment[slot]` is the index of the strategy that slot names.
    assignment: Vec<usize>,
    labels: Vec<&'a str>,
}

impl<'a> Binding<'a> {
    fn new(spec: &'a GameSpec, perm: PermutationId) -> Result<Self> {
        let k = spec.strategies.len();
        Ok(Self {
            order: nth_permutation(k, perm.label_order)?,
            assignment: nth_permutation(k, perm.assignment)?,
            labels: spec.strategies.iter().map(|s| s.display_label.as_str()).collect(),
        })
    }

    fn label_of(&self, strategy: usize) -> &'a str {
        let slot = self.assignment.iter().position(|&s| s == strategy).expect("assignment is a permutation");
        self.labels[slot]
    }
}

fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

fn fill_option(spec: &GameSpec, pattern: &str, strategy: &Strategy, label: &str) -> Result<String> {
    fill(spec, pattern, strategy, label, true)
}

fn fill(spec: &GameSpec, pattern: &str, strategy: &Strategy, label: &str, allow_fields: bool) -> Result<String> {
    let mut out = String::with_capacity(pattern.len() + 32);
    let mut rest = pattern;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        let close = after.find('}').ok_or_else(|| Error::Template {
            game: spec.name.clone(),
            reason: format!("unterminated slot in `{pattern}`"),
        })?;
        let name = &after[..close];
        match name {
            "label" => out.push_str(label),
            "Label" => out.push_str(&capitalize(label)),
            "value" => match strategy.value {
                Some(v) => out.push_str(&v.to_string()),
                None => {
                    return Err(Error::Template {
                        game: spec.name.clone(),
                        reason: format!("strategy `{}` has no value", strategy.id),
                    })
                }
            },
            field if allow_fields => {
                let text = strategy.text.get(field).ok_or_else(|| Error::Template {
                    game: spec.name.clone(),
                    reason: format!("strategy `{}` lacks field `{field}`", strategy.id),
                })?;
                out.push_str(&fill(spec, text, strategy, label, false)?);
            }
            field => {
                return Err(Error::Template {
                    game: spec.name.clone(),
                    reason: format!("nested field `{field}` inside a strategy field"),
                })
            }
        }
        rest = &after[close + 1..];
    }
    out.push_str(rest);
    Ok(out)
}

/// Renders the context for `strategy` under `perm`, ending with the
/// evaluated sentence and a single trailing space; `word` is the continuation.
pub fn render(
    spec: &GameSpec,
    perm: PermutationId,
    strategy: &Strategy,
    word: &EvaluationWord,
) -> Result<PromptInstance> {
    let binding = Binding::new(spec, perm)?;
    let evaluated = spec.strategy_index(&strategy.id).ok_or_else(|| Error::UnknownStrategy(strategy.id.clone()))?;
    let evaluated_label = binding.label_of(evaluated);

    let mut context = String::new();
    for part in &spec.template.parts {
        match part {
            TemplatePart::Text(t) => context.push_str(t),
            TemplatePart::EachOption(pattern) => {
                for &slot in &binding.order {
                    let s = &spec.strategies[binding.assignment[slot]];
                    context.push_str(&fill_option(spec, pattern, s, binding.labels[slot])?);
                }
            }
            TemplatePart::Evaluated(pattern) => {
                let s = &spec.strategies[evaluated];
                context.push_str(&fill_option(spec, pattern, s, evaluated_label)?);
            }
        }
    }

    Ok(PromptInstance {
        game: spec.name.clone(),
        permutation: perm,
        evaluated_strategy: strategy.id.clone(),
        label: evaluated_label.to_string(),
        value: strategy.value,
        evaluation_word: word.clone(),
        rendered_context: context,
        continuation: word.text.clone(),
    })
}

/// Full design for one evaluation word: `k!·k!·k` instances ordered by
/// label order, then assignment, then strategy in spec order.
pub fn expand(spec: &GameSpec, word: &EvaluationWord) -> Result<Vec<PromptInstance>> {
    spec.validate()?;
    let k = spec.strategies.len();
    let perms = factorial(k);
    let mut out = Vec::with_capacity(perms * perms * k);
    for label_order in 0..perms {
        for assignment in 0..perms {
            let perm = PermutationId::new(label_order, assignment);
            for strategy in &spec.strategies {
                out.push(render(spec, perm, strategy, word)?);
            }
        }
    }
    Ok(out)
}

/// Both sentiment words, positive first.
pub fn expand_all(spec: &GameSpec) -> Result<Vec<PromptInstance>> {
    let mut words = spec.evaluation_words.clone();
    words.sort_by_key(|w| w.sentiment);
    let mut out = Vec::new();
    for word in &words {
        out.extend(expand(spec, word)?);
    }
    Ok(out)
}

/// Number of times each template slot mentions the label; used by tests
/// checking that rendering never drops or duplicates an option.
pub fn label_mentions_per_option(spec: &GameSpec) -> usize {
    spec.template
        .parts
        .iter()
        .map(|p| match p {
            TemplatePart::EachOption(t) => slots(t)
                .map(|name| match name {
                    "label" | "Label" => 1,
                    field => spec
                        .strategies
                        .first()
                        .and_then(|s| s.text.get(field))
                        .map_or(0, |t| slots(t).filter(|n| matches!(*n, "label" | "Label")).count()),
                })
                .sum(),
            _ => 0,
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{builtin_game, builtin_games};
    use std::collections::BTreeSet;

    const VALUE_RANK_IDENTITY: &str =
        "Option A1 gives 5 points. Option A2 gives 10 points. Option A3 gives 20 points. A1 is ";

    const PD_LOW_IDENTITY: &str = "My roommate and I share an AC. If one person uses the AC then they will get all and the other person will get none. If neither uses the AC then both will have a little. I do not know if my roommate will use the AC today, but they might. I cannot control their choice. Option1 is to use the AC. Option2 is to not use the AC. If I choose Option1 and my roommate uses the AC then I will be warm. If I choose Option1 and my roommate does not use the AC then I will be cold. If I choose Option2 and my roommate uses the AC then I will be hot. If I choose Option2 and my roommate does not use the AC then I will be cool. I want to be cold. I do not want to be hot or warm. My roommate wants to be cold and does not want to be hot or warm. Option1 is the ";

    const PD_HIGH_IDENTITY: &str = "I am in space with another person and we share a life support system. If one person uses the life support then they will get all and the other person will get none. If neither uses the life support then both will have some. I do not know if the other person will use the life support today, but they might. I cannot control their choice. Option1 is to use the life support. Option2 is to not use the life support. If I choose Option1 and my roommate uses the life support then I will live 2 years. If I choose Option1 and the other person does not use the life support then I will live 10 years. If I choose Option2 and the other person uses the life support then I will die tomorrow. If I choose Option2 and the other person does not use the life support then I will live 4 years. I want to live as long as possible. I do not want to die. My roommate wants to live and does not want to die. Option1 is the ";

    const TD_LOW_IDENTITY: &str = "You and another person have traveled and returned with two vases. However, the airline has broken the vases. You don't know the other person. The airline will let you and the other person claim between 100 and 2 dollars for the vase. If you claim more than the other person, you will get their claim minus 2 dollars. If you claim less than the other person, you will get your claim plus 2 dollars. If you choose optionB to claim 100 dollars you are likely to get a payment of 100 dollars, and it is less likely but possible that you may get a payment between 97 and 0 dollars. If you choose optionA to claim 99 dollars you are likely to get a payment of 101 dollars, and it is less likely but possible that you may get 99 dollars or between 96 and 0 dollars. You prefer options that will get the most money. OptionA is ";

    const TD_HIGH_IDENTITY: &str = "You and another person have traveled and returned with two vases. However, the airline has broken the vases. You don't know the other person. The airline will let you and the other person claim between 100 and 20 dollars for the vase. If you claim more than the other person, you will get their claim minus 20 dollars. If you claim less than the other person, you will get your claim plus 20 dollars. If you choose optionA to claim 100 dollars you are likely to get a payment of 100 dollars, and it is less likely but possible that you may get a payment between 77 and 0 dollars. If you choose optionB to claim 99 dollars you are likely to get a payment of 119 dollars, and it is less likely but possible that you may get 99 dollars or between 76 and 0 dollars. You prefer options that will get the most money. OptionA is ";

    fn identity(game: &str, strategy: &str) -> PromptInstance {
        let spec = builtin_game(game).unwrap();
        let s = spec.strategy(strategy).unwrap().clone();
        render(&spec, PermutationId::IDENTITY, &s, &EvaluationWord::best()).unwrap()
    }

    #[test]
    fn lexicographic_permutations() {
        let all: Vec<_> = (0..6).map(|i| nth_permutation(3, i).unwrap()).collect();
        assert_eq!(all, [vec![0, 1, 2], vec![0, 2, 1], vec![1, 0, 2], vec![1, 2, 0], vec![2, 0, 1], vec![2, 1, 0]]);
        assert!(matches!(nth_permutation(3, 6), Err(Error::InvalidPermutation { limit: 6, .. })));
    }

    #[test]
    fn value_rank_identity_prompt() {
        let inst = identity("value_rank", "points_5");
        assert_eq!(inst.rendered_context, VALUE_RANK_IDENTITY);
        assert_eq!(inst.continuation, "best");
        assert_eq!(inst.label, "A1");
    }

    #[test]
    fn identity_prompts_reproduced() {
        assert_eq!(identity("pd_low_stakes", "betray").rendered_context, PD_LOW_IDENTITY);
        assert_eq!(identity("pd_high_stakes", "betray").rendered_context, PD_HIGH_IDENTITY);
        assert_eq!(identity("td_low_penalty", "claim_99").rendered_context, TD_LOW_IDENTITY);
        assert_eq!(identity("td_high_penalty", "claim_100").rendered_context, TD_HIGH_IDENTITY);
    }

    #[test]
    fn td_low_penalty_mentions_101() {
        let inst = identity("td_low_penalty", "claim_99");
        assert!(inst.rendered_context.contains("you are likely to get a payment of 101 dollars"));
    }

    #[test]
    fn swapped_assignment_moves_value() {
        let spec = builtin_game("value_rank").unwrap();
        // [2, 1, 0]: slot A1 names the 20-point strategy, A3 the 5-point one.
        let perm = PermutationId::new(0, 5);
        let s20 = spec.strategy("points_20").unwrap().clone();
        let inst = render(&spec, perm, &s20, &EvaluationWord::best()).unwrap();
        assert_eq!(
            inst.rendered_context,
            "Option A1 gives 20 points. Option A2 gives 10 points. Option A3 gives 5 points. A1 is "
        );
        assert_eq!(inst.value, Some(20));
    }

    #[test]
    fn label_order_moves_sentences() {
        let spec = builtin_game("value_rank").unwrap();
        // order [2, 0, 1] lists A3 first, with identity values.
        let s = spec.strategy("points_10").unwrap().clone();
        let inst = render(&spec, PermutationId::new(4, 0), &s, &EvaluationWord::worst()).unwrap();
        assert_eq!(
            inst.rendered_context,
            "Option A3 gives 20 points. Option A1 gives 5 points. Option A2 gives 10 points. A2 is "
        );
        assert_eq!(inst.continuation, "worst");
    }

    #[test]
    fn invalid_permutation_rejected() {
        let spec = builtin_game("pd_low_stakes").unwrap();
        let s = spec.strategies[0].clone();
        let err = render(&spec, PermutationId::new(2, 0), &s, &EvaluationWord::best());
        assert!(matches!(err, Err(Error::InvalidPermutation { .. })));
    }

    #[test]
    fn value_rank_counts() {
        let spec = builtin_game("value_rank").unwrap();
        let instances = expand(&spec, &EvaluationWord::best()).unwrap();
        assert_eq!(instances.len(), 108);
        let contexts: BTreeSet<String> = instances
            .iter()
            .map(|i| {
                // strip the evaluated sentence to recover the shared context
                let cut = i.rendered_context.len() - format!("{} is ", i.label).len();
                i.rendered_context[..cut].to_string()
            })
            .collect();
        assert_eq!(contexts.len(), 36);
        let full: BTreeSet<&str> = instances.iter().map(|i| i.rendered_context.as_str()).collect();
        assert_eq!(full.len(), 108);
    }

    #[test]
    fn pd_count_by_enumeration() {
        let spec = builtin_game("pd_low_stakes").unwrap();
        let instances = expand(&spec, &EvaluationWord::best()).unwrap();
        let mut keys = BTreeSet::new();
        for lo in 0..2 {
            for asg in 0..2 {
                for s in ["betray", "silent"] {
                    keys.insert((lo, asg, s.to_string()));
                }
            }
        }
        assert_eq!(keys.len(), 8);
        let got: BTreeSet<_> = instances
            .iter()
            .map(|i| (i.permutation.label_order, i.permutation.assignment, i.evaluated_strategy.clone()))
            .collect();
        assert_eq!(got, keys);
    }

    #[test]
    fn missing_slot_rejected_by_expand() {
        let mut spec = builtin_game("value_rank").unwrap();
        spec.template.parts = vec![TemplatePart::Text("Options. ".into())];
        assert!(matches!(expand(&spec, &EvaluationWord::best()), Err(Error::Template { .. })));
    }

    #[test]
    fn label_mentions_are_preserved() {
        for spec in builtin_games() {
            let per_option = label_mentions_per_option(&spec);
            for inst in expand_all(&spec).unwrap() {
                let lower = inst.rendered_context.to_lowercase();
                for s in &spec.strategies {
                    let label = s.display_label.to_lowercase();
                    let expected = per_option + usize::from(label == inst.label.to_lowercase());
                    assert_eq!(lower.matches(&label).count(), expected, "{} {:?}", spec.name, inst.permutation);
                }
            }
        }
    }

    #[test]
    fn context_prefix_shared_within_permutation() {
        let spec = builtin_game("pd_high_stakes").unwrap();
        let instances = expand(&spec, &EvaluationWord::best()).unwrap();
        for pair in instances.chunks(2) {
            let a = &pair[0].rendered_context;
            let b = &pair[1].rendered_context;
            let cut_a = a.len() - format!("{} is the ", pair[0].label).len();
            let cut_b = b.len() - format!("{} is the ", pair[1].label).len();
            assert_eq!(&a[..cut_a], &b[..cut_b]);
        }
    }
}
