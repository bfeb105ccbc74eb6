//! Game-theoretic reference answers: payoffs, dominance, iterated
//! elimination, Nash and Pareto profiles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{Orientation, PayoffMatrix, TdGame};

/// A traveler's dilemma quote that has been checked against its game's range.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TdQuote(i64);

impl TdQuote {
    pub fn new(value: i64, game: &TdGame) -> Result<Self> {
        if value < game.quote_min || value > game.quote_max {
            return Err(Error::QuoteOutOfRange { quote: value, min: game.quote_min, max: game.quote_max });
        }
        Ok(Self(value))
    }

    pub fn value(self) -> i64 {
        self.0
    }
}

/// Payoffs `(a, b)`: the lower quoter gets `min + penalty`, the higher
/// quoter `min - penalty`, equal quotes are paid as quoted.
pub fn td_payoff(qa: TdQuote, qb: TdQuote, game: &TdGame) -> (i64, i64) {
    let (a, b) = (qa.0, qb.0);
    let low = a.min(b);
    let (pa, pb) = match a.cmp(&b) {
        std::cmp::Ordering::Equal => (a, b),
        std::cmp::Ordering::Less => (low + game.penalty, low - game.penalty),
        std::cmp::Ordering::Greater => (low - game.penalty, low + game.penalty),
    };
    if game.floor_at_zero {
        (pa.max(0), pb.max(0))
    } else {
        (pa, pb)
    }
}

/// Range-checked convenience wrapper around [`td_payoff`].
pub fn td_payoff_checked(a: i64, b: i64, game: &TdGame) -> Result<(i64, i64)> {
    Ok(td_payoff(TdQuote::new(a, game)?, TdQuote::new(b, game)?, game))
}

/// Payoffs a quoter can receive when undercut by the opponent, as prompt
/// text describes them (clipped at zero). `None` when nobody can undercut.
pub fn td_undercut_range(game: &TdGame, quote: i64) -> Result<Option<(i64, i64)>> {
    let clipped = TdGame { floor_at_zero: true, ..*game };
    let me = TdQuote::new(quote, game)?;
    let payoffs: Vec<i64> = (game.quote_min..quote).map(|opp| td_payoff(me, TdQuote(opp), &clipped).0).collect();
    Ok(payoffs.iter().min().zip(payoffs.iter().max()).map(|(lo, hi)| (*lo, *hi)))
}

/// Matrix lookup; payoffs are returned as stored; `matrix.orientation`
/// says whether larger is better.
pub fn pd_payoff(matrix: &PayoffMatrix, row: &str, col: &str) -> Result<(f64, f64)> {
    let r = matrix.row_index(row).ok_or_else(|| Error::UnknownStrategy(row.to_string()))?;
    let c = matrix.col_index(col).ok_or_else(|| Error::UnknownStrategy(col.to_string()))?;
    Ok(matrix.cells[r][c])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DominanceKind {
    Weak,
    Strict,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DominanceReport<S> {
    pub dominator: S,
    pub dominated: S,
    pub kind: DominanceKind,
}

/// `a` is at least as good as `b` against every opponent strategy and
/// strictly better against at least one. `payoff(own, opponent)` is the
/// payoff to the player choosing `own`.
pub fn weakly_dominates<S, F>(a: &S, b: &S, opponents: &[S], orientation: Orientation, payoff: F) -> bool
where
    F: Fn(&S, &S) -> f64,
{
    let mut strictly_better_somewhere = false;
    for opp in opponents {
        let (pa, pb) = (payoff(a, opp), payoff(b, opp));
        if !orientation.at_least_as_good(pa, pb) {
            return false;
        }
        strictly_better_somewhere |= orientation.better(pa, pb);
    }
    strictly_better_somewhere
}

pub fn strictly_dominates<S, F>(a: &S, b: &S, opponents: &[S], orientation: Orientation, payoff: F) -> bool
where
    F: Fn(&S, &S) -> f64,
{
    !opponents.is_empty() && opponents.iter().all(|opp| orientation.better(payoff(a, opp), payoff(b, opp)))
}

/// Every dominance relation among `strategies` against `opponents`,
/// reporting the strongest kind that holds.
pub fn dominance_report<S, F>(
    strategies: &[S],
    opponents: &[S],
    orientation: Orientation,
    payoff: F,
) -> Vec<DominanceReport<S>>
where
    S: Clone,
    F: Fn(&S, &S) -> f64,
{
    let mut out = Vec::new();
    for (i, a) in strategies.iter().enumerate() {
        for (j, b) in strategies.iter().enumerate() {
            if i == j {
                continue;
            }
            let kind = if strictly_dominates(a, b, opponents, orientation, &payoff) {
                DominanceKind::Strict
            } else if weakly_dominates(a, b, opponents, orientation, &payoff) {
                DominanceKind::Weak
            } else {
                continue;
            };
            out.push(DominanceReport { dominator: a.clone(), dominated: b.clone(), kind });
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EliminationRound<S> {
    pub round: usize,
    pub removed: Vec<S>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Elimination<S> {
    pub survivors: Vec<S>,
    pub trace: Vec<EliminationRound<S>>,
}

/// Iterated elimination of weakly dominated strategies in a symmetric game.
///
/// Each round removes, simultaneously, every strategy weakly dominated by
/// some surviving strategy against the surviving set; stops at a fixed point.
pub fn iterated_elimination<S, F>(strategies: &[S], orientation: Orientation, payoff: F) -> Elimination<S>
where
    S: Clone,
    F: Fn(&S, &S) -> f64,
{
    let mut alive: Vec<S> = strategies.to_vec();
    let mut trace = Vec::new();
    while alive.len() > 1 {
        let dominated: Vec<bool> =
            alive.iter().map(|b| alive.iter().any(|a| weakly_dominates(a, b, &alive, orientation, &payoff))).collect();
        if !dominated.contains(&true) {
            break;
        }
        let mut removed = Vec::new();
        let mut kept = Vec::new();
        for (s, gone) in alive.into_iter().zip(dominated) {
            if gone {
                removed.push(s);
            } else {
                kept.push(s);
            }
        }
        alive = kept;
        trace.push(EliminationRound { round: trace.len() + 1, removed });
    }
    Elimination { survivors: alive, trace }
}

/// Iterated elimination over every quote of a traveler's dilemma.
pub fn td_elimination(game: &TdGame) -> Elimination<i64> {
    let quotes: Vec<i64> = game.quotes().collect();
    iterated_elimination(&quotes, Orientation::Maximize, |a, b| td_payoff(TdQuote(*a), TdQuote(*b), game).0 as f64)
}

/// Row-player payoff closure for a symmetric matrix game, keyed by strategy id.
pub fn matrix_row_payoff(matrix: &PayoffMatrix) -> impl Fn(&String, &String) -> f64 + '_ {
    move |own, opp| pd_payoff(matrix, own, opp).map(|p| p.0).unwrap_or(f64::NAN)
}

pub type Profile = (String, String);

/// Profiles no other profile Pareto-dominates, honoring orientation.
pub fn pareto_optimal(matrix: &PayoffMatrix) -> Vec<Profile> {
    let o = matrix.orientation;
    let profiles = profiles(matrix);
    profiles
        .iter()
        .filter(|(_, p)| {
            !profiles.iter().any(|(_, q)| {
                o.at_least_as_good(q.0, p.0)
                    && o.at_least_as_good(q.1, p.1)
                    && (o.better(q.0, p.0) || o.better(q.1, p.1))
            })
        })
        .map(|(id, _)| id.clone())
        .collect()
}

/// Pure-strategy Nash equilibria: neither player gains by deviating alone.
pub fn pure_nash(matrix: &PayoffMatrix) -> Vec<Profile> {
    let o = matrix.orientation;
    let mut out = Vec::new();
    for (r, row) in matrix.cells.iter().enumerate() {
        for (c, &(pr, pc)) in row.iter().enumerate() {
            let row_ok = (0..matrix.cells.len()).all(|r2| !o.better(matrix.cells[r2][c].0, pr));
            let col_ok = (0..row.len()).all(|c2| !o.better(row[c2].1, pc));
            if row_ok && col_ok {
                out.push((matrix.row_strategies[r].clone(), matrix.col_strategies[c].clone()));
            }
        }
    }
    out
}

fn profiles(matrix: &PayoffMatrix) -> Vec<(Profile, (f64, f64))> {
    let mut out = Vec::new();
    for (r, row) in matrix.cells.iter().enumerate() {
        for (c, &cell) in row.iter().enumerate() {
            out.push(((matrix.row_strategies[r].clone(), matrix.col_strategies[c].clone()), cell));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::matrix;
    use proptest::prelude::*;

    fn td(penalty: i64) -> TdGame {
        TdGame::new(2, 100, penalty).unwrap()
    }

    fn pay(a: i64, b: i64, game: &TdGame) -> (i64, i64) {
        td_payoff_checked(a, b, game).unwrap()
    }

    #[test]
    fn td_payoff_examples() {
        assert_eq!(pay(99, 100, &td(2)), (101, 97));
        assert_eq!(pay(100, 100, &td(2)), (100, 100));
        assert_eq!(pay(99, 100, &td(20)), (119, 79));
    }

    #[test]
    fn td_out_of_range() {
        assert!(matches!(td_payoff_checked(1, 50, &td(2)), Err(Error::QuoteOutOfRange { quote: 1, .. })));
        assert!(td_payoff_checked(50, 101, &td(2)).is_err());
    }

    #[test]
    fn floor_at_zero_clamps() {
        let game = TdGame { floor_at_zero: true, ..td(20) };
        assert_eq!(pay(100, 5, &game), (0, 25));
        assert_eq!(pay(100, 5, &td(20)), (-15, 25));
    }

    #[test]
    fn undercut_ranges_match_low_penalty_prompt() {
        assert_eq!(td_undercut_range(&td(2), 100).unwrap(), Some((0, 97)));
        assert_eq!(td_undercut_range(&td(2), 99).unwrap(), Some((0, 96)));
        assert_eq!(td_undercut_range(&td(2), 2).unwrap(), None);
        // The high-penalty prompt prints 77 here; the rule gives 79.
        assert_eq!(td_undercut_range(&td(20), 100).unwrap(), Some((0, 79)));
    }

    #[test]
    fn matrix_lookups() {
        let life = matrix("life_support_sharing").unwrap();
        assert_eq!(pd_payoff(&life, "silent", "silent").unwrap(), (4.0, 4.0));
        assert_eq!(pd_payoff(&life, "silent", "betray").unwrap(), (0.0, 10.0));
        let jail = matrix("time_in_jail").unwrap();
        assert_eq!(pd_payoff(&jail, "betray", "betray").unwrap(), (3.0, 3.0));
        assert_eq!(jail.orientation, Orientation::Minimize);
        assert!(matches!(pd_payoff(&jail, "cooperate", "betray"), Err(Error::UnknownStrategy(_))));
    }

    fn td_dominates(a: i64, b: i64, game: &TdGame) -> bool {
        let all: Vec<i64> = game.quotes().collect();
        weakly_dominates(&a, &b, &all, Orientation::Maximize, |x, y| pay(*x, *y, game).0 as f64)
    }

    #[test]
    fn ninety_nine_weakly_dominates_hundred() {
        assert!(td_dominates(99, 100, &td(2)));
        assert!(!td_dominates(100, 99, &td(2)));
    }

    #[test]
    fn ninety_eight_does_not_dominate_ninety_nine_on_full_set() {
        assert!(!td_dominates(98, 99, &td(2)));
        // Column-by-column: 99 beats 98 only when the opponent quotes 100.
        let game = td(2);
        assert_eq!(pay(98, 100, &game).0, 100);
        assert_eq!(pay(99, 100, &game).0, 101);
        assert_eq!(pay(98, 99, &game).0, 100);
        assert_eq!(pay(99, 99, &game).0, 99);
    }

    #[test]
    fn nothing_dominates_itself() {
        assert!(!td_dominates(50, 50, &td(2)));
    }

    #[test]
    fn elimination_reaches_two_for_both_penalties() {
        for penalty in [2, 20] {
            let e = td_elimination(&td(penalty));
            assert_eq!(e.survivors, vec![2]);
            assert_eq!(e.trace.len(), 98);
            for (i, round) in e.trace.iter().enumerate() {
                assert_eq!(round.removed, vec![100 - i as i64]);
            }
        }
    }

    #[test]
    fn singleton_has_no_rounds() {
        let e = iterated_elimination(&[7i64], Orientation::Maximize, |_, _| 0.0);
        assert_eq!(e.survivors, vec![7]);
        assert!(e.trace.is_empty());
    }

    #[test]
    fn pd_dominance_and_nash() {
        for name in ["life_support_sharing", "time_in_jail", "ac_sharing"] {
            let m = matrix(name).unwrap();
            let payoff = matrix_row_payoff(&m);
            let report = dominance_report(&m.row_strategies, &m.col_strategies, m.orientation, &payoff);
            assert_eq!(report.len(), 1, "{name}");
            assert_eq!(report[0].dominator, "betray");
            assert_eq!(report[0].kind, DominanceKind::Strict);
            assert_eq!(pure_nash(&m), vec![("betray".to_string(), "betray".to_string())]);
        }
    }

    #[test]
    fn pareto_sets() {
        let jail = matrix("time_in_jail").unwrap();
        let front = pareto_optimal(&jail);
        assert!(front.contains(&("silent".into(), "silent".into())));
        assert!(!front.contains(&("betray".into(), "betray".into())));

        let life = matrix("life_support_sharing").unwrap();
        let front = pareto_optimal(&life);
        assert!(!front.contains(&("betray".into(), "betray".into())));
        assert_eq!(front.len(), 3);

        let single = PayoffMatrix {
            name: "one".into(),
            row_strategies: vec!["x".into()],
            col_strategies: vec!["y".into()],
            cells: vec![vec![(1.0, 1.0)]],
            orientation: Orientation::Maximize,
        };
        assert_eq!(pareto_optimal(&single), vec![("x".to_string(), "y".to_string())]);
    }

    proptest! {
        #[test]
        fn td_symmetry(a in 2i64..=100, b in 2i64..=100, penalty in 1i64..30) {
            let game = td(penalty);
            let (x, y) = pay(a, b, &game);
            prop_assert_eq!(pay(b, a, &game), (y, x));
        }

        #[test]
        fn td_tie_conservation(q in 2i64..=100, penalty in 1i64..30) {
            prop_assert_eq!(pay(q, q, &td(penalty)), (q, q));
        }

        #[test]
        fn dominance_irreflexive_and_asymmetric(a in 2i64..=100, b in 2i64..=100) {
            let game = td(2);
            prop_assert!(!td_dominates(a, a, &game));
            prop_assert!(!(td_dominates(a, b, &game) && td_dominates(b, a, &game)));
        }
    }
}
