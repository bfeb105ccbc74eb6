//! Rank-based nonparametric statistics.
//!
//! Every test here depends on its inputs only through their joint ranks, so
//! any strictly increasing transform of all inputs leaves statistics and
//! p-values unchanged. P-values are two-sided.

mod dist;
mod kruskal;
mod rank;
mod wilcoxon;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use dist::{chi_square_sf, normal_sf};
pub use kruskal::kruskal_wallis;
pub use rank::{average_ranks, spearman, CorrelationResult};
pub use wilcoxon::{
    exact_perm_oracle, rank_shift, rank_sum, rank_sum_default, signed_rank, signed_shift, ORACLE_MAX_N,
    RANK_SUM_EXACT_THRESHOLD, SIGNED_RANK_EXACT_THRESHOLD,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("correlation undefined: {0}")]
    Undefined(String),
    #[error("exhaustive enumeration limited to {limit} observations, got {n}")]
    TooLarge { n: usize, limit: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    NormalApprox,
    ChiSquare,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    pub method: Method,
    pub n: Vec<usize>,
}

impl TestResult {
    pub fn significant(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }
}

/// Which two-sample Wilcoxon variant backs a preference decision.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WilcoxonKind {
    #[default]
    RankSum,
    SignedRank,
}

/// Midranks doubled so that ties stay integral.
pub(crate) fn doubled_ranks(xs: &[f64]) -> Vec<u64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut out = vec![0u64; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        // ranks i+1..=j+1 share (i+1 + j+1)/2; doubled that is i+j+2
        let doubled = (i + j + 2) as u64;
        for &idx in &order[i..=j] {
            out[idx] = doubled;
        }
        i = j + 1;
    }
    out
}

/// Σ(t³ − t) over tie groups.
pub(crate) fn tie_term(xs: &[f64]) -> f64 {
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut total = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        total += t * t * t - t;
        i = j + 1;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn doubled_ranks_with_ties() {
        assert_eq!(doubled_ranks(&[5.0, 5.0, 7.0]), [3, 3, 6]);
        assert_eq!(doubled_ranks(&[3.0, 1.0, 2.0]), [6, 2, 4]);
    }

    #[test]
    fn tie_term_counts_groups() {
        assert_eq!(tie_term(&[1.0, 2.0, 3.0]), 0.0);
        assert_eq!(tie_term(&[1.0, 1.0, 2.0, 2.0, 2.0]), 6.0 + 24.0);
    }
}
