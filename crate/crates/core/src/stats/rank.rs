use serde::{Deserialize, Serialize};

use super::{doubled_ranks, StatsError};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub rho: f64,
    pub n: usize,
}

/// Ranks `1..=n`; tied values share the mean of the ranks they span.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    doubled_ranks(xs).into_iter().map(|d| d as f64 / 2.0).collect()
}

/// Spearman's rho as the Pearson correlation of midranks, which stays exact
/// under ties.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<CorrelationResult, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::InvalidInput(format!("spearman needs equal lengths, got {} and {}", x.len(), y.len())));
    }
    if x.len() < 3 {
        return Err(StatsError::InvalidInput(format!("spearman needs at least 3 pairs, got {}", x.len())));
    }
    let rx = average_ranks(x);
    let ry = average_ranks(y);
    let n = rx.len() as f64;
    let mean = (n + 1.0) / 2.0;

    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        let (da, db) = (a - mean, b - mean);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::Undefined("a rank vector has zero variance".into()));
    }
    let rho = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    Ok(CorrelationResult { rho, n: x.len() })
}
