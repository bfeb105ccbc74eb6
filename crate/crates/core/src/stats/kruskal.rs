use super::{average_ranks, chi_square_sf, tie_term, Method, StatsError, TestResult};

/// Kruskal-Wallis H test with tie correction, p-value from the chi-square
/// tail with `groups - 1` degrees of freedom. A fully tied sample yields
/// `H = 0, p = 1`.
pub fn kruskal_wallis(groups: &[Vec<f64>]) -> Result<TestResult, StatsError> {
    if groups.len() < 2 {
        return Err(StatsError::InvalidInput(format!("kruskal-wallis needs at least 2 groups, got {}", groups.len())));
    }
    if groups.iter().any(Vec::is_empty) {
        return Err(StatsError::InvalidInput("empty group".into()));
    }
    let pooled: Vec<f64> = groups.iter().flatten().copied().collect();
    if pooled.iter().any(|v| v.is_nan()) {
        return Err(StatsError::InvalidInput("NaN in sample".into()));
    }
    let n = pooled.len() as f64;
    let ranks = average_ranks(&pooled);
    let sizes: Vec<usize> = groups.iter().map(Vec::len).collect();

    let correction = 1.0 - tie_term(&pooled) / (n * n * n - n);
    let df = (groups.len() - 1) as u32;
    if correction <= 0.0 {
        return Ok(TestResult { statistic: 0.0, p_value: 1.0, method: Method::ChiSquare, n: sizes });
    }

    let mut offset = 0;
    let mut between = 0.0;
    for &size in &sizes {
        let sum: f64 = ranks[offset..offset + size].iter().sum();
        between += sum * sum / size as f64;
        offset += size;
    }
    let h = ((12.0 / (n * (n + 1.0)) * between - 3.0 * (n + 1.0)) / correction).max(0.0);
    Ok(TestResult { statistic: h, p_value: chi_square_sf(h, df), method: Method::ChiSquare, n: sizes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{rank_sum, RANK_SUM_EXACT_THRESHOLD};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn three_separated_groups() {
        let groups = vec![vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0], vec![7.0, 8.0, 9.0]];
        // rank sums 6, 15, 24: 12/90 · (36+225+576)/3 − 30 = 7.2
        let r = kruskal_wallis(&groups).unwrap();
        assert!((r.statistic - 7.2).abs() < 1e-12);
        assert!((r.p_value - (-3.6f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn all_tied_is_degenerate() {
        let r = kruskal_wallis(&[vec![2.0, 2.0], vec![2.0], vec![2.0, 2.0, 2.0]]).unwrap();
        assert_eq!((r.statistic, r.p_value), (0.0, 1.0));
    }

    #[test]
    fn preconditions() {
        assert!(kruskal_wallis(&[vec![1.0]]).is_err());
        assert!(kruskal_wallis(&[vec![1.0], vec![]]).is_err());
    }

    #[test]
    fn two_groups_agree_with_rank_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let mut agree = 0;
        for _ in 0..100 {
            let na = rng.random_range(9..15);
            let nb = rng.random_range(9..15);
            let shift = rng.random_range(0.0..1.2);
            let a: Vec<f64> = (0..na).map(|_| rng.random::<f64>()).collect();
            let b: Vec<f64> = (0..nb).map(|_| rng.random::<f64>() + shift).collect();
            let kw = kruskal_wallis(&[a.clone(), b.clone()]).unwrap();
            let rs = rank_sum(&a, &b, RANK_SUM_EXACT_THRESHOLD).unwrap();
            if (kw.p_value < 0.05) == (rs.p_value < 0.05) {
                agree += 1;
            }
        }
        assert_eq!(agree, 100);
    }
}
