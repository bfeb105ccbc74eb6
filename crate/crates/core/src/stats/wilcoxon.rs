use std::cmp::Ordering;

use super::{doubled_ranks, normal_sf, tie_term, Method, StatsError, TestResult};

pub const RANK_SUM_EXACT_THRESHOLD: usize = 16;
pub const SIGNED_RANK_EXACT_THRESHOLD: usize = 20;
pub const ORACLE_MAX_N: usize = 12;

// u128 counts stay exact up to C(100, 50).
const EXACT_HARD_CAP: usize = 100;

fn check_nonempty(a: &[f64], b: &[f64]) -> Result<(), StatsError> {
    if a.is_empty() || b.is_empty() {
        return Err(StatsError::InvalidInput("rank-sum test needs two non-empty samples".into()));
    }
    if a.iter().chain(b).any(|v| v.is_nan()) {
        return Err(StatsError::InvalidInput("NaN in sample".into()));
    }
    Ok(())
}

/// Wilcoxon rank-sum (Mann-Whitney) test; `statistic` is the rank sum of `a`.
///
/// Exact over all `C(na+nb, na)` group assignments (midranks, no tie
/// breaking) when `na + nb <= exact_threshold`; otherwise the normal
/// approximation with tie and continuity corrections.
pub fn rank_sum(a: &[f64], b: &[f64], exact_threshold: usize) -> Result<TestResult, StatsError> {
    check_nonempty(a, b)?;
    let (na, nb) = (a.len(), b.len());
    let n = na + nb;
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = doubled_ranks(&pooled);
    let w_doubled: u64 = ranks[..na].iter().sum();
    let statistic = w_doubled as f64 / 2.0;

    if n <= exact_threshold.min(EXACT_HARD_CAP) {
        let p_value = exact_rank_sum_p(&ranks, na, w_doubled);
        return Ok(TestResult { statistic, p_value, method: Method::Exact, n: vec![na, nb] });
    }

    let (naf, nbf, nf) = (na as f64, nb as f64, n as f64);
    let u = statistic - naf * (naf + 1.0) / 2.0;
    let mean = naf * nbf / 2.0;
    let var = naf * nbf / 12.0 * ((nf + 1.0) - tie_term(&pooled) / (nf * (nf - 1.0)));
    let p_value = two_sided_normal(u - mean, var);
    Ok(TestResult { statistic, p_value, method: Method::NormalApprox, n: vec![na, nb] })
}

pub fn rank_sum_default(a: &[f64], b: &[f64]) -> Result<TestResult, StatsError> {
    rank_sum(a, b, RANK_SUM_EXACT_THRESHOLD)
}

fn two_sided_normal(deviation: f64, var: f64) -> f64 {
    if var <= 0.0 {
        return 1.0;
    }
    let z = (deviation.abs() - 0.5).max(0.0) / var.sqrt();
    (2.0 * normal_sf(z)).min(1.0)
}

/// Null distribution of the doubled rank sum by subset-sum counting.
fn exact_rank_sum_p(ranks: &[u64], na: usize, observed: u64) -> f64 {
    let n = ranks.len() as i128;
    let max_sum: u64 = ranks.iter().sum();
    let width = max_sum as usize + 1;
    // counts[j][s]: subsets of size j with doubled rank sum s
    let mut counts = vec![vec![0u128; width]; na + 1];
    counts[0][0] = 1;
    for (i, &r) in ranks.iter().enumerate() {
        let r = r as usize;
        for j in (1..=na.min(i + 1)).rev() {
            let (lower, upper) = counts.split_at_mut(j);
            let (prev, cur) = (&lower[j - 1], &mut upper[0]);
            for s in (r..width).rev() {
                cur[s] += prev[s - r];
            }
        }
    }
    let center = na as i128 * (n + 1);
    let observed_dev = (observed as i128 - center).abs();
    let mut extreme = 0u128;
    let mut total = 0u128;
    for (s, &c) in counts[na].iter().enumerate() {
        total += c;
        if (s as i128 - center).abs() >= observed_dev {
            extreme += c;
        }
    }
    extreme as f64 / total as f64
}

/// Direction of the location shift of `a` relative to `b`, by mean rank.
pub fn rank_shift(a: &[f64], b: &[f64]) -> Ordering {
    if a.is_empty() || b.is_empty() {
        return Ordering::Equal;
    }
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = doubled_ranks(&pooled);
    let wa: u64 = ranks[..a.len()].iter().sum();
    let wb: u64 = ranks[a.len()..].iter().sum();
    (u128::from(wa) * b.len() as u128).cmp(&(u128::from(wb) * a.len() as u128))
}

/// Brute-force reference for [`rank_sum`]: enumerates every split of the
/// pooled sample and recomputes the Mann-Whitney U by pairwise comparison.
pub fn exact_perm_oracle(a: &[f64], b: &[f64]) -> Result<TestResult, StatsError> {
    check_nonempty(a, b)?;
    let (na, nb) = (a.len(), b.len());
    let n = na + nb;
    if n > ORACLE_MAX_N {
        return Err(StatsError::TooLarge { n, limit: ORACLE_MAX_N });
    }
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();

    // 2U = Σ over (x in group A, y in group B) of 2·[x > y] + [x == y]
    let doubled_u = |mask: u32| -> i64 {
        let mut u = 0i64;
        for i in (0..n).filter(|i| mask & (1 << i) != 0) {
            for j in (0..n).filter(|j| mask & (1 << j) == 0) {
                u += match pooled[i].partial_cmp(&pooled[j]) {
                    Some(Ordering::Greater) => 2,
                    Some(Ordering::Equal) => 1,
                    _ => 0,
                };
            }
        }
        u
    };

    let center = (na * nb) as i64;
    let observed_mask = (1u32 << na) - 1;
    let observed = doubled_u(observed_mask);
    let observed_dev = (observed - center).abs();

    let (mut extreme, mut total) = (0u64, 0u64);
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != na {
            continue;
        }
        total += 1;
        if (doubled_u(mask) - center).abs() >= observed_dev {
            extreme += 1;
        }
    }
    let w = observed as f64 / 2.0 + (na * (na + 1)) as f64 / 2.0;
    Ok(TestResult { statistic: w, p_value: extreme as f64 / total as f64, method: Method::Exact, n: vec![na, nb] })
}

/// Wilcoxon signed-rank test on paired differences; `statistic` is W+.
///
/// Zeros are dropped first. Exact for up to 20 non-zero differences,
/// otherwise normal approximation with tie and continuity corrections.
pub fn signed_rank(diffs: &[f64]) -> Result<TestResult, StatsError> {
    if diffs.is_empty() {
        return Err(StatsError::InvalidInput("signed-rank needs differences".into()));
    }
    if diffs.iter().any(|d| d.is_nan()) {
        return Err(StatsError::InvalidInput("NaN in differences".into()));
    }
    let nonzero: Vec<f64> = diffs.iter().copied().filter(|d| *d != 0.0).collect();
    let n = nonzero.len();
    if n == 0 {
        return Ok(TestResult { statistic: 0.0, p_value: 1.0, method: Method::Exact, n: vec![0] });
    }
    let magnitudes: Vec<f64> = nonzero.iter().map(|d| d.abs()).collect();
    let ranks = doubled_ranks(&magnitudes);
    let w_plus: u64 = ranks.iter().zip(&nonzero).filter(|(_, d)| **d > 0.0).map(|(r, _)| r).sum();
    let statistic = w_plus as f64 / 2.0;

    if n <= SIGNED_RANK_EXACT_THRESHOLD {
        let total: u64 = ranks.iter().sum();
        let mut counts = vec![0u64; total as usize + 1];
        counts[0] = 1;
        for &r in &ranks {
            let r = r as usize;
            for s in (r..counts.len()).rev() {
                counts[s] += counts[s - r];
            }
        }
        let total = total as i64;
        let observed_dev = (2 * w_plus as i64 - total).abs();
        let extreme: u64 = counts
            .iter()
            .enumerate()
            .filter(|(s, _)| (2 * *s as i64 - total).abs() >= observed_dev)
            .map(|(_, c)| c)
            .sum();
        return Ok(TestResult {
            statistic,
            p_value: extreme as f64 / (1u64 << n) as f64,
            method: Method::Exact,
            n: vec![n],
        });
    }

    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term(&magnitudes) / 48.0;
    Ok(TestResult {
        statistic,
        p_value: two_sided_normal(statistic - mean, var),
        method: Method::NormalApprox,
        n: vec![n],
    })
}

/// Sign of the paired shift: `Greater` when positive differences dominate.
pub fn signed_shift(diffs: &[f64]) -> Ordering {
    let nonzero: Vec<f64> = diffs.iter().copied().filter(|d| *d != 0.0).collect();
    let magnitudes: Vec<f64> = nonzero.iter().map(|d| d.abs()).collect();
    let ranks = doubled_ranks(&magnitudes);
    let (mut plus, mut minus) = (0u64, 0u64);
    for (r, d) in ranks.iter().zip(&nonzero) {
        if *d > 0.0 {
            plus += r;
        } else {
            minus += r;
        }
    }
    plus.cmp(&minus)
}
