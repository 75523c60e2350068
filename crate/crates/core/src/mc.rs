//! Deterministic parallel Monte Carlo plumbing.
//!
//! Replications map to independent RNG streams and may run on any number of
//! threads; accumulation uses a fixed-order pairwise reduction over the
//! replication-ordered values, so every estimate is bit-identical no matter
//! how the work was scheduled.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::generators::RngStream;

/// Share of the total squared deviation a single replication may carry
/// before the heavy-tail diagnostic trips.
const TAIL_SHARE_THRESHOLD: f64 = 0.1;

/// A Monte Carlo mean with its uncertainty and provenance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    /// Sample standard deviation / sqrt(n_reps), in both summation modes.
    pub std_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub ci_level: f64,
    pub n_reps: u64,
    pub seed: u64,
    /// Heavy-tail diagnostic: set when a single replication dominates the
    /// sample variance, or analytically for models known to have infinite
    /// variance.
    pub tail_flag: bool,
    pub summation_mode: String,
}

/// Evaluate one statistic per replication, in parallel, in replication order.
pub fn run_replications<F>(n_reps: u64, seed: u64, f: F) -> Vec<f64>
where
    F: Fn(RngStream) -> f64 + Sync,
{
    (0..n_reps)
        .into_par_iter()
        .map(|i| f(RngStream::new(seed, i)))
        .collect()
}

/// Fallible variant of [`run_replications`]; the first error wins.
pub fn try_run_replications<F>(n_reps: u64, seed: u64, f: F) -> Result<Vec<f64>>
where
    F: Fn(RngStream) -> Result<f64> + Sync,
{
    (0..n_reps)
        .into_par_iter()
        .map(|i| f(RngStream::new(seed, i)))
        .collect()
}

/// Sum in a fixed pairwise order, independent of thread count.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

fn sample_variance_and_tail(values: &[f64], mean: f64) -> (f64, bool) {
    let n = values.len();
    if n < 2 {
        return (0.0, false);
    }
    let sq: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    let total = pairwise_sum(&sq);
    let max_sq = sq.iter().cloned().fold(0.0, f64::max);
    let tail = n >= 100 && total > 0.0 && max_sq / total > TAIL_SHARE_THRESHOLD;
    (total / (n as f64 - 1.0), tail)
}

/// Inverse standard normal CDF (Acklam's rational approximation, about 1e-9
/// relative accuracy).
pub fn inverse_normal_cdf(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("quantile level must be in (0,1), got {p}")));
    }
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.38357751867269e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;
    let x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    Ok(x)
}

/// Two-sided normal critical value for the given confidence level.
pub fn normal_critical_value(ci_level: f64) -> Result<f64> {
    if !(ci_level > 0.0 && ci_level < 1.0) {
        return Err(Error::Config(format!(
            "ci_level must be in (0,1), got {ci_level}"
        )));
    }
    inverse_normal_cdf(1.0 - (1.0 - ci_level) / 2.0)
}

/// Plain CLT estimate: mean, standard error, normal confidence interval.
pub fn estimate_mean(values: &[f64], seed: u64, ci_level: f64) -> Result<McEstimate> {
    let n = values.len() as u64;
    if n == 0 {
        return Err(Error::Config("no replications".into()));
    }
    let mean = pairwise_sum(values) / n as f64;
    let (var, tail_flag) = sample_variance_and_tail(values, mean);
    let std_error = (var / n as f64).sqrt();
    let z = normal_critical_value(ci_level)?;
    Ok(McEstimate {
        mean,
        std_error,
        ci_low: mean - z * std_error,
        ci_high: mean + z * std_error,
        ci_level,
        n_reps: n,
        seed,
        tail_flag,
        summation_mode: "pairwise".into(),
    })
}

fn binomial_median_order_index(blocks: usize, ci_level: f64) -> usize {
    // Largest k with P(Bin(blocks, 1/2) < k) <= (1 - ci_level)/2.
    let alpha = (1.0 - ci_level) / 2.0;
    let n = blocks;
    let mut pmf = 0.5f64.powi(n as i32);
    let mut cdf_below = 0.0;
    let mut k = 0usize;
    while k < n / 2 {
        // P(X < k+1) = P(X < k) + pmf(k)
        if cdf_below + pmf > alpha {
            break;
        }
        cdf_below += pmf;
        pmf *= (n - k) as f64 / (k + 1) as f64;
        k += 1;
    }
    k
}

/// Median-of-means estimate: block means in fixed replication order, median
/// across blocks, and a binomial order-statistic confidence interval for the
/// median of the block means. Valid under heavy tails where plain CLT
/// intervals are not.
pub fn estimate_median_of_means(
    values: &[f64],
    blocks: usize,
    seed: u64,
    ci_level: f64,
) -> Result<McEstimate> {
    let n = values.len();
    if blocks < 2 || n < blocks {
        return Err(Error::Config(format!(
            "median-of-means needs at least {blocks} replications, got {n}"
        )));
    }
    let mut block_means = Vec::with_capacity(blocks);
    for b in 0..blocks {
        let lo = b * n / blocks;
        let hi = (b + 1) * n / blocks;
        block_means.push(pairwise_sum(&values[lo..hi]) / (hi - lo) as f64);
    }
    let mut sorted = block_means.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite block means"));
    let median = if blocks.is_multiple_of(2) {
        0.5 * (sorted[blocks / 2 - 1] + sorted[blocks / 2])
    } else {
        sorted[blocks / 2]
    };
    let k = binomial_median_order_index(blocks, ci_level);
    let ci_low = sorted[k];
    let ci_high = sorted[blocks - 1 - k];

    let mean = pairwise_sum(values) / n as f64;
    let (var, tail_flag) = sample_variance_and_tail(values, mean);
    Ok(McEstimate {
        mean: median,
        std_error: (var / n as f64).sqrt(),
        ci_low,
        ci_high,
        ci_level,
        n_reps: n as u64,
        seed,
        tail_flag,
        summation_mode: format!("median_of_means_{blocks}"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_sum_matches_naive_on_integers() {
        let xs: Vec<f64> = (1..=1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 500_500.0);
    }

    #[test]
    fn normal_quantiles() {
        let z99 = normal_critical_value(0.99).unwrap();
        assert!((z99 - 2.5758293035489004).abs() < 1e-7, "z99 {z99}");
        let z95 = normal_critical_value(0.95).unwrap();
        assert!((z95 - 1.959963984540054).abs() < 1e-7, "z95 {z95}");
        assert!(inverse_normal_cdf(0.5).unwrap().abs() < 1e-9);
        assert!(normal_critical_value(1.0).is_err());
    }

    #[test]
    fn estimate_mean_basic_invariants() {
        let values = vec![1.0, 2.0, 3.0, 4.0];
        let est = estimate_mean(&values, 7, 0.99).unwrap();
        assert_eq!(est.mean, 2.5);
        let sd = (values.iter().map(|v| (v - 2.5) * (v - 2.5)).sum::<f64>() / 3.0).sqrt();
        assert!((est.std_error - sd / 2.0).abs() < 1e-15);
        assert!(est.ci_low <= est.mean && est.mean <= est.ci_high);
        assert!(!est.tail_flag);
    }

    #[test]
    fn zero_variance_data_has_exact_mean() {
        let values = vec![1.0; 10_000];
        let est = estimate_mean(&values, 0, 0.99).unwrap();
        assert_eq!(est.mean, 1.0);
        assert_eq!(est.std_error, 0.0);
        assert_eq!(est.ci_low, 1.0);
        assert_eq!(est.ci_high, 1.0);
    }

    #[test]
    fn tail_flag_trips_on_a_dominating_point() {
        let mut values = vec![0.0; 9_999];
        values.push(1e6);
        let est = estimate_mean(&values, 0, 0.99).unwrap();
        assert!(est.tail_flag);
    }

    #[test]
    fn median_of_means_is_robust_to_one_outlier() {
        let mut values: Vec<f64> = (0..6400).map(|i| (i % 7) as f64 - 3.0).collect();
        values[17] = 1e9;
        let est = estimate_median_of_means(&values, 64, 0, 0.99).unwrap();
        assert!(est.mean.abs() < 0.5, "median-of-means {}", est.mean);
        assert!(est.ci_low <= est.mean && est.mean <= est.ci_high);
        let plain = estimate_mean(&values, 0, 0.99).unwrap();
        assert!(plain.mean > 1e5);
    }

    #[test]
    fn median_order_index_64_blocks_99() {
        // P(Bin(64,1/2) < 22) ~ 0.0041 <= 0.005 < P(Bin < 23)
        assert_eq!(binomial_median_order_index(64, 0.99), 22);
    }

    #[test]
    fn replications_are_order_stable_across_pools() {
        let f = |s: RngStream| {
            let mut rng = s.rng();
            rand::Rng::random::<f64>(&mut rng)
        };
        let a = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| run_replications(10_000, 5, f));
        let b = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| run_replications(10_000, 5, f));
        assert_eq!(a, b);
    }
}
