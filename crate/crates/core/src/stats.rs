//! Small statistics helpers for the test suites and benchmark summaries.

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Histogram of sampled indices over `0..n`.
pub fn counts(samples: &[usize], n: usize) -> Vec<u64> {
    let mut c = vec![0u64; n];
    for &s in samples {
        c[s] += 1;
    }
    c
}

/// Total-variation distance between the empirical distribution of `counts`
/// and the reference probabilities.
pub fn tv_distance_counts(counts: &[u64], probs: &[f64]) -> f64 {
    let total: u64 = counts.iter().sum();
    let n = total as f64;
    0.5 * counts
        .iter()
        .zip(probs)
        .map(|(&c, &p)| (c as f64 / n - p).abs())
        .sum::<f64>()
}

/// Pearson chi-square statistic of `counts` against expected probabilities.
pub fn chi_square_statistic(counts: &[u64], probs: &[f64]) -> f64 {
    let total: u64 = counts.iter().sum();
    let n = total as f64;
    counts
        .iter()
        .zip(probs)
        .filter(|(_, &p)| p > 0.0)
        .map(|(&c, &p)| {
            let expected = n * p;
            let d = c as f64 - expected;
            d * d / expected
        })
        .sum()
}

/// Upper-tail p-value of the chi-square goodness-of-fit test with
/// `len - 1` degrees of freedom.
pub fn chi_square_p_value(counts: &[u64], probs: &[f64]) -> f64 {
    let stat = chi_square_statistic(counts, probs);
    let dof = (counts.len() - 1) as f64;
    let dist = ChiSquared::new(dof).expect("positive degrees of freedom");
    1.0 - dist.cdf(stat)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn median(xs: &[f64]) -> f64 {
    let mut sorted = xs.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}
