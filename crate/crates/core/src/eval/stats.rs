use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

/// Sample mean with a 95% percentile-bootstrap interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub mean: f64,
    pub lo: f64,
    pub hi: f64,
}

/// Percentile bootstrap of the mean. Deterministic in `seed`.
pub fn bootstrap_ci(values: &[f64], resamples: usize, seed: u64) -> Interval {
    assert!(!values.is_empty(), "bootstrap needs data");
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 || resamples == 0 {
        return Interval {
            mean,
            lo: mean,
            hi: mean,
        };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut means: Vec<f64> = (0..resamples)
        .map(|_| (0..n).map(|_| values[rng.random_range(0..n)]).sum::<f64>() / n as f64)
        .collect();
    means.sort_by(f64::total_cmp);
    let at = |q: f64| means[((q * (resamples - 1) as f64).round() as usize).min(resamples - 1)];
    Interval {
        mean,
        lo: at(0.025),
        hi: at(0.975),
    }
}

/// One-sided Wilcoxon signed-rank test of "`a` tends to be smaller than `b`"
/// on paired samples. Uses the normal approximation with tie correction;
/// zero differences are dropped. Returns 1.0 when every pair is tied.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "paired samples");
    let mut d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|d| *d != 0.0).collect();
    let n = d.len();
    if n == 0 {
        return 1.0;
    }
    d.sort_by(|x, y| x.abs().total_cmp(&y.abs()));
    // midranks over ties in |d|
    let mut w_plus = 0.0;
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && d[j + 1].abs() == d[i].abs() {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        w_plus += d[i..=j].iter().filter(|x| **x > 0.0).count() as f64 * rank;
        i = j + 1;
    }
    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term / 48.0;
    if var <= 0.0 {
        return 1.0;
    }
    // small W+ means the differences a - b are mostly negative
    let z = (w_plus - mean + 0.5) / var.sqrt();
    Normal::standard().cdf(z)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bootstrap_of_constant() {
        let ci = bootstrap_ci(&[2.0; 10], 500, 3);
        assert_eq!((ci.mean, ci.lo, ci.hi), (2.0, 2.0, 2.0));
    }

    #[test]
    fn bootstrap_brackets_mean() {
        let v: Vec<f64> = (0..50).map(|i| (i % 7) as f64).collect();
        let ci = bootstrap_ci(&v, 1000, 1);
        assert!(ci.lo < ci.mean && ci.mean < ci.hi);
        assert_eq!(ci, bootstrap_ci(&v, 1000, 1));
    }

    #[test]
    fn wilcoxon_direction() {
        let a: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let b: Vec<f64> = a.iter().map(|x| x + 1.0 + (x * 0.37).sin().abs()).collect();
        assert!(wilcoxon_signed_rank(&a, &b) < 1e-4);
        assert!(wilcoxon_signed_rank(&b, &a) > 0.99);
        assert_eq!(wilcoxon_signed_rank(&a, &a), 1.0);
    }

    #[test]
    fn wilcoxon_matches_reference_values() {
        // normal approximation with continuity and tie corrections, computed independently
        let zero = [0.0; 11];
        let d = [-1.0, -2.0, -3.0, -4.0, -5.0, -6.0, -7.0, 8.0, 9.0, 10.0];
        assert!((wilcoxon_signed_rank(&d, &zero[..10]) - 0.5).abs() < 1e-12);
        let d = [-1.0, -2.0, -2.0, -4.0, -5.0, -6.0, -7.0, 8.0, 8.0, 10.0, 3.0];
        assert!((wilcoxon_signed_rank(&d, &zero) - 0.5531003250578306).abs() < 1e-12);
    }
}
