//! Small sample-statistics helpers shared by the simulators.

use statrs::distribution::{ContinuousCDF, Normal};

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Sample excess kurtosis `m4 / m2^2 - 3` (zero for a Gaussian).
pub fn excess_kurtosis(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let (mut m2, mut m4) = (0.0, 0.0);
    for x in xs {
        let d2 = (x - m).powi(2);
        m2 += d2;
        m4 += d2 * d2;
    }
    let n = xs.len() as f64;
    (m4 / n) / (m2 / n).powi(2) - 3.0
}

/// Kolmogorov-Smirnov distance of standardized samples to N(0, 1).
pub fn ks_distance_normal(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let s = variance(xs).sqrt();
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    ks_distance(xs, |x| normal.cdf((x - m) / s))
}

/// Kolmogorov-Smirnov distance of samples to an arbitrary CDF.
pub fn ks_distance(xs: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Wilson score interval at 95 % confidence.
pub fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    const Z: f64 = 1.959_963_984_540_054;
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z * Z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn kurtosis_of_uniform() {
        let xs: Vec<f64> = (0..100_000).map(|i| i as f64 / 100_000.0).collect();
        assert_abs_diff_eq!(excess_kurtosis(&xs), -1.2, epsilon = 1e-3);
    }

    #[test]
    fn wilson_contains_estimate() {
        let (lo, hi) = wilson_interval(900, 1000);
        assert!(lo < 0.9 && 0.9 < hi);
        assert_abs_diff_eq!(hi - lo, 2.0 * 1.96 * (0.09f64 / 1000.0).sqrt(), epsilon = 2e-3);
        let (lo, hi) = wilson_interval(1000, 1000);
        assert!(lo > 0.99 && hi == 1.0);
    }

    #[test]
    fn ks_of_grid() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        assert_abs_diff_eq!(ks_distance(&xs, |x| x.clamp(0.0, 1.0)), 0.0005, epsilon = 1e-12);
    }
}
