//! Gumbel-softmax relaxation of categorical sampling.

use rand::Rng;

use crate::rng::RngStream;

/// Relaxed one-hot draws: `soft` is row-major `count x size`.
#[derive(Debug, Clone, PartialEq)]
pub struct GumbelBatch {
    pub size: usize,
    pub soft: Vec<f64>,
    pub hard: Vec<usize>,
}

impl GumbelBatch {
    pub fn soft_row(&self, i: usize) -> &[f64] {
        &self.soft[i * self.size..(i + 1) * self.size]
    }
}

/// Standard Gumbel noise `-ln(-ln u)`, `u` uniform on (0, 1).
#[inline]
pub fn gumbel_noise<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u: f64 = rng.random::<f64>();
    // Map [0, 1) into (0, 1).
    let u = if u == 0.0 { f64::MIN_POSITIVE } else { u };
    -(-u.ln()).ln()
}

/// `softmax((log_probs + gumbel) / tau)` written into `out`; returns the
/// argmax, which is a sample of the categorical distribution.
pub fn relax(log_probs: &[f64], gumbel: &[f64], tau: f64, out: &mut [f64]) -> usize {
    let mut hard = 0;
    let mut best = f64::NEG_INFINITY;
    for (i, (lp, g)) in log_probs.iter().zip(gumbel).enumerate() {
        let z = (lp + g) / tau;
        out[i] = z;
        if z > best {
            best = z;
            hard = i;
        }
    }
    let mut sum = 0.0;
    for v in out.iter_mut() {
        *v = (*v - best).exp();
        sum += *v;
    }
    out.iter_mut().for_each(|v| *v /= sum);
    hard
}

/// Draw `count` relaxed samples from `probs` at temperature `tau`.
pub fn gumbel_sample(probs: &[f64], tau: f64, count: usize, stream: RngStream) -> GumbelBatch {
    let size = probs.len();
    let log_probs: Vec<f64> = probs
        .iter()
        .map(|&p| if p > 0.0 { p.ln() } else { f64::NEG_INFINITY })
        .collect();
    let mut rng = stream.rng();
    let mut soft = vec![0.0; count * size];
    let mut hard = Vec::with_capacity(count);
    let mut g = vec![0.0; size];
    for row in soft.chunks_mut(size) {
        g.iter_mut().for_each(|v| *v = gumbel_noise(&mut rng));
        hard.push(relax(&log_probs, &g, tau, row));
    }
    GumbelBatch { size, soft, hard }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_sum_to_one() {
        let probs = [0.1, 0.2, 0.3, 0.4];
        let b = gumbel_sample(&probs, 0.7, 1000, RngStream::new(1));
        for i in 0..1000 {
            let s: f64 = b.soft_row(i).iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn low_temperature_is_one_hot() {
        let probs = [0.25; 4];
        let b = gumbel_sample(&probs, 1e-4, 200, RngStream::new(2));
        for i in 0..200 {
            let row = b.soft_row(i);
            assert!((row[b.hard[i]] - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn hard_index_is_categorical() {
        let probs: Vec<f64> = (1..=8).map(|k| k as f64 / 36.0).collect();
        let n = 1_000_000;
        let b = gumbel_sample(&probs, 1.0, n, RngStream::new(3));
        let mut counts = [0usize; 8];
        b.hard.iter().for_each(|&h| counts[h] += 1);
        for (c, p) in counts.iter().zip(&probs) {
            let sd = (n as f64 * p * (1.0 - p)).sqrt();
            assert!((*c as f64 - n as f64 * p).abs() < 3.0 * sd, "{c} vs {p}");
        }
    }

    #[test]
    fn zero_probability_never_drawn() {
        let probs = [0.5, 0.0, 0.5];
        let b = gumbel_sample(&probs, 1.0, 10_000, RngStream::new(4));
        assert!(b.hard.iter().all(|&h| h != 1));
    }
}
