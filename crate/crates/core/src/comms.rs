//! Communication link: AWGN channel, Gaussian LLR demapper and Monte-Carlo
//! GMI estimation for bit-metric decoding.

use std::f64::consts::LN_2;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constellation::{entropy_bits, CategoricalSampler, Constellation};
use crate::error::{Error, Result};
use crate::rng::RngStream;

/// LLR magnitude used in place of an infinite LLR (nats).
pub const LLR_SATURATION: f64 = 300.0;

/// Samples per parallel work unit in [`estimate_gmi`]. Fixed so results do
/// not depend on the worker count.
const GMI_CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AwgnChannel {
    noise_variance: f64,
}

impl AwgnChannel {
    /// Total noise variance per complex symbol.
    pub fn new(noise_variance: f64) -> Result<Self> {
        if !(noise_variance > 0.0) || !noise_variance.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "noise variance must be positive, got {noise_variance}"
            )));
        }
        Ok(Self { noise_variance })
    }

    /// Channel for unit-power input at the given SNR.
    pub fn from_snr_db(snr_db: f64) -> Result<Self> {
        Self::new(10f64.powf(-snr_db / 10.0))
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    pub fn snr_db(&self) -> f64 {
        -10.0 * self.noise_variance.log10()
    }

    /// AWGN capacity `log2(1 + 1/sigma^2)` for unit-power input.
    pub fn capacity(&self) -> f64 {
        (1.0 + 1.0 / self.noise_variance).log2()
    }

    pub fn transmit(&self, symbols: &[Complex64], stream: RngStream) -> Vec<Complex64> {
        let mut rng = stream.rng();
        let sigma = (self.noise_variance / 2.0).sqrt();
        symbols
            .iter()
            .map(|x| x + complex_gaussian(&mut rng, sigma))
            .collect()
    }
}

/// Circular complex Gaussian sample with standard deviation `sigma` per
/// real dimension.
#[inline]
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, sigma: f64) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * sigma, im * sigma)
}

/// Whether the demapper weights the likelihoods by the point probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DemapperPrior {
    #[default]
    Aware,
    Uniform,
}

/// Per-bit log-sum-exp over the two label subsets of every bit position.
///
/// `metrics[i]` is the log-weight of point `i`. On return
/// `lse[2 * m + b]` holds `ln sum_{i: bit(i, m) = b} exp(metrics[i])` and,
/// when requested, `weights[m * size + i]` holds the posterior weight of
/// point `i` within its own subset at bit `m`.
pub(crate) fn bit_log_sums(
    c: &Constellation,
    metrics: &[f64],
    lse: &mut [f64],
    mut weights: Option<&mut [f64]>,
    scratch: &mut Vec<f64>,
) {
    let size = c.size();
    let bits = c.bits_per_symbol() as usize;
    let dmax = metrics.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    scratch.clear();
    scratch.extend(metrics.iter().map(|d| (d - dmax).exp()));
    for m in 0..bits {
        let shift = bits - 1 - m;
        let (mut s0, mut s1) = (0.0, 0.0);
        for (i, e) in scratch.iter().enumerate() {
            if (i >> shift) & 1 == 0 {
                s0 += e;
            } else {
                s1 += e;
            }
        }
        for (b, s) in [(0usize, s0), (1usize, s1)] {
            let exact = s > 1e-280;
            let value = if exact {
                dmax + s.ln()
            } else {
                // Whole subset underflowed against the global maximum.
                let sub_max = (0..size)
                    .filter(|i| (i >> shift) & 1 == b)
                    .map(|i| metrics[i])
                    .fold(f64::NEG_INFINITY, f64::max);
                if sub_max == f64::NEG_INFINITY {
                    f64::NEG_INFINITY
                } else {
                    sub_max
                        + (0..size)
                            .filter(|i| (i >> shift) & 1 == b)
                            .map(|i| (metrics[i] - sub_max).exp())
                            .sum::<f64>()
                            .ln()
                }
            };
            lse[2 * m + b] = value;
            if let Some(w) = weights.as_deref_mut() {
                for i in (0..size).filter(|i| (i >> shift) & 1 == b) {
                    w[m * size + i] = if value == f64::NEG_INFINITY {
                        0.0
                    } else if exact {
                        scratch[i] / s
                    } else {
                        (metrics[i] - value).exp()
                    };
                }
            }
        }
    }
}

/// Clamp an LLR to `[-LLR_SATURATION, LLR_SATURATION]`. NaN arises only as
/// `inf - inf`, i.e. both subsets empty, and maps to zero.
#[inline]
pub(crate) fn saturate(llr: f64) -> f64 {
    if llr.is_nan() {
        0.0
    } else {
        llr.clamp(-LLR_SATURATION, LLR_SATURATION)
    }
}

/// Exact (log-sum-exp, not max-log) Gaussian demapper. Positive LLR means
/// bit 0 is more likely.
#[derive(Debug, Clone)]
pub struct Demapper<'a> {
    constellation: &'a Constellation,
    inv_noise: f64,
    log_prior: Vec<f64>,
}

impl<'a> Demapper<'a> {
    pub fn new(constellation: &'a Constellation, noise_variance: f64, prior: DemapperPrior) -> Self {
        let log_prior = match prior {
            DemapperPrior::Aware => constellation
                .probs()
                .iter()
                .map(|&p| if p > 0.0 { p.ln() } else { f64::NEG_INFINITY })
                .collect(),
            DemapperPrior::Uniform => vec![0.0; constellation.size()],
        };
        Self {
            constellation,
            inv_noise: noise_variance.recip(),
            log_prior,
        }
    }

    /// Write one LLR per bit into `out`.
    pub fn llrs_into(&self, y: Complex64, out: &mut [f64], work: &mut DemapWork) {
        let c = self.constellation;
        work.metrics.clear();
        work.metrics.extend(
            c.points()
                .iter()
                .zip(&self.log_prior)
                .map(|(x, lp)| lp - (y - x).norm_sqr() * self.inv_noise),
        );
        work.lse.resize(2 * c.bits_per_symbol() as usize, 0.0);
        bit_log_sums(c, &work.metrics, &mut work.lse, None, &mut work.scratch);
        for (m, o) in out.iter_mut().enumerate() {
            *o = saturate(work.lse[2 * m] - work.lse[2 * m + 1]);
        }
    }

    pub fn llrs(&self, y: Complex64) -> Vec<f64> {
        let mut out = vec![0.0; self.constellation.bits_per_symbol() as usize];
        self.llrs_into(y, &mut out, &mut DemapWork::default());
        out
    }
}

/// Reusable buffers for [`Demapper::llrs_into`].
#[derive(Debug, Default, Clone)]
pub struct DemapWork {
    metrics: Vec<f64>,
    lse: Vec<f64>,
    scratch: Vec<f64>,
}

/// Prior-aware LLRs of a single received symbol.
pub fn demap(y: Complex64, c: &Constellation, noise_variance: f64) -> Vec<f64> {
    Demapper::new(c, noise_variance, DemapperPrior::Aware).llrs(y)
}

/// Binary cross-entropy in bits of the posterior implied by `llr` against
/// the transmitted bit.
#[inline]
pub fn bit_cross_entropy(bit: u8, llr: f64) -> f64 {
    let z = if bit == 0 { -llr } else { llr };
    softplus(z) / LN_2
}

#[inline]
pub(crate) fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// Binary entropy in bits.
pub fn binary_entropy(p: f64) -> f64 {
    entropy_bits(&[p, 1.0 - p])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmiEstimate {
    /// Achievable rate of bit-metric decoding, `[H(X) - sum_m E{BCE_m}]^+`.
    pub gmi_bits: f64,
    /// `H(b_m) - E{BCE_m}` per bit level.
    pub per_bit_mi: Vec<f64>,
    pub std_error: f64,
    pub sample_count: usize,
}

/// Monte-Carlo GMI with the prior-aware demapper.
pub fn estimate_gmi(
    c: &Constellation,
    channel: &AwgnChannel,
    batch: usize,
    stream: RngStream,
) -> GmiEstimate {
    estimate_gmi_with(c, channel, batch, stream, DemapperPrior::Aware)
}

pub fn estimate_gmi_with(
    c: &Constellation,
    channel: &AwgnChannel,
    batch: usize,
    stream: RngStream,
    prior: DemapperPrior,
) -> GmiEstimate {
    let bits = c.bits_per_symbol() as usize;
    let demapper = Demapper::new(c, channel.noise_variance(), prior);
    let sampler = CategoricalSampler::new(c.probs());
    let sigma = (channel.noise_variance() / 2.0).sqrt();
    let chunks = batch.div_ceil(GMI_CHUNK);

    // Per chunk: per-bit BCE sums, sum of per-sample total BCE and its square.
    let partials: Vec<(Vec<f64>, f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let n = GMI_CHUNK.min(batch - k * GMI_CHUNK);
            let mut rng = stream.child(k as u64).rng();
            let mut work = DemapWork::default();
            let mut llr = vec![0.0; bits];
            let mut per_bit = vec![0.0; bits];
            let (mut s1, mut s2) = (0.0, 0.0);
            for _ in 0..n {
                let i = sampler.draw(&mut rng);
                let y = c.points()[i] + complex_gaussian(&mut rng, sigma);
                demapper.llrs_into(y, &mut llr, &mut work);
                let mut total = 0.0;
                for m in 0..bits {
                    let h = bit_cross_entropy(c.bit(i, m), llr[m]);
                    per_bit[m] += h;
                    total += h;
                }
                s1 += total;
                s2 += total * total;
            }
            (per_bit, s1, s2)
        })
        .collect();

    let mut bce = vec![0.0; bits];
    let (mut s1, mut s2) = (0.0, 0.0);
    for (per_bit, a, b) in partials {
        for (acc, v) in bce.iter_mut().zip(per_bit) {
            *acc += v;
        }
        s1 += a;
        s2 += b;
    }
    let n = batch as f64;
    let per_bit_mi: Vec<f64> = (0..bits)
        .map(|m| binary_entropy(c.bit_zero_prob(m)) - bce[m] / n)
        .collect();
    let mean = s1 / n;
    let var = (s2 / n - mean * mean).max(0.0) * n / (n - 1.0).max(1.0);
    GmiEstimate {
        gmi_bits: (c.entropy() - mean).max(0.0),
        per_bit_mi,
        std_error: (var / n).sqrt(),
        sample_count: batch,
    }
}
