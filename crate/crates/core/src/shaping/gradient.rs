//! Forward pass and hand-derived reverse pass of the shaping objective.
//!
//! ```text
//! logits --softmax--> p ----------------------------+-----------+
//!                     |                             |           |
//! raw points --power normalization(p)--> x --+      |           |
//!                                            |      |           |
//! gumbel --relax(ln p)--> soft --(ST)--> t = x[k] --+-- y = t + w --demapper(x, ln p)--> LLR
//!                                                                       |
//! loss = 1 - (H(p) - mean BCE(bits[k], LLR)) / M + hinge(sum p |x|^4)  <-+
//! ```
//!
//! The kurtosis term is evaluated analytically from `(p, x)`. Channel noise
//! and Gumbel noise are inputs, so for fixed [`Draws`] the loss is a
//! deterministic function of the parameters.

use std::f64::consts::LN_2;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use super::config::{Relaxation, TrainConfig};
use super::gumbel::{gumbel_noise, relax};
use super::loss::{sensing_loss, total_loss};
use crate::comms::{bit_log_sums, complex_gaussian, softplus, DemapperPrior, LLR_SATURATION};
use crate::constellation::{entropy_bits, Constellation, RawShapingParams, ShapingMode};
use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Samples per parallel work unit; fixed so gradients do not depend on the
/// number of workers.
pub const CHUNK: usize = 256;

/// Stochastic inputs of one batch.
#[derive(Debug, Clone, PartialEq)]
pub struct Draws {
    /// Selected point per sample.
    pub hard: Vec<usize>,
    /// Gumbel noise, row-major `batch x size`; empty when the probabilities
    /// are not trained.
    pub gumbel: Vec<f64>,
    /// Channel noise per sample.
    pub noise: Vec<Complex64>,
}

impl Draws {
    pub fn len(&self) -> usize {
        self.hard.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hard.is_empty()
    }

    fn append(&mut self, other: Draws) {
        self.hard.extend(other.hard);
        self.gumbel.extend(other.gumbel);
        self.noise.extend(other.noise);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LossBreakdown {
    pub loss: f64,
    /// Batch GMI estimate `H(p) - mean BCE` (bits).
    pub gmi: f64,
    pub comms_loss: f64,
    pub kurtosis: f64,
    pub sensing_loss: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub raw_points: Vec<Complex64>,
    pub raw_logits: Vec<f64>,
}

impl Gradients {
    fn zeros(size: usize) -> Self {
        Self {
            raw_points: vec![Complex64::new(0.0, 0.0); size],
            raw_logits: vec![0.0; size],
        }
    }
}

/// Everything about the objective that stays fixed across steps.
#[derive(Debug, Clone)]
pub struct ShapingProblem {
    pub mode: ShapingMode,
    /// Initialization; provides labels and the fixed grid of probabilistic shaping.
    pub base: Constellation,
    pub noise_variance: f64,
    pub kappa_limit: f64,
    pub penalty: f64,
    pub relaxation: Relaxation,
    pub prior: DemapperPrior,
}

/// Quantities derived from the parameters before any sample is touched.
struct Realized {
    log_probs: Vec<f64>,
    probs: Vec<f64>,
    raw: Vec<Complex64>,
    inv_norm: f64,
    points: Vec<Complex64>,
    demap_prior: Vec<f64>,
}

/// Per-chunk accumulators of the sample-dependent part.
struct Partial {
    bce_sum: f64,
    grad_points: Vec<Complex64>,
    grad_log_probs: Vec<f64>,
}

impl ShapingProblem {
    pub fn from_config(cfg: &TrainConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            mode: cfg.mode,
            base: Constellation::qam(cfg.bits_per_symbol)?,
            noise_variance: cfg.noise_variance(),
            kappa_limit: cfg.kappa_limit,
            penalty: cfg.penalty,
            relaxation: cfg.relaxation,
            prior: cfg.demapper_prior,
        })
    }

    pub fn initial_params(&self) -> RawShapingParams {
        RawShapingParams {
            raw_points: self.base.points().to_vec(),
            raw_logits: vec![0.0; self.base.size()],
        }
    }

    fn realize(&self, params: &RawShapingParams) -> Realized {
        let size = self.base.size();
        let log_probs: Vec<f64> = if self.mode.trains_probs() {
            let max = params.raw_logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lse = max + params.raw_logits.iter().map(|l| (l - max).exp()).sum::<f64>().ln();
            params.raw_logits.iter().map(|l| l - lse).collect()
        } else {
            vec![-(size as f64).ln(); size]
        };
        let probs: Vec<f64> = log_probs.iter().map(|l| l.exp()).collect();
        let raw = if self.mode.trains_points() {
            params.raw_points.clone()
        } else {
            self.base.points().to_vec()
        };
        let power: f64 = raw.iter().zip(&probs).map(|(r, p)| p * r.norm_sqr()).sum();
        let inv_norm = power.sqrt().recip();
        let points = raw.iter().map(|r| r * inv_norm).collect();
        let demap_prior = match self.prior {
            DemapperPrior::Aware => log_probs.clone(),
            DemapperPrior::Uniform => vec![0.0; size],
        };
        Realized {
            log_probs,
            probs,
            raw,
            inv_norm,
            points,
            demap_prior,
        }
    }

    /// Whether the symbol choice goes through the Gumbel relaxation.
    fn relaxed(&self) -> bool {
        self.mode.trains_probs() && self.relaxation != Relaxation::ImportanceWeighted
    }

    /// The constellation the parameters currently describe.
    pub fn constellation(&self, params: &RawShapingParams) -> Constellation {
        crate::constellation::realize(params, self.mode, &self.base)
    }

    /// Draw the stochastic inputs of a batch. Chunk `c` uses `stream.child(c)`.
    pub fn draw(&self, params: &RawShapingParams, batch: usize, stream: RngStream) -> Draws {
        let r = self.realize(params);
        let mut all = Draws {
            hard: Vec::with_capacity(batch),
            gumbel: Vec::new(),
            noise: Vec::with_capacity(batch),
        };
        for (c, start) in (0..batch).step_by(CHUNK).enumerate() {
            let n = CHUNK.min(batch - start);
            all.append(self.draw_chunk(&r, n, stream.child(c as u64)));
        }
        all
    }

    fn draw_chunk(&self, r: &Realized, n: usize, stream: RngStream) -> Draws {
        let size = self.base.size();
        let mut rng = stream.rng();
        let sigma = (self.noise_variance / 2.0).sqrt();
        let mut hard = Vec::with_capacity(n);
        let mut noise = Vec::with_capacity(n);
        let mut gumbel = Vec::new();
        if self.relaxed() {
            gumbel.reserve(n * size);
            let mut row = vec![0.0; size];
            for _ in 0..n {
                let start = gumbel.len();
                gumbel.extend((0..size).map(|_| gumbel_noise(&mut rng)));
                hard.push(relax(&r.log_probs, &gumbel[start..], 1.0, &mut row));
                noise.push(complex_gaussian(&mut rng, sigma));
            }
        } else {
            // Uniform index draws; importance weights are applied later.
            for _ in 0..n {
                hard.push(rng.random_range(0..size));
                noise.push(complex_gaussian(&mut rng, sigma));
            }
        }
        Draws { hard, gumbel, noise }
    }

    /// Loss and gradients for fixed draws.
    pub fn evaluate(
        &self,
        params: &RawShapingParams,
        draws: &Draws,
        temperature: f64,
    ) -> Result<(LossBreakdown, Gradients)> {
        let r = self.realize(params);
        let size = self.base.size();
        let n_chunks = draws.len().div_ceil(CHUNK);
        let partials: Vec<Partial> = (0..n_chunks)
            .into_par_iter()
            .map(|c| {
                let lo = c * CHUNK;
                let hi = draws.len().min(lo + CHUNK);
                let gumbel = if draws.gumbel.is_empty() {
                    &[][..]
                } else {
                    &draws.gumbel[lo * size..hi * size]
                };
                self.chunk(&r, &draws.hard[lo..hi], gumbel, &draws.noise[lo..hi], temperature, draws.len())
            })
            .collect();
        self.finish(&r, partials, draws.len())
    }

    /// Loss and gradients on a freshly drawn batch; equivalent to
    /// `evaluate(params, &draw(params, batch, stream), temperature)`.
    pub fn evaluate_sampled(
        &self,
        params: &RawShapingParams,
        batch: usize,
        stream: RngStream,
        temperature: f64,
    ) -> Result<(LossBreakdown, Gradients)> {
        let r = self.realize(params);
        let n_chunks = batch.div_ceil(CHUNK);
        let partials: Vec<Partial> = (0..n_chunks)
            .into_par_iter()
            .map(|c| {
                let n = CHUNK.min(batch - c * CHUNK);
                let d = self.draw_chunk(&r, n, stream.child(c as u64));
                self.chunk(&r, &d.hard, &d.gumbel, &d.noise, temperature, batch)
            })
            .collect();
        self.finish(&r, partials, batch)
    }

    /// Sample-dependent forward and backward pass over one chunk.
    fn chunk(
        &self,
        r: &Realized,
        hard: &[usize],
        gumbel: &[f64],
        noise: &[Complex64],
        temperature: f64,
        batch: usize,
    ) -> Partial {
        let c = &self.base;
        let size = c.size();
        let bits = c.bits_per_symbol() as usize;
        let inv_noise = self.noise_variance.recip();
        // d loss / d BCE for each of the batch x bits cross-entropy terms.
        let bce_weight = 1.0 / (bits as f64 * batch as f64);
        let relaxed = self.relaxed();
        let weighted = self.mode.trains_probs() && self.relaxation == Relaxation::ImportanceWeighted;

        let mut grad_points = vec![Complex64::new(0.0, 0.0); size];
        let mut grad_log_probs = vec![0.0; size];
        let mut bce_sum = 0.0;

        let mut soft = vec![0.0; size];
        let mut metrics = vec![0.0; size];
        let mut lse = vec![0.0; 2 * bits];
        let mut weights = vec![0.0; bits * size];
        let mut scratch = Vec::with_capacity(size);
        let mut grad_metric = vec![0.0; size];

        for (s, (&k, w)) in hard.iter().zip(noise).enumerate() {
            if relaxed {
                relax(&r.log_probs, &gumbel[s * size..(s + 1) * size], temperature, &mut soft);
            }
            let t = match (relaxed, self.relaxation) {
                (true, Relaxation::Soft) => soft.iter().zip(&r.points).map(|(a, x)| x * a).sum(),
                _ => r.points[k],
            };
            let y = t + w;

            for i in 0..size {
                metrics[i] = r.demap_prior[i] - (y - r.points[i]).norm_sqr() * inv_noise;
            }
            bit_log_sums(c, &metrics, &mut lse, Some(&mut weights), &mut scratch);
            let omega = if weighted { size as f64 * r.probs[k] } else { 1.0 };
            let mut sample_bce = 0.0;

            grad_metric.iter_mut().for_each(|g| *g = 0.0);
            for m in 0..bits {
                let raw = lse[2 * m] - lse[2 * m + 1];
                let bit = c.bit(k, m);
                let sign = if bit == 0 { 1.0 } else { -1.0 };
                let llr = if raw.is_nan() { 0.0 } else { raw.clamp(-LLR_SATURATION, LLR_SATURATION) };
                sample_bce += softplus(-sign * llr) / LN_2;
                if raw.abs() >= LLR_SATURATION || raw.is_nan() {
                    continue;
                }
                // d/dL log2(1 + exp(-sign L)) = -sign * sigmoid(-sign L) / ln 2
                let z = -sign * llr;
                let sig = if z >= 0.0 { 1.0 / (1.0 + (-z).exp()) } else { z.exp() / (1.0 + z.exp()) };
                let g_llr = -sign * sig / LN_2 * bce_weight * omega;
                let shift = bits - 1 - m;
                let wm = &weights[m * size..(m + 1) * size];
                for i in 0..size {
                    if (i >> shift) & 1 == 0 {
                        grad_metric[i] += g_llr * wm[i];
                    } else {
                        grad_metric[i] -= g_llr * wm[i];
                    }
                }
            }

            bce_sum += omega * sample_bce;
            if weighted {
                // omega = size * exp(ln p_k)
                grad_log_probs[k] += omega * sample_bce * bce_weight;
            }

            // metric_i = prior_i - |y - x_i|^2 / sigma^2
            let mut grad_y = Complex64::new(0.0, 0.0);
            for i in 0..size {
                let gm = grad_metric[i];
                if gm == 0.0 {
                    continue;
                }
                if self.prior == DemapperPrior::Aware {
                    grad_log_probs[i] += gm;
                }
                let d = (y - r.points[i]) * (2.0 * inv_noise * gm);
                grad_points[i] += d;
                grad_y -= d;
            }

            match (relaxed, self.relaxation) {
                (true, Relaxation::Soft) => {
                    for i in 0..size {
                        grad_points[i] += grad_y * soft[i];
                    }
                }
                _ => grad_points[k] += grad_y,
            }
            if relaxed {
                // t depends on soft_i through soft_i * x_i; back through the
                // tempered softmax onto the log-probabilities.
                let mut mean = 0.0;
                for i in 0..size {
                    let gs = grad_y.re * r.points[i].re + grad_y.im * r.points[i].im;
                    metrics[i] = gs;
                    mean += soft[i] * gs;
                }
                for i in 0..size {
                    grad_log_probs[i] += soft[i] * (metrics[i] - mean) / temperature;
                }
            }
        }
        Partial {
            bce_sum,
            grad_points,
            grad_log_probs,
        }
    }

    /// Reduce chunk partials, add the analytic terms and back-propagate
    /// through normalization and softmax.
    fn finish(
        &self,
        r: &Realized,
        partials: Vec<Partial>,
        batch: usize,
    ) -> Result<(LossBreakdown, Gradients)> {
        let size = self.base.size();
        let bits = self.base.bits_per_symbol();
        let mut bce_sum = 0.0;
        let mut g_x = vec![Complex64::new(0.0, 0.0); size];
        let mut g_lp = vec![0.0; size];
        for p in partials {
            bce_sum += p.bce_sum;
            for (a, b) in g_x.iter_mut().zip(&p.grad_points) {
                *a += b;
            }
            for (a, b) in g_lp.iter_mut().zip(&p.grad_log_probs) {
                *a += b;
            }
        }
        check_finite("communication loss", g_x.iter().flat_map(|v| [v.re, v.im]).chain(g_lp.iter().copied()))?;

        let entropy = entropy_bits(&r.probs);
        let gmi = entropy - bce_sum / batch as f64;
        let kurtosis: f64 = r
            .points
            .iter()
            .zip(&r.probs)
            .map(|(x, p)| p * x.norm_sqr().powi(2))
            .sum();
        let sens = sensing_loss(kurtosis, self.kappa_limit, self.penalty);
        let loss = total_loss(gmi, bits, sens);
        let breakdown = LossBreakdown {
            loss,
            gmi,
            comms_loss: loss - sens,
            kurtosis,
            sensing_loss: sens,
        };
        if !loss.is_finite() {
            return Err(Error::NonFiniteGradient { term: "loss value" });
        }

        // Gradient with respect to the probabilities themselves.
        let mut g_p = vec![0.0; size];
        if self.mode.trains_probs() {
            // -H(p) / M
            let m = bits as f64;
            for i in 0..size {
                g_p[i] += (r.log_probs[i] + 1.0) / (m * LN_2);
            }
            check_finite("entropy term", g_p.iter().copied())?;
        }
        if kurtosis > self.kappa_limit {
            let d = self.penalty;
            let mut g_x_s = vec![Complex64::new(0.0, 0.0); size];
            for i in 0..size {
                let e = r.points[i].norm_sqr();
                g_p[i] += d * e * e;
                g_x_s[i] = r.points[i] * (4.0 * d * r.probs[i] * e);
            }
            check_finite("sensing loss", g_x_s.iter().flat_map(|v| [v.re, v.im]))?;
            for (a, b) in g_x.iter_mut().zip(g_x_s) {
                *a += b;
            }
        }

        // x = raw / sqrt(P), P = sum p |raw|^2
        let inv = r.inv_norm;
        let a: f64 = g_x.iter().zip(&r.raw).map(|(g, raw)| g.re * raw.re + g.im * raw.im).sum();
        let g_power = -0.5 * inv * inv * inv * a;
        let mut grads = Gradients::zeros(size);
        if self.mode.trains_points() {
            for k in 0..size {
                grads.raw_points[k] = g_x[k] * inv + r.raw[k] * (2.0 * r.probs[k] * g_power);
            }
        }
        if self.mode.trains_probs() {
            for k in 0..size {
                g_p[k] += r.raw[k].norm_sqr() * g_power;
                g_lp[k] += r.probs[k] * g_p[k];
            }
            let total: f64 = g_lp.iter().sum();
            for k in 0..size {
                grads.raw_logits[k] = g_lp[k] - r.probs[k] * total;
            }
        }
        check_finite("raw points", grads.raw_points.iter().flat_map(|v| [v.re, v.im]))?;
        check_finite("raw logits", grads.raw_logits.iter().copied())?;
        Ok((breakdown, grads))
    }
}

fn check_finite(term: &'static str, mut values: impl Iterator<Item = f64>) -> Result<()> {
    if values.all(f64::is_finite) {
        Ok(())
    } else {
        Err(Error::NonFiniteGradient { term })
    }
}

/// Loss gradient for a training configuration on a freshly drawn batch.
pub fn loss_gradient(
    params: &RawShapingParams,
    cfg: &TrainConfig,
    batch: usize,
    stream: RngStream,
) -> Result<(LossBreakdown, Gradients)> {
    if batch == 0 {
        return Err(Error::InvalidParameter("batch must be positive".into()));
    }
    let problem = ShapingProblem::from_config(cfg)?;
    problem.evaluate_sampled(params, batch, stream, cfg.temperature_at(0))
}
