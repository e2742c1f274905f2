//! Shared oracles for the integration tests.
#![allow(dead_code, clippy::needless_range_loop)]

pub mod quadrature;

use isac_shaping::comms::DemapperPrior;
use isac_shaping::shaping::{Relaxation, ShapingProblem, TrainConfig};
use isac_shaping::{RawShapingParams, RngStream, ShapingMode};
use num_complex::Complex64;

pub struct Setup {
    pub problem: ShapingProblem,
    pub params: RawShapingParams,
    pub tau: f64,
    pub batch: usize,
}

pub fn setup(mode: ShapingMode, relaxation: Relaxation, prior: DemapperPrior, kappa_limit: f64) -> Setup {
    let mut cfg = TrainConfig::new(mode, kappa_limit);
    cfg.bits_per_symbol = 4;
    cfg.snr_c_db = 8.0;
    cfg.relaxation = relaxation;
    cfg.demapper_prior = prior;
    let problem = ShapingProblem::from_config(&cfg).unwrap();
    let mut params = problem.initial_params();
    // Move away from the symmetric starting point.
    for (i, p) in params.raw_points.iter_mut().enumerate() {
        let f = i as f64;
        *p += Complex64::new(0.07 * (f * 1.3).sin(), 0.05 * (f * 0.7).cos());
    }
    for (i, l) in params.raw_logits.iter_mut().enumerate() {
        *l = 0.3 * (i as f64 * 2.1).sin();
    }
    Setup {
        problem,
        params,
        tau: 0.7,
        batch: 400,
    }
}

fn log_softmax(v: &[f64]) -> Vec<f64> {
    let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let z = m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln();
    v.iter().map(|x| x - z).collect()
}

fn lse(v: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = v.collect();
    let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Straightforward loss evaluation. `detached` holds the soft vectors at
/// the expansion point so that the straight-through estimator becomes the
/// gradient of an ordinary function.
pub fn reference_loss(
    s: &Setup,
    params: &RawShapingParams,
    draws: &isac_shaping::shaping::Draws,
    detached: &[Vec<f64>],
) -> f64 {
    let pr = &s.problem;
    let size = pr.base.size();
    let bits = pr.base.bits_per_symbol() as usize;
    let lp = if pr.mode.trains_probs() {
        log_softmax(&params.raw_logits)
    } else {
        vec![-(size as f64).ln(); size]
    };
    let p: Vec<f64> = lp.iter().map(|l| l.exp()).collect();
    let raw: Vec<Complex64> = if pr.mode.trains_points() {
        params.raw_points.clone()
    } else {
        pr.base.points().to_vec()
    };
    let power: f64 = raw.iter().zip(&p).map(|(r, q)| q * r.norm_sqr()).sum();
    let x: Vec<Complex64> = raw.iter().map(|r| r / power.sqrt()).collect();
    let prior: Vec<f64> = match pr.prior {
        DemapperPrior::Aware => lp.clone(),
        DemapperPrior::Uniform => vec![0.0; size],
    };

    let mut bce = 0.0;
    for n in 0..draws.hard.len() {
        let k = draws.hard[n];
        let weighted = pr.mode.trains_probs() && pr.relaxation == Relaxation::ImportanceWeighted;
        let omega = if weighted { size as f64 * p[k] } else { 1.0 };
        let t = if pr.mode.trains_probs() && !weighted {
            let g = &draws.gumbel[n * size..(n + 1) * size];
            let z: Vec<f64> = (0..size).map(|i| (lp[i] + g[i]) / s.tau).collect();
            let soft: Vec<f64> = log_softmax(&z).iter().map(|v| v.exp()).collect();
            match pr.relaxation {
                Relaxation::Soft => (0..size).map(|i| x[i] * soft[i]).sum(),
                Relaxation::StraightThrough | Relaxation::ImportanceWeighted => {
                    x[k] + (0..size).map(|i| x[i] * (soft[i] - detached[n][i])).sum::<Complex64>()
                }
            }
        } else {
            x[k]
        };
        let y = t + draws.noise[n];
        let metric: Vec<f64> = (0..size)
            .map(|i| prior[i] - (y - x[i]).norm_sqr() / pr.noise_variance)
            .collect();
        for m in 0..bits {
            let sel = |b: usize| (0..size).filter(move |i| (i >> (bits - 1 - m)) & 1 == b);
            let llr = lse(sel(0).map(|i| metric[i])) - lse(sel(1).map(|i| metric[i]));
            let sign = if (k >> (bits - 1 - m)) & 1 == 0 { 1.0 } else { -1.0 };
            bce += omega * (1.0 + (-sign * llr).exp()).ln() / std::f64::consts::LN_2;
        }
    }
    let entropy: f64 = -p.iter().map(|q| q * q.log2()).sum::<f64>();
    let gmi = entropy - bce / draws.hard.len() as f64;
    let kurt: f64 = x.iter().zip(&p).map(|(v, q)| q * v.norm_sqr().powi(2)).sum();
    1.0 - gmi / bits as f64 + pr.penalty * (kurt - pr.kappa_limit).max(0.0)
}

pub fn detached_soft(s: &Setup, draws: &isac_shaping::shaping::Draws) -> Vec<Vec<f64>> {
    let size = s.problem.base.size();
    if draws.gumbel.is_empty() {
        return vec![vec![0.0; size]; draws.hard.len()];
    }
    let lp = log_softmax(&s.params.raw_logits);
    (0..draws.hard.len())
        .map(|n| {
            let z: Vec<f64> = (0..size)
                .map(|i| (lp[i] + draws.gumbel[n * size + i]) / s.tau)
                .collect();
            log_softmax(&z).iter().map(|v| v.exp()).collect()
        })
        .collect()
}

/// Largest deviation between analytic and central-difference gradients,
/// relative to the largest gradient component.
pub fn gradient_error(s: &Setup, step: f64) -> f64 {
    let draws = s.problem.draw(&s.params, s.batch, RngStream::new(17));
    let detached = detached_soft(s, &draws);
    let (loss, grads) = s.problem.evaluate(&s.params, &draws, s.tau).unwrap();
    let base = reference_loss(s, &s.params, &draws, &detached);
    assert!((loss.loss - base).abs() < 1e-9, "forward mismatch {} vs {}", loss.loss, base);

    let h = step;
    let mut analytic = Vec::new();
    let mut numeric = Vec::new();
    let size = s.params.raw_points.len();
    for i in 0..size {
        for part in 0..2 {
            let bump = |d: f64| {
                let mut q = s.params.clone();
                if part == 0 {
                    q.raw_points[i].re += d;
                } else {
                    q.raw_points[i].im += d;
                }
                reference_loss(s, &q, &draws, &detached)
            };
            numeric.push((bump(h) - bump(-h)) / (2.0 * h));
            analytic.push(if part == 0 { grads.raw_points[i].re } else { grads.raw_points[i].im });
        }
    }
    for i in 0..size {
        let bump = |d: f64| {
            let mut q = s.params.clone();
            q.raw_logits[i] += d;
            reference_loss(s, &q, &draws, &detached)
        };
        numeric.push((bump(h) - bump(-h)) / (2.0 * h));
        analytic.push(grads.raw_logits[i]);
    }
    let scale = numeric.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    assert!(scale > 1e-4, "gradient vanished");
    analytic
        .iter()
        .zip(&numeric)
        .map(|(a, n)| (a - n).abs() / scale)
        .fold(0.0, f64::max)
}
