//! Monte-Carlo sensing experiments.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cfar::CfarConfig;
use super::frame::{deterministic_delay_response, FrameSimulator};
use super::scenario::SensingScenario;
use crate::constellation::Constellation;
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::stats::{excess_kurtosis, ks_distance_normal, variance, wilson_interval};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdEstimate {
    pub p_d: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub detections: usize,
    pub trials: usize,
}

/// Fraction of trials in which CA-CFAR fires in the bin of the target of
/// interest. Trial `t` uses `stream.child(t)`.
pub fn simulate_pd(
    c: &Constellation,
    scenario: &SensingScenario,
    cfg: &CfarConfig,
    trials: usize,
    stream: RngStream,
) -> Result<PdEstimate> {
    let toi = scenario
        .toi_index()
        .ok_or_else(|| Error::InvalidParameter("scenario has no target of interest".into()))?;
    cfg.check_fits(scenario.n_subcarriers())?;
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be positive".into()));
    }
    let bin = scenario.targets()[toi].delay_bins;
    let sim = FrameSimulator::new(c, scenario);
    let detections = (0..trials as u64)
        .into_par_iter()
        .filter(|&t| {
            let frame = sim.run(stream.child(t));
            let power: Vec<f64> = frame.delay_estimate.iter().map(|v| v.norm_sqr()).collect();
            cfg.detect_cell(&power, bin)
        })
        .count();
    let (ci_lo, ci_hi) = wilson_interval(detections, trials);
    Ok(PdEstimate {
        p_d: detections as f64 / trials as f64,
        ci_lo,
        ci_hi,
        detections,
        trials,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianityStats {
    /// Excess kurtosis of `Re{w[k]}`; zero for a Gaussian.
    pub excess_kurtosis: f64,
    /// Kolmogorov-Smirnov distance of the standardized samples to N(0, 1).
    pub ks_distance: f64,
    /// Sample variance of the complex residual, `E|w|^2`.
    pub variance: f64,
    pub samples: usize,
}

/// Delay-domain residuals `w[k] = h_hat[k] - h[k]` over all bins at least
/// two bins away from every target, pooled over `trials` frames.
pub fn delay_residuals(
    c: &Constellation,
    scenario: &SensingScenario,
    trials: usize,
    stream: RngStream,
) -> Vec<num_complex::Complex64> {
    let n = scenario.n_subcarriers();
    let keep: Vec<usize> = (0..n)
        .filter(|&k| {
            scenario.targets().iter().all(|t| {
                let d = (k + n - t.delay_bins) % n;
                d > 1 && d < n - 1
            })
        })
        .collect();
    let sim = FrameSimulator::new(c, scenario);
    let per_trial: Vec<Vec<num_complex::Complex64>> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let frame = sim.run(stream.child(t));
            let det = deterministic_delay_response(scenario, &frame.amplitudes);
            keep.iter().map(|&k| frame.delay_estimate[k] - det[k]).collect()
        })
        .collect();
    per_trial.into_iter().flatten().collect()
}

pub fn noise_gaussianity_stats(
    c: &Constellation,
    scenario: &SensingScenario,
    trials: usize,
    stream: RngStream,
) -> Result<GaussianityStats> {
    let residuals = delay_residuals(c, scenario, trials, stream);
    if residuals.len() < 2 {
        return Err(Error::InvalidParameter(
            "no delay bins left after excluding the target neighbourhoods".into(),
        ));
    }
    let re: Vec<f64> = residuals.iter().map(|w| w.re).collect();
    let im: Vec<f64> = residuals.iter().map(|w| w.im).collect();
    Ok(GaussianityStats {
        excess_kurtosis: excess_kurtosis(&re),
        ks_distance: ks_distance_normal(&re),
        variance: variance(&re) + variance(&im),
        samples: re.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensing::{Amplitude, OfdmNumerology, Swerling, Target};
    use num_complex::Complex64;

    #[test]
    fn noiseless_single_target_always_detected() {
        let s = SensingScenario::new(
            OfdmNumerology::new(256, 64, 120e3).unwrap(),
            vec![Target::toi(10, Amplitude::Fluctuating { power: 1.0, swerling: Swerling::Zero })],
            1e-12,
        )
        .unwrap();
        let c = Constellation::psk(4).unwrap();
        let est = simulate_pd(&c, &s, &CfarConfig::default(), 1000, RngStream::new(1)).unwrap();
        assert_eq!(est.p_d, 1.0);
    }

    #[test]
    fn requires_toi() {
        let s = SensingScenario::new(
            OfdmNumerology::new(256, 64, 120e3).unwrap(),
            vec![Target::new(10, Amplitude::Fixed(Complex64::new(1.0, 0.0)))],
            1.0,
        )
        .unwrap();
        let c = Constellation::psk(4).unwrap();
        assert!(simulate_pd(&c, &s, &CfarConfig::default(), 10, RngStream::new(1)).is_err());
    }

    #[test]
    fn psk_residual_is_gaussian() {
        let s = SensingScenario::new(
            OfdmNumerology::new(64, 16, 120e3).unwrap(),
            vec![Target::toi(0, Amplitude::Fixed(Complex64::new(1.0, 0.0)))],
            0.01,
        )
        .unwrap();
        let c = Constellation::psk(4).unwrap();
        let g = noise_gaussianity_stats(&c, &s, 4000, RngStream::new(2)).unwrap();
        let se = (24.0 / g.samples as f64).sqrt();
        assert!(g.excess_kurtosis.abs() < 4.0 * se, "{g:?}");
        assert!((g.variance / 0.01 - 1.0).abs() < 0.02);
    }
}
