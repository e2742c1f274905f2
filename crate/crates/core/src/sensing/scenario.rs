//! Targets, scenarios and per-trial amplitude draws.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::ofdm::OfdmNumerology;
use crate::comms::complex_gaussian;
use crate::error::{Error, Result};

/// Swerling fluctuation model of a target's amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Swerling {
    /// Constant magnitude, uniform random phase.
    Zero,
    /// Rayleigh magnitude: circular complex Gaussian amplitude.
    One,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Amplitude {
    Fixed(Complex64),
    Fluctuating { power: f64, swerling: Swerling },
}

impl Amplitude {
    /// Mean power `E|a|^2`.
    pub fn power(&self) -> f64 {
        match *self {
            Amplitude::Fixed(a) => a.norm_sqr(),
            Amplitude::Fluctuating { power, .. } => power,
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        match *self {
            Amplitude::Fixed(a) => a,
            Amplitude::Fluctuating { power, swerling: Swerling::Zero } => {
                let phase = rng.random::<f64>() * 2.0 * PI;
                Complex64::from_polar(power.sqrt(), phase)
            }
            Amplitude::Fluctuating { power, swerling: Swerling::One } => {
                complex_gaussian(rng, (power / 2.0).sqrt())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Target {
    pub delay_bins: usize,
    pub amplitude: Amplitude,
    pub is_toi: bool,
}

impl Target {
    pub fn new(delay_bins: usize, amplitude: Amplitude) -> Self {
        Self {
            delay_bins,
            amplitude,
            is_toi: false,
        }
    }

    pub fn toi(delay_bins: usize, amplitude: Amplitude) -> Self {
        Self {
            delay_bins,
            amplitude,
            is_toi: true,
        }
    }
}

/// Relative radar link budget, `|a|^2 = k * rcs / R^4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    pub k_budget: f64,
}

impl LinkBudget {
    pub fn power(&self, range_m: f64, rcs_m2: f64) -> f64 {
        self.k_budget * rcs_m2 / range_m.powi(4)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensingScenario {
    numerology: OfdmNumerology,
    targets: Vec<Target>,
    noise_variance: f64,
}

impl SensingScenario {
    pub fn new(numerology: OfdmNumerology, targets: Vec<Target>, noise_variance: f64) -> Result<Self> {
        if !(noise_variance > 0.0) || !noise_variance.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "sensing noise variance must be positive, got {noise_variance}"
            )));
        }
        for (j, t) in targets.iter().enumerate() {
            if t.delay_bins >= numerology.cp_len() {
                return Err(Error::InvalidParameter(format!(
                    "target {j} delay of {} bins exceeds the cyclic prefix ({} samples)",
                    t.delay_bins,
                    numerology.cp_len()
                )));
            }
            if !(t.amplitude.power() >= 0.0) || !t.amplitude.power().is_finite() {
                return Err(Error::InvalidParameter(format!("target {j} has invalid power")));
            }
        }
        Ok(Self {
            numerology,
            targets,
            noise_variance,
        })
    }

    pub fn numerology(&self) -> &OfdmNumerology {
        &self.numerology
    }

    pub fn n_subcarriers(&self) -> usize {
        self.numerology.n_subcarriers()
    }

    pub fn targets(&self) -> &[Target] {
        &self.targets
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    /// Index of the first target flagged as target of interest.
    pub fn toi_index(&self) -> Option<usize> {
        self.targets.iter().position(|t| t.is_toi)
    }

    /// Same geometry with a different noise level.
    pub fn with_noise_variance(&self, noise_variance: f64) -> Result<Self> {
        Self::new(self.numerology, self.targets.clone(), noise_variance)
    }

    pub fn with_targets(&self, targets: Vec<Target>) -> Result<Self> {
        Self::new(self.numerology, targets, self.noise_variance)
    }

    pub fn total_target_power(&self) -> f64 {
        self.targets.iter().map(|t| t.amplitude.power()).sum()
    }
}

/// One amplitude draw per target for a single trial.
pub fn draw_target_amplitudes<R: Rng + ?Sized>(scenario: &SensingScenario, rng: &mut R) -> Vec<Complex64> {
    scenario.targets().iter().map(|t| t.amplitude.draw(rng)).collect()
}

/// `H_n = 1/sqrt(N) sum_j a_j exp(-j 2 pi n tau_j / N)`, the unitary DFT of
/// the sparse delay-domain impulse response.
pub fn channel_transfer(scenario: &SensingScenario, amplitudes: &[Complex64]) -> Vec<Complex64> {
    let n = scenario.n_subcarriers();
    let scale = (n as f64).sqrt().recip();
    (0..n)
        .map(|k| {
            scenario
                .targets()
                .iter()
                .zip(amplitudes)
                .map(|(t, a)| {
                    // Reduce the phase index modulo N before scaling.
                    let idx = (k * t.delay_bins) % n;
                    a * Complex64::from_polar(1.0, -2.0 * PI * idx as f64 / n as f64)
                })
                .sum::<Complex64>()
                * scale
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use crate::stats::ks_distance;

    fn numerology() -> OfdmNumerology {
        OfdmNumerology::new(64, 16, 120e3).unwrap()
    }

    #[test]
    fn swerling0_fixed_magnitude() {
        let a = Amplitude::Fluctuating { power: 4.0, swerling: Swerling::Zero };
        let mut rng = RngStream::new(1).rng();
        for _ in 0..1000 {
            assert!((a.draw(&mut rng).norm() - 2.0).abs() < 1e-12);
        }
        let z = Amplitude::Fluctuating { power: 0.0, swerling: Swerling::One };
        assert_eq!(z.draw(&mut rng), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn swerling1_exponential_power() {
        let a = Amplitude::Fluctuating { power: 1.0, swerling: Swerling::One };
        let mut rng = RngStream::new(2).rng();
        let p: Vec<f64> = (0..1_000_000).map(|_| a.draw(&mut rng).norm_sqr()).collect();
        let mean = p.iter().sum::<f64>() / p.len() as f64;
        assert!((mean - 1.0).abs() < 0.01, "{mean}");
        let ks = ks_distance(&p, |x| 1.0 - (-x).exp());
        assert!(ks < 0.002, "{ks}");
    }

    #[test]
    fn transfer_of_single_targets() {
        let s = SensingScenario::new(
            numerology(),
            vec![Target::new(0, Amplitude::Fixed(Complex64::new(1.0, 0.0)))],
            1.0,
        )
        .unwrap();
        let h = channel_transfer(&s, &[Complex64::new(1.0, 0.0)]);
        assert!(h.iter().all(|v| (v - Complex64::new(0.125, 0.0)).norm() < 1e-15));

        let a = Complex64::new(0.3, -1.1);
        let s = s.with_targets(vec![Target::new(3, Amplitude::Fixed(a))]).unwrap();
        let h = channel_transfer(&s, &[a]);
        assert!(h.iter().all(|v| (v.norm() - a.norm() / 8.0).abs() < 1e-15));
    }

    #[test]
    fn transfer_matches_dense_dft() {
        let amps = [Complex64::new(0.7, 0.2), Complex64::new(-0.1, 0.9)];
        let s = SensingScenario::new(
            numerology(),
            vec![Target::new(5, Amplitude::Fixed(amps[0])), Target::new(12, Amplitude::Fixed(amps[1]))],
            1.0,
        )
        .unwrap();
        let h = channel_transfer(&s, &amps);
        let mut impulse = vec![Complex64::new(0.0, 0.0); 64];
        impulse[5] = amps[0];
        impulse[12] = amps[1];
        for (n, hn) in h.iter().enumerate() {
            let dft: Complex64 = impulse
                .iter()
                .enumerate()
                .map(|(k, v)| v * Complex64::from_polar(1.0, -2.0 * PI * (n * k) as f64 / 64.0))
                .sum::<Complex64>()
                / 8.0;
            assert!((dft - hn).norm() < 1e-12);
        }
    }

    #[test]
    fn delay_beyond_cp_rejected() {
        let t = Target::new(16, Amplitude::Fixed(Complex64::new(1.0, 0.0)));
        assert!(SensingScenario::new(numerology(), vec![t], 1.0).is_err());
        assert!(SensingScenario::new(numerology(), vec![], 0.0).is_err());
    }

    #[test]
    fn link_budget_scaling() {
        let b = LinkBudget { k_budget: 2.0 };
        assert!((b.power(10.0, 5.0) - 1e-3).abs() < 1e-15);
    }
}
