//! One OFDM sensing frame: symbol draw, channel, matched filter and the
//! delay-domain channel estimate.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ofdm::{demodulate, modulate, multipath, OrthoFft};
use super::scenario::{channel_transfer, draw_target_amplitudes, SensingScenario};
use crate::comms::complex_gaussian;
use crate::constellation::{CategoricalSampler, Constellation};
use crate::rng::RngStream;

/// How the received frequency-domain symbols are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum SignalPath {
    /// `Y_n = sqrt(N) H_n X_n + W_n` directly on the subcarriers.
    #[default]
    FrequencyDomain,
    /// IFFT, cyclic prefix, multipath convolution, CP removal and FFT.
    TimeDomain,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensedFrame {
    pub amplitudes: Vec<Complex64>,
    pub symbols: Vec<Complex64>,
    /// Matched-filter output `Y_n X_n^*`.
    pub freq_estimate: Vec<Complex64>,
    /// Unitary IFFT of `freq_estimate`.
    pub delay_estimate: Vec<Complex64>,
}

/// Reusable simulator for frames of one constellation and scenario.
#[derive(Debug, Clone)]
pub struct FrameSimulator<'a> {
    constellation: &'a Constellation,
    scenario: &'a SensingScenario,
    sampler: CategoricalSampler,
    fft: OrthoFft,
    path: SignalPath,
    /// Per target, `exp(-j 2 pi n tau / N)` over the subcarriers.
    steering: Vec<Vec<Complex64>>,
}

impl<'a> FrameSimulator<'a> {
    pub fn new(constellation: &'a Constellation, scenario: &'a SensingScenario) -> Self {
        Self {
            constellation,
            scenario,
            sampler: CategoricalSampler::new(constellation.probs()),
            fft: OrthoFft::new(scenario.n_subcarriers()),
            path: SignalPath::FrequencyDomain,
            steering: steering_vectors(scenario),
        }
    }

    pub fn with_path(mut self, path: SignalPath) -> Self {
        self.path = path;
        self
    }

    pub fn scenario(&self) -> &SensingScenario {
        self.scenario
    }

    /// Draw target amplitudes, symbols and noise from `stream` and process
    /// the frame.
    pub fn run(&self, stream: RngStream) -> SensedFrame {
        let mut rng = stream.rng();
        let amplitudes = draw_target_amplitudes(self.scenario, &mut rng);
        self.run_with(amplitudes, stream.child(0), self.scenario.noise_variance())
    }

    /// Process a frame with given amplitudes and noise variance (zero for a
    /// noiseless frame).
    pub fn run_with(&self, amplitudes: Vec<Complex64>, stream: RngStream, noise_variance: f64) -> SensedFrame {
        let n = self.scenario.n_subcarriers();
        let mut rng = stream.rng();
        let symbols: Vec<Complex64> = (0..n)
            .map(|_| self.constellation.points()[self.sampler.draw(&mut rng)])
            .collect();
        let sigma = (noise_variance / 2.0).sqrt();

        let received: Vec<Complex64> = match self.path {
            SignalPath::FrequencyDomain => {
                let mut gain = vec![Complex64::new(0.0, 0.0); n];
                for (steer, a) in self.steering.iter().zip(&amplitudes) {
                    for (g, s) in gain.iter_mut().zip(steer) {
                        *g += a * s;
                    }
                }
                symbols
                    .iter()
                    .zip(&gain)
                    .map(|(x, g)| g * x + complex_gaussian(&mut rng, sigma))
                    .collect()
            }
            SignalPath::TimeDomain => {
                let cp = self.scenario.numerology().cp_len();
                let tx = modulate(&symbols, cp, &self.fft);
                let taps: Vec<(usize, Complex64)> = self
                    .scenario
                    .targets()
                    .iter()
                    .zip(&amplitudes)
                    .map(|(t, a)| (t.delay_bins, *a))
                    .collect();
                let mut rx = multipath(&tx, &taps);
                rx.iter_mut()
                    .for_each(|v| *v += complex_gaussian(&mut rng, sigma));
                demodulate(&rx, cp, &self.fft)
            }
        };

        let freq_estimate: Vec<Complex64> = received
            .iter()
            .zip(&symbols)
            .map(|(y, x)| y * x.conj())
            .collect();
        let mut delay_estimate = freq_estimate.clone();
        self.fft.inverse(&mut delay_estimate);
        SensedFrame {
            amplitudes,
            symbols,
            freq_estimate,
            delay_estimate,
        }
    }
}

/// `sqrt(N) H_n` for unit amplitude, per target.
fn steering_vectors(scenario: &SensingScenario) -> Vec<Vec<Complex64>> {
    let n = scenario.n_subcarriers();
    let unit = Complex64::new(1.0, 0.0);
    scenario
        .targets()
        .iter()
        .map(|t| {
            let single = scenario
                .with_targets(vec![crate::sensing::Target::new(t.delay_bins, crate::sensing::Amplitude::Fixed(unit))])
                .expect("same geometry");
            let scale = (n as f64).sqrt();
            channel_transfer(&single, &[unit]).into_iter().map(|h| h * scale).collect()
        })
        .collect()
}

/// Simulate one sensing frame.
pub fn sense_frame(c: &Constellation, scenario: &SensingScenario, stream: RngStream) -> SensedFrame {
    FrameSimulator::new(c, scenario).run(stream)
}

/// Noise-free delay-domain response: `sqrt(N) a_j` at bin `tau_j`.
pub fn deterministic_delay_response(scenario: &SensingScenario, amplitudes: &[Complex64]) -> Vec<Complex64> {
    let n = scenario.n_subcarriers();
    let gain = (n as f64).sqrt();
    let mut h = vec![Complex64::new(0.0, 0.0); n];
    for (t, a) in scenario.targets().iter().zip(amplitudes) {
        h[t.delay_bins] += gain * a;
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensing::{Amplitude, OfdmNumerology, Target};

    fn scenario(targets: Vec<Target>, noise: f64) -> SensingScenario {
        SensingScenario::new(OfdmNumerology::new(256, 64, 120e3).unwrap(), targets, noise).unwrap()
    }

    #[test]
    fn psk_noiseless_peak() {
        let a = Complex64::new(0.4, -0.3);
        let s = scenario(vec![Target::new(7, Amplitude::Fixed(a))], 1.0);
        let c = Constellation::psk(6).unwrap();
        let f = FrameSimulator::new(&c, &s).run_with(vec![a], RngStream::new(1), 0.0);
        let expect = deterministic_delay_response(&s, &[a]);
        for (k, (got, want)) in f.delay_estimate.iter().zip(&expect).enumerate() {
            assert!((got - want).norm() < 1e-9, "bin {k}");
        }
        assert!((f.delay_estimate[7] - 16.0 * a).norm() < 1e-9);
    }

    #[test]
    fn time_and_frequency_paths_agree() {
        let amps = vec![Complex64::new(1.0, 0.2), Complex64::new(-0.3, 0.5)];
        let s = scenario(
            vec![Target::new(3, Amplitude::Fixed(amps[0])), Target::new(40, Amplitude::Fixed(amps[1]))],
            1.0,
        );
        let c = Constellation::qam(4).unwrap();
        for seed in 0..5 {
            let fd = FrameSimulator::new(&c, &s).run_with(amps.clone(), RngStream::new(seed), 0.0);
            let td = FrameSimulator::new(&c, &s)
                .with_path(SignalPath::TimeDomain)
                .run_with(amps.clone(), RngStream::new(seed), 0.0);
            assert_eq!(fd.symbols, td.symbols);
            for (a, b) in fd.freq_estimate.iter().zip(&td.freq_estimate) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn time_domain_noise_level() {
        let s = scenario(vec![], 0.5);
        let c = Constellation::psk(2).unwrap();
        let sim = FrameSimulator::new(&c, &s).with_path(SignalPath::TimeDomain);
        let mut acc = 0.0;
        let frames = 400;
        for t in 0..frames {
            let f = sim.run(RngStream::new(9).child(t));
            acc += f.delay_estimate.iter().map(|v| v.norm_sqr()).sum::<f64>();
        }
        let var = acc / (frames as f64 * 256.0);
        assert!((var / 0.5 - 1.0).abs() < 0.02, "{var}");
    }
}
