//! OFDM numerology, orthonormal transforms and the time-domain signal path.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OfdmNumerology {
    n_subcarriers: usize,
    cp_len: usize,
    subcarrier_spacing_hz: f64,
}

impl OfdmNumerology {
    pub fn new(n_subcarriers: usize, cp_len: usize, subcarrier_spacing_hz: f64) -> Result<Self> {
        if !n_subcarriers.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "number of subcarriers must be a power of two, got {n_subcarriers}"
            )));
        }
        if cp_len >= n_subcarriers {
            return Err(Error::InvalidParameter(format!(
                "cyclic prefix ({cp_len}) must be shorter than the symbol ({n_subcarriers})"
            )));
        }
        if !(subcarrier_spacing_hz > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "subcarrier spacing must be positive, got {subcarrier_spacing_hz}"
            )));
        }
        Ok(Self {
            n_subcarriers,
            cp_len,
            subcarrier_spacing_hz,
        })
    }

    /// 1024 subcarriers, 120 kHz spacing, 256-sample cyclic prefix.
    pub fn fr2_default() -> Self {
        Self::new(1024, 256, 120e3).expect("valid default numerology")
    }

    pub fn n_subcarriers(&self) -> usize {
        self.n_subcarriers
    }

    pub fn cp_len(&self) -> usize {
        self.cp_len
    }

    pub fn subcarrier_spacing_hz(&self) -> f64 {
        self.subcarrier_spacing_hz
    }

    /// Range covered by one delay bin, `c / (2 N df)`.
    pub fn range_bin_m(&self) -> f64 {
        SPEED_OF_LIGHT / (2.0 * self.n_subcarriers as f64 * self.subcarrier_spacing_hz)
    }

    /// Nearest delay bin for a target range.
    pub fn delay_bins_for_range(&self, range_m: f64) -> usize {
        (range_m / self.range_bin_m()).round().max(0.0) as usize
    }
}

/// Unitary DFT pair of a fixed size.
#[derive(Clone)]
pub struct OrthoFft {
    n: usize,
    scale: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for OrthoFft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OrthoFft").field("n", &self.n).finish()
    }
}

impl OrthoFft {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            scale: (n as f64).sqrt().recip(),
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// In-place `X[n] = 1/sqrt(N) sum_k x[k] e^{-j 2 pi n k / N}`.
    pub fn forward(&self, buf: &mut [Complex64]) {
        self.forward.process(buf);
        buf.iter_mut().for_each(|v| *v *= self.scale);
    }

    /// In-place `x[k] = 1/sqrt(N) sum_n X[n] e^{+j 2 pi n k / N}`.
    pub fn inverse(&self, buf: &mut [Complex64]) {
        self.inverse.process(buf);
        buf.iter_mut().for_each(|v| *v *= self.scale);
    }
}

/// OFDM modulator: orthonormal IFFT followed by cyclic-prefix insertion.
pub fn modulate(symbols: &[Complex64], cp_len: usize, fft: &OrthoFft) -> Vec<Complex64> {
    let n = symbols.len();
    let mut time = symbols.to_vec();
    fft.inverse(&mut time);
    let mut out = Vec::with_capacity(n + cp_len);
    out.extend_from_slice(&time[n - cp_len..]);
    out.extend_from_slice(&time);
    out
}

/// OFDM demodulator: cyclic-prefix removal followed by orthonormal FFT.
pub fn demodulate(samples: &[Complex64], cp_len: usize, fft: &OrthoFft) -> Vec<Complex64> {
    let mut freq = samples[cp_len..cp_len + fft.len()].to_vec();
    fft.forward(&mut freq);
    freq
}

/// Sum of delayed, scaled copies of a single transmitted burst,
/// `r[k] = sum_j a_j s[k - tau_j]` (zero before the burst starts).
pub fn multipath(samples: &[Complex64], taps: &[(usize, Complex64)]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); samples.len()];
    for &(delay, gain) in taps {
        for k in delay..samples.len() {
            out[k] += gain * samples[k - delay];
        }
    }
    out
}
