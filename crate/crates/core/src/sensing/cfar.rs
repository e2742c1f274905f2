//! Cell-averaging CFAR over the delay axis.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CfarConfig {
    p_fa: f64,
    window_cells: usize,
    guard_cells: usize,
}

impl CfarConfig {
    /// `window_cells` reference cells in total (half on each side) and
    /// `guard_cells` guard cells on each side of the cell under test.
    pub fn new(p_fa: f64, window_cells: usize, guard_cells: usize) -> Result<Self> {
        if !(p_fa > 0.0 && p_fa < 1.0) {
            return Err(Error::InvalidParameter(format!("false-alarm rate must be in (0, 1), got {p_fa}")));
        }
        if window_cells < 4 || !window_cells.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "reference window must be even and at least 4 cells, got {window_cells}"
            )));
        }
        Ok(Self {
            p_fa,
            window_cells,
            guard_cells,
        })
    }

    pub fn p_fa(&self) -> f64 {
        self.p_fa
    }

    pub fn window_cells(&self) -> usize {
        self.window_cells
    }

    pub fn guard_cells(&self) -> usize {
        self.guard_cells
    }

    /// Cells spanned by the cell under test, guards and reference window.
    pub fn span(&self) -> usize {
        self.window_cells + 2 * self.guard_cells + 1
    }

    pub fn check_fits(&self, n_bins: usize) -> Result<()> {
        if self.span() > n_bins {
            return Err(Error::InvalidParameter(format!(
                "CFAR window ({} cells) does not fit into {n_bins} bins",
                self.span()
            )));
        }
        Ok(())
    }

    /// Threshold scale `alpha = N_w (P_FA^(-1/N_w) - 1)` for exponentially
    /// distributed cell powers.
    pub fn threshold_factor(&self) -> f64 {
        let nw = self.window_cells as f64;
        nw * (self.p_fa.powf(-1.0 / nw) - 1.0)
    }

    /// Mean power of the reference cells around `cut`, wrapping circularly.
    pub fn noise_estimate(&self, power: &[f64], cut: usize) -> f64 {
        let n = power.len();
        let half = self.window_cells / 2;
        let mut acc = 0.0;
        for off in self.guard_cells + 1..=self.guard_cells + half {
            acc += power[(cut + off) % n];
            acc += power[(cut + n - off % n) % n];
        }
        acc / self.window_cells as f64
    }

    /// Decide a single cell.
    pub fn detect_cell(&self, power: &[f64], cut: usize) -> bool {
        power[cut] > self.threshold_factor() * self.noise_estimate(power, cut)
    }
}

impl Default for CfarConfig {
    /// `P_FA = 1e-3`, 100 reference cells, 2 guard cells per side.
    fn default() -> Self {
        Self::new(1e-3, 100, 2).expect("valid default CFAR")
    }
}

/// Run CA-CFAR over every delay bin.
pub fn ca_cfar(delay_estimate: &[Complex64], cfg: &CfarConfig) -> Result<Vec<bool>> {
    let n = delay_estimate.len();
    cfg.check_fits(n)?;
    let power: Vec<f64> = delay_estimate.iter().map(|v| v.norm_sqr()).collect();
    // Circular prefix sums: the reference cells of `k` on the right are
    // (k+g+1 ..= k+g+h), on the left (k-g-h ..= k-g-1).
    let mut prefix = Vec::with_capacity(3 * n + 1);
    prefix.push(0.0);
    for i in 0..3 * n {
        let last = prefix[i];
        prefix.push(last + power[i % n]);
    }
    let range = |lo: usize, hi: usize| prefix[hi + 1] - prefix[lo];
    let alpha = cfg.threshold_factor();
    let g = cfg.guard_cells();
    let h = cfg.window_cells() / 2;
    Ok((0..n)
        .map(|k| {
            let c = k + n;
            let sum = range(c + g + 1, c + g + h) + range(c - g - h, c - g - 1);
            power[k] > alpha * sum / cfg.window_cells() as f64
        })
        .collect())
}
