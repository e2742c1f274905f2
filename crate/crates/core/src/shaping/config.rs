use serde::{Deserialize, Serialize};

use crate::comms::DemapperPrior;
use crate::constellation::{ShapingMode, MAX_BITS};
use crate::error::{Error, Result};

/// How the categorical symbol choice is relaxed for differentiation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relaxation {
    /// Hard one-hot forward, Gumbel-softmax gradient backward.
    #[default]
    StraightThrough,
    /// Soft Gumbel-softmax mixture forward and backward.
    Soft,
    /// No relaxation: symbols are drawn uniformly and each sample is
    /// weighted by `size * p`, which makes the probability gradient exact.
    ImportanceWeighted,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TemperatureSchedule {
    Fixed { value: f64 },
    /// Geometric interpolation from `start` at step 0 to `end` at the last step.
    Geometric { start: f64, end: f64 },
}

impl Default for TemperatureSchedule {
    fn default() -> Self {
        Self::Fixed { value: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub mode: ShapingMode,
    pub bits_per_symbol: u32,
    pub snr_c_db: f64,
    /// Kurtosis limit of the sensing constraint.
    pub kappa_limit: f64,
    /// Slope of the sensing penalty above the limit.
    pub penalty: f64,
    pub steps: usize,
    /// `(step, batch)` knots, linearly interpolated.
    pub batch_schedule: Vec<(usize, usize)>,
    /// `(step, rate)` knots; each rate holds from its step on.
    pub lr_schedule: Vec<(usize, f64)>,
    /// Multiplier on the learning rate of the logits relative to the points.
    #[serde(default = "one")]
    pub logit_lr_scale: f64,
    pub temperature: TemperatureSchedule,
    pub relaxation: Relaxation,
    pub demapper_prior: DemapperPrior,
    pub seed: u64,
}

impl TrainConfig {
    pub const DEFAULT_STEPS: usize = 10_000;

    /// Defaults: 64 points, 10 dB, penalty 3, 10k steps, batch 500 to
    /// 10 000, mode-dependent learning rate halved every quarter.
    pub fn new(mode: ShapingMode, kappa_limit: f64) -> Self {
        let steps = Self::DEFAULT_STEPS;
        Self {
            mode,
            bits_per_symbol: 6,
            snr_c_db: 10.0,
            kappa_limit,
            penalty: 3.0,
            steps,
            batch_schedule: vec![(0, 500), (steps, 10_000)],
            lr_schedule: quartered_lr(Self::default_lr(mode), steps),
            logit_lr_scale: 1.0,
            temperature: TemperatureSchedule::default(),
            relaxation: Relaxation::default(),
            demapper_prior: DemapperPrior::default(),
            seed: 0,
        }
    }

    /// Shorter schedule for single-core machines: 2000 steps, batch 500 to
    /// 4000, learning rates ten times the defaults (points at half that in
    /// joint mode, logits at the probabilistic rate) and the unbiased
    /// importance-weighted probability gradient.
    pub fn desk_scale(mode: ShapingMode, kappa_limit: f64) -> Self {
        let lr = match mode {
            ShapingMode::Geometric => 1e-2,
            ShapingMode::Probabilistic => 5e-2,
            ShapingMode::Joint => 5e-3,
        };
        let mut cfg = Self::new(mode, kappa_limit).with_steps(2000, 500, 4000, lr);
        cfg.relaxation = Relaxation::ImportanceWeighted;
        if mode == ShapingMode::Joint {
            cfg.logit_lr_scale = 10.0;
        }
        cfg
    }

    pub fn default_lr(mode: ShapingMode) -> f64 {
        match mode {
            ShapingMode::Geometric => 1e-3,
            ShapingMode::Probabilistic => 5e-3,
            ShapingMode::Joint => 1e-3,
        }
    }

    /// Change the step count, rescaling the default-shaped schedules.
    pub fn with_steps(mut self, steps: usize, batch_start: usize, batch_end: usize, lr: f64) -> Self {
        self.steps = steps;
        self.batch_schedule = vec![(0, batch_start), (steps, batch_end)];
        self.lr_schedule = quartered_lr(lr, steps);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !self.bits_per_symbol.is_multiple_of(2) || !(2..=MAX_BITS).contains(&self.bits_per_symbol) {
            return bad(format!(
                "training starts from square QAM and needs an even bits_per_symbol, got {}",
                self.bits_per_symbol
            ));
        }
        if !(self.kappa_limit >= 1.0) || !self.kappa_limit.is_finite() {
            return bad(format!("kappa_limit must be >= 1, got {}", self.kappa_limit));
        }
        if !(self.penalty > 0.0) || !self.penalty.is_finite() {
            return bad(format!("penalty must be positive, got {}", self.penalty));
        }
        if !self.snr_c_db.is_finite() {
            return bad("snr_c_db must be finite".into());
        }
        if self.steps == 0 {
            return bad("steps must be positive".into());
        }
        if self.batch_schedule.is_empty() || self.batch_schedule.iter().any(|&(_, b)| b == 0) {
            return bad("batch schedule needs at least one knot with a positive batch".into());
        }
        if !is_sorted(&self.batch_schedule) || !is_sorted(&self.lr_schedule) {
            return bad("schedule knots must be in increasing step order".into());
        }
        if self.lr_schedule.is_empty() || self.lr_schedule.iter().any(|&(_, r)| !(r > 0.0)) {
            return bad("learning-rate schedule needs positive rates".into());
        }
        if !(self.logit_lr_scale > 0.0) || !self.logit_lr_scale.is_finite() {
            return bad(format!("logit_lr_scale must be positive, got {}", self.logit_lr_scale));
        }
        match self.temperature {
            TemperatureSchedule::Fixed { value } if !(value > 0.0) => {
                bad(format!("Gumbel temperature must be positive, got {value}"))
            }
            TemperatureSchedule::Geometric { start, end } if !(start > 0.0 && end > 0.0) => {
                bad("Gumbel temperatures must be positive".into())
            }
            _ => Ok(()),
        }
    }

    pub fn batch_at(&self, step: usize) -> usize {
        let knots = &self.batch_schedule;
        if step <= knots[0].0 {
            return knots[0].1;
        }
        for w in knots.windows(2) {
            let ((s0, b0), (s1, b1)) = (w[0], w[1]);
            if step < s1 {
                let t = (step - s0) as f64 / (s1 - s0) as f64;
                return (b0 as f64 + t * (b1 as f64 - b0 as f64)).round() as usize;
            }
        }
        knots[knots.len() - 1].1
    }

    pub fn lr_at(&self, step: usize) -> f64 {
        self.lr_schedule
            .iter()
            .take_while(|&&(s, _)| s <= step)
            .last()
            .unwrap_or(&self.lr_schedule[0])
            .1
    }

    pub fn temperature_at(&self, step: usize) -> f64 {
        match self.temperature {
            TemperatureSchedule::Fixed { value } => value,
            TemperatureSchedule::Geometric { start, end } => {
                let t = if self.steps > 1 {
                    step as f64 / (self.steps - 1) as f64
                } else {
                    1.0
                };
                start * (end / start).powf(t.min(1.0))
            }
        }
    }

    pub fn noise_variance(&self) -> f64 {
        10f64.powf(-self.snr_c_db / 10.0)
    }
}

fn one() -> f64 {
    1.0
}

fn quartered_lr(lr: f64, steps: usize) -> Vec<(usize, f64)> {
    (0..4).map(|q| (q * steps / 4, lr * 0.5f64.powi(q as i32))).collect()
}

fn is_sorted<T>(knots: &[(usize, T)]) -> bool {
    knots.windows(2).all(|w| w[0].0 < w[1].0)
}
