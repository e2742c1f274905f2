//! Constellations: points, probabilities and bit labels.
//!
//! A [`Constellation`] is stored in label order, i.e. `points()[l]` is the
//! point carrying bit label `l`. Bit position `m` (0-based) is the `m`-th
//! character of the label string, most significant first.

mod table;

pub use table::{read_table, write_table};

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Tolerance used when validating externally supplied constellations.
pub const VALIDATION_TOL: f64 = 1e-9;

pub const MAX_BITS: u32 = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constellation {
    points: Vec<Complex64>,
    probs: Vec<f64>,
    bits_per_symbol: u32,
}

/// Indices, labels and symbols drawn from a constellation.
#[derive(Debug, Clone, PartialEq)]
pub struct Samples {
    pub indices: Vec<usize>,
    pub labels: Vec<u32>,
    pub symbols: Vec<Complex64>,
}

impl Constellation {
    /// Build from points and probabilities given in label order.
    pub fn new(bits_per_symbol: u32, points: Vec<Complex64>, probs: Vec<f64>) -> Result<Self> {
        if bits_per_symbol == 0 || bits_per_symbol > MAX_BITS {
            return Err(Error::InvalidConstellation(format!(
                "bits per symbol must be in 1..={MAX_BITS}, got {bits_per_symbol}"
            )));
        }
        let size = 1usize << bits_per_symbol;
        if points.len() != size || probs.len() != size {
            return Err(Error::InvalidConstellation(format!(
                "expected {size} points and probabilities, got {} and {}",
                points.len(),
                probs.len()
            )));
        }
        if let Some(p) = probs.iter().find(|p| !(**p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidConstellation(format!("invalid probability {p}")));
        }
        if points.iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
            return Err(Error::InvalidConstellation("non-finite point".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > VALIDATION_TOL {
            return Err(Error::InvalidConstellation(format!(
                "probabilities sum to {total}"
            )));
        }
        let c = Self {
            points,
            probs,
            bits_per_symbol,
        };
        let power = c.power();
        if (power - 1.0).abs() > VALIDATION_TOL {
            return Err(Error::InvalidConstellation(format!(
                "average power is {power}, expected 1"
            )));
        }
        Ok(c)
    }

    /// Build from `(point, prob, label)` entries in any order.
    pub fn from_labeled(bits_per_symbol: u32, entries: &[(Complex64, f64, u32)]) -> Result<Self> {
        if bits_per_symbol == 0 || bits_per_symbol > MAX_BITS {
            return Err(Error::InvalidConstellation(format!(
                "bits per symbol must be in 1..={MAX_BITS}, got {bits_per_symbol}"
            )));
        }
        let size = 1usize << bits_per_symbol;
        if entries.len() != size {
            return Err(Error::InvalidConstellation(format!(
                "expected {size} entries, got {}",
                entries.len()
            )));
        }
        let mut points = vec![Complex64::new(0.0, 0.0); size];
        let mut probs = vec![0.0; size];
        let mut seen = vec![false; size];
        for &(x, p, label) in entries {
            let l = label as usize;
            if l >= size || seen[l] {
                return Err(Error::InvalidConstellation(format!(
                    "labels are not a bijection onto {bits_per_symbol}-bit strings (label {label})"
                )));
            }
            seen[l] = true;
            points[l] = x;
            probs[l] = p;
        }
        Self::new(bits_per_symbol, points, probs)
    }

    /// Scale `points` to unit average power under `probs` and build the constellation.
    pub fn normalized(bits_per_symbol: u32, points: Vec<Complex64>, probs: Vec<f64>) -> Result<Self> {
        let points = normalize_power(&points, &probs);
        Self::new(bits_per_symbol, points, probs)
    }

    /// Square Gray-labeled QAM with uniform probabilities.
    pub fn qam(bits_per_symbol: u32) -> Result<Self> {
        if !bits_per_symbol.is_multiple_of(2) || !(2..=MAX_BITS).contains(&bits_per_symbol) {
            return Err(Error::UnsupportedGeometry(format!(
                "square QAM needs an even number of bits in 2..={MAX_BITS}, got {bits_per_symbol}"
            )));
        }
        let half = bits_per_symbol / 2;
        let side = 1usize << half;
        let size = side * side;
        let mut points = vec![Complex64::new(0.0, 0.0); size];
        for i in 0..side {
            for q in 0..side {
                let label = (gray(i) << half) | gray(q);
                points[label] = Complex64::new(
                    (2 * i) as f64 - (side - 1) as f64,
                    (2 * q) as f64 - (side - 1) as f64,
                );
            }
        }
        let probs = vec![1.0 / size as f64; size];
        Self::normalized(bits_per_symbol, points, probs)
    }

    /// Gray-labeled PSK with `2^bits` points on the unit circle.
    pub fn psk(bits_per_symbol: u32) -> Result<Self> {
        if !(1..=MAX_BITS).contains(&bits_per_symbol) {
            return Err(Error::UnsupportedGeometry(format!(
                "PSK needs 1..={MAX_BITS} bits, got {bits_per_symbol}"
            )));
        }
        let size = 1usize << bits_per_symbol;
        let mut points = vec![Complex64::new(0.0, 0.0); size];
        for k in 0..size {
            points[gray(k)] = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / size as f64);
        }
        let probs = vec![1.0 / size as f64; size];
        Self::new(bits_per_symbol, points, probs)
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn bits_per_symbol(&self) -> u32 {
        self.bits_per_symbol
    }

    /// Number of points, `2^bits_per_symbol`.
    pub fn size(&self) -> usize {
        self.points.len()
    }

    /// Bit `m` of label `label`, counted from the most significant bit.
    #[inline]
    pub fn bit(&self, label: usize, m: usize) -> u8 {
        ((label >> (self.bits_per_symbol as usize - 1 - m)) & 1) as u8
    }

    pub fn label_string(&self, label: usize) -> String {
        (0..self.bits_per_symbol as usize)
            .map(|m| if self.bit(label, m) == 0 { '0' } else { '1' })
            .collect()
    }

    /// Average power `sum p |x|^2`.
    pub fn power(&self) -> f64 {
        self.points
            .iter()
            .zip(&self.probs)
            .map(|(x, p)| p * x.norm_sqr())
            .sum()
    }

    /// Fourth moment `sum p |x|^4`, the kurtosis of a unit-power constellation.
    pub fn kurtosis(&self) -> f64 {
        self.points
            .iter()
            .zip(&self.probs)
            .map(|(x, p)| p * x.norm_sqr().powi(2))
            .sum()
    }

    /// Entropy in bits, with `0 log 0 = 0`.
    pub fn entropy(&self) -> f64 {
        entropy_bits(&self.probs)
    }

    /// Probability that bit `m` equals zero.
    pub fn bit_zero_prob(&self, m: usize) -> f64 {
        (0..self.size())
            .filter(|&l| self.bit(l, m) == 0)
            .map(|l| self.probs[l])
            .sum()
    }

    /// Draw `count` i.i.d. symbols according to the point probabilities.
    pub fn sample(&self, count: usize, stream: RngStream) -> Samples {
        let sampler = CategoricalSampler::new(&self.probs);
        let mut rng = stream.rng();
        let indices: Vec<usize> = (0..count).map(|_| sampler.draw(&mut rng)).collect();
        Samples {
            labels: indices.iter().map(|&i| i as u32).collect(),
            symbols: indices.iter().map(|&i| self.points[i]).collect(),
            indices,
        }
    }
}

/// Inverse-CDF sampler over a probability vector. Zero-probability entries
/// are never returned.
#[derive(Debug, Clone)]
pub struct CategoricalSampler {
    cdf: Vec<f64>,
    last: usize,
}

impl CategoricalSampler {
    pub fn new(probs: &[f64]) -> Self {
        let mut acc = 0.0;
        let cdf = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        let last = probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
        Self { cdf, last }
    }

    #[inline]
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = self.cdf[self.cdf.len() - 1];
        let u: f64 = rng.random::<f64>() * total;
        self.cdf.partition_point(|&c| c <= u).min(self.last)
    }
}

pub fn gray(k: usize) -> usize {
    k ^ (k >> 1)
}

pub fn entropy_bits(probs: &[f64]) -> f64 {
    -probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.log2())
        .sum::<f64>()
}

/// Scale points so that `sum p |x|^2 = 1`.
pub fn normalize_power(points: &[Complex64], probs: &[f64]) -> Vec<Complex64> {
    let power: f64 = points
        .iter()
        .zip(probs)
        .map(|(x, p)| p * x.norm_sqr())
        .sum();
    let scale = power.sqrt().recip();
    points.iter().map(|x| x * scale).collect()
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Which parameters of a constellation are optimized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapingMode {
    Geometric,
    Probabilistic,
    Joint,
}

impl ShapingMode {
    pub const ALL: [ShapingMode; 3] = [Self::Geometric, Self::Probabilistic, Self::Joint];

    pub fn trains_points(self) -> bool {
        matches!(self, Self::Geometric | Self::Joint)
    }

    pub fn trains_probs(self) -> bool {
        matches!(self, Self::Probabilistic | Self::Joint)
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Geometric => "geometric",
            Self::Probabilistic => "probabilistic",
            Self::Joint => "joint",
        }
    }
}

impl std::str::FromStr for ShapingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "geometric" => Ok(Self::Geometric),
            "probabilistic" => Ok(Self::Probabilistic),
            "joint" => Ok(Self::Joint),
            other => Err(Error::InvalidParameter(format!("unknown shaping mode '{other}'"))),
        }
    }
}

/// Unconstrained trainable parameters: raw point locations and logits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawShapingParams {
    pub raw_points: Vec<Complex64>,
    pub raw_logits: Vec<f64>,
}

impl RawShapingParams {
    /// Start from an existing constellation: its points and log-probabilities.
    pub fn from_constellation(c: &Constellation) -> Self {
        Self {
            raw_points: c.points().to_vec(),
            raw_logits: c
                .probs()
                .iter()
                .map(|&p| if p > 0.0 { p.ln() } else { -745.0 })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.raw_points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw_points.is_empty()
    }
}

/// Map raw parameters to a valid constellation through softmax and power
/// normalization. `base` supplies the fixed points in probabilistic mode
/// and the bit labels in every mode.
pub fn realize(params: &RawShapingParams, mode: ShapingMode, base: &Constellation) -> Constellation {
    let size = base.size();
    let probs = if mode.trains_probs() {
        softmax(&params.raw_logits)
    } else {
        vec![1.0 / size as f64; size]
    };
    let raw = if mode.trains_points() {
        &params.raw_points[..]
    } else {
        base.points()
    };
    let points = normalize_power(raw, &probs);
    Constellation {
        points,
        probs,
        bits_per_symbol: base.bits_per_symbol,
    }
}
