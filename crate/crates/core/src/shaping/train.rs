use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::adam::Adam;
use super::config::TrainConfig;
use super::gradient::{Gradients, LossBreakdown, ShapingProblem};
use crate::constellation::{Constellation, RawShapingParams};
use crate::error::{Error, Result};
use crate::rng::RngStream;

const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub step: usize,
    pub loss: f64,
    pub gmi: f64,
    pub kurtosis: f64,
    pub sensing_loss: f64,
    pub batch: usize,
    pub lr: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainTrace {
    pub rows: Vec<TraceRow>,
}

impl TrainTrace {
    pub const HEADER: &'static str = "step,loss,gmi,kurtosis,sens_loss,batch,lr";

    pub fn last(&self) -> Option<&TraceRow> {
        self.rows.last()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", Self::HEADER)?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{:.10e},{:.10e},{:.10e},{:.10e},{},{:.6e}",
                r.step, r.loss, r.gmi, r.kurtosis, r.sensing_loss, r.batch, r.lr
            )?;
        }
        Ok(())
    }
}

/// Resumable training state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub config: TrainConfig,
    pub step: usize,
    pub params: RawShapingParams,
    pub optimizer: Adam,
    pub trace: TrainTrace,
}

impl Checkpoint {
    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string(self).map_err(|e| Error::Checkpoint(e.to_string()))?;
        std::fs::write(path, json)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cp: Self = serde_json::from_str(&text).map_err(|e| Error::Checkpoint(e.to_string()))?;
        if cp.version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported checkpoint version {} (expected {CHECKPOINT_VERSION})",
                cp.version
            )));
        }
        Ok(cp)
    }
}

pub struct Trainer {
    config: TrainConfig,
    problem: ShapingProblem,
    params: RawShapingParams,
    optimizer: Adam,
    step: usize,
    trace: TrainTrace,
    flat: Vec<f64>,
    flat_grad: Vec<f64>,
}

impl Trainer {
    /// Start from square QAM with uniform probabilities.
    pub fn new(config: TrainConfig) -> Result<Self> {
        let problem = ShapingProblem::from_config(&config)?;
        let params = problem.initial_params();
        let n = 3 * params.raw_points.len();
        Ok(Self {
            config,
            problem,
            params,
            optimizer: Adam::new(n),
            step: 0,
            trace: TrainTrace::default(),
            flat: Vec::with_capacity(n),
            flat_grad: Vec::with_capacity(n),
        })
    }

    pub fn from_checkpoint(cp: Checkpoint) -> Result<Self> {
        let mut t = Self::new(cp.config)?;
        if cp.params.raw_points.len() != t.params.raw_points.len()
            || cp.params.raw_logits.len() != t.params.raw_logits.len()
        {
            return Err(Error::Checkpoint("parameter shape does not match configuration".into()));
        }
        t.params = cp.params;
        t.optimizer = cp.optimizer;
        t.step = cp.step;
        t.trace = cp.trace;
        Ok(t)
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            version: CHECKPOINT_VERSION,
            config: self.config.clone(),
            step: self.step,
            params: self.params.clone(),
            optimizer: self.optimizer.clone(),
            trace: self.trace.clone(),
        }
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    pub fn step(&self) -> usize {
        self.step
    }

    pub fn is_done(&self) -> bool {
        self.step >= self.config.steps
    }

    pub fn params(&self) -> &RawShapingParams {
        &self.params
    }

    pub fn constellation(&self) -> Constellation {
        self.problem.constellation(&self.params)
    }

    pub fn trace(&self) -> &TrainTrace {
        &self.trace
    }

    pub fn into_trace(self) -> TrainTrace {
        self.trace
    }

    /// One optimizer update. Step `s` draws from `RngStream::new(seed).child(s)`.
    pub fn step_once(&mut self) -> Result<LossBreakdown> {
        let s = self.step;
        let batch = self.config.batch_at(s);
        let lr = self.config.lr_at(s);
        let tau = self.config.temperature_at(s);
        let stream = RngStream::new(self.config.seed).child(s as u64);
        let (loss, grads) = self.problem.evaluate_sampled(&self.params, batch, stream, tau)?;
        if !loss.loss.is_finite() {
            return Err(Error::Diverged { step: s, loss: loss.loss });
        }
        self.apply(&grads, lr);
        self.trace.rows.push(TraceRow {
            step: s,
            loss: loss.loss,
            gmi: loss.gmi,
            kurtosis: loss.kurtosis,
            sensing_loss: loss.sensing_loss,
            batch,
            lr,
        });
        self.step += 1;
        Ok(loss)
    }

    fn apply(&mut self, grads: &Gradients, lr: f64) {
        self.flat.clear();
        self.flat_grad.clear();
        for (p, g) in self.params.raw_points.iter().zip(&grads.raw_points) {
            self.flat.extend([p.re, p.im]);
            self.flat_grad.extend([g.re, g.im]);
        }
        self.flat.extend(&self.params.raw_logits);
        self.flat_grad.extend(&grads.raw_logits);
        let n = self.params.raw_points.len();
        let logit_lr = lr * self.config.logit_lr_scale;
        self.optimizer
            .step_each(&mut self.flat, &self.flat_grad, |i| if i < 2 * n { lr } else { logit_lr });
        for (i, p) in self.params.raw_points.iter_mut().enumerate() {
            *p = Complex64::new(self.flat[2 * i], self.flat[2 * i + 1]);
        }
        self.params.raw_logits.copy_from_slice(&self.flat[2 * n..]);
    }

    /// Run the remaining steps.
    pub fn run(&mut self) -> Result<()> {
        while !self.is_done() {
            self.step_once()?;
        }
        Ok(())
    }
}

/// A run that stopped on a numerical failure, with the trace up to it.
#[derive(Debug)]
pub struct TrainAbort {
    pub error: Error,
    pub trace: TrainTrace,
}

/// Train from scratch to completion.
pub fn train(config: TrainConfig) -> std::result::Result<(Constellation, TrainTrace), TrainAbort> {
    let mut trainer = Trainer::new(config).map_err(|error| TrainAbort {
        error,
        trace: TrainTrace::default(),
    })?;
    match trainer.run() {
        Ok(()) => {
            let c = trainer.constellation();
            Ok((c, trainer.into_trace()))
        }
        Err(error) => Err(TrainAbort {
            error,
            trace: trainer.into_trace(),
        }),
    }
}
