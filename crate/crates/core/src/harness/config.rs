//! Declarative experiment documents.
//!
//! ```toml
//! seed = 7
//! output_dir = "out/pd"
//! constellations = ["qam:6", "psk:6", "shaped.csv"]
//! trials = 10000
//!
//! [scenario]
//! n_subcarriers = 1024
//! cp_len = 256
//! subcarrier_spacing_hz = 120e3
//! noise_variance = 0.01
//! k_budget = 1e6
//!
//! [[scenario.targets]]
//! range_m = 170.0
//! rcs_m2 = 10.0
//! swerling = 0
//!
//! [[scenario.targets]]
//! rcs_m2 = 1.0
//! swerling = 1
//! toi = true
//!
//! [grid]
//! ranges_m = [20.0, 40.0, 80.0]
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::Failure;
use crate::comms::DemapperPrior;
use crate::constellation::{read_table, Constellation, ShapingMode};
use crate::sensing::{Amplitude, CfarConfig, LinkBudget, OfdmNumerology, SensingScenario, Swerling, Target};
use crate::shaping::{Relaxation, TemperatureSchedule, TrainConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Optimize,
    GmiCurve,
    PdCurve,
    TradeoffSweep,
    Gaussianity,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Optimize => "optimize",
            Command::GmiCurve => "gmi-curve",
            Command::PdCurve => "pd-curve",
            Command::TradeoffSweep => "tradeoff-sweep",
            Command::Gaussianity => "gaussianity",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Optional guard: when present it must name the command being run.
    pub kind: Option<Command>,
    #[serde(default)]
    pub seed: u64,
    /// Not part of the config hash: moving outputs does not change them.
    #[serde(skip_serializing)]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub train: TrainSection,
    pub scenario: Option<ScenarioSection>,
    #[serde(default)]
    pub cfar: CfarSection,
    #[serde(default)]
    pub grid: GridSection,
    /// Builtins `qam:M` / `psk:M` or constellation table paths, relative to
    /// the config file.
    #[serde(default)]
    pub constellations: Vec<String>,
    /// Monte-Carlo trials per point (sensing commands).
    pub trials: Option<usize>,
    /// Monte-Carlo symbols per GMI estimate.
    pub batch: Option<usize>,
    /// Directory that relative constellation paths resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// Full schedule: 10 000 steps, batch 500 to 10 000.
    #[default]
    Full,
    /// Short schedule sized for a single core.
    Desk,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSection {
    #[serde(default)]
    pub preset: Preset,
    pub mode: Option<ShapingMode>,
    pub bits_per_symbol: Option<u32>,
    pub snr_c_db: Option<f64>,
    pub kappa_limit: Option<f64>,
    pub penalty: Option<f64>,
    pub steps: Option<usize>,
    pub batch_start: Option<usize>,
    pub batch_end: Option<usize>,
    pub lr: Option<f64>,
    pub logit_lr_scale: Option<f64>,
    pub temperature: Option<TemperatureSchedule>,
    pub relaxation: Option<Relaxation>,
    pub demapper_prior: Option<DemapperPrior>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    #[serde(default = "default_n")]
    pub n_subcarriers: usize,
    #[serde(default = "default_cp")]
    pub cp_len: usize,
    #[serde(default = "default_spacing")]
    pub subcarrier_spacing_hz: f64,
    pub noise_variance: Option<f64>,
    /// Alternative to `noise_variance`: `10 log10(1 / noise_variance)`.
    pub sensing_snr_db: Option<f64>,
    /// Link-budget constant for targets given by range and RCS.
    pub k_budget: Option<f64>,
    #[serde(default)]
    pub targets: Vec<TargetSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSpec {
    pub delay_bins: Option<usize>,
    pub range_m: Option<f64>,
    /// Mean power `E|a|^2`; alternative to `rcs_m2`.
    pub power: Option<f64>,
    pub rcs_m2: Option<f64>,
    #[serde(default)]
    pub swerling: u8,
    #[serde(default)]
    pub toi: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CfarSection {
    #[serde(default = "default_p_fa")]
    pub p_fa: f64,
    #[serde(default = "default_window")]
    pub window_cells: usize,
    #[serde(default = "default_guard")]
    pub guard_cells: usize,
}

impl Default for CfarSection {
    fn default() -> Self {
        Self {
            p_fa: default_p_fa(),
            window_cells: default_window(),
            guard_cells: default_guard(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(default)]
    pub snr_db: Vec<f64>,
    #[serde(default)]
    pub kappa_limits: Vec<f64>,
    #[serde(default)]
    pub ranges_m: Vec<f64>,
    #[serde(default)]
    pub subcarriers: Vec<usize>,
    #[serde(default)]
    pub modes: Vec<ShapingMode>,
}

fn default_n() -> usize {
    1024
}
fn default_cp() -> usize {
    256
}
fn default_spacing() -> f64 {
    120e3
}
fn default_p_fa() -> f64 {
    1e-3
}
fn default_window() -> usize {
    100
}
fn default_guard() -> usize {
    2
}

fn config_err(msg: impl Into<String>) -> Failure {
    Failure::Config(msg.into())
}

impl ExperimentConfig {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self, Failure> {
        let mut cfg: Self = toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
        cfg.base_dir = base_dir.to_path_buf();
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        Self::parse(&text, &base).map_err(|e| match e {
            Failure::Config(msg) => config_err(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn check_kind(&self, command: Command) -> Result<(), Failure> {
        match self.kind {
            Some(k) if k != command => Err(config_err(format!(
                "config is for `{}` but `{}` was requested",
                k.name(),
                command.name()
            ))),
            _ => Ok(()),
        }
    }

    /// Training configuration for one `(mode, kappa_limit)` point; grid
    /// values override the `[train]` section.
    pub fn train_config(&self, mode: Option<ShapingMode>, kappa_limit: Option<f64>) -> Result<TrainConfig, Failure> {
        let t = &self.train;
        let mode = mode.or(t.mode).unwrap_or(ShapingMode::Joint);
        let kappa = kappa_limit.or(t.kappa_limit).unwrap_or(2.0);
        let mut cfg = match t.preset {
            Preset::Full => TrainConfig::new(mode, kappa),
            Preset::Desk => TrainConfig::desk_scale(mode, kappa),
        };
        if t.steps.is_some() || t.batch_start.is_some() || t.batch_end.is_some() || t.lr.is_some() {
            let (b0, b1) = (cfg.batch_schedule[0].1, cfg.batch_schedule[cfg.batch_schedule.len() - 1].1);
            let lr0 = cfg.lr_schedule[0].1;
            let steps = t.steps.unwrap_or(cfg.steps);
            cfg = cfg.with_steps(
                steps,
                t.batch_start.unwrap_or(b0),
                t.batch_end.unwrap_or(b1),
                t.lr.unwrap_or(lr0),
            );
        }
        if let Some(v) = t.bits_per_symbol {
            cfg.bits_per_symbol = v;
        }
        if let Some(v) = t.snr_c_db {
            cfg.snr_c_db = v;
        }
        if let Some(v) = t.penalty {
            cfg.penalty = v;
        }
        if let Some(v) = t.logit_lr_scale {
            cfg.logit_lr_scale = v;
        }
        if let Some(v) = t.temperature {
            cfg.temperature = v;
        }
        if let Some(v) = t.relaxation {
            cfg.relaxation = v;
        }
        if let Some(v) = t.demapper_prior {
            cfg.demapper_prior = v;
        }
        cfg.seed = self.seed;
        cfg.validate().map_err(|e| config_err(format!("[train]: {e}")))?;
        Ok(cfg)
    }

    pub fn cfar_config(&self) -> Result<CfarConfig, Failure> {
        CfarConfig::new(self.cfar.p_fa, self.cfar.window_cells, self.cfar.guard_cells)
            .map_err(|e| config_err(format!("[cfar]: {e}")))
    }

    /// Resolve the `constellations` list, in order.
    pub fn load_constellations(&self) -> Result<Vec<(String, Constellation)>, Failure> {
        self.constellations
            .iter()
            .map(|spec| resolve_constellation(spec, &self.base_dir).map(|c| (spec.clone(), c)))
            .collect()
    }

    pub fn trials(&self, default: usize) -> Result<usize, Failure> {
        positive("trials", self.trials.unwrap_or(default))
    }

    pub fn batch(&self, default: usize) -> Result<usize, Failure> {
        positive("batch", self.batch.unwrap_or(default))
    }
}

fn positive(name: &str, v: usize) -> Result<usize, Failure> {
    if v == 0 {
        Err(config_err(format!("{name} must be positive")))
    } else {
        Ok(v)
    }
}

/// `qam:M`, `psk:M` or a table path.
pub fn resolve_constellation(spec: &str, base_dir: &Path) -> Result<Constellation, Failure> {
    let builtin = |kind: &str, bits: &str| -> Result<Constellation, Failure> {
        let bits: u32 = bits
            .parse()
            .map_err(|_| config_err(format!("constellation `{spec}`: bad bit count")))?;
        let c = if kind == "qam" {
            Constellation::qam(bits)
        } else {
            Constellation::psk(bits)
        };
        c.map_err(|e| config_err(format!("constellation `{spec}`: {e}")))
    };
    if let Some(bits) = spec.strip_prefix("qam:") {
        return builtin("qam", bits);
    }
    if let Some(bits) = spec.strip_prefix("psk:") {
        return builtin("psk", bits);
    }
    let path = base_dir.join(spec);
    let file = std::fs::File::open(&path)
        .map_err(|e| config_err(format!("constellation `{}`: {e}", path.display())))?;
    read_table(std::io::BufReader::new(file))
        .map_err(|e| config_err(format!("constellation `{}`: {e}", path.display())))
}

impl ScenarioSection {
    pub fn numerology(&self) -> Result<OfdmNumerology, Failure> {
        OfdmNumerology::new(self.n_subcarriers, self.cp_len, self.subcarrier_spacing_hz)
            .map_err(|e| config_err(format!("[scenario]: {e}")))
    }

    pub fn noise_variance(&self) -> Result<f64, Failure> {
        match (self.noise_variance, self.sensing_snr_db) {
            (Some(v), None) if v > 0.0 => Ok(v),
            (None, Some(db)) if db.is_finite() => Ok(10f64.powf(-db / 10.0)),
            (None, None) => Err(config_err("[scenario]: set noise_variance or sensing_snr_db")),
            (Some(_), Some(_)) => Err(config_err("[scenario]: noise_variance and sensing_snr_db are exclusive")),
            _ => Err(config_err("[scenario]: noise level must be positive and finite")),
        }
    }

    /// Resolve one target. `range_override` replaces the target's own range.
    pub fn target(&self, i: usize, numerology: &OfdmNumerology, range_override: Option<f64>) -> Result<Target, Failure> {
        let spec = &self.targets[i];
        let err = |msg: String| config_err(format!("[[scenario.targets]] #{}: {msg}", i + 1));
        let range = range_override.or(spec.range_m);
        let delay = match (spec.delay_bins, range) {
            (Some(d), None) => d,
            (_, Some(r)) if r > 0.0 && r.is_finite() => numerology.delay_bins_for_range(r),
            (Some(_), Some(_)) | (None, Some(_)) => return Err(err("range must be positive".into())),
            (None, None) => return Err(err("needs delay_bins or range_m".into())),
        };
        if delay >= numerology.cp_len() {
            return Err(err(format!(
                "delay {delay} bins exceeds the cyclic prefix ({} samples)",
                numerology.cp_len()
            )));
        }
        let power = match (spec.power, spec.rcs_m2) {
            (Some(p), None) if p >= 0.0 => p,
            (None, Some(rcs)) if rcs >= 0.0 => {
                let k = self.k_budget.ok_or_else(|| err("rcs_m2 needs scenario.k_budget".into()))?;
                let r = range.ok_or_else(|| err("rcs_m2 needs range_m".into()))?;
                LinkBudget { k_budget: k }.power(r, rcs)
            }
            (None, None) => return Err(err("needs power or rcs_m2".into())),
            _ => return Err(err("set exactly one non-negative power or rcs_m2".into())),
        };
        let swerling = match spec.swerling {
            0 => Swerling::Zero,
            1 => Swerling::One,
            s => return Err(err(format!("swerling must be 0 or 1, got {s}"))),
        };
        Ok(Target {
            delay_bins: delay,
            amplitude: Amplitude::Fluctuating { power, swerling },
            is_toi: spec.toi,
        })
    }

    pub fn build(&self, range_override: Option<f64>) -> Result<SensingScenario, Failure> {
        let numerology = self.numerology()?;
        let toi = self.targets.iter().filter(|t| t.toi).count();
        if toi > 1 {
            return Err(config_err("[scenario]: at most one target may be the target of interest"));
        }
        let targets = (0..self.targets.len())
            .map(|i| {
                let ov = if self.targets[i].toi { range_override } else { None };
                self.target(i, &numerology, ov)
            })
            .collect::<Result<Vec<_>, _>>()?;
        SensingScenario::new(numerology, targets, self.noise_variance()?)
            .map_err(|e| config_err(format!("[scenario]: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_field_is_rejected() {
        let e = ExperimentConfig::parse("output_dir = \"x\"\nsed = 3\n", Path::new(".")).unwrap_err();
        assert!(matches!(e, Failure::Config(ref m) if m.contains("sed")));
    }

    #[test]
    fn train_overrides() {
        let cfg = ExperimentConfig::parse(
            "output_dir = \"x\"\nseed = 4\n[train]\nmode = \"geometric\"\nsteps = 100\nbits_per_symbol = 4\n",
            Path::new("."),
        )
        .unwrap();
        let t = cfg.train_config(None, Some(1.2)).unwrap();
        assert_eq!(t.mode, ShapingMode::Geometric);
        assert_eq!(t.steps, 100);
        assert_eq!(t.kappa_limit, 1.2);
        assert_eq!(t.seed, 4);
        assert_eq!(t.batch_at(100), 10_000);
    }

    #[test]
    fn builtin_constellations() {
        assert_eq!(resolve_constellation("qam:4", Path::new(".")).unwrap().size(), 16);
        assert_eq!(resolve_constellation("psk:3", Path::new(".")).unwrap().size(), 8);
        assert!(resolve_constellation("qam:3", Path::new(".")).is_err());
        assert!(resolve_constellation("missing.csv", Path::new("/nonexistent")).is_err());
    }

    #[test]
    fn scenario_targets() {
        let cfg = ExperimentConfig::parse(
            r#"
output_dir = "x"
[scenario]
sensing_snr_db = 20
k_budget = 1e8
[[scenario.targets]]
range_m = 170.0
rcs_m2 = 1.0
[[scenario.targets]]
power = 1e-3
swerling = 1
toi = true
range_m = 50
"#,
            Path::new("."),
        )
        .unwrap();
        let s = cfg.scenario.as_ref().unwrap().build(None).unwrap();
        assert_eq!(s.targets()[0].delay_bins, 139);
        assert!((s.targets()[0].amplitude.power() - 1e8 / 170f64.powi(4)).abs() < 1e-12);
        assert!((s.noise_variance() - 0.01).abs() < 1e-15);
        assert_eq!(s.toi_index(), Some(1));
        let far = cfg.scenario.as_ref().unwrap().build(Some(400.0));
        assert!(matches!(far, Err(Failure::Config(ref m)) if m.contains("cyclic prefix")));
    }
}
