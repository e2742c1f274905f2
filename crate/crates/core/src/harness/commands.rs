use num_complex::Complex64;

use crate::comms::{estimate_gmi, AwgnChannel};
use crate::constellation::{write_table, Constellation, ShapingMode};
use crate::rng::RngStream;
use crate::sensing::{
    analytic_pd, analytic_sinr, noise_gaussianity_stats, simulate_pd, Amplitude, OfdmNumerology, SensingScenario,
    Target,
};
use crate::shaping::{TrainTrace, Trainer};

use super::config::{resolve_constellation, ExperimentConfig};
use super::{fmt, stamp, Artifact, Command, Csv, Failure};

const GMI_BATCH: usize = 200_000;
const PD_TRIALS: usize = 10_000;
const GAUSSIANITY_SAMPLES: usize = 200_000;

fn table_artifact(name: String, stamp: &str, c: &Constellation) -> Artifact {
    let mut buf = format!("{stamp}\n").into_bytes();
    write_table(c, &mut buf).expect("writing to memory");
    Artifact {
        name: name.into(),
        contents: String::from_utf8(buf).expect("table is ASCII"),
    }
}

fn trace_artifact(stamp: &str, trace: &TrainTrace) -> Artifact {
    let mut buf = format!("{stamp}\n").into_bytes();
    trace.write_csv(&mut buf).expect("writing to memory");
    Artifact {
        name: "train_trace.csv".into(),
        contents: String::from_utf8(buf).expect("trace is ASCII"),
    }
}

/// Train one constellation; writes `constellation.csv` and `train_trace.csv`.
pub fn optimize(cfg: &ExperimentConfig) -> Result<Vec<Artifact>, Failure> {
    let st = stamp(Command::Optimize, cfg);
    let train = cfg.train_config(None, None)?;
    let mut trainer = Trainer::new(train).map_err(|e| Failure::Config(e.to_string()))?;
    match trainer.run() {
        Ok(()) => Ok(vec![
            table_artifact("constellation.csv".into(), &st, &trainer.constellation()),
            trace_artifact(&st, trainer.trace()),
        ]),
        Err(e) => Err(Failure::Numerical {
            msg: e.to_string(),
            partial: vec![trace_artifact(&st, trainer.trace())],
        }),
    }
}

/// Add `qam:M` and `psk:M` unless already listed.
fn with_baselines(
    mut list: Vec<(String, Constellation)>,
    bits: u32,
) -> Result<Vec<(String, Constellation)>, Failure> {
    for spec in [format!("qam:{bits}"), format!("psk:{bits}")] {
        if !list.iter().any(|(s, _)| *s == spec) {
            let c = resolve_constellation(&spec, std::path::Path::new("."))?;
            list.push((spec, c));
        }
    }
    Ok(list)
}

/// GMI versus SNR: `constellation,snr_db,gmi,stderr,capacity`.
pub fn gmi_curve(cfg: &ExperimentConfig) -> Result<Vec<Artifact>, Failure> {
    let st = stamp(Command::GmiCurve, cfg);
    if cfg.grid.snr_db.is_empty() {
        return Err(Failure::Config("gmi-curve needs a non-empty grid.snr_db".into()));
    }
    let channels = cfg
        .grid
        .snr_db
        .iter()
        .map(|&s| AwgnChannel::from_snr_db(s).map_err(|e| Failure::Config(format!("grid.snr_db: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let listed = cfg.load_constellations()?;
    let bits = listed.first().map_or(6, |(_, c)| c.bits_per_symbol());
    let list = with_baselines(listed, bits)?;
    let batch = cfg.batch(GMI_BATCH)?;
    let root = RngStream::new(cfg.seed);

    let mut csv = Csv::new(&st, "constellation,snr_db,gmi,stderr,capacity");
    for (ci, (name, c)) in list.iter().enumerate() {
        for (si, ch) in channels.iter().enumerate() {
            let g = estimate_gmi(c, ch, batch, root.child2(ci as u64, si as u64));
            csv.row(&[
                name.clone(),
                cfg.grid.snr_db[si].to_string(),
                fmt(g.gmi_bits),
                fmt(g.std_error),
                fmt(ch.capacity()),
            ]);
        }
    }
    Ok(vec![csv.into_artifact("gmi_curve.csv")])
}

/// Detection probability of the target of interest over a range grid.
pub fn pd_curve(cfg: &ExperimentConfig) -> Result<Vec<Artifact>, Failure> {
    let st = stamp(Command::PdCurve, cfg);
    let section = cfg
        .scenario
        .as_ref()
        .ok_or_else(|| Failure::Config("pd-curve needs a [scenario] section".into()))?;
    if cfg.grid.ranges_m.is_empty() {
        return Err(Failure::Config("pd-curve needs a non-empty grid.ranges_m".into()));
    }
    if !section.targets.iter().any(|t| t.toi) {
        return Err(Failure::Config("pd-curve needs one target with toi = true".into()));
    }
    let cfar = cfg.cfar_config()?;
    // Resolve every grid point before simulating anything.
    let scenarios = cfg
        .grid
        .ranges_m
        .iter()
        .map(|&r| section.build(Some(r)))
        .collect::<Result<Vec<_>, _>>()?;
    cfar.check_fits(section.n_subcarriers)
        .map_err(|e| Failure::Config(format!("[cfar]: {e}")))?;
    let list = if cfg.constellations.is_empty() {
        with_baselines(Vec::new(), 6)?
    } else {
        cfg.load_constellations()?
    };
    let trials = cfg.trials(PD_TRIALS)?;
    let root = RngStream::new(cfg.seed);

    let mut csv = Csv::new(&st, "kappa,range_m,gamma_analytic,pd_analytic,pd_sim,ci_lo,ci_hi");
    for (ci, (_, c)) in list.iter().enumerate() {
        for (ri, s) in scenarios.iter().enumerate() {
            let toi = s.toi_index().expect("checked above");
            let gamma = analytic_sinr(c, s, toi).map_err(|e| Failure::Config(e.to_string()))?;
            let sim = simulate_pd(c, s, &cfar, trials, root.child2(ci as u64, ri as u64))
                .map_err(|e| Failure::Config(e.to_string()))?;
            csv.row(&[
                fmt(c.kurtosis()),
                cfg.grid.ranges_m[ri].to_string(),
                fmt(gamma),
                fmt(analytic_pd(gamma, cfar.p_fa())),
                fmt(sim.p_d),
                fmt(sim.ci_lo),
                fmt(sim.ci_hi),
            ]);
        }
    }
    Ok(vec![csv.into_artifact("pd_curve.csv")])
}

/// Train every `(mode, kappa_limit)` pair and report GMI at the training SNR.
pub fn tradeoff_sweep(cfg: &ExperimentConfig) -> Result<Vec<Artifact>, Failure> {
    let st = stamp(Command::TradeoffSweep, cfg);
    if cfg.grid.kappa_limits.is_empty() {
        return Err(Failure::Config("tradeoff-sweep needs a non-empty grid.kappa_limits".into()));
    }
    let modes = if cfg.grid.modes.is_empty() {
        ShapingMode::ALL.to_vec()
    } else {
        cfg.grid.modes.clone()
    };
    // Validate every point up front.
    let mut points = Vec::new();
    for &mode in &modes {
        for &k in &cfg.grid.kappa_limits {
            points.push(cfg.train_config(Some(mode), Some(k))?);
        }
    }
    let batch = cfg.batch(GMI_BATCH)?;
    let root = RngStream::new(cfg.seed);
    let bits = points[0].bits_per_symbol;
    let channel = AwgnChannel::new(points[0].noise_variance()).map_err(|e| Failure::Config(e.to_string()))?;

    let mut artifacts = Vec::new();
    let mut csv = Csv::new(&st, "mode,kappa_limit,gmi,stderr,kappa,status");
    for (i, train) in points.into_iter().enumerate() {
        let (mode, k) = (train.mode, train.kappa_limit);
        let mut trainer = Trainer::new(train).map_err(|e| Failure::Config(e.to_string()))?;
        match trainer.run() {
            Ok(()) => {
                let c = trainer.constellation();
                let g = estimate_gmi(&c, &channel, batch, root.child2(0, i as u64));
                csv.row(&[
                    mode.name().into(),
                    k.to_string(),
                    fmt(g.gmi_bits),
                    fmt(g.std_error),
                    fmt(c.kurtosis()),
                    "ok".into(),
                ]);
                artifacts.push(table_artifact(format!("constellations/{}_{k}.csv", mode.name()), &st, &c));
            }
            Err(e) => {
                let msg = e.to_string().replace(',', ";");
                eprintln!("{} at kappa_limit {k}: {msg}", mode.name());
                csv.row(&[mode.name().into(), k.to_string(), "nan".into(), "nan".into(), "nan".into(), format!("failed: {msg}")]);
            }
        }
    }
    for (j, (name, c)) in with_baselines(Vec::new(), bits)?.into_iter().enumerate() {
        let g = estimate_gmi(&c, &channel, batch, root.child2(1, j as u64));
        let kind = name.split(':').next().unwrap_or("").to_string();
        csv.row(&[kind, String::new(), fmt(g.gmi_bits), fmt(g.std_error), fmt(c.kurtosis()), "reference".into()]);
    }
    artifacts.insert(0, csv.into_artifact("tradeoff.csv"));
    Ok(artifacts)
}

/// Scenario for a given FFT size: the `[scenario]` targets if present,
/// otherwise one target with fixed amplitude 1 at delay 0 and 20 dB
/// sensing SNR. A fixed real amplitude keeps the residual free of the
/// target's phase, so only modulation and channel noise are measured.
fn gaussianity_scenario(cfg: &ExperimentConfig, n: usize) -> Result<SensingScenario, Failure> {
    let cp = (n / 4).max(1);
    match &cfg.scenario {
        Some(section) => {
            let mut s = section.clone();
            s.n_subcarriers = n;
            s.cp_len = cp;
            s.build(None)
        }
        None => {
            let numerology = OfdmNumerology::new(n, cp, 120e3).map_err(|e| Failure::Config(e.to_string()))?;
            let target = Target::new(0, Amplitude::Fixed(Complex64::new(1.0, 0.0)));
            SensingScenario::new(numerology, vec![target], 1e-2).map_err(|e| Failure::Config(e.to_string()))
        }
    }
}

/// Excess kurtosis and KS distance of the delay-domain residual per FFT size.
pub fn gaussianity(cfg: &ExperimentConfig) -> Result<Vec<Artifact>, Failure> {
    let st = stamp(Command::Gaussianity, cfg);
    let sizes = if cfg.grid.subcarriers.is_empty() {
        vec![4, 16, 64, 256, 1024]
    } else {
        cfg.grid.subcarriers.clone()
    };
    let scenarios = sizes
        .iter()
        .map(|&n| gaussianity_scenario(cfg, n).map_err(|e| Failure::Config(format!("N = {n}: {}", e.message()))))
        .collect::<Result<Vec<_>, _>>()?;
    let mut list = if cfg.constellations.is_empty() {
        vec![("qam:4".to_string(), Constellation::qam(4).expect("16-QAM"))]
    } else {
        cfg.load_constellations()?
    };
    let bits = list[0].1.bits_per_symbol();
    let control = format!("psk:{bits}");
    if !list.iter().any(|(s, _)| *s == control) {
        list.push((control, Constellation::psk(bits).expect("PSK")));
    }
    let root = RngStream::new(cfg.seed);

    let mut csv = Csv::new(&st, "constellation,n_subcarriers,excess_kurtosis,ks_distance,samples");
    for (ci, (name, c)) in list.iter().enumerate() {
        for (ni, s) in scenarios.iter().enumerate() {
            let n = s.n_subcarriers();
            let usable = usable_bins(s);
            if usable == 0 {
                return Err(Failure::Config(format!("N = {n}: no delay bins away from the targets")));
            }
            let trials = cfg.trials(GAUSSIANITY_SAMPLES.div_ceil(usable))?;
            let g = noise_gaussianity_stats(c, s, trials, root.child2(ci as u64, ni as u64))
                .map_err(|e| Failure::Config(e.to_string()))?;
            csv.row(&[name.clone(), n.to_string(), fmt(g.excess_kurtosis), fmt(g.ks_distance), g.samples.to_string()]);
        }
    }
    Ok(vec![csv.into_artifact("gaussianity.csv")])
}

/// Delay bins at least two bins from every target.
fn usable_bins(s: &SensingScenario) -> usize {
    let n = s.n_subcarriers();
    (0..n)
        .filter(|&k| {
            s.targets().iter().all(|t| {
                let d = (k + n - t.delay_bins) % n;
                d > 1 && d < n - 1
            })
        })
        .count()
}
