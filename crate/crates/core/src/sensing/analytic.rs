//! Closed-form, constellation-dependent detection model.
//!
//! The matched-filter estimate on subcarrier `n` has variance
//! `|G_n|^2 (kappa - 1) + sigma_s^2`, where `G_n = sqrt(N) H_n` is the
//! channel gain it estimates. The unitary IFFT keeps that variance per
//! delay bin and concentrates each target into `sqrt(N) a_j`. The CA-CFAR
//! detection probability then only depends on the SINR of the target of
//! interest.

use super::scenario::SensingScenario;
use crate::constellation::Constellation;
use crate::error::{Error, Result};

/// Variance of the matched-filter estimate for a channel gain of power
/// `gain_power` (`|sqrt(N) H_n|^2`).
pub fn freq_domain_variance(c: &Constellation, gain_power: f64, noise_variance: f64) -> f64 {
    gain_power * (c.kurtosis() - 1.0) + noise_variance
}

/// SINR of target `toi` at the detector input.
pub fn analytic_sinr(c: &Constellation, scenario: &SensingScenario, toi: usize) -> Result<f64> {
    analytic_sinr_for_kurtosis(c.kurtosis(), scenario, toi)
}

/// `gamma = N |a_toi|^2 / (sum_j |a_j|^2 (kappa - 1) + sigma_s^2)`, with
/// mean powers standing in for fluctuating amplitudes.
pub fn analytic_sinr_for_kurtosis(kappa: f64, scenario: &SensingScenario, toi: usize) -> Result<f64> {
    let target = scenario.targets().get(toi).ok_or_else(|| {
        Error::InvalidParameter(format!(
            "target index {toi} out of range ({} targets)",
            scenario.targets().len()
        ))
    })?;
    let n = scenario.n_subcarriers() as f64;
    let interference = scenario.total_target_power() * (kappa - 1.0) + scenario.noise_variance();
    Ok(n * target.amplitude.power() / interference)
}

/// `P_D = P_FA^(1 / (1 + gamma))`.
pub fn analytic_pd(gamma: f64, p_fa: f64) -> f64 {
    p_fa.powf(1.0 / (1.0 + gamma))
}
