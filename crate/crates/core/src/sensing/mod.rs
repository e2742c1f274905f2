//! OFDM radar sensing chain and the analytic detection model.

mod analytic;
mod cfar;
mod frame;
mod ofdm;
mod scenario;
mod sim;

pub use analytic::{analytic_pd, analytic_sinr, analytic_sinr_for_kurtosis, freq_domain_variance};
pub use cfar::{ca_cfar, CfarConfig};
pub use frame::{deterministic_delay_response, sense_frame, FrameSimulator, SensedFrame, SignalPath};
pub use ofdm::{demodulate, modulate, multipath, OfdmNumerology, OrthoFft, SPEED_OF_LIGHT};
pub use scenario::{
    channel_transfer, draw_target_amplitudes, Amplitude, LinkBudget, SensingScenario, Swerling, Target,
};
pub use sim::{delay_residuals, noise_gaussianity_stats, simulate_pd, GaussianityStats, PdEstimate};
