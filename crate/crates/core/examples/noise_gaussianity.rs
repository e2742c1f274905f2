//! The delay-domain residual of a QAM frame approaches a Gaussian as the
//! number of subcarriers grows.
use isac_shaping::sensing::{noise_gaussianity_stats, Amplitude, OfdmNumerology, SensingScenario, Target};
use isac_shaping::{Constellation, RngStream};
use num_complex::Complex64;

fn main() -> isac_shaping::Result<()> {
    let c = Constellation::qam(4)?;
    println!("{:>6} {:>12} {:>8} {:>8}", "N", "excess_kurt", "ks", "samples");
    for n in [4usize, 16, 64, 256] {
        let num = OfdmNumerology::new(n, (n / 4).max(1), 120e3)?;
        let s = SensingScenario::new(num, vec![Target::new(0, Amplitude::Fixed(Complex64::new(1.0, 0.0)))], 0.01)?;
        let usable = n.saturating_sub(3).max(1);
        let trials = 50_000usize.div_ceil(usable);
        let g = noise_gaussianity_stats(&c, &s, trials, RngStream::new(n as u64))?;
        println!("{n:>6} {:>12.4} {:>8.4} {:>8}", g.excess_kurtosis, g.ks_distance, g.samples);
    }
    Ok(())
}
