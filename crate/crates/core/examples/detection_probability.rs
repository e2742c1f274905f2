//! Closed-form detection probability against CA-CFAR Monte Carlo for a
//! weak target next to a strong interferer outside its reference window.
use isac_shaping::sensing::{
    analytic_pd, analytic_sinr, simulate_pd, Amplitude, CfarConfig, OfdmNumerology, SensingScenario, Swerling,
    Target,
};
use isac_shaping::{Constellation, RngStream};

fn main() -> isac_shaping::Result<()> {
    let num = OfdmNumerology::new(1024, 256, 120e3)?;
    let cfar = CfarConfig::default();
    let swerling = Swerling::One;
    let interferer = Target::new(5, Amplitude::Fluctuating { power: 1.0, swerling: Swerling::Zero });
    println!("{:<7} {:>8} {:>8} {:>8} {:>8}", "const", "toi_pow", "sinr", "pd_ana", "pd_sim");
    for name in ["qam", "psk"] {
        let c = if name == "qam" { Constellation::qam(6)? } else { Constellation::psk(6)? };
        for (i, power) in [0.005, 0.02, 0.08].into_iter().enumerate() {
            let toi = Target::toi(150, Amplitude::Fluctuating { power, swerling });
            let s = SensingScenario::new(num, vec![interferer, toi], 0.01)?;
            let gamma = analytic_sinr(&c, &s, 1)?;
            let sim = simulate_pd(&c, &s, &cfar, 4000, RngStream::new(3).child(i as u64))?;
            println!(
                "{:<7} {:>8.3} {:>8.2} {:>8.4} {:>8.4}",
                format!("{name}:6"),
                power,
                gamma,
                analytic_pd(gamma, cfar.p_fa()),
                sim.p_d
            );
        }
    }
    Ok(())
}
