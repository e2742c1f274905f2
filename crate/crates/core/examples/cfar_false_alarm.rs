//! Empirical CA-CFAR false-alarm rate on noise-only frames.
use isac_shaping::sensing::{ca_cfar, sense_frame, CfarConfig, OfdmNumerology, SensingScenario};
use isac_shaping::{Constellation, RngStream};

fn main() -> isac_shaping::Result<()> {
    let s = SensingScenario::new(OfdmNumerology::new(1024, 256, 120e3)?, vec![], 1.0)?;
    let c = Constellation::qam(4)?;
    let root = RngStream::new(11);
    for p_fa in [1e-2, 1e-3] {
        let cfg = CfarConfig::new(p_fa, 100, 2)?;
        let (mut alarms, mut cells) = (0usize, 0usize);
        for t in 0..500 {
            let frame = sense_frame(&c, &s, root.child(t));
            let hits = ca_cfar(&frame.delay_estimate, &cfg)?;
            alarms += hits.iter().filter(|&&h| h).count();
            cells += hits.len();
        }
        println!("target {p_fa:.0e}  measured {:.3e}  ({cells} cells)", alarms as f64 / cells as f64);
    }
    Ok(())
}
