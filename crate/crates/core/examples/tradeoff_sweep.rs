//! Communication rate against the kurtosis limit for the three shaping
//! modes, on 16 points with a short schedule.
use isac_shaping::comms::{estimate_gmi, AwgnChannel};
use isac_shaping::shaping::{train, TrainConfig};
use isac_shaping::{Constellation, RngStream, ShapingMode};

fn main() -> isac_shaping::Result<()> {
    let ch = AwgnChannel::from_snr_db(8.0)?;
    let eval = |c: &Constellation| estimate_gmi(c, &ch, 100_000, RngStream::new(99)).gmi_bits;
    println!("16-qam reference: gmi {:.4}", eval(&Constellation::qam(4)?));
    println!("{:<14} {:>6} {:>8} {:>8}", "mode", "limit", "gmi", "kurtosis");
    for mode in ShapingMode::ALL {
        for limit in [1.0, 1.2, 1.4] {
            let mut cfg = TrainConfig::desk_scale(mode, limit);
            cfg = cfg.clone().with_steps(300, 300, 1000, cfg.lr_schedule[0].1);
            cfg.bits_per_symbol = 4;
            cfg.snr_c_db = 8.0;
            let (c, _) = train(cfg).map_err(|a| a.error)?;
            println!("{:<14} {:>6.2} {:>8.4} {:>8.4}", mode.name(), limit, eval(&c), c.kurtosis());
        }
    }
    Ok(())
}
