//! Monte-Carlo GMI of QAM and PSK over AWGN next to the Shannon limit.
use isac_shaping::comms::{estimate_gmi, AwgnChannel};
use isac_shaping::{Constellation, RngStream};

fn main() -> isac_shaping::Result<()> {
    let qam = Constellation::qam(6)?;
    let psk = Constellation::psk(6)?;
    let root = RngStream::new(7);
    println!("{:>6} {:>9} {:>9} {:>9}", "snr_db", "64-qam", "64-psk", "capacity");
    for (i, snr) in [0.0, 5.0, 10.0, 15.0, 20.0].into_iter().enumerate() {
        let ch = AwgnChannel::from_snr_db(snr)?;
        let q = estimate_gmi(&qam, &ch, 100_000, root.child2(0, i as u64));
        let p = estimate_gmi(&psk, &ch, 100_000, root.child2(1, i as u64));
        println!("{snr:>6.1} {:>9.4} {:>9.4} {:>9.4}", q.gmi_bits, p.gmi_bits, ch.capacity());
    }
    Ok(())
}
