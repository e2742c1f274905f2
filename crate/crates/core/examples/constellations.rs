//! Moments of the standard QAM/PSK constellations and the table format.
use isac_shaping::constellation::write_table;
use isac_shaping::Constellation;

fn main() -> isac_shaping::Result<()> {
    println!("{:<10} {:>8} {:>10} {:>10}", "name", "power", "kurtosis", "entropy");
    for bits in [2, 4, 6, 8] {
        for (name, c) in [("qam", Constellation::qam(bits)), ("psk", Constellation::psk(bits))] {
            let c = match c {
                Ok(c) => c,
                Err(_) => continue, // odd-order QAM is not square
            };
            println!(
                "{:<10} {:>8.4} {:>10.6} {:>10.4}",
                format!("{name}:{bits}"),
                c.power(),
                c.kurtosis(),
                c.entropy()
            );
        }
    }

    println!("\n16-QAM table (label, re, im, prob):");
    write_table(&Constellation::qam(4)?, std::io::stdout().lock())
}
