//! Short joint-shaping run on 16 points with a kurtosis limit of 1.2,
//! checkpointed half way and resumed.
use isac_shaping::shaping::{Checkpoint, TrainConfig, Trainer};
use isac_shaping::ShapingMode;

fn main() -> isac_shaping::Result<()> {
    let mut cfg = TrainConfig::desk_scale(ShapingMode::Joint, 1.2).with_steps(400, 300, 1000, 5e-3);
    cfg.bits_per_symbol = 4;
    cfg.snr_c_db = 8.0;

    let mut trainer = Trainer::new(cfg)?;
    while trainer.step() < 200 {
        trainer.step_once()?;
    }
    let path = std::env::temp_dir().join("shape_constellation.ckpt.json");
    trainer.checkpoint().save(&path)?;
    let mut trainer = Trainer::from_checkpoint(Checkpoint::load(&path)?)?;
    trainer.run()?;

    for row in trainer.trace().rows.iter().step_by(50) {
        println!("step {:>4}  loss {:.4}  gmi {:.4}  kurtosis {:.4}", row.step, row.loss, row.gmi, row.kurtosis);
    }
    let c = trainer.constellation();
    println!("final kurtosis {:.4}, entropy {:.4}", c.kurtosis(), c.entropy());
    for (k, (x, p)) in c.points().iter().zip(c.probs()).enumerate() {
        println!("{}  {:+.4} {:+.4}j  p={:.4}", c.label_string(k), x.re, x.im, p);
    }
    Ok(())
}
