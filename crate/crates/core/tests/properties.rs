use isac_shaping::comms::{estimate_gmi, AwgnChannel, Demapper, DemapperPrior};
use isac_shaping::sensing::{
    analytic_pd, ca_cfar, channel_transfer, Amplitude, CfarConfig, FrameSimulator, OfdmNumerology, SensingScenario,
    SignalPath, Target,
};
use isac_shaping::shaping::{sensing_loss, total_loss};
use isac_shaping::stats::wilson_interval;
use isac_shaping::{realize, Constellation, RawShapingParams, RngStream, ShapingMode};
use num_complex::Complex64;
use proptest::prelude::*;

fn complex() -> impl Strategy<Value = Complex64> {
    (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(a, b)| Complex64::new(a, b))
}

fn raw_params(size: usize) -> impl Strategy<Value = RawShapingParams> {
    (
        prop::collection::vec(complex(), size),
        prop::collection::vec(-4.0..4.0f64, size),
    )
        .prop_map(|(raw_points, raw_logits)| RawShapingParams { raw_points, raw_logits })
        .prop_filter("non-degenerate", |p| p.raw_points.iter().any(|x| x.norm() > 1e-3))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn realized_constellations_are_valid(params in raw_params(16), m in 0usize..3) {
        let mode = ShapingMode::ALL[m];
        let c = realize(&params, mode, &Constellation::qam(4).unwrap());
        prop_assert!((c.power() - 1.0).abs() < 1e-9);
        prop_assert!((c.probs().iter().sum::<f64>() - 1.0).abs() < 1e-9);
        // Jensen: E|x|^4 >= (E|x|^2)^2 = 1.
        prop_assert!(c.kurtosis() >= 1.0 - 1e-12);
        prop_assert!(c.entropy() <= 4.0 + 1e-12);
    }

    #[test]
    fn flipping_a_label_bit_negates_its_llr(params in raw_params(16), y in complex(), m in 0usize..4) {
        let c = realize(&params, ShapingMode::Joint, &Constellation::qam(4).unwrap());
        // Swap the points whose labels differ only in bit m.
        let flip = 1usize << (3 - m);
        let pts: Vec<Complex64> = (0..16).map(|i| c.points()[i ^ flip]).collect();
        let probs: Vec<f64> = (0..16).map(|i| c.probs()[i ^ flip]).collect();
        let swapped = Constellation::new(4, pts, probs).unwrap();
        let a = Demapper::new(&c, 0.3, DemapperPrior::Aware).llrs(y);
        let b = Demapper::new(&swapped, 0.3, DemapperPrior::Aware).llrs(y);
        for k in 0..4 {
            let expect = if k == m { -a[k] } else { a[k] };
            prop_assert!((b[k] - expect).abs() <= 1e-9 * (1.0 + a[k].abs()));
        }
    }

    #[test]
    fn gmi_never_exceeds_entropy(params in raw_params(16), snr in -5.0..25.0f64, seed in 0u64..1000) {
        let c = realize(&params, ShapingMode::Joint, &Constellation::qam(4).unwrap());
        let g = estimate_gmi(&c, &AwgnChannel::from_snr_db(snr).unwrap(), 2000, RngStream::new(seed));
        prop_assert!(g.gmi_bits >= 0.0);
        prop_assert!(g.gmi_bits <= c.entropy() + 1e-12);
    }

    #[test]
    fn sensing_loss_is_a_hinge(k in 1.0..3.0f64, lim in 1.0..2.0f64, d in 0.1..10.0f64, gmi in 0.0..6.0f64) {
        let l = sensing_loss(k, lim, d);
        prop_assert!(l >= 0.0);
        prop_assert_eq!(l == 0.0, k <= lim);
        prop_assert!((total_loss(gmi, 6, l) - ((6.0 - gmi) / 6.0 + l)).abs() < 1e-15);
    }

    #[test]
    fn detection_probability_is_monotone(g1 in 0.0..1e4f64, g2 in 0.0..1e4f64, pfa in 1e-6..0.1f64) {
        let (lo, hi) = if g1 < g2 { (g1, g2) } else { (g2, g1) };
        let (a, b) = (analytic_pd(lo, pfa), analytic_pd(hi, pfa));
        prop_assert!(a <= b);
        prop_assert!(a >= pfa * (1.0 - 1e-12) && b <= 1.0);
    }

    #[test]
    fn wilson_interval_brackets_estimate(trials in 1usize..100_000, frac in 0.0..=1.0f64) {
        let k = ((trials as f64) * frac).round() as usize;
        let (lo, hi) = wilson_interval(k, trials);
        let p = k as f64 / trials as f64;
        prop_assert!(0.0 <= lo && lo <= p + 1e-12 && p <= hi + 1e-12 && hi <= 1.0);
    }

    #[test]
    fn cfar_is_scale_invariant(
        cells in prop::collection::vec(complex(), 64),
        scale in 1e-3..1e3f64,
    ) {
        let cfg = CfarConfig::new(1e-2, 16, 1).unwrap();
        let scaled: Vec<Complex64> = cells.iter().map(|v| v * scale).collect();
        prop_assert_eq!(ca_cfar(&cells, &cfg).unwrap(), ca_cfar(&scaled, &cfg).unwrap());
    }

    #[test]
    fn transfer_function_preserves_energy(
        amps in prop::collection::vec(complex(), 1..5),
        first in 0usize..8,
    ) {
        // Distinct delays: first, first + 3, ...
        let targets: Vec<Target> = amps
            .iter()
            .enumerate()
            .map(|(j, a)| Target::new(first + 3 * j, Amplitude::Fixed(*a)))
            .collect();
        let s = SensingScenario::new(OfdmNumerology::new(64, 32, 120e3).unwrap(), targets, 1.0).unwrap();
        let h = channel_transfer(&s, &amps);
        let energy: f64 = h.iter().map(|v| v.norm_sqr()).sum();
        let expect: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        prop_assert!((energy - expect).abs() < 1e-9 * (1.0 + expect));
    }

    #[test]
    fn time_domain_path_matches_frequency_shortcut(
        taps in prop::collection::btree_map(0usize..32, complex(), 1..4),
        seed in 0u64..1000,
        bits in 1u32..4,
    ) {
        let amps: Vec<Complex64> = taps.values().copied().collect();
        let targets = taps.iter().map(|(&d, &a)| Target::new(d, Amplitude::Fixed(a))).collect();
        let s = SensingScenario::new(OfdmNumerology::new(128, 32, 120e3).unwrap(), targets, 1.0).unwrap();
        let c = Constellation::qam(2 * bits).unwrap();
        let fd = FrameSimulator::new(&c, &s).run_with(amps.clone(), RngStream::new(seed), 0.0);
        let td = FrameSimulator::new(&c, &s)
            .with_path(SignalPath::TimeDomain)
            .run_with(amps, RngStream::new(seed), 0.0);
        for (a, b) in fd.delay_estimate.iter().zip(&td.delay_estimate) {
            prop_assert!((a - b).norm() < 1e-10);
        }
    }
}
