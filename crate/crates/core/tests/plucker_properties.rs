use proptest::prelude::*;
use tealeaf_core::plucker_sim::{format_campaign_report, run_trial_traced, ForceFilter};
use tealeaf_core::{run_campaign, run_trial, FaultConfig, OutcomeKind, Phase, SimConfig, StemSpec};

fn nominal_config(close_step: f64, close_rate: u32) -> SimConfig {
    let mut cfg = SimConfig::default();
    cfg.clamp_motor.displacement_per_step = close_step;
    cfg.clamp_motor.rate = close_rate;
    cfg
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    // The clamp stops on force, not on stroke, so any diameter in range works.
    #[test]
    fn nominal_succeeds_at_any_diameter(d in 1.0f64..=3.0, seed in any::<u64>()) {
        let cfg = SimConfig::default();
        let out = run_trial(&StemSpec::nominal(d), &cfg, seed).unwrap();
        prop_assert_eq!(out.kind, OutcomeKind::Success);
        prop_assert!(out.peak_clamp_force <= cfg.gripper.clamp_force_target + cfg.overshoot_bound());
    }

    #[test]
    fn force_held_while_pulling(
        d in 1.0f64..=3.0,
        step in prop::sample::select(vec![0.001, 0.002, 0.003]),
        rate in 1u32..3,
    ) {
        let cfg = nominal_config(step, rate);
        let target = cfg.gripper.clamp_force_target;
        let band = cfg.overshoot_bound();
        let (out, trace) = run_trial_traced(&StemSpec::nominal(d), &cfg, 0).unwrap();
        prop_assert_eq!(out.kind, OutcomeKind::Success);
        for s in trace.iter().filter(|s| s.phase == Phase::Pulling) {
            prop_assert!((s.true_clamp_force - target).abs() <= band, "{:?}", s);
            prop_assert_eq!(s.upper_gap, s.lower_gap);
        }
    }

    #[test]
    fn never_crushes_above_overshoot(
        d in 0.8f64..3.2,
        step in prop::sample::select(vec![0.001, 0.002, 0.004]),
        rate in 1u32..4,
        margin in 0.001f64..2.0,
        slip in 0.5f64..3.5,
    ) {
        let cfg = nominal_config(step, rate);
        let crush = cfg.gripper.clamp_force_target + cfg.overshoot_bound() + margin;
        let stem = StemSpec { diameter: d, break_tension: 2.0, slip_threshold: slip, crush_limit: crush };
        let out = run_trial(&stem, &cfg, 1).unwrap();
        prop_assert_ne!(out.kind, OutcomeKind::Crush);
    }

    #[test]
    fn noisy_trials_replay_exactly(d in 1.0f64..3.0, seed in any::<u64>(), sigma in 0.0f64..0.02) {
        let mut cfg = SimConfig::default();
        cfg.sensor.noise_sigma = sigma;
        cfg.filter = ForceFilter::MovingAverage(4);
        let stem = StemSpec::nominal(d);
        prop_assert_eq!(run_trial_traced(&stem, &cfg, seed).unwrap(), run_trial_traced(&stem, &cfg, seed).unwrap());
    }
}

#[test]
fn campaign_report_is_pool_independent() {
    let stems: Vec<StemSpec> = (0..40)
        .map(|i| StemSpec::nominal(1.0 + i as f64 * 0.05))
        .collect();
    let faults = FaultConfig {
        bias_rate: 0.1,
        bias: 1.32,
        noise_rate: 0.2,
        noise_sigma: 0.003,
        stop_delay_rate: 0.1,
        stop_delay_ticks: 15,
        misalign_rate: 0.1,
        misalign_derate: 0.6,
        ..FaultConfig::default()
    };
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_campaign(&stems, &SimConfig::default(), &faults, 11).unwrap())
    };
    let (a, b) = (run(1), run(3));
    assert_eq!(a, b);
    assert_eq!(
        format_campaign_report(&a, &faults, 11),
        format_campaign_report(&b, &faults, 11)
    );
}

#[test]
fn averaging_filter_still_succeeds_nominally() {
    // With a 4-sample window the controller sees force late, so the peak may
    // pass one control step; the trial still succeeds with the default stem.
    let cfg = SimConfig {
        filter: ForceFilter::MovingAverage(4),
        ..SimConfig::default()
    };
    for i in 0..21 {
        let d = 1.0 + 0.1 * i as f64;
        let out = run_trial(&StemSpec::nominal(d), &cfg, 0).unwrap();
        assert_eq!(out.kind, OutcomeKind::Success, "d = {d}");
        assert!(out.peak_clamp_force < 6.0);
    }
}
