use std::fmt::Write as _;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::machine::{run_trial, OutcomeKind, PluckOutcome, SimConfig, StemSpec, TrialFaults};
use super::SimError;

/// Per-kind fault rates and magnitudes. Each kind hits exactly
/// `round(rate * trials)` trials, chosen independently by seeded sampling.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FaultConfig {
    pub bias_rate: f64,
    /// V.
    pub bias: f64,
    pub noise_rate: f64,
    /// V.
    pub noise_sigma: f64,
    pub stop_delay_rate: f64,
    pub stop_delay_ticks: u32,
    pub start_delay_rate: f64,
    pub start_delay_ticks: u32,
    pub misalign_rate: f64,
    pub misalign_derate: f64,
}

impl FaultConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        for (name, rate) in [
            ("bias_rate", self.bias_rate),
            ("noise_rate", self.noise_rate),
            ("stop_delay_rate", self.stop_delay_rate),
            ("start_delay_rate", self.start_delay_rate),
            ("misalign_rate", self.misalign_rate),
        ] {
            if !(0.0..=1.0).contains(&rate) {
                return Err(SimError::InvalidConfig(format!(
                    "fault {name} must be in [0, 1], got {rate}"
                )));
            }
        }
        Ok(())
    }

    pub fn is_nominal(&self) -> bool {
        [
            self.bias_rate,
            self.noise_rate,
            self.stop_delay_rate,
            self.start_delay_rate,
            self.misalign_rate,
        ]
        .iter()
        .all(|&r| r == 0.0)
    }

    fn summary(&self) -> String {
        format!(
            "bias {:.4} V @ {:.4}, noise {:.4} V @ {:.4}, stop delay {} @ {:.4}, start delay {} @ {:.4}, misalign {:.3} @ {:.4}",
            self.bias,
            self.bias_rate,
            self.noise_sigma,
            self.noise_rate,
            self.stop_delay_ticks,
            self.stop_delay_rate,
            self.start_delay_ticks,
            self.start_delay_rate,
            self.misalign_derate,
            self.misalign_rate
        )
    }
}

/// One planned trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialPlan {
    pub index: usize,
    pub stem: StemSpec,
    pub seed: u64,
    pub faults: TrialFaults,
}

impl TrialPlan {
    /// `base` with this trial's faults applied.
    pub fn config(&self, base: &SimConfig) -> SimConfig {
        SimConfig {
            faults: self.faults.clone(),
            ..base.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub plan: TrialPlan,
    pub outcome: PluckOutcome,
}

/// Outcome tally of a campaign.
#[derive(Debug, Clone, PartialEq)]
pub struct CampaignReport {
    pub sample: usize,
    pub crushed: usize,
    pub slipped: usize,
    pub incomplete: usize,
    pub success: usize,
    pub trials: Vec<TrialRecord>,
}

impl CampaignReport {
    pub fn from_counts(crushed: usize, slipped: usize, incomplete: usize, success: usize) -> Self {
        Self {
            sample: crushed + slipped + incomplete + success,
            crushed,
            slipped,
            incomplete,
            success,
            trials: Vec::new(),
        }
    }

    /// Percent.
    pub fn success_rate(&self) -> f64 {
        if self.sample == 0 {
            0.0
        } else {
            100.0 * self.success as f64 / self.sample as f64
        }
    }

    pub fn count(&self, kind: OutcomeKind) -> usize {
        match kind {
            OutcomeKind::Success => self.success,
            OutcomeKind::Slip => self.slipped,
            OutcomeKind::Crush => self.crushed,
            OutcomeKind::Incomplete => self.incomplete,
        }
    }

    pub const HEADER: &'static str = "sample  crushed  slipped  incomplete  success  success_rate";

    pub fn summary_row(&self) -> String {
        format!(
            "{:>6}  {:>7}  {:>7}  {:>10}  {:>7}  {:>11.2}%",
            self.sample,
            self.crushed,
            self.slipped,
            self.incomplete,
            self.success,
            self.success_rate()
        )
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for trial `index` of a campaign seeded with `seed`.
pub(crate) fn trial_seed(seed: u64, index: usize) -> u64 {
    splitmix64(seed ^ splitmix64(index as u64))
}

fn pick(rng: &mut ChaCha8Rng, n: usize, rate: f64) -> Vec<bool> {
    let k = ((rate * n as f64).round() as usize).min(n);
    let mut hit = vec![false; n];
    for i in index::sample(rng, n, k) {
        hit[i] = true;
    }
    hit
}

/// Assigns seeds and faults to each stem. Pure in `(stems, faults, seed)`.
pub fn plan_campaign(
    stems: &[StemSpec],
    faults: &FaultConfig,
    seed: u64,
) -> Result<Vec<TrialPlan>, SimError> {
    if stems.is_empty() {
        return Err(SimError::EmptyCampaign);
    }
    faults.validate()?;
    let n = stems.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bias = pick(&mut rng, n, faults.bias_rate);
    let noise = pick(&mut rng, n, faults.noise_rate);
    let stop = pick(&mut rng, n, faults.stop_delay_rate);
    let start = pick(&mut rng, n, faults.start_delay_rate);
    let misalign = pick(&mut rng, n, faults.misalign_rate);

    Ok(stems
        .iter()
        .enumerate()
        .map(|(i, stem)| TrialPlan {
            index: i,
            stem: stem.clone(),
            seed: trial_seed(seed, i),
            faults: TrialFaults {
                sensor_bias: if bias[i] { faults.bias } else { 0.0 },
                sensor_noise: if noise[i] { faults.noise_sigma } else { 0.0 },
                stop_delay_ticks: if stop[i] { faults.stop_delay_ticks } else { 0 },
                start_delay_ticks: if start[i] {
                    faults.start_delay_ticks
                } else {
                    0
                },
                misalignment_derate: if misalign[i] {
                    faults.misalign_derate
                } else {
                    0.0
                },
            },
        })
        .collect())
}

/// Runs one trial per stem (in parallel on the current rayon pool) and
/// tallies the outcomes. The result does not depend on the pool size.
pub fn run_campaign(
    stems: &[StemSpec],
    config: &SimConfig,
    faults: &FaultConfig,
    seed: u64,
) -> Result<CampaignReport, SimError> {
    let plans = plan_campaign(stems, faults, seed)?;
    let trials = plans
        .into_par_iter()
        .map(|plan| {
            let outcome = run_trial(&plan.stem, &plan.config(config), plan.seed)?;
            Ok(TrialRecord { plan, outcome })
        })
        .collect::<Result<Vec<_>, SimError>>()?;

    let mut report = CampaignReport::from_counts(0, 0, 0, 0);
    for t in &trials {
        match t.outcome.kind {
            OutcomeKind::Success => report.success += 1,
            OutcomeKind::Slip => report.slipped += 1,
            OutcomeKind::Crush => report.crushed += 1,
            OutcomeKind::Incomplete => report.incomplete += 1,
        }
    }
    report.sample = trials.len();
    report.trials = trials;
    Ok(report)
}

/// Text report: header comments, the summary table, then one line per trial.
pub fn format_campaign_report(report: &CampaignReport, faults: &FaultConfig, seed: u64) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# plucking campaign");
    let _ = writeln!(out, "# seed {seed}");
    let _ = writeln!(out, "# trials {}", report.sample);
    let _ = writeln!(out, "# faults {}", faults.summary());
    let _ = writeln!(out, "{}", CampaignReport::HEADER);
    let _ = writeln!(out, "{}", report.summary_row());
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "trial  diameter  outcome     ticks  peak_force  faults"
    );
    for t in &report.trials {
        let _ = writeln!(
            out,
            "{:>5}  {:>8.3}  {:<10}  {:>5}  {:>10.4}  {}",
            t.plan.index,
            t.plan.stem.diameter,
            t.outcome.kind,
            t.outcome.ticks_elapsed,
            t.outcome.peak_clamp_force,
            t.plan.faults
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stems(n: usize) -> Vec<StemSpec> {
        (0..n)
            .map(|i| StemSpec::nominal(1.0 + 2.0 * i as f64 / (n - 1) as f64))
            .collect()
    }

    #[test]
    fn table_row_rate() {
        let r = CampaignReport::from_counts(2, 0, 1, 27);
        assert_eq!(r.sample, 30);
        assert!((r.success_rate() - 90.0).abs() < 1e-12);
        assert_eq!(
            r.summary_row(),
            "    30        2        0           1       27        90.00%"
        );
    }

    #[test]
    fn nominal_campaign_all_succeed() {
        let r = run_campaign(
            &stems(80),
            &SimConfig::default(),
            &FaultConfig::default(),
            42,
        )
        .unwrap();
        assert_eq!(r.sample, 80);
        assert_eq!(r.success, 80);
        assert_eq!(r.success_rate(), 100.0);
    }

    #[test]
    fn bias_fault_hits_exact_share() {
        let faults = FaultConfig {
            bias_rate: 0.075,
            bias: 4.0 * 0.33,
            ..FaultConfig::default()
        };
        let plans = plan_campaign(&stems(80), &faults, 42).unwrap();
        assert_eq!(
            plans.iter().filter(|p| p.faults.sensor_bias > 0.0).count(),
            6
        );
        let r = run_campaign(&stems(80), &SimConfig::default(), &faults, 42).unwrap();
        assert!(r.success_rate() < 100.0);
        assert_eq!(r.success, 74);
        assert_eq!(r.crushed + r.slipped + r.incomplete, 6);
    }

    #[test]
    fn planning_is_seeded() {
        let faults = FaultConfig {
            misalign_rate: 0.25,
            misalign_derate: 0.5,
            ..FaultConfig::default()
        };
        let a = plan_campaign(&stems(40), &faults, 7).unwrap();
        let b = plan_campaign(&stems(40), &faults, 7).unwrap();
        let c = plan_campaign(&stems(40), &faults, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn errors() {
        assert_eq!(
            run_campaign(&[], &SimConfig::default(), &FaultConfig::default(), 0).unwrap_err(),
            SimError::EmptyCampaign
        );
        let bad = FaultConfig {
            bias_rate: 1.5,
            ..FaultConfig::default()
        };
        assert!(matches!(
            plan_campaign(&stems(3), &bad, 0),
            Err(SimError::InvalidConfig(_))
        ));
    }
}
