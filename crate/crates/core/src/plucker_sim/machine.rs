//! Closed-loop plucking cycle.
//!
//! One tick reads the ADC, lets the controller decide, then steps the
//! motors. The cycle is
//!
//! ```text
//! Idle -> Closing -> Clamped -> Pulling -> Opening -> Reset -> Idle
//! ```
//!
//! Closing stops once the sensed clamp force reaches the target. The lower
//! pair then holds while the upper pair rises with its switching and
//! pulling motors at equal rates, so the clamp angle and force are
//! unchanged. Once the stem separates both pairs open; a zero reading
//! triggers the reset.
//!
//! Trials end early on Crush (clamp force above the stem's crush limit) or
//! Slip (clamp force below the slip threshold while pulling), and as
//! Incomplete when the jaws close fully without reaching the target, the
//! pull stroke runs out, or the tick budget is spent.

use std::fmt;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::gripper::GripperModel;
use super::sensor::{sense_force, BridgeSensor, FilterState, ForceFilter};
use super::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Idle,
    Closing,
    Clamped,
    Pulling,
    Opening,
    Reset,
}

impl Phase {
    pub const ALL: [Phase; 6] = [
        Phase::Idle,
        Phase::Closing,
        Phase::Clamped,
        Phase::Pulling,
        Phase::Opening,
        Phase::Reset,
    ];

    /// Whether `self -> next` is an edge of the cycle (self-loops included
    /// where a phase can last several ticks).
    pub fn can_transition_to(self, next: Phase) -> bool {
        use Phase::*;
        matches!(
            (self, next),
            (Idle, Closing)
                | (Closing, Closing)
                | (Closing, Clamped)
                | (Clamped, Clamped)
                | (Clamped, Pulling)
                | (Pulling, Pulling)
                | (Pulling, Opening)
                | (Opening, Opening)
                | (Opening, Reset)
                | (Reset, Idle)
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            Phase::Idle => "idle",
            Phase::Closing => "closing",
            Phase::Clamped => "clamped",
            Phase::Pulling => "pulling",
            Phase::Opening => "opening",
            Phase::Reset => "reset",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A simulated tea stem.
#[derive(Debug, Clone, PartialEq)]
pub struct StemSpec {
    /// mm.
    pub diameter: f64,
    /// Tension at which the stem separates, N. May be infinite.
    pub break_tension: f64,
    /// Minimum clamp force that holds the stem under pull, N.
    pub slip_threshold: f64,
    /// Clamp force above which the stem is crushed, N.
    pub crush_limit: f64,
}

impl StemSpec {
    pub fn nominal(diameter: f64) -> Self {
        Self {
            diameter,
            break_tension: 2.0,
            slip_threshold: 3.0,
            crush_limit: 6.0,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let ok = self.diameter.is_finite()
            && self.diameter > 0.0
            && self.break_tension > 0.0
            && self.slip_threshold > 0.0
            && self.slip_threshold < self.crush_limit
            && self.crush_limit.is_finite();
        if ok {
            Ok(())
        } else {
            Err(SimError::InvalidStem(format!("{self:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MotorModel {
    /// Degrees per step.
    pub step_angle: f64,
    /// Linear travel per step through the sleeve linkage, mm.
    pub displacement_per_step: f64,
    /// Steps issued per tick.
    pub rate: u32,
}

impl MotorModel {
    pub fn new(displacement_per_step: f64, rate: u32) -> Self {
        Self {
            step_angle: 1.8,
            displacement_per_step,
            rate,
        }
    }

    /// mm per tick.
    pub fn travel_per_tick(&self) -> f64 {
        self.displacement_per_step * f64::from(self.rate)
    }

    fn validate(&self, which: &str) -> Result<(), SimError> {
        if self.displacement_per_step.is_finite()
            && self.displacement_per_step > 0.0
            && self.rate >= 1
        {
            Ok(())
        } else {
            Err(SimError::InvalidConfig(format!(
                "{which} motor needs displacement_per_step > 0 and rate >= 1"
            )))
        }
    }
}

/// Faults applied to a single trial.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrialFaults {
    /// Extra bridge offset, V.
    pub sensor_bias: f64,
    /// Extra bridge noise, V (combined in quadrature with the base noise).
    pub sensor_noise: f64,
    /// Ticks the clamp motors keep running after the stop command.
    pub stop_delay_ticks: u32,
    /// Ticks between clamping and the start of the pull.
    pub start_delay_ticks: u32,
    /// Fraction of jaw compression lost to misalignment when the pull starts.
    pub misalignment_derate: f64,
}

impl TrialFaults {
    pub fn is_nominal(&self) -> bool {
        *self == Self::default()
    }
}

impl fmt::Display for TrialFaults {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.sensor_bias != 0.0 {
            parts.push(format!("bias={:.4}", self.sensor_bias));
        }
        if self.sensor_noise > 0.0 {
            parts.push(format!("noise={:.4}", self.sensor_noise));
        }
        if self.stop_delay_ticks > 0 {
            parts.push(format!("stop_delay={}", self.stop_delay_ticks));
        }
        if self.start_delay_ticks > 0 {
            parts.push(format!("start_delay={}", self.start_delay_ticks));
        }
        if self.misalignment_derate > 0.0 {
            parts.push(format!("misalign={:.3}", self.misalignment_derate));
        }
        if parts.is_empty() {
            f.write_str("-")
        } else {
            f.write_str(&parts.join(","))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub gripper: GripperModel,
    pub sensor: BridgeSensor,
    /// Drives both jaw pairs open and closed.
    pub clamp_motor: MotorModel,
    /// Raises the upper pair.
    pub pull_motor: MotorModel,
    pub filter: ForceFilter,
    /// Jaw gap when fully open, mm.
    pub open_gap: f64,
    /// Stem tension per mm of pull, N/mm.
    pub tension_per_mm: f64,
    /// Longest pull before giving up, mm.
    pub max_stroke: f64,
    pub tick_budget: u64,
    /// Probability that the gatherer brings the stem between the jaws.
    pub capture_probability: f64,
    pub faults: TrialFaults,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            gripper: GripperModel::default(),
            sensor: BridgeSensor::default(),
            clamp_motor: MotorModel::new(0.002, 1),
            pull_motor: MotorModel::new(0.05, 1),
            filter: ForceFilter::None,
            open_gap: 4.0,
            tension_per_mm: 0.5,
            max_stroke: 20.0,
            tick_budget: 10_000,
            capture_probability: 1.0,
            faults: TrialFaults::default(),
        }
    }
}

impl SimConfig {
    /// Largest clamp-force rise over one tick of closing, N.
    pub fn overshoot_bound(&self) -> f64 {
        self.gripper.stiffness * self.clamp_motor.travel_per_tick()
    }

    /// The sensor as the trial sees it, with any injected bias and noise.
    pub fn effective_sensor(&self) -> BridgeSensor {
        BridgeSensor {
            bias: self.sensor.bias + self.faults.sensor_bias,
            noise_sigma: self.sensor.noise_sigma.hypot(self.faults.sensor_noise),
            ..self.sensor.clone()
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        self.gripper.validate()?;
        self.sensor.validate()?;
        self.clamp_motor.validate("clamp")?;
        self.pull_motor.validate("pull")?;
        if let ForceFilter::MovingAverage(0) = self.filter {
            return Err(SimError::InvalidConfig(
                "moving average window must be >= 1".into(),
            ));
        }
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.open_gap) || !positive(self.tension_per_mm) || !positive(self.max_stroke)
        {
            return Err(SimError::InvalidConfig(
                "open_gap, tension_per_mm and max_stroke must be positive".into(),
            ));
        }
        if self.tick_budget == 0 {
            return Err(SimError::ZeroTickBudget);
        }
        if !(0.0..=1.0).contains(&self.capture_probability) {
            return Err(SimError::InvalidConfig(
                "capture_probability must be in [0, 1]".into(),
            ));
        }
        let f = &self.faults;
        if !f.sensor_bias.is_finite() || !(f.sensor_noise >= 0.0 && f.sensor_noise.is_finite()) {
            return Err(SimError::InvalidConfig(
                "sensor fault must be finite, noise >= 0".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.faults.misalignment_derate) {
            return Err(SimError::InvalidConfig(
                "misalignment derate must be in [0, 1)".into(),
            ));
        }
        Ok(())
    }
}

/// Observable simulator state after a tick.
#[derive(Debug, Clone, PartialEq)]
pub struct PluckerState {
    pub phase: Phase,
    /// mm.
    pub upper_gap: f64,
    pub lower_gap: f64,
    /// Force on the stem, N.
    pub true_clamp_force: f64,
    /// Force as seen by the controller (after filtering), N.
    pub measured_clamp_force: f64,
    /// mm.
    pub pull_displacement: f64,
    pub tick: u64,
}

impl PluckerState {
    /// One trace line: `tick phase upper_gap lower_gap true_force measured_force pull_disp`.
    pub fn trace_line(&self) -> String {
        format!(
            "{} {} {:.4} {:.4} {:.4} {:.4} {:.3}",
            self.tick,
            self.phase,
            self.upper_gap,
            self.lower_gap,
            self.true_clamp_force,
            self.measured_clamp_force,
            self.pull_displacement
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OutcomeKind {
    Success,
    Slip,
    Crush,
    Incomplete,
}

impl OutcomeKind {
    pub const ALL: [OutcomeKind; 4] = [
        OutcomeKind::Success,
        OutcomeKind::Slip,
        OutcomeKind::Crush,
        OutcomeKind::Incomplete,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OutcomeKind::Success => "success",
            OutcomeKind::Slip => "slip",
            OutcomeKind::Crush => "crush",
            OutcomeKind::Incomplete => "incomplete",
        }
    }
}

impl fmt::Display for OutcomeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PluckOutcome {
    pub kind: OutcomeKind,
    pub ticks_elapsed: u64,
    /// Highest true clamp force seen during the trial, N.
    pub peak_clamp_force: f64,
}

/// A single plucking trial, advanced one tick at a time.
pub struct Plucker {
    stem: StemSpec,
    config: SimConfig,
    sensor: BridgeSensor,
    state: PluckerState,
    rng: ChaCha8Rng,
    filter: FilterState,
    /// Stem is between the jaws.
    captured: bool,
    setpoint_code: f64,
    stop_delay_left: Option<u32>,
    start_delay_left: u32,
    separated: bool,
    peak: f64,
    outcome: Option<OutcomeKind>,
}

impl Plucker {
    pub fn new(stem: &StemSpec, config: &SimConfig, seed: u64) -> Result<Self, SimError> {
        config.validate()?;
        stem.validate()?;
        if stem.diameter >= config.open_gap {
            return Err(SimError::InvalidStem(format!(
                "stem diameter {} mm does not fit the {} mm open gap",
                stem.diameter, config.open_gap
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // Draw in [0, 1): probability 1 always captures, 0 never does.
        let captured = rng.random::<f64>() < config.capture_probability;
        Ok(Self {
            stem: stem.clone(),
            setpoint_code: f64::from(config.sensor.ideal_code(config.gripper.clamp_force_target)),
            start_delay_left: config.faults.start_delay_ticks,
            filter: FilterState::new(config.filter),
            sensor: config.effective_sensor(),
            config: config.clone(),
            state: PluckerState {
                phase: Phase::Idle,
                upper_gap: config.open_gap,
                lower_gap: config.open_gap,
                true_clamp_force: 0.0,
                measured_clamp_force: 0.0,
                pull_displacement: 0.0,
                tick: 0,
            },
            rng,
            captured,
            stop_delay_left: None,
            separated: false,
            peak: 0.0,
            outcome: None,
        })
    }

    pub fn state(&self) -> &PluckerState {
        &self.state
    }

    pub fn outcome(&self) -> Option<OutcomeKind> {
        self.outcome
    }

    pub fn peak_clamp_force(&self) -> f64 {
        self.peak
    }

    fn effective_diameter(&self) -> f64 {
        if self.captured {
            self.stem.diameter
        } else {
            0.0
        }
    }

    /// Contact forces of the upper and lower pair, N.
    pub fn contact_forces(&self) -> (f64, f64) {
        let d = self.effective_diameter();
        let g = &self.config.gripper;
        (
            g.force_for_compression(d - self.state.upper_gap),
            g.force_for_compression(d - self.state.lower_gap),
        )
    }

    fn refresh_force(&mut self) {
        let (upper, lower) = self.contact_forces();
        if matches!(self.state.phase, Phase::Clamped | Phase::Pulling) {
            // Both pairs sit at the same angle to the mandrel, so they carry
            // the same load.
            assert_eq!(upper, lower, "gripper pairs out of balance");
        }
        self.state.true_clamp_force = upper;
        self.peak = self.peak.max(upper);
    }

    fn transition(&mut self, next: Phase) {
        assert!(
            self.state.phase.can_transition_to(next),
            "illegal phase transition {} -> {}",
            self.state.phase,
            next
        );
        self.state.phase = next;
    }

    fn close_jaws(&mut self) {
        let travel = self.config.clamp_motor.travel_per_tick();
        self.state.upper_gap = (self.state.upper_gap - travel).max(0.0);
        self.state.lower_gap = (self.state.lower_gap - travel).max(0.0);
    }

    fn open_jaws(&mut self) {
        let travel = self.config.clamp_motor.travel_per_tick();
        let open = self.config.open_gap;
        self.state.upper_gap = (self.state.upper_gap + travel).min(open);
        self.state.lower_gap = (self.state.lower_gap + travel).min(open);
    }

    fn finish(&mut self, kind: OutcomeKind) -> Option<OutcomeKind> {
        self.outcome = Some(kind);
        self.outcome
    }

    /// Advances one tick. Returns the outcome once the trial has ended;
    /// further calls are no-ops returning the same outcome.
    pub fn step(&mut self) -> Option<OutcomeKind> {
        if self.outcome.is_some() {
            return self.outcome;
        }
        self.state.tick += 1;

        // Sense.
        let reading = sense_force(self.state.true_clamp_force, &self.sensor, &mut self.rng);
        let filtered = self.filter.push(reading.adc_code);
        self.state.measured_clamp_force = self.sensor.force_for_code(filtered);

        // Decide and actuate.
        match self.state.phase {
            Phase::Idle => self.transition(Phase::Closing),
            Phase::Closing => {
                if self.stop_delay_left.is_none() && filtered >= self.setpoint_code {
                    self.stop_delay_left = Some(self.config.faults.stop_delay_ticks);
                }
                match self.stop_delay_left {
                    Some(0) => self.transition(Phase::Clamped),
                    Some(ref mut left) => {
                        *left -= 1;
                        self.close_jaws();
                        self.transition(Phase::Closing);
                    }
                    None => {
                        self.close_jaws();
                        self.transition(Phase::Closing);
                    }
                }
                self.refresh_force();
                if self.state.true_clamp_force > self.stem.crush_limit {
                    return self.finish(OutcomeKind::Crush);
                }
                if self.state.phase == Phase::Closing && self.state.upper_gap == 0.0 {
                    // Jaws met without ever reading the target force.
                    return self.finish(OutcomeKind::Incomplete);
                }
            }
            Phase::Clamped => {
                if self.start_delay_left > 0 {
                    self.start_delay_left -= 1;
                    self.transition(Phase::Clamped);
                } else {
                    let derate = self.config.faults.misalignment_derate;
                    if derate > 0.0 {
                        let compression =
                            (self.effective_diameter() - self.state.upper_gap).max(0.0);
                        let slack = derate * compression;
                        self.state.upper_gap += slack;
                        self.state.lower_gap += slack;
                    }
                    self.transition(Phase::Pulling);
                }
                self.refresh_force();
            }
            Phase::Pulling => {
                self.refresh_force();
                if self.state.true_clamp_force < self.stem.slip_threshold {
                    return self.finish(OutcomeKind::Slip);
                }
                self.state.pull_displacement += self.config.pull_motor.travel_per_tick();
                let tension = self.config.tension_per_mm * self.state.pull_displacement;
                if tension >= self.stem.break_tension {
                    self.separated = true;
                    self.transition(Phase::Opening);
                } else if self.state.pull_displacement >= self.config.max_stroke {
                    return self.finish(OutcomeKind::Incomplete);
                } else {
                    self.transition(Phase::Pulling);
                }
            }
            Phase::Opening => {
                if filtered == 0.0 {
                    self.transition(Phase::Reset);
                } else {
                    self.open_jaws();
                    self.transition(Phase::Opening);
                }
                self.refresh_force();
            }
            Phase::Reset => {
                self.state.upper_gap = self.config.open_gap;
                self.state.lower_gap = self.config.open_gap;
                self.state.pull_displacement = 0.0;
                self.transition(Phase::Idle);
                self.refresh_force();
                if self.separated {
                    return self.finish(OutcomeKind::Success);
                }
            }
        }
        if self.state.true_clamp_force > self.stem.crush_limit {
            return self.finish(OutcomeKind::Crush);
        }
        None
    }

    /// Runs to an outcome, declaring Incomplete when the tick budget runs out.
    /// `observe` sees the state after every tick.
    pub fn run_with(mut self, mut observe: impl FnMut(&PluckerState)) -> PluckOutcome {
        let kind = loop {
            if let Some(kind) = self.step() {
                observe(&self.state);
                break kind;
            }
            observe(&self.state);
            if self.state.tick >= self.config.tick_budget {
                break OutcomeKind::Incomplete;
            }
        };
        PluckOutcome {
            kind,
            ticks_elapsed: self.state.tick,
            peak_clamp_force: self.peak,
        }
    }
}

/// Runs one trial to completion. Identical inputs give identical outcomes.
pub fn run_trial(stem: &StemSpec, config: &SimConfig, seed: u64) -> Result<PluckOutcome, SimError> {
    Ok(Plucker::new(stem, config, seed)?.run_with(|_| {}))
}

/// Like [`run_trial`] but also returns the state after every tick, starting
/// with the initial state at tick 0.
pub fn run_trial_traced(
    stem: &StemSpec,
    config: &SimConfig,
    seed: u64,
) -> Result<(PluckOutcome, Vec<PluckerState>), SimError> {
    let plucker = Plucker::new(stem, config, seed)?;
    let mut trace = vec![plucker.state().clone()];
    let outcome = plucker.run_with(|s| trace.push(s.clone()));
    Ok((outcome, trace))
}

/// Renders a trace, one line per tick, with a comment header and a trailing
/// outcome comment.
pub fn format_trace(trace: &[PluckerState], outcome: &PluckOutcome) -> String {
    let mut out =
        String::from("# tick phase upper_gap lower_gap true_force measured_force pull_disp\n");
    for s in trace {
        out.push_str(&s.trace_line());
        out.push('\n');
    }
    let _ = writeln!(
        out,
        "# outcome {} after {} ticks, peak clamp force {:.4} N",
        outcome.kind, outcome.ticks_elapsed, outcome.peak_clamp_force
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn phases(trace: &[PluckerState]) -> Vec<Phase> {
        let mut v: Vec<Phase> = trace.iter().map(|s| s.phase).collect();
        v.dedup();
        v
    }

    #[test]
    fn nominal_cycle() {
        let cfg = SimConfig::default();
        let (out, trace) = run_trial_traced(&StemSpec::nominal(2.0), &cfg, 1).unwrap();
        assert_eq!(out.kind, OutcomeKind::Success);
        assert_eq!(
            phases(&trace),
            vec![
                Phase::Idle,
                Phase::Closing,
                Phase::Clamped,
                Phase::Pulling,
                Phase::Opening,
                Phase::Reset,
                Phase::Idle
            ]
        );
        assert!(out.peak_clamp_force >= cfg.gripper.clamp_force_target - cfg.sensor.lsb_force());
        assert!(out.peak_clamp_force <= cfg.gripper.clamp_force_target + cfg.overshoot_bound());
    }

    #[test]
    fn force_held_while_pulling() {
        let cfg = SimConfig::default();
        let (_, trace) = run_trial_traced(&StemSpec::nominal(1.3), &cfg, 3).unwrap();
        let target = cfg.gripper.clamp_force_target;
        let step = cfg.overshoot_bound();
        let pulling: Vec<_> = trace.iter().filter(|s| s.phase == Phase::Pulling).collect();
        assert!(!pulling.is_empty());
        for s in pulling {
            assert!((s.true_clamp_force - target).abs() <= step, "{s:?}");
            assert_eq!(s.upper_gap, s.lower_gap);
        }
    }

    #[test]
    fn biased_sensor_stops_before_contact_and_slips() {
        let mut cfg = SimConfig::default();
        cfg.faults.sensor_bias = 4.0 * cfg.sensor.gain;
        let stem = StemSpec::nominal(2.0);
        let (out, trace) = run_trial_traced(&stem, &cfg, 5).unwrap();
        assert_eq!(out.kind, OutcomeKind::Slip);
        let clamped = trace.iter().find(|s| s.phase == Phase::Clamped).unwrap();
        assert!(clamped.upper_gap > stem.diameter);
        assert_eq!(clamped.true_clamp_force, 0.0);
    }

    #[test]
    fn low_crush_limit_crushes() {
        let stem = StemSpec {
            crush_limit: 3.5,
            ..StemSpec::nominal(2.0)
        };
        let out = run_trial(&stem, &SimConfig::default(), 0).unwrap();
        assert_eq!(out.kind, OutcomeKind::Crush);
    }

    #[test]
    fn unbreakable_stem_is_incomplete() {
        let stem = StemSpec {
            break_tension: f64::INFINITY,
            ..StemSpec::nominal(2.0)
        };
        let out = run_trial(&stem, &SimConfig::default(), 0).unwrap();
        assert_eq!(out.kind, OutcomeKind::Incomplete);
        let budget_bound = SimConfig {
            max_stroke: 1e9,
            tick_budget: 3000,
            ..SimConfig::default()
        };
        let out = run_trial(&stem, &budget_bound, 0).unwrap();
        assert_eq!(out.kind, OutcomeKind::Incomplete);
        assert_eq!(out.ticks_elapsed, 3000);
    }

    #[test]
    fn missed_capture_is_incomplete() {
        let cfg = SimConfig {
            capture_probability: 0.0,
            ..SimConfig::default()
        };
        let out = run_trial(&StemSpec::nominal(2.0), &cfg, 0).unwrap();
        assert_eq!(out.kind, OutcomeKind::Incomplete);
        assert_eq!(out.peak_clamp_force, 0.0);
    }

    #[test]
    fn delayed_stop_crushes() {
        let mut cfg = SimConfig::default();
        cfg.faults.stop_delay_ticks = 12;
        let out = run_trial(&StemSpec::nominal(2.0), &cfg, 0).unwrap();
        assert_eq!(out.kind, OutcomeKind::Crush);
    }

    #[test]
    fn delayed_start_runs_out_of_budget() {
        let mut cfg = SimConfig::default();
        cfg.faults.start_delay_ticks = 20_000;
        let out = run_trial(&StemSpec::nominal(2.0), &cfg, 0).unwrap();
        assert_eq!(out.kind, OutcomeKind::Incomplete);
        assert_eq!(out.ticks_elapsed, cfg.tick_budget);
    }

    #[test]
    fn misalignment_slips() {
        let mut cfg = SimConfig::default();
        cfg.faults.misalignment_derate = 0.5;
        let out = run_trial(&StemSpec::nominal(2.0), &cfg, 0).unwrap();
        assert_eq!(out.kind, OutcomeKind::Slip);
    }

    #[test]
    fn errors() {
        let zero = SimConfig {
            tick_budget: 0,
            ..SimConfig::default()
        };
        assert_eq!(
            run_trial(&StemSpec::nominal(2.0), &zero, 0).unwrap_err(),
            SimError::ZeroTickBudget
        );
        let bad_stem = StemSpec {
            slip_threshold: 7.0,
            ..StemSpec::nominal(2.0)
        };
        assert!(matches!(
            run_trial(&bad_stem, &SimConfig::default(), 0),
            Err(SimError::InvalidStem(_))
        ));
        assert!(matches!(
            run_trial(&StemSpec::nominal(5.0), &SimConfig::default(), 0),
            Err(SimError::InvalidStem(_))
        ));
    }

    #[test]
    fn trace_is_deterministic() {
        let mut cfg = SimConfig::default();
        cfg.sensor.noise_sigma = 0.004;
        cfg.filter = ForceFilter::MovingAverage(4);
        let stem = StemSpec::nominal(1.7);
        let a = run_trial_traced(&stem, &cfg, 99).unwrap();
        let b = run_trial_traced(&stem, &cfg, 99).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn edge_set() {
        use Phase::*;
        assert!(Idle.can_transition_to(Closing));
        assert!(!Idle.can_transition_to(Pulling));
        assert!(!Closing.can_transition_to(Pulling));
        assert!(!Pulling.can_transition_to(Closing));
        assert!(!Reset.can_transition_to(Closing));
        let edges = Phase::ALL
            .iter()
            .flat_map(|a| Phase::ALL.iter().map(move |b| (a, b)))
            .filter(|(a, b)| a.can_transition_to(**b))
            .count();
        assert_eq!(edges, 10);
    }

    #[test]
    fn trace_line_format() {
        let s = PluckerState {
            phase: Phase::Pulling,
            upper_gap: 1.97,
            lower_gap: 1.97,
            true_clamp_force: 4.12345,
            measured_clamp_force: 4.1,
            pull_displacement: 0.05,
            tick: 17,
        };
        assert_eq!(
            s.trace_line(),
            "17 pulling 1.9700 1.9700 4.1235 4.1000 0.050"
        );
    }
}
