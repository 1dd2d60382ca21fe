//! `key = value` scenario files.
//!
//! ```text
//! # comments and blank lines are ignored
//! seed = 42
//! trials = 80
//! stem.diameter_min = 1.0
//! stem.diameter_max = 3.0
//! fault.bias_rate = 0.075
//! fault.bias = 1.32
//! ```
//!
//! Unset keys keep their defaults. Stem diameters are spread evenly over
//! `[diameter_min, diameter_max]`, one per trial.

use std::str::FromStr;

use super::campaign::FaultConfig;
use super::machine::{SimConfig, StemSpec};
use super::SimError;

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    /// `None` leaves the choice to the caller.
    pub seed: Option<u64>,
    pub trials: usize,
    pub diameter_min: f64,
    pub diameter_max: f64,
    /// Mechanical limits shared by every stem; its diameter is ignored.
    pub stem: StemSpec,
    pub config: SimConfig,
    pub faults: FaultConfig,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            seed: None,
            trials: 80,
            diameter_min: 1.0,
            diameter_max: 3.0,
            stem: StemSpec::nominal(2.0),
            config: SimConfig::default(),
            faults: FaultConfig::default(),
        }
    }
}

fn num<T: FromStr>(value: &str, line: usize, key: &str) -> Result<T, SimError> {
    value.parse().map_err(|_| SimError::Scenario {
        line,
        message: format!("bad value {value:?} for `{key}`"),
    })
}

/// A float field; `inf` is allowed, NaN is not.
fn float(value: &str, line: usize, key: &str) -> Result<f64, SimError> {
    let v: f64 = num(value, line, key)?;
    if v.is_nan() {
        return Err(SimError::Scenario {
            line,
            message: format!("`{key}` must be a number"),
        });
    }
    Ok(v)
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self, SimError> {
        let mut s = Scenario::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| SimError::Scenario {
                line,
                message: format!("expected `key = value`, got {content:?}"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            let f = |v: &str| float(v, line, key);
            let c = &mut s.config;
            let fc = &mut s.faults;
            match key {
                "seed" => s.seed = Some(num(value, line, key)?),
                "trials" => s.trials = num(value, line, key)?,
                "tick_budget" => c.tick_budget = num(value, line, key)?,
                "stem.diameter_min" => s.diameter_min = f(value)?,
                "stem.diameter_max" => s.diameter_max = f(value)?,
                "stem.break_tension" => s.stem.break_tension = f(value)?,
                "stem.slip_threshold" => s.stem.slip_threshold = f(value)?,
                "stem.crush_limit" => s.stem.crush_limit = f(value)?,
                "stem.tension_per_mm" => c.tension_per_mm = f(value)?,
                "gripper.stiffness" => c.gripper.stiffness = f(value)?,
                "gripper.clamp_target" => c.gripper.clamp_force_target = f(value)?,
                "sensor.gain" => c.sensor.gain = f(value)?,
                "sensor.full_scale" => c.sensor.full_scale = f(value)?,
                "sensor.adc_bits" => c.sensor.adc_bits = num(value, line, key)?,
                "sensor.noise_sigma" => c.sensor.noise_sigma = f(value)?,
                "sensor.bias" => c.sensor.bias = f(value)?,
                "motor.close_step" => c.clamp_motor.displacement_per_step = f(value)?,
                "motor.close_rate" => c.clamp_motor.rate = num(value, line, key)?,
                "motor.pull_step" => c.pull_motor.displacement_per_step = f(value)?,
                "motor.pull_rate" => c.pull_motor.rate = num(value, line, key)?,
                "finger.open_gap" => c.open_gap = f(value)?,
                "finger.max_stroke" => c.max_stroke = f(value)?,
                "finger.capture_probability" => c.capture_probability = f(value)?,
                "finger.filter" => {
                    c.filter = value
                        .parse()
                        .map_err(|message| SimError::Scenario { line, message })?
                }
                "fault.bias_rate" => fc.bias_rate = f(value)?,
                "fault.bias" => fc.bias = f(value)?,
                "fault.noise_rate" => fc.noise_rate = f(value)?,
                "fault.noise_sigma" => fc.noise_sigma = f(value)?,
                "fault.stop_delay_rate" => fc.stop_delay_rate = f(value)?,
                "fault.stop_delay_ticks" => fc.stop_delay_ticks = num(value, line, key)?,
                "fault.start_delay_rate" => fc.start_delay_rate = f(value)?,
                "fault.start_delay_ticks" => fc.start_delay_ticks = num(value, line, key)?,
                "fault.misalign_rate" => fc.misalign_rate = f(value)?,
                "fault.misalign_derate" => fc.misalign_derate = f(value)?,
                _ => {
                    return Err(SimError::Scenario {
                        line,
                        message: format!("unknown key `{key}`"),
                    })
                }
            }
        }
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.trials == 0 {
            return Err(SimError::EmptyCampaign);
        }
        if !(self.diameter_min > 0.0
            && self.diameter_min <= self.diameter_max
            && self.diameter_max.is_finite())
        {
            return Err(SimError::InvalidConfig(format!(
                "stem diameters must satisfy 0 < min <= max, got [{}, {}]",
                self.diameter_min, self.diameter_max
            )));
        }
        self.config.validate()?;
        self.faults.validate()?;
        for stem in [
            self.stems_at(self.diameter_min),
            self.stems_at(self.diameter_max),
        ] {
            stem.validate()?;
        }
        Ok(())
    }

    fn stems_at(&self, diameter: f64) -> StemSpec {
        StemSpec {
            diameter,
            ..self.stem.clone()
        }
    }

    /// One stem per trial, diameters evenly spaced from min to max.
    pub fn stems(&self) -> Vec<StemSpec> {
        let n = self.trials;
        (0..n)
            .map(|i| {
                let d = if n == 1 {
                    self.diameter_min
                } else {
                    self.diameter_min
                        + (self.diameter_max - self.diameter_min) * i as f64 / (n - 1) as f64
                };
                self.stems_at(d)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plucker_sim::ForceFilter;

    #[test]
    fn parses_keys() {
        let s = Scenario::parse(
            "# fault run\nseed = 7\ntrials = 10 # ten\n\nstem.break_tension = inf\nfinger.filter = average:4\nfault.bias_rate=0.5\nmotor.close_rate = 2\n",
        )
        .unwrap();
        assert_eq!(s.seed, Some(7));
        assert_eq!(s.trials, 10);
        assert_eq!(s.stem.break_tension, f64::INFINITY);
        assert_eq!(s.config.filter, ForceFilter::MovingAverage(4));
        assert_eq!(s.faults.bias_rate, 0.5);
        assert_eq!(s.config.clamp_motor.rate, 2);
    }

    #[test]
    fn stems_span_range() {
        let s = Scenario::default();
        let stems = s.stems();
        assert_eq!(stems.len(), 80);
        assert_eq!(stems[0].diameter, 1.0);
        assert_eq!(stems[79].diameter, 3.0);
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert!(matches!(
            Scenario::parse("seed = 1\nnonsense"),
            Err(SimError::Scenario { line: 2, .. })
        ));
        assert!(matches!(
            Scenario::parse("\n\nwat = 3"),
            Err(SimError::Scenario { line: 3, .. })
        ));
        assert!(matches!(
            Scenario::parse("trials = many"),
            Err(SimError::Scenario { line: 1, .. })
        ));
        assert!(matches!(
            Scenario::parse("finger.filter = median"),
            Err(SimError::Scenario { line: 1, .. })
        ));
        assert_eq!(Scenario::parse("trials = 0"), Err(SimError::EmptyCampaign));
        assert!(matches!(
            Scenario::parse("stem.slip_threshold = 9"),
            Err(SimError::InvalidStem(_))
        ));
    }
}
