//! Strain-gauge bridge and ADC.
//!
//! ```text
//! voltage  = gain * force + bias + noise
//! code     = clamp(floor(voltage / full_scale * (2^bits - 1) + 0.5), 0, 2^bits - 1)
//! measured = code / (2^bits - 1) * full_scale / gain
//! ```

use std::collections::VecDeque;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::SimError;

#[derive(Debug, Clone, PartialEq)]
pub struct BridgeSensor {
    /// Bridge plus amplifier transfer, V/N.
    pub gain: f64,
    pub adc_bits: u32,
    /// ADC reference, V.
    pub full_scale: f64,
    /// Standard deviation of additive voltage noise, V.
    pub noise_sigma: f64,
    /// Constant voltage offset, V.
    pub bias: f64,
}

impl Default for BridgeSensor {
    /// 12-bit ADC on a 3.3 V reference; 0-10 N spans the full range.
    fn default() -> Self {
        Self {
            gain: 0.33,
            adc_bits: 12,
            full_scale: 3.3,
            noise_sigma: 0.0,
            bias: 0.0,
        }
    }
}

/// One ADC sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reading {
    pub measured_force: f64,
    pub adc_code: u32,
}

impl BridgeSensor {
    pub fn validate(&self) -> Result<(), SimError> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.gain) || !positive(self.full_scale) {
            return Err(SimError::InvalidConfig(
                "sensor gain and full scale must be positive".into(),
            ));
        }
        if !(1..=24).contains(&self.adc_bits) {
            return Err(SimError::InvalidConfig("adc_bits must be in 1..=24".into()));
        }
        if !(self.noise_sigma >= 0.0) || !self.noise_sigma.is_finite() || !self.bias.is_finite() {
            return Err(SimError::InvalidConfig(
                "sensor noise must be non-negative and bias finite".into(),
            ));
        }
        Ok(())
    }

    pub fn max_code(&self) -> u32 {
        (1u32 << self.adc_bits) - 1
    }

    /// Force represented by one ADC count, N.
    pub fn lsb_force(&self) -> f64 {
        self.full_scale / (self.max_code() as f64 * self.gain)
    }

    /// Round-half-up, saturating conversion.
    pub fn code_for_voltage(&self, voltage: f64) -> u32 {
        let max = self.max_code() as f64;
        let x = (voltage / self.full_scale * max + 0.5).floor();
        if x >= max {
            self.max_code()
        } else if x > 0.0 {
            x as u32
        } else {
            // Negative and NaN voltages read zero.
            0
        }
    }

    /// Noise-free, bias-free code for a force. The controller passes its
    /// setpoint through this so that setpoint and signal share one transfer.
    pub fn ideal_code(&self, force: f64) -> u32 {
        self.code_for_voltage(self.gain * force)
    }

    /// Force corresponding to a (possibly fractional, after filtering) code.
    pub fn force_for_code(&self, code: f64) -> f64 {
        code / self.max_code() as f64 * self.full_scale / self.gain
    }
}

/// Samples the bridge. Noise is drawn from `rng` only when `noise_sigma > 0`.
pub fn sense_force<R: Rng + ?Sized>(
    true_force: f64,
    sensor: &BridgeSensor,
    rng: &mut R,
) -> Reading {
    debug_assert!(true_force >= 0.0);
    let noise = if sensor.noise_sigma > 0.0 {
        Normal::new(0.0, sensor.noise_sigma)
            .expect("validated sigma")
            .sample(rng)
    } else {
        0.0
    };
    let voltage = sensor.gain * true_force + sensor.bias + noise;
    let adc_code = sensor.code_for_voltage(voltage);
    Reading {
        measured_force: sensor.force_for_code(adc_code as f64),
        adc_code,
    }
}

/// Optional smoothing applied to ADC codes before the controller sees them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ForceFilter {
    #[default]
    None,
    /// Mean of the last `n` codes (fewer while the window fills).
    MovingAverage(usize),
}

impl std::fmt::Display for ForceFilter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ForceFilter::None => f.write_str("none"),
            ForceFilter::MovingAverage(n) => write!(f, "average:{n}"),
        }
    }
}

impl std::str::FromStr for ForceFilter {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "none" {
            return Ok(ForceFilter::None);
        }
        let n = s
            .strip_prefix("average:")
            .and_then(|n| n.parse::<usize>().ok())
            .filter(|&n| n >= 1)
            .ok_or_else(|| format!("expected `none` or `average:<n>` with n >= 1, got {s:?}"))?;
        Ok(ForceFilter::MovingAverage(n))
    }
}

#[derive(Debug, Clone)]
pub(crate) struct FilterState {
    window: usize,
    codes: VecDeque<u32>,
    sum: u64,
}

impl FilterState {
    pub(crate) fn new(filter: ForceFilter) -> Self {
        let window = match filter {
            ForceFilter::None => 1,
            ForceFilter::MovingAverage(n) => n.max(1),
        };
        Self {
            window,
            codes: VecDeque::with_capacity(window),
            sum: 0,
        }
    }

    /// Pushes a code and returns the filtered code.
    pub(crate) fn push(&mut self, code: u32) -> f64 {
        if self.codes.len() == self.window {
            self.sum -= u64::from(self.codes.pop_front().expect("non-empty window"));
        }
        self.codes.push_back(code);
        self.sum += u64::from(code);
        self.sum as f64 / self.codes.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(7)
    }

    #[test]
    fn zero_force_reads_zero() {
        let r = sense_force(0.0, &BridgeSensor::default(), &mut rng());
        assert_eq!(r.adc_code, 0);
        assert_eq!(r.measured_force, 0.0);
    }

    #[test]
    fn half_scale_rounds_half_up() {
        // 4 N maps to exactly half of 8 V; 2047.5 rounds to 2048.
        let sensor = BridgeSensor {
            gain: 1.0,
            full_scale: 8.0,
            ..BridgeSensor::default()
        };
        let r = sense_force(4.0, &sensor, &mut rng());
        assert_eq!(r.adc_code, 2048);
        assert!((r.measured_force - 4.0).abs() <= sensor.lsb_force());
    }

    #[test]
    fn saturates_at_full_scale() {
        let sensor = BridgeSensor::default();
        assert_eq!(sense_force(50.0, &sensor, &mut rng()).adc_code, 4095);
        let biased = BridgeSensor {
            bias: -1.0,
            ..sensor
        };
        assert_eq!(sense_force(0.5, &biased, &mut rng()).adc_code, 0);
    }

    #[test]
    fn bias_shifts_reading() {
        let sensor = BridgeSensor {
            bias: 4.0 * 0.33,
            ..BridgeSensor::default()
        };
        let r = sense_force(0.0, &sensor, &mut rng());
        assert_eq!(r.adc_code, sensor.ideal_code(4.0));
    }

    #[test]
    fn noise_is_seeded() {
        let sensor = BridgeSensor {
            noise_sigma: 0.01,
            ..BridgeSensor::default()
        };
        let a: Vec<u32> = {
            let mut r = rng();
            (0..20)
                .map(|_| sense_force(2.0, &sensor, &mut r).adc_code)
                .collect()
        };
        let b: Vec<u32> = {
            let mut r = rng();
            (0..20)
                .map(|_| sense_force(2.0, &sensor, &mut r).adc_code)
                .collect()
        };
        assert_eq!(a, b);
        assert!(a.iter().any(|&c| c != a[0]), "noise should perturb codes");
    }

    #[test]
    fn moving_average() {
        let mut f = FilterState::new(ForceFilter::MovingAverage(3));
        assert_eq!(f.push(3), 3.0);
        assert_eq!(f.push(6), 4.5);
        assert_eq!(f.push(9), 6.0);
        assert_eq!(f.push(0), 5.0);
        let mut none = FilterState::new(ForceFilter::None);
        assert_eq!(none.push(10), 10.0);
        assert_eq!(none.push(2), 2.0);
    }

    #[test]
    fn filter_text() {
        assert_eq!("none".parse(), Ok(ForceFilter::None));
        assert_eq!("average:4".parse(), Ok(ForceFilter::MovingAverage(4)));
        assert!("average:0".parse::<ForceFilter>().is_err());
        assert_eq!(ForceFilter::MovingAverage(4).to_string(), "average:4");
    }

    proptest! {
        #[test]
        fn quantization_error_within_half_lsb(force in 0.0f64..10.0) {
            let sensor = BridgeSensor::default();
            let r = sense_force(force, &sensor, &mut rng());
            prop_assert!((r.measured_force - force).abs() <= 0.5 * sensor.lsb_force() * (1.0 + 1e-9));
        }

        #[test]
        fn noiseless_sensing_is_monotone(a in 0.0f64..12.0, b in 0.0f64..12.0) {
            let sensor = BridgeSensor::default();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let rl = sense_force(lo, &sensor, &mut rng());
            let rh = sense_force(hi, &sensor, &mut rng());
            prop_assert!(rl.adc_code <= rh.adc_code);
            prop_assert!(rl.measured_force <= rh.measured_force);
        }
    }
}
