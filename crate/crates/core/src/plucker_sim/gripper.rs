use super::SimError;

/// Linear-elastic gripper calibrated from a single force/deflection point.
#[derive(Debug, Clone, PartialEq)]
pub struct GripperModel {
    /// N/mm.
    pub stiffness: f64,
    /// Calibration load, N.
    pub calibration_force: f64,
    /// Peak deflection at the calibration load, mm.
    pub calibration_deflection: f64,
    /// Beam cross-section, mm x mm.
    pub cross_section: (f64, f64),
    /// Clamp force the controller closes to, N.
    pub clamp_force_target: f64,
    /// Acceptable clamp force band `(min, max)`, N.
    pub force_band: (f64, f64),
    /// Contact force components at the calibration load, N.
    pub f1: f64,
    pub f2: f64,
}

impl GripperModel {
    pub const CALIBRATION_FORCE: f64 = 4.0;
    pub const CALIBRATION_DEFLECTION: f64 = 0.027;

    pub fn from_calibration(force: f64, deflection: f64) -> Self {
        Self {
            stiffness: force / deflection,
            calibration_force: force,
            calibration_deflection: deflection,
            cross_section: (3.0, 3.0),
            clamp_force_target: 4.0,
            force_band: (3.0, 4.0),
            f1: 3.57,
            f2: 2.41,
        }
    }

    pub fn with_target(mut self, target: f64) -> Self {
        self.clamp_force_target = target;
        self
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.stiffness) || !positive(self.clamp_force_target) {
            return Err(SimError::InvalidConfig(
                "gripper stiffness and clamp target must be positive".into(),
            ));
        }
        if !(self.force_band.0 < self.force_band.1) {
            return Err(SimError::InvalidConfig(
                "force band must satisfy min < max".into(),
            ));
        }
        Ok(())
    }

    /// Clamp force produced by pressing the jaws `compression` mm past contact.
    #[inline]
    pub fn force_for_compression(&self, compression: f64) -> f64 {
        self.stiffness * compression.max(0.0)
    }

    /// The two contact force components for a given clamp force, scaled
    /// linearly from the calibration decomposition.
    pub fn contact_components(&self, clamp_force: f64) -> (f64, f64) {
        let s = clamp_force / self.calibration_force;
        (self.f1 * s, self.f2 * s)
    }
}

impl Default for GripperModel {
    fn default() -> Self {
        Self::from_calibration(Self::CALIBRATION_FORCE, Self::CALIBRATION_DEFLECTION)
    }
}

/// Deflection of the gripper beam under `force`, mm.
pub fn gripper_deflection(force: f64, model: &GripperModel) -> Result<f64, SimError> {
    if !(force >= 0.0) {
        return Err(SimError::NegativeForce(force));
    }
    Ok(force / model.stiffness)
}
