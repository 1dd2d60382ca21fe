//! Discrete-time model of a force-controlled plucking finger.
//!
//! Two gripper pairs close on a tea stem until a strain-gauge bridge reports
//! the target clamp force, the upper pair pulls the stem apart, and the
//! jaws reopen. [`run_trial`] runs one stem; [`run_campaign`] runs many with
//! seeded fault injection and tallies the outcomes.

mod campaign;
mod gripper;
mod machine;
mod scenario;
mod sensor;

pub use campaign::{
    format_campaign_report, plan_campaign, run_campaign, CampaignReport, FaultConfig, TrialPlan,
    TrialRecord,
};
pub use gripper::{gripper_deflection, GripperModel};
pub use machine::{
    format_trace, run_trial, run_trial_traced, MotorModel, OutcomeKind, Phase, PluckOutcome,
    Plucker, PluckerState, SimConfig, StemSpec, TrialFaults,
};
pub use scenario::Scenario;
pub use sensor::{sense_force, BridgeSensor, ForceFilter, Reading};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("force must be non-negative, got {0}")]
    NegativeForce(f64),
    #[error("invalid simulator configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid stem: {0}")]
    InvalidStem(String),
    #[error("tick budget must be positive")]
    ZeroTickBudget,
    #[error("campaign needs at least one stem")]
    EmptyCampaign,
    #[error("scenario line {line}: {message}")]
    Scenario { line: usize, message: String },
}
