//! Tender tea leaf identification and a force-controlled plucking finger
//! simulator.
//!
//! The identification half segments RGB images with a linear color index
//! `x*r + y*g + z*b >= T`, fitted by a constrained grid search over labeled
//! pixel samples, and scores the resulting masks region by region. The
//! plucking half is a deterministic discrete-time model of a two-pair
//! gripper that closes until a strain-gauge bridge reports the target clamp
//! force, pulls the stem apart, and classifies each trial as success, slip,
//! crush, or incomplete.

// `!(a < b)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod evaluation;
pub mod fitting;
pub mod imaging;
pub mod plucker_sim;
pub mod segmentation;

pub use evaluation::{
    aggregate_reports, connected_components, evaluate, match_regions, parse_truth, EvalError,
    EvalReport, GroundTruth, Rect, Region,
};
pub use fitting::{
    average_params, count_satisfying, fit_dataset, fit_image, sweep_thresholds, DatasetFit,
    FitConfig, FitError, FitMode, FitResult, ThresholdSweep,
};
pub use imaging::{
    extract_samples, parse_annotations, read_pgm, read_ppm, write_mask, write_ppm, BinaryMask,
    ImageError, Label, Rgb, RgbImage, SampleBox, SampleSet,
};
pub use plucker_sim::{
    gripper_deflection, run_campaign, run_trial, sense_force, BridgeSensor, CampaignReport,
    FaultConfig, GripperModel, MotorModel, OutcomeKind, Phase, PluckOutcome, PluckerState,
    Scenario, SimConfig, SimError, StemSpec,
};
pub use segmentation::{binarize, classify, exg_index, score, PixelClass, SegmentationParams};

/// Seed used by every stochastic component when none is given.
pub const DEFAULT_SEED: u64 = 42;
