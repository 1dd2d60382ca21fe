//! Constrained grid search for segmentation parameters.
//!
//! The search walks `x`, `y`, `z` over `[coeff_min, coeff_max]` and `T` over
//! `[t_min, t_max]`, all inclusive, in lexicographic order (x outer, T
//! inner, each ascending). A grid point is accepted when
//!
//! ```text
//! n > leaf_fraction * N   and   m < background_fraction * M
//! ```
//!
//! where `n` (`m`) counts leaf (background) samples whose score reaches `T`.
//! Both inequalities are strict.
//!
//! The threshold axis is never enumerated pixel by pixel. For a fixed
//! coefficient triple every sample score is bucketed by how many grid
//! thresholds it clears, and the per-threshold counts fall out of a single
//! prefix sum. Samples are deduplicated by color first, so cost per triple
//! is `O(unique colors + |T grid|)`.

use std::fmt::Write as _;

use rayon::prelude::*;
use thiserror::Error;

use crate::imaging::{Rgb, SampleSet};
use crate::segmentation::{classify, score_coeffs, PixelClass, SegmentationParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FitMode {
    /// Stop at the first grid point (in scan order) that satisfies the constraints.
    #[default]
    FirstFound,
    /// Scan the whole grid and keep the point maximizing `n/N - m/M`.
    Best,
}

impl std::str::FromStr for FitMode {
    type Err = FitError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "first" | "first-found" => Ok(FitMode::FirstFound),
            "best" => Ok(FitMode::Best),
            other => Err(FitError::InvalidConfig(format!(
                "unknown fit mode {other:?} (expected `first` or `best`)"
            ))),
        }
    }
}

impl std::fmt::Display for FitMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FitMode::FirstFound => "first",
            FitMode::Best => "best",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub coeff_min: f64,
    pub coeff_max: f64,
    pub coeff_step: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub t_step: f64,
    pub leaf_fraction: f64,
    pub background_fraction: f64,
    pub mode: FitMode,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            coeff_min: -3.0,
            coeff_max: 3.0,
            coeff_step: 0.05,
            t_min: 0.0,
            t_max: 255.0,
            t_step: 0.5,
            leaf_fraction: 0.98,
            background_fraction: 0.02,
            mode: FitMode::FirstFound,
        }
    }
}

impl FitConfig {
    /// Default ranges on a coarse grid (coefficient step 0.5, threshold step 16).
    pub fn coarse() -> Self {
        Self {
            coeff_step: 0.5,
            t_step: 16.0,
            ..Self::default()
        }
    }

    pub fn with_mode(mut self, mode: FitMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn validate(&self) -> Result<(), FitError> {
        let all = [
            self.coeff_min,
            self.coeff_max,
            self.coeff_step,
            self.t_min,
            self.t_max,
            self.t_step,
            self.leaf_fraction,
            self.background_fraction,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(FitError::InvalidConfig(
                "all settings must be finite".into(),
            ));
        }
        if !(self.coeff_min < self.coeff_max) || !(self.coeff_step > 0.0) {
            return Err(FitError::DegenerateGrid("coefficient"));
        }
        if !(self.t_min < self.t_max) || !(self.t_step > 0.0) {
            return Err(FitError::DegenerateGrid("threshold"));
        }
        let in_unit = |f: f64| f > 0.0 && f < 1.0;
        if !in_unit(self.leaf_fraction) || !in_unit(self.background_fraction) {
            return Err(FitError::InvalidConfig(
                "leaf_fraction and background_fraction must lie in (0, 1)".into(),
            ));
        }
        if self.background_fraction >= self.leaf_fraction {
            return Err(FitError::InvalidConfig(
                "background_fraction must be below leaf_fraction".into(),
            ));
        }
        Ok(())
    }

    pub fn coeff_axis(&self) -> GridAxis {
        GridAxis::new(self.coeff_min, self.coeff_max, self.coeff_step)
    }

    pub fn threshold_axis(&self) -> GridAxis {
        GridAxis::new(self.t_min, self.t_max, self.t_step)
    }

    /// Whether counts `(n, m)` out of `(N, M)` satisfy both strict constraints.
    pub fn accepts(&self, n: usize, m: usize, leaf_total: usize, background_total: usize) -> bool {
        (n as f64) > self.leaf_fraction * leaf_total as f64
            && (m as f64) < self.background_fraction * background_total as f64
    }
}

/// Inclusive, uniformly spaced axis. Values are `min + i * step`, computed
/// from the integer index so every grid point is exactly reproducible.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridAxis {
    min: f64,
    step: f64,
    len: usize,
}

impl GridAxis {
    /// Slack for `(max - min) / step` landing a hair under an integer.
    const SPAN_SLACK: f64 = 1e-9;

    pub fn new(min: f64, max: f64, step: f64) -> Self {
        let span = ((max - min) / step + Self::SPAN_SLACK).floor();
        let len = if span >= 0.0 { span as usize + 1 } else { 0 };
        Self { min, step, len }
    }

    #[inline]
    pub fn value(&self, i: usize) -> f64 {
        self.min + i as f64 * self.step
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(|i| self.value(i))
    }

    /// Number of grid values `<= s`.
    #[inline]
    fn count_at_or_below(&self, s: f64) -> usize {
        if self.len == 0 || !(s >= self.min) {
            return 0;
        }
        let guess = ((s - self.min) / self.step).floor();
        let mut i = if guess >= (self.len - 1) as f64 {
            self.len - 1
        } else {
            guess as usize
        };
        // The guess can be off by one from rounding; settle it against the
        // exact grid values.
        while i + 1 < self.len && self.value(i + 1) <= s {
            i += 1;
        }
        while self.value(i) > s {
            if i == 0 {
                return 0;
            }
            i -= 1;
        }
        i + 1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub params: SegmentationParams,
    /// Leaf samples scoring at or above `T`.
    pub n: usize,
    /// Background samples scoring at or above `T`.
    pub m: usize,
    pub leaf_total: usize,
    pub background_total: usize,
    pub satisfied: bool,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("sample set needs at least one leaf and one background pixel")]
    EmptySamples,
    #[error("{0} grid has no points (check min < max and step > 0)")]
    DegenerateGrid(&'static str),
    #[error("invalid fit configuration: {0}")]
    InvalidConfig(String),
    #[error(
        "no parameters satisfy the constraints on x, y, z in [{coeff_min}, {coeff_max}] step {coeff_step} \
         and T in [{t_min}, {t_max}] step {t_step}; reset the ranges or steps and retry"
    )]
    NotFound {
        coeff_min: f64,
        coeff_max: f64,
        coeff_step: f64,
        t_min: f64,
        t_max: f64,
        t_step: f64,
    },
    #[error("nothing to average")]
    EmptyInput,
}

impl FitError {
    fn not_found(cfg: &FitConfig) -> Self {
        FitError::NotFound {
            coeff_min: cfg.coeff_min,
            coeff_max: cfg.coeff_max,
            coeff_step: cfg.coeff_step,
            t_min: cfg.t_min,
            t_max: cfg.t_max,
            t_step: cfg.t_step,
        }
    }
}

/// Counts `(n, m)` by direct per-pixel classification.
pub fn count_satisfying(
    params: &SegmentationParams,
    samples: &SampleSet,
) -> Result<(usize, usize), FitError> {
    if !samples.is_fittable() {
        return Err(FitError::EmptySamples);
    }
    let hits = |pixels: &[Rgb]| {
        pixels
            .iter()
            .filter(|&&px| classify(params, px) == PixelClass::Foreground)
            .count()
    };
    Ok((hits(&samples.leaf), hits(&samples.background)))
}

/// Per-threshold counts for one coefficient triple.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdSweep {
    pub thresholds: Vec<f64>,
    pub leaf_counts: Vec<usize>,
    pub background_counts: Vec<usize>,
}

/// Distinct colors with multiplicities.
#[derive(Debug, Clone)]
struct WeightedColors {
    colors: Vec<Rgb>,
    weights: Vec<usize>,
}

impl WeightedColors {
    fn new(pixels: &[Rgb]) -> Self {
        let mut sorted = pixels.to_vec();
        sorted.sort_unstable();
        let mut colors: Vec<Rgb> = Vec::new();
        let mut weights: Vec<usize> = Vec::new();
        for px in sorted {
            match colors.last() {
                Some(&last) if last == px => *weights.last_mut().unwrap() += 1,
                _ => {
                    colors.push(px);
                    weights.push(1);
                }
            }
        }
        Self { colors, weights }
    }

    /// `hist[k]` accumulates the weight of colors clearing exactly `k`
    /// thresholds; `hist` must have `axis.len() + 1` slots.
    fn bucket(&self, coeffs: [f64; 3], axis: &GridAxis, hist: &mut [usize]) {
        hist.fill(0);
        for (&c, &w) in self.colors.iter().zip(&self.weights) {
            hist[axis.count_at_or_below(score_coeffs(coeffs, c))] += w;
        }
    }
}

struct Prepared {
    leaf: WeightedColors,
    background: WeightedColors,
    leaf_total: usize,
    background_total: usize,
}

impl Prepared {
    fn new(samples: &SampleSet) -> Result<Self, FitError> {
        if !samples.is_fittable() {
            return Err(FitError::EmptySamples);
        }
        Ok(Self {
            leaf: WeightedColors::new(&samples.leaf),
            background: WeightedColors::new(&samples.background),
            leaf_total: samples.leaf_total(),
            background_total: samples.background_total(),
        })
    }
}

/// Scratch histograms for one worker.
struct Scratch {
    leaf: Vec<usize>,
    background: Vec<usize>,
}

impl Scratch {
    fn new(axis: &GridAxis) -> Self {
        Self {
            leaf: vec![0; axis.len() + 1],
            background: vec![0; axis.len() + 1],
        }
    }
}

/// Walks thresholds ascending, yielding `(t_index, n, m)`.
fn threshold_counts<'a>(
    prepared: &'a Prepared,
    scratch: &'a Scratch,
    axis: &GridAxis,
) -> impl Iterator<Item = (usize, usize, usize)> + 'a {
    // Count clearing T_i = total minus everything clearing at most i thresholds.
    let mut leaf_le = 0;
    let mut bg_le = 0;
    (0..axis.len()).map(move |i| {
        leaf_le += scratch.leaf[i];
        bg_le += scratch.background[i];
        (
            i,
            prepared.leaf_total - leaf_le,
            prepared.background_total - bg_le,
        )
    })
}

/// Counts `(n, m)` at every grid threshold for fixed coefficients, from one
/// scoring pass. Agrees with [`count_satisfying`] at each grid `T`.
pub fn sweep_thresholds(
    coeffs: [f64; 3],
    samples: &SampleSet,
    config: &FitConfig,
) -> Result<ThresholdSweep, FitError> {
    config.validate()?;
    let prepared = Prepared::new(samples)?;
    let axis = config.threshold_axis();
    let mut scratch = Scratch::new(&axis);
    prepared.leaf.bucket(coeffs, &axis, &mut scratch.leaf);
    prepared
        .background
        .bucket(coeffs, &axis, &mut scratch.background);

    let mut sweep = ThresholdSweep {
        thresholds: axis.values().collect(),
        leaf_counts: Vec::with_capacity(axis.len()),
        background_counts: Vec::with_capacity(axis.len()),
    };
    for (_, n, m) in threshold_counts(&prepared, &scratch, &axis) {
        sweep.leaf_counts.push(n);
        sweep.background_counts.push(m);
    }
    Ok(sweep)
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    /// Position in the lexicographic scan, `(ix, iy, iz, it)`.
    index: (usize, usize, usize, usize),
    n: usize,
    m: usize,
}

impl Candidate {
    /// `n/N - m/M` scaled by `N*M`, exact in integers.
    fn objective(&self, leaf_total: usize, background_total: usize) -> i128 {
        self.n as i128 * background_total as i128 - self.m as i128 * leaf_total as i128
    }
}

/// First accepted candidate in one x-slice.
fn first_in_slice(
    ix: usize,
    prepared: &Prepared,
    coeff: &GridAxis,
    thresh: &GridAxis,
    config: &FitConfig,
) -> Option<Candidate> {
    let mut scratch = Scratch::new(thresh);
    let x = coeff.value(ix);
    for iy in 0..coeff.len() {
        let y = coeff.value(iy);
        for iz in 0..coeff.len() {
            let coeffs = [x, y, coeff.value(iz)];
            prepared.leaf.bucket(coeffs, thresh, &mut scratch.leaf);
            prepared
                .background
                .bucket(coeffs, thresh, &mut scratch.background);
            let hit = threshold_counts(prepared, &scratch, thresh).find(|&(_, n, m)| {
                config.accepts(n, m, prepared.leaf_total, prepared.background_total)
            });
            if let Some((it, n, m)) = hit {
                return Some(Candidate {
                    index: (ix, iy, iz, it),
                    n,
                    m,
                });
            }
        }
    }
    None
}

/// Highest-objective candidate in one x-slice, earliest on ties.
fn best_in_slice(ix: usize, prepared: &Prepared, coeff: &GridAxis, thresh: &GridAxis) -> Candidate {
    let mut scratch = Scratch::new(thresh);
    let (lt, bt) = (prepared.leaf_total, prepared.background_total);
    let x = coeff.value(ix);
    let mut best: Option<(i128, Candidate)> = None;
    for iy in 0..coeff.len() {
        let y = coeff.value(iy);
        for iz in 0..coeff.len() {
            let coeffs = [x, y, coeff.value(iz)];
            prepared.leaf.bucket(coeffs, thresh, &mut scratch.leaf);
            prepared
                .background
                .bucket(coeffs, thresh, &mut scratch.background);
            for (it, n, m) in threshold_counts(prepared, &scratch, thresh) {
                let cand = Candidate {
                    index: (ix, iy, iz, it),
                    n,
                    m,
                };
                let obj = cand.objective(lt, bt);
                if best.as_ref().is_none_or(|(b, _)| obj > *b) {
                    best = Some((obj, cand));
                }
            }
        }
    }
    best.expect("non-empty grid").1
}

fn to_result(
    cand: Candidate,
    prepared: &Prepared,
    coeff: &GridAxis,
    thresh: &GridAxis,
    config: &FitConfig,
) -> FitResult {
    let (ix, iy, iz, it) = cand.index;
    FitResult {
        params: SegmentationParams {
            x: coeff.value(ix),
            y: coeff.value(iy),
            z: coeff.value(iz),
            threshold: thresh.value(it),
        },
        n: cand.n,
        m: cand.m,
        leaf_total: prepared.leaf_total,
        background_total: prepared.background_total,
        satisfied: config.accepts(
            cand.n,
            cand.m,
            prepared.leaf_total,
            prepared.background_total,
        ),
    }
}

/// Fits `(x, y, z, T)` to one image's samples.
///
/// Coefficient slices are searched in parallel on the current rayon pool;
/// the answer is always the one a sequential lexicographic scan would give.
pub fn fit_image(samples: &SampleSet, config: &FitConfig) -> Result<FitResult, FitError> {
    config.validate()?;
    let prepared = Prepared::new(samples)?;
    let coeff = config.coeff_axis();
    let thresh = config.threshold_axis();
    if coeff.is_empty() || thresh.is_empty() {
        return Err(FitError::DegenerateGrid(if coeff.is_empty() {
            "coefficient"
        } else {
            "threshold"
        }));
    }

    match config.mode {
        FitMode::FirstFound => (0..coeff.len())
            .into_par_iter()
            .find_map_first(|ix| first_in_slice(ix, &prepared, &coeff, &thresh, config))
            .map(|c| to_result(c, &prepared, &coeff, &thresh, config))
            .ok_or_else(|| FitError::not_found(config)),
        FitMode::Best => {
            let per_slice: Vec<Candidate> = (0..coeff.len())
                .into_par_iter()
                .map(|ix| best_in_slice(ix, &prepared, &coeff, &thresh))
                .collect();
            let (lt, bt) = (prepared.leaf_total, prepared.background_total);
            let mut best = per_slice[0];
            for cand in &per_slice[1..] {
                if cand.objective(lt, bt) > best.objective(lt, bt) {
                    best = *cand;
                }
            }
            Ok(to_result(best, &prepared, &coeff, &thresh, config))
        }
    }
}

/// Component-wise mean of a list of parameter sets.
pub fn average_params(results: &[SegmentationParams]) -> Result<SegmentationParams, FitError> {
    if results.is_empty() {
        return Err(FitError::EmptyInput);
    }
    let k = results.len() as f64;
    let sum = results.iter().fold([0.0; 4], |acc, p| {
        [
            acc[0] + p.x,
            acc[1] + p.y,
            acc[2] + p.z,
            acc[3] + p.threshold,
        ]
    });
    Ok(SegmentationParams {
        x: sum[0] / k,
        y: sum[1] / k,
        z: sum[2] / k,
        threshold: sum[3] / k,
    })
}

/// Per-image fits and their average.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetFit {
    /// One entry per input image. `None` means no grid point satisfied the
    /// constraints (first-found mode); in best mode an entry is always
    /// present and `satisfied` tells whether it counts toward the average.
    pub per_image: Vec<Option<FitResult>>,
    /// Mean over the satisfied per-image results.
    pub average: SegmentationParams,
}

impl DatasetFit {
    /// Indices of images without a satisfied fit.
    pub fn failed(&self) -> Vec<usize> {
        self.per_image
            .iter()
            .enumerate()
            .filter(|(_, r)| !r.as_ref().is_some_and(|r| r.satisfied))
            .map(|(i, _)| i)
            .collect()
    }
}

/// Fits every image independently and averages the satisfied results.
pub fn fit_dataset(per_image: &[SampleSet], config: &FitConfig) -> Result<DatasetFit, FitError> {
    if per_image.is_empty() {
        return Err(FitError::EmptyInput);
    }
    config.validate()?;
    let mut results = Vec::with_capacity(per_image.len());
    for samples in per_image {
        match fit_image(samples, config) {
            Ok(r) => results.push(Some(r)),
            Err(FitError::NotFound { .. }) => results.push(None),
            Err(e) => return Err(e),
        }
    }
    let satisfied: Vec<SegmentationParams> = results
        .iter()
        .flatten()
        .filter(|r| r.satisfied)
        .map(|r| r.params)
        .collect();
    if satisfied.is_empty() {
        return Err(FitError::not_found(config));
    }
    Ok(DatasetFit {
        per_image: results,
        average: average_params(&satisfied)?,
    })
}

/// Fixed-point formatting that never prints a negative zero.
pub(crate) fn fixed(v: f64, decimals: usize) -> String {
    let s = format!("{v:.decimals$}");
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

/// Renders a per-image table plus an average row. Coefficients carry three
/// decimals, thresholds one.
pub fn format_fit_report(
    labels: &[String],
    fit: &DatasetFit,
    config: &FitConfig,
    seed: u64,
) -> String {
    assert_eq!(labels.len(), fit.per_image.len(), "one label per image");
    let coeff = config.coeff_axis();
    let thresh = config.threshold_axis();
    let w = labels.iter().map(String::len).max().unwrap_or(0).max(7);
    let mut out = String::new();
    let _ = writeln!(out, "# tender leaf parameter fit");
    let _ = writeln!(out, "# seed {seed}");
    let _ = writeln!(out, "# mode {}", config.mode);
    let _ = writeln!(
        out,
        "# coefficient grid [{}, {}] step {} ({} points)",
        fixed(config.coeff_min, 3),
        fixed(config.coeff_max, 3),
        fixed(config.coeff_step, 3),
        coeff.len()
    );
    let _ = writeln!(
        out,
        "# threshold grid [{}, {}] step {} ({} points)",
        fixed(config.t_min, 1),
        fixed(config.t_max, 1),
        fixed(config.t_step, 1),
        thresh.len()
    );
    let _ = writeln!(
        out,
        "# constraint n > {} N, m < {} M",
        config.leaf_fraction, config.background_fraction
    );
    let _ = writeln!(
        out,
        "{:<w$} {:>8} {:>8} {:>8} {:>7} {:>13} {:>13}",
        "image", "x", "y", "z", "T", "n/N", "m/M"
    );
    for (label, result) in labels.iter().zip(&fit.per_image) {
        match result {
            Some(r) => {
                let _ = write!(
                    out,
                    "{:<w$} {:>8} {:>8} {:>8} {:>7} {:>13} {:>13}",
                    label,
                    fixed(r.params.x, 3),
                    fixed(r.params.y, 3),
                    fixed(r.params.z, 3),
                    fixed(r.params.threshold, 1),
                    format!("{}/{}", r.n, r.leaf_total),
                    format!("{}/{}", r.m, r.background_total),
                );
                if !r.satisfied {
                    out.push_str(" unsatisfied");
                }
                out.push('\n');
            }
            None => {
                let _ = writeln!(out, "{label:<w$} not found");
            }
        }
    }
    let p = fit.average;
    let _ = writeln!(
        out,
        "{:<w$} {:>8} {:>8} {:>8} {:>7}",
        "average",
        fixed(p.x, 3),
        fixed(p.y, 3),
        fixed(p.z, 3),
        fixed(p.threshold, 1),
    );
    out
}
