//! Linear color-index segmentation.
//!
//! A pixel is foreground when `x*r + y*g + z*b >= T`. Scores are evaluated in
//! `f64` with the channels widened exactly; the comparison is inclusive and
//! no epsilon is applied.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::imaging::{BinaryMask, Rgb, RgbImage};

/// Coefficients `(x, y, z)` of the color index and the threshold `T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentationParams {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub threshold: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum ParamsError {
    #[error("segmentation parameters must be finite, got ({0}, {1}, {2}, {3})")]
    NonFinite(f64, f64, f64, f64),
    #[error("expected four whitespace-separated numbers `x y z T`, found {0}")]
    FieldCount(usize),
    #[error("not a number: {0:?}")]
    BadNumber(String),
}

impl SegmentationParams {
    /// The averaged tender-leaf parameters, `0.764 r + 0.392 g - 1.157 b >= 90.3`.
    pub const TENDER_LEAF: Self = Self {
        x: 0.764,
        y: 0.392,
        z: -1.157,
        threshold: 90.3,
    };

    pub fn new(x: f64, y: f64, z: f64, threshold: f64) -> Result<Self, ParamsError> {
        if [x, y, z, threshold].iter().all(|v| v.is_finite()) {
            Ok(Self { x, y, z, threshold })
        } else {
            Err(ParamsError::NonFinite(x, y, z, threshold))
        }
    }

    /// Excess-green coefficients `(-1, 2, -1)` with the given threshold.
    pub fn excess_green(threshold: f64) -> Self {
        Self {
            x: -1.0,
            y: 2.0,
            z: -1.0,
            threshold,
        }
    }

    pub fn coefficients(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

/// Space-separated `x y z T`, printed with round-trip precision.
impl fmt::Display for SegmentationParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} {}", self.x, self.y, self.z, self.threshold)
    }
}

impl FromStr for SegmentationParams {
    type Err = ParamsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let fields: Vec<&str> = s.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(ParamsError::FieldCount(fields.len()));
        }
        let mut v = [0.0; 4];
        for (slot, tok) in v.iter_mut().zip(&fields) {
            *slot = tok
                .parse()
                .map_err(|_| ParamsError::BadNumber(tok.to_string()))?;
        }
        Self::new(v[0], v[1], v[2], v[3])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PixelClass {
    Foreground,
    Background,
}

/// Linear color index of a pixel.
#[inline]
pub fn score(params: &SegmentationParams, pixel: Rgb) -> f64 {
    score_coeffs(params.coefficients(), pixel)
}

#[inline]
pub(crate) fn score_coeffs([x, y, z]: [f64; 3], pixel: Rgb) -> f64 {
    let [r, g, b] = pixel.to_f64();
    x * r + y * g + z * b
}

#[inline]
pub fn classify(params: &SegmentationParams, pixel: Rgb) -> PixelClass {
    if score(params, pixel) >= params.threshold {
        PixelClass::Foreground
    } else {
        PixelClass::Background
    }
}

/// Pointwise binarization: 255 where the pixel classifies as foreground.
pub fn binarize(params: &SegmentationParams, img: &RgbImage) -> BinaryMask {
    let values = img
        .pixels()
        .par_iter()
        .map(|&px| match classify(params, px) {
            PixelClass::Foreground => BinaryMask::FOREGROUND,
            PixelClass::Background => BinaryMask::BACKGROUND,
        })
        .collect();
    BinaryMask::from_raw_unchecked(img.width(), img.height(), values)
}

/// Excess green index `2g - r - b`.
#[inline]
pub fn exg_index(pixel: Rgb) -> f64 {
    let [r, g, b] = pixel.to_f64();
    2.0 * g - r - b
}
