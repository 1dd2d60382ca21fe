//! Image and annotation representations.
//!
//! Images are 8-bit RGB, row-major. Masks hold only the values 0 and 255 so
//! they can be written straight to a binary PGM.

mod annotations;
mod pnm;

pub use annotations::{
    extract_samples, parse_annotations, AnnotationError, Label, SampleBox, SampleSet,
};
pub use pnm::{read_pgm, read_ppm, write_mask, write_ppm};

use thiserror::Error;

/// One RGB pixel, channels in `[0, 255]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Rgb {
    pub r: u8,
    pub g: u8,
    pub b: u8,
}

impl Rgb {
    pub const fn new(r: u8, g: u8, b: u8) -> Self {
        Self { r, g, b }
    }

    /// Channels widened to `f64` (exact).
    #[inline]
    pub fn to_f64(self) -> [f64; 3] {
        [f64::from(self.r), f64::from(self.g), f64::from(self.b)]
    }
}

impl From<[u8; 3]> for Rgb {
    fn from([r, g, b]: [u8; 3]) -> Self {
        Self { r, g, b }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ImageError {
    #[error("unsupported magic number {0:?} (expected {1})")]
    UnsupportedMagic(String, &'static str),
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("unsupported maxval {0} (only 255 is accepted)")]
    UnsupportedMaxval(u32),
    #[error("truncated pixel data: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("invalid dimensions {width}x{height}")]
    InvalidDimensions { width: usize, height: usize },
    #[error("buffer holds {found} values, {width}x{height} image needs {expected}")]
    SizeMismatch {
        width: usize,
        height: usize,
        expected: usize,
        found: usize,
    },
    #[error("mask value {value} at index {index} is neither 0 nor 255")]
    NonBinaryValue { index: usize, value: u8 },
}

fn check_dims(width: usize, height: usize, found: usize) -> Result<(), ImageError> {
    if width == 0 || height == 0 {
        return Err(ImageError::InvalidDimensions { width, height });
    }
    let expected = width
        .checked_mul(height)
        .ok_or(ImageError::InvalidDimensions { width, height })?;
    if expected != found {
        return Err(ImageError::SizeMismatch {
            width,
            height,
            expected,
            found,
        });
    }
    Ok(())
}

/// Row-major 8-bit RGB image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    pixels: Vec<Rgb>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, pixels: Vec<Rgb>) -> Result<Self, ImageError> {
        check_dims(width, height, pixels.len())?;
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// Image filled with a single color.
    pub fn filled(width: usize, height: usize, color: Rgb) -> Result<Self, ImageError> {
        check_dims(width, height, width.saturating_mul(height))?;
        Ok(Self {
            width,
            height,
            pixels: vec![color; width * height],
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[Rgb] {
        &self.pixels
    }

    /// Pixel at column `x`, row `y`. Panics when out of bounds.
    #[inline]
    pub fn get(&self, x: usize, y: usize) -> Rgb {
        assert!(
            x < self.width && y < self.height,
            "pixel ({x}, {y}) out of bounds"
        );
        self.pixels[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, color: Rgb) {
        assert!(
            x < self.width && y < self.height,
            "pixel ({x}, {y}) out of bounds"
        );
        self.pixels[y * self.width + x] = color;
    }

    /// Paints an axis-aligned rectangle, clipped to the image.
    pub fn fill_rect(&mut self, x0: usize, y0: usize, w: usize, h: usize, color: Rgb) {
        for y in y0..(y0 + h).min(self.height) {
            for x in x0..(x0 + w).min(self.width) {
                self.pixels[y * self.width + x] = color;
            }
        }
    }
}

/// Row-major binary mask; every value is 0 or 255.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    values: Vec<u8>,
}

impl BinaryMask {
    pub const FOREGROUND: u8 = 255;
    pub const BACKGROUND: u8 = 0;

    pub fn new(width: usize, height: usize, values: Vec<u8>) -> Result<Self, ImageError> {
        check_dims(width, height, values.len())?;
        if let Some((index, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, &v)| v != Self::FOREGROUND && v != Self::BACKGROUND)
        {
            return Err(ImageError::NonBinaryValue { index, value });
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    /// Mask built from a per-pixel foreground predicate.
    pub fn from_fn(
        width: usize,
        height: usize,
        mut foreground: impl FnMut(usize, usize) -> bool,
    ) -> Result<Self, ImageError> {
        check_dims(width, height, width.saturating_mul(height))?;
        let mut values = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                values.push(if foreground(x, y) {
                    Self::FOREGROUND
                } else {
                    Self::BACKGROUND
                });
            }
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub(crate) fn from_raw_unchecked(width: usize, height: usize, values: Vec<u8>) -> Self {
        debug_assert_eq!(values.len(), width * height);
        Self {
            width,
            height,
            values,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[u8] {
        &self.values
    }

    #[inline]
    pub fn is_foreground(&self, x: usize, y: usize) -> bool {
        self.values[y * self.width + x] == Self::FOREGROUND
    }

    pub fn foreground_count(&self) -> usize {
        self.values
            .iter()
            .filter(|&&v| v == Self::FOREGROUND)
            .count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_zero_dimensions() {
        assert_eq!(
            RgbImage::new(0, 3, vec![]),
            Err(ImageError::InvalidDimensions {
                width: 0,
                height: 3
            })
        );
    }

    #[test]
    fn rejects_wrong_pixel_count() {
        assert!(matches!(
            RgbImage::new(2, 2, vec![Rgb::default(); 3]),
            Err(ImageError::SizeMismatch {
                expected: 4,
                found: 3,
                ..
            })
        ));
    }

    #[test]
    fn mask_rejects_non_binary_values() {
        assert_eq!(
            BinaryMask::new(2, 1, vec![0, 7]),
            Err(ImageError::NonBinaryValue { index: 1, value: 7 })
        );
    }

    #[test]
    fn get_is_row_major() {
        let img = RgbImage::new(
            2,
            2,
            vec![
                Rgb::new(1, 0, 0),
                Rgb::new(2, 0, 0),
                Rgb::new(3, 0, 0),
                Rgb::new(4, 0, 0),
            ],
        )
        .unwrap();
        assert_eq!(img.get(1, 0).r, 2);
        assert_eq!(img.get(0, 1).r, 3);
    }
}
