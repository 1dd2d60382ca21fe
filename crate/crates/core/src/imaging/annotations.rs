//! Sample boxes and labeled pixel extraction.
//!
//! Annotation files are line oriented, one box per line:
//!
//! ```text
//! # image_id  label       x0  y0  w   h
//! img01       leaf        12  40  10  10
//! img01       background  80  5   10  10
//! ```
//!
//! Blank lines and `#` comments (whole-line or trailing) are ignored.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use super::{Rgb, RgbImage};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Leaf,
    Background,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Leaf => "leaf",
            Label::Background => "background",
        })
    }
}

impl FromStr for Label {
    type Err = AnnotationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "leaf" => Ok(Label::Leaf),
            "background" => Ok(Label::Background),
            other => Err(AnnotationError::Parse {
                line: 0,
                message: format!("unknown label {other:?}"),
            }),
        }
    }
}

/// Rectangular sampling region on one image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleBox {
    pub image_id: String,
    pub label: Label,
    pub x0: usize,
    pub y0: usize,
    pub width: usize,
    pub height: usize,
}

impl SampleBox {
    pub const DEFAULT_SIZE: usize = 10;

    /// A default-sized (10x10) box.
    pub fn new(image_id: impl Into<String>, label: Label, x0: usize, y0: usize) -> Self {
        Self {
            image_id: image_id.into(),
            label,
            x0,
            y0,
            width: Self::DEFAULT_SIZE,
            height: Self::DEFAULT_SIZE,
        }
    }

    pub fn with_size(mut self, width: usize, height: usize) -> Self {
        self.width = width;
        self.height = height;
        self
    }

    pub fn area(&self) -> usize {
        self.width * self.height
    }

    fn fits(&self, img: &RgbImage) -> bool {
        self.width >= 1
            && self.height >= 1
            && self
                .x0
                .checked_add(self.width)
                .is_some_and(|r| r <= img.width())
            && self
                .y0
                .checked_add(self.height)
                .is_some_and(|b| b <= img.height())
    }
}

impl fmt::Display for SampleBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {} {} {} {}",
            self.image_id, self.label, self.x0, self.y0, self.width, self.height
        )
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AnnotationError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("box `{0}` references an unknown image")]
    UnknownImage(String),
    #[error("box `{0}` does not lie inside its image")]
    OutOfBounds(String),
}

/// Parses an annotation file into boxes, preserving file order.
pub fn parse_annotations(text: &str) -> Result<Vec<SampleBox>, AnnotationError> {
    let mut boxes = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let err = |message: String| AnnotationError::Parse { line, message };
        let tokens: Vec<&str> = content.split_whitespace().collect();
        let [image_id, label, x0, y0, w, h] = tokens[..] else {
            return Err(err(format!(
                "expected `<image_id> <leaf|background> <x0> <y0> <w> <h>`, found {} fields",
                tokens.len()
            )));
        };
        let label: Label = label.parse().map_err(|e| match e {
            AnnotationError::Parse { message, .. } => err(message),
            other => other,
        })?;
        let num = |name: &str, tok: &str| {
            tok.parse::<usize>()
                .map_err(|_| err(format!("{name} is not a non-negative integer: {tok:?}")))
        };
        let sample = SampleBox {
            image_id: image_id.to_string(),
            label,
            x0: num("x0", x0)?,
            y0: num("y0", y0)?,
            width: num("w", w)?,
            height: num("h", h)?,
        };
        if sample.width == 0 || sample.height == 0 {
            return Err(err("box width and height must be at least 1".into()));
        }
        boxes.push(sample);
    }
    Ok(boxes)
}

/// Leaf and background pixel populations used by the fitter.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SampleSet {
    pub leaf: Vec<Rgb>,
    pub background: Vec<Rgb>,
}

impl SampleSet {
    pub fn new(leaf: Vec<Rgb>, background: Vec<Rgb>) -> Self {
        Self { leaf, background }
    }

    /// Number of leaf pixels (`N`).
    pub fn leaf_total(&self) -> usize {
        self.leaf.len()
    }

    /// Number of background pixels (`M`).
    pub fn background_total(&self) -> usize {
        self.background.len()
    }

    pub fn is_fittable(&self) -> bool {
        !self.leaf.is_empty() && !self.background.is_empty()
    }
}

/// Collects the pixels under every box, boxes in input order, each box
/// scanned top-to-bottom then left-to-right. Overlapping boxes contribute
/// their shared pixels once per box.
pub fn extract_samples(
    images: &HashMap<String, RgbImage>,
    boxes: &[SampleBox],
) -> Result<SampleSet, AnnotationError> {
    let mut set = SampleSet::default();
    for b in boxes {
        let img = images
            .get(&b.image_id)
            .ok_or_else(|| AnnotationError::UnknownImage(b.to_string()))?;
        if !b.fits(img) {
            return Err(AnnotationError::OutOfBounds(b.to_string()));
        }
        let target = match b.label {
            Label::Leaf => &mut set.leaf,
            Label::Background => &mut set.background,
        };
        target.reserve(b.area());
        for y in b.y0..b.y0 + b.height {
            let row = &img.pixels()[y * img.width()..(y + 1) * img.width()];
            target.extend_from_slice(&row[b.x0..b.x0 + b.width]);
        }
    }
    Ok(set)
}
