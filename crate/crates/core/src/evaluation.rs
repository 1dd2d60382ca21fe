//! Region extraction and identification metrics.
//!
//! Foreground regions are 8-connected components of a mask. A region counts
//! as an identified leaf when its centroid falls inside a ground-truth box
//! that no earlier region has claimed; every other region is a
//! misidentification. With `n` identified, `m` misidentified and `N` truth
//! boxes:
//!
//! ```text
//! R_i = 100 * n / N        R_m = 100 * m / N
//! ```

use std::fmt::Write as _;

use thiserror::Error;

use crate::fitting::fixed;
use crate::imaging::BinaryMask;

/// Axis-aligned pixel rectangle covering columns `x0..x0 + width` and rows
/// `y0..y0 + height`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rect {
    pub x0: usize,
    pub y0: usize,
    pub width: usize,
    pub height: usize,
}

impl Rect {
    pub fn new(x0: usize, y0: usize, width: usize, height: usize) -> Self {
        Self {
            x0,
            y0,
            width,
            height,
        }
    }

    /// Containment of a continuous point. Pixel `(x, y)` spans
    /// `[x, x + 1) x [y, y + 1)`.
    pub fn contains(&self, (cx, cy): (f64, f64)) -> bool {
        cx >= self.x0 as f64
            && cx < (self.x0 + self.width) as f64
            && cy >= self.y0 as f64
            && cy < (self.y0 + self.height) as f64
    }
}

/// One connected foreground component.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub pixel_count: usize,
    pub bounding_box: Rect,
    /// Mean of pixel centers, i.e. `(x + 0.5, y + 0.5)` averaged.
    pub centroid: (f64, f64),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GroundTruth {
    pub leaf_boxes: Vec<Rect>,
}

impl GroundTruth {
    pub fn new(leaf_boxes: Vec<Rect>) -> Self {
        Self { leaf_boxes }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub n_identified: usize,
    pub m_misidentified: usize,
    pub n_actual: usize,
    /// Identification accuracy, percent.
    pub ri: f64,
    /// Misidentification rate, percent.
    pub rm: f64,
}

impl EvalReport {
    pub fn from_counts(n_identified: usize, m_misidentified: usize, n_actual: usize) -> Self {
        let pct = |k: usize| 100.0 * k as f64 / n_actual as f64;
        Self {
            n_identified,
            m_misidentified,
            n_actual,
            ri: pct(n_identified),
            rm: pct(m_misidentified),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("ground truth has no leaf boxes")]
    EmptyTruth,
    #[error("truth box {index} ({rect:?}) extends outside the {width}x{height} mask")]
    TruthOutOfBounds {
        index: usize,
        rect: Rect,
        width: usize,
        height: usize,
    },
    #[error("no reports to aggregate")]
    NoReports,
    #[error("min_area must be at least 1")]
    ZeroMinArea,
    #[error("truth line {line}: {message}")]
    TruthParse { line: usize, message: String },
}

/// Parses a truth file of `<image_id> <x0> <y0> <width> <height>` lines
/// (`#` starts a comment). Images come back in order of first appearance.
pub fn parse_truth(text: &str) -> Result<Vec<(String, GroundTruth)>, EvalError> {
    let mut out: Vec<(String, GroundTruth)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let err = |message: String| EvalError::TruthParse { line, message };
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if tokens.len() != 5 {
            return Err(err(format!("expected 5 fields, found {}", tokens.len())));
        }
        let mut nums = [0usize; 4];
        for (slot, tok) in nums.iter_mut().zip(&tokens[1..]) {
            *slot = tok
                .parse()
                .map_err(|_| err(format!("bad coordinate {tok:?}")))?;
        }
        let [x0, y0, w, h] = nums;
        if w == 0 || h == 0 {
            return Err(err("box must have positive width and height".into()));
        }
        let rect = Rect::new(x0, y0, w, h);
        match out.iter_mut().find(|(id, _)| id == tokens[0]) {
            Some((_, truth)) => truth.leaf_boxes.push(rect),
            None => out.push((tokens[0].to_string(), GroundTruth::new(vec![rect]))),
        }
    }
    Ok(out)
}

struct DisjointSet {
    parent: Vec<u32>,
}

impl DisjointSet {
    fn new() -> Self {
        Self { parent: Vec::new() }
    }

    fn make(&mut self) -> u32 {
        let id = self.parent.len() as u32;
        self.parent.push(id);
        id
    }

    fn find(&mut self, mut a: u32) -> u32 {
        while self.parent[a as usize] != a {
            let grand = self.parent[self.parent[a as usize] as usize];
            self.parent[a as usize] = grand;
            a = grand;
        }
        a
    }

    /// Keeps the smaller root so labels stay in raster order of first pixel.
    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi as usize] = lo;
        }
    }
}

#[derive(Clone, Copy)]
struct Accum {
    count: usize,
    min_x: usize,
    min_y: usize,
    max_x: usize,
    max_y: usize,
    sum_x: u64,
    sum_y: u64,
}

/// 8-connected foreground components with at least `min_area` pixels,
/// ordered by bounding-box top-left `(y0, x0)` and then by first pixel in
/// raster order.
pub fn connected_components(mask: &BinaryMask, min_area: usize) -> Vec<Region> {
    let (w, h) = (mask.width(), mask.height());
    const NONE: u32 = u32::MAX;
    let mut labels = vec![NONE; w * h];
    let mut sets = DisjointSet::new();

    // First pass: provisional labels from the already-visited neighbors
    // (W, NW, N, NE).
    for y in 0..h {
        for x in 0..w {
            if !mask.is_foreground(x, y) {
                continue;
            }
            let mut neighbors = [NONE; 4];
            if x > 0 {
                neighbors[0] = labels[y * w + x - 1];
            }
            if y > 0 {
                let up = (y - 1) * w;
                if x > 0 {
                    neighbors[1] = labels[up + x - 1];
                }
                neighbors[2] = labels[up + x];
                if x + 1 < w {
                    neighbors[3] = labels[up + x + 1];
                }
            }
            let mut label = NONE;
            for &n in neighbors.iter().filter(|&&n| n != NONE) {
                if label == NONE {
                    label = n;
                } else {
                    sets.union(label, n);
                }
            }
            labels[y * w + x] = if label == NONE { sets.make() } else { label };
        }
    }

    // Second pass: resolve to roots and accumulate statistics per root.
    let mut stats: Vec<Option<Accum>> = vec![None; sets.parent.len()];
    for y in 0..h {
        for x in 0..w {
            let l = labels[y * w + x];
            if l == NONE {
                continue;
            }
            let root = sets.find(l) as usize;
            let a = stats[root].get_or_insert(Accum {
                count: 0,
                min_x: x,
                min_y: y,
                max_x: x,
                max_y: y,
                sum_x: 0,
                sum_y: 0,
            });
            a.count += 1;
            a.min_x = a.min_x.min(x);
            a.max_x = a.max_x.max(x);
            a.min_y = a.min_y.min(y);
            a.max_y = a.max_y.max(y);
            a.sum_x += x as u64;
            a.sum_y += y as u64;
        }
    }

    // Roots are visited in raster order of their first pixel; the stable
    // sort keeps that as the tie-breaker.
    let mut regions: Vec<Region> = stats
        .into_iter()
        .flatten()
        .filter(|a| a.count >= min_area)
        .map(|a| Region {
            pixel_count: a.count,
            bounding_box: Rect::new(
                a.min_x,
                a.min_y,
                a.max_x - a.min_x + 1,
                a.max_y - a.min_y + 1,
            ),
            centroid: (
                a.sum_x as f64 / a.count as f64 + 0.5,
                a.sum_y as f64 / a.count as f64 + 0.5,
            ),
        })
        .collect();
    regions.sort_by_key(|r| (r.bounding_box.y0, r.bounding_box.x0));
    regions
}

/// Greedy one-to-one matching of regions to truth boxes. Returns `(n, m)`:
/// matched regions and unmatched regions.
pub fn match_regions(regions: &[Region], truth: &GroundTruth) -> (usize, usize) {
    let mut taken = vec![false; truth.leaf_boxes.len()];
    let mut n = 0;
    let mut m = 0;
    for region in regions {
        let hit = truth
            .leaf_boxes
            .iter()
            .enumerate()
            .position(|(i, b)| !taken[i] && b.contains(region.centroid));
        match hit {
            Some(i) => {
                taken[i] = true;
                n += 1;
            }
            None => m += 1,
        }
    }
    (n, m)
}

/// Extracts regions from `mask` and scores them against `truth`.
pub fn evaluate(
    mask: &BinaryMask,
    truth: &GroundTruth,
    min_area: usize,
) -> Result<EvalReport, EvalError> {
    if truth.leaf_boxes.is_empty() {
        return Err(EvalError::EmptyTruth);
    }
    if min_area == 0 {
        return Err(EvalError::ZeroMinArea);
    }
    for (index, rect) in truth.leaf_boxes.iter().enumerate() {
        if rect.x0 + rect.width > mask.width() || rect.y0 + rect.height > mask.height() {
            return Err(EvalError::TruthOutOfBounds {
                index,
                rect: *rect,
                width: mask.width(),
                height: mask.height(),
            });
        }
    }
    let regions = connected_components(mask, min_area);
    let (n, m) = match_regions(&regions, truth);
    Ok(EvalReport::from_counts(n, m, truth.leaf_boxes.len()))
}

/// Mean of `R_i` and `R_m` across reports; counts are summed.
pub fn aggregate_reports(reports: &[EvalReport]) -> Result<EvalReport, EvalError> {
    if reports.is_empty() {
        return Err(EvalError::NoReports);
    }
    let k = reports.len() as f64;
    Ok(EvalReport {
        n_identified: reports.iter().map(|r| r.n_identified).sum(),
        m_misidentified: reports.iter().map(|r| r.m_misidentified).sum(),
        n_actual: reports.iter().map(|r| r.n_actual).sum(),
        ri: reports.iter().map(|r| r.ri).sum::<f64>() / k,
        rm: reports.iter().map(|r| r.rm).sum::<f64>() / k,
    })
}

/// Per-image rows plus an average row, percentages to two decimals.
pub fn format_eval_report(rows: &[(String, EvalReport)], min_area: usize, seed: u64) -> String {
    let w = rows.iter().map(|(l, _)| l.len()).max().unwrap_or(0).max(7);
    let mut out = String::new();
    let _ = writeln!(out, "# tender leaf identification");
    let _ = writeln!(out, "# seed {seed}");
    let _ = writeln!(out, "# min_area {min_area}, 8-connected regions");
    let _ = writeln!(
        out,
        "{:<w$} {:>6} {:>6} {:>6} {:>8} {:>8}",
        "image", "n", "m", "N", "R_i", "R_m"
    );
    for (label, r) in rows {
        let _ = writeln!(
            out,
            "{:<w$} {:>6} {:>6} {:>6} {:>7}% {:>7}%",
            label,
            r.n_identified,
            r.m_misidentified,
            r.n_actual,
            fixed(r.ri, 2),
            fixed(r.rm, 2)
        );
    }
    let reports: Vec<EvalReport> = rows.iter().map(|(_, r)| r.clone()).collect();
    if let Ok(avg) = aggregate_reports(&reports) {
        let _ = writeln!(
            out,
            "{:<w$} {:>6} {:>6} {:>6} {:>7}% {:>7}%",
            "average",
            avg.n_identified,
            avg.m_misidentified,
            avg.n_actual,
            fixed(avg.ri, 2),
            fixed(avg.rm, 2)
        );
    }
    out
}
