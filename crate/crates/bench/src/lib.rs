//! Shared fixtures for benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tealeaf_core::{BinaryMask, Rgb, RgbImage, SampleSet, StemSpec};

fn jitter(rng: &mut ChaCha8Rng, c: Rgb, k: i16) -> Rgb {
    let f = |v: u8, rng: &mut ChaCha8Rng| (v as i16 + rng.random_range(-k..=k)).clamp(0, 255) as u8;
    Rgb::new(f(c.r, rng), f(c.g, rng), f(c.b, rng))
}

/// Leaf and background samples around the usual tender-leaf and soil colors.
pub fn samples(seed: u64, per_class: usize, spread: i16) -> SampleSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let leaf = (0..per_class)
        .map(|_| jitter(&mut rng, Rgb::new(200, 180, 40), spread))
        .collect();
    let background = (0..per_class)
        .map(|_| jitter(&mut rng, Rgb::new(60, 80, 50), spread))
        .collect();
    SampleSet::new(leaf, background)
}

/// Background field with scattered leaf-colored rectangles.
pub fn field_image(seed: u64, width: usize, height: usize, leaves: usize) -> RgbImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut img = RgbImage::filled(width, height, Rgb::new(60, 80, 50)).expect("non-empty image");
    for _ in 0..leaves {
        let w = rng.random_range(6..30).min(width);
        let h = rng.random_range(6..30).min(height);
        let x0 = rng.random_range(0..=width - w);
        let y0 = rng.random_range(0..=height - h);
        let c = jitter(&mut rng, Rgb::new(200, 180, 40), 10);
        img.fill_rect(x0, y0, w, h, c);
    }
    img
}

/// Uniform random mask with the given foreground density.
pub fn random_mask(seed: u64, width: usize, height: usize, density: f64) -> BinaryMask {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..width * height)
        .map(|_| if rng.random_bool(density) { 255 } else { 0 })
        .collect();
    BinaryMask::new(width, height, values).expect("sized mask")
}

/// `n` nominal stems spread over 1-3 mm.
pub fn stems(n: usize) -> Vec<StemSpec> {
    (0..n)
        .map(|i| StemSpec::nominal(1.0 + 2.0 * i as f64 / (n.max(2) - 1) as f64))
        .collect()
}
