//! Procedural offline backend.
//!
//! The image for a spec is fully determined by the prompt text, seed and
//! size:
//!
//! 1. `key = fnv1a64(prompt_utf8 ++ seed_le_bytes)`.
//! 2. Draws come from the counter-based SplitMix64 stream of `key`:
//!    counters 0 and 1 give the two gradient colors (low three bytes as
//!    R, G, B), counters 2 and 3 give the gradient direction in `[-1, 1]^2`.
//! 3. The gradient parameter is the pixel centre projected on the direction,
//!    rescaled to `[0, 1]` and smoothstepped.
//! 4. Value noise on an 8-pixel lattice (lattice point `(gx, gy)` uses
//!    counter `16 + (gy << 32 | gx)`), bilinearly interpolated, adds up to
//!    ±12 to every channel.
//!
//! Only IEEE-exact operations are used, so output is identical everywhere.

use super::{check_weight, BackendError, ImageBackend, ImageFrame};
use crate::hash::{counter_u64, counter_unit, fnv1a64, fnv1a64_from};
use crate::timeline::ImageSpec;

const NOISE_CELL: u32 = 8;
const NOISE_AMPLITUDE: f64 = 12.0;

pub fn mock_key(prompt: &str, seed: u64) -> u64 {
    fnv1a64_from(fnv1a64(prompt.as_bytes()), &seed.to_le_bytes())
}

fn color(word: u64) -> [f64; 3] {
    [(word & 0xff) as f64, ((word >> 8) & 0xff) as f64, ((word >> 16) & 0xff) as f64]
}

fn lattice(key: u64, gx: u32, gy: u32) -> f64 {
    counter_unit(key, 16 + ((gy as u64) << 32 | gx as u64)) * 2.0 - 1.0
}

pub fn mock_image(spec: &ImageSpec) -> Result<ImageFrame, BackendError> {
    let seed = spec.seed.ok_or(BackendError::MissingSeed)?;
    let (w, h) = (spec.width, spec.height);
    let key = mock_key(&spec.prompt, seed);
    let a = color(counter_u64(key, 0));
    let b = color(counter_u64(key, 1));
    let mut dx = counter_unit(key, 2) * 2.0 - 1.0;
    let mut dy = counter_unit(key, 3) * 2.0 - 1.0;
    let len = (dx * dx + dy * dy).sqrt();
    if len < 1e-6 {
        (dx, dy) = (1.0, 0.0);
    } else {
        dx /= len;
        dy /= len;
    }
    let extent = 0.5 * (dx.abs() + dy.abs());

    let mut pixels = Vec::with_capacity(w as usize * h as usize * 3);
    for y in 0..h {
        let v = (y as f64 + 0.5) / h as f64 - 0.5;
        let gy = y / NOISE_CELL;
        let fy = (y % NOISE_CELL) as f64 / NOISE_CELL as f64;
        for x in 0..w {
            let u = (x as f64 + 0.5) / w as f64 - 0.5;
            let s = ((u * dx + v * dy) / extent * 0.5 + 0.5).clamp(0.0, 1.0);
            let s = s * s * (3.0 - 2.0 * s);

            let gx = x / NOISE_CELL;
            let fx = (x % NOISE_CELL) as f64 / NOISE_CELL as f64;
            let top = lattice(key, gx, gy) * (1.0 - fx) + lattice(key, gx + 1, gy) * fx;
            let bottom = lattice(key, gx, gy + 1) * (1.0 - fx) + lattice(key, gx + 1, gy + 1) * fx;
            let noise = NOISE_AMPLITUDE * (top * (1.0 - fy) + bottom * fy);

            for c in 0..3 {
                let value = a[c] * (1.0 - s) + b[c] * s + noise;
                pixels.push(value.round().clamp(0.0, 255.0) as u8);
            }
        }
    }
    ImageFrame::new(w, h, pixels)
}

/// Per-channel `round((1 - t) * a + t * b)`.
pub fn crossfade(a: &ImageFrame, b: &ImageFrame, t: f64) -> Result<ImageFrame, BackendError> {
    check_weight(t)?;
    if (a.width(), a.height()) != (b.width(), b.height()) {
        return Err(BackendError::SizeMismatch);
    }
    let pixels = a
        .pixels()
        .iter()
        .zip(b.pixels())
        .map(|(&pa, &pb)| ((1.0 - t) * pa as f64 + t * pb as f64).round().clamp(0.0, 255.0) as u8)
        .collect();
    ImageFrame::new(a.width(), a.height(), pixels)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct MockBackend;

impl ImageBackend for MockBackend {
    fn generate(&self, spec: &ImageSpec) -> Result<ImageFrame, BackendError> {
        mock_image(spec)
    }

    fn interpolate(&self, start: &ImageSpec, end: &ImageSpec, t: f64) -> Result<ImageFrame, BackendError> {
        check_weight(t)?;
        let a = mock_image(start)?;
        let b = mock_image(end)?;
        crossfade(&a, &b, t)
    }
}
