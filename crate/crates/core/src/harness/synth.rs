//! Seeded synthetic mask corpus: Fourier blobs, rotated rectangles and rings.

use std::f64::consts::TAU;

use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geom::Point;
use crate::mask::{rasterize_polygon, BinaryMask, Polygon};
use crate::rng::{unit_f64, SamplerSeed};

/// Shape family of the `i`-th corpus entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShapeKind {
    Blob,
    Rectangle,
    Ring,
}

impl ShapeKind {
    pub fn of_index(i: usize) -> Self {
        match i % 3 {
            0 => ShapeKind::Blob,
            1 => ShapeKind::Rectangle,
            _ => ShapeKind::Ring,
        }
    }
}

const CONTOUR_VERTICES: usize = 96;
const MIN_AREA: usize = 12;

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * unit_f64(rng)
}

fn radial_polygon(cx: f64, cy: f64, radius: impl Fn(f64) -> f64) -> Result<Polygon> {
    Polygon::new(
        (0..CONTOUR_VERTICES)
            .map(|i| {
                let t = TAU * i as f64 / CONTOUR_VERTICES as f64;
                let r = radius(t);
                Point::new(cx + r * t.cos(), cy + r * t.sin())
            })
            .collect(),
    )
}

fn blob(rng: &mut ChaCha8Rng, size: usize) -> Result<BinaryMask> {
    let s = size as f64;
    let base = uniform(rng, 0.06, 0.45) * s;
    let cx = s / 2.0 + uniform(rng, -0.5, 0.5) * (s / 2.0 - base).max(0.0);
    let cy = s / 2.0 + uniform(rng, -0.5, 0.5) * (s / 2.0 - base).max(0.0);
    // harmonics 2..=5 with total relative amplitude at most 0.45
    let mut harmonics = Vec::with_capacity(4);
    let mut budget: f64 = 0.45;
    for k in 2..=5 {
        let a = uniform(rng, 0.0, budget.min(0.25));
        budget -= a;
        harmonics.push((k as f64, a, uniform(rng, 0.0, TAU)));
    }
    let poly = radial_polygon(cx, cy, |t| {
        base * (1.0 + harmonics.iter().map(|&(k, a, ph)| a * (k * t + ph).cos()).sum::<f64>())
    })?;
    rasterize_polygon(&poly, size, size)
}

fn rectangle(rng: &mut ChaCha8Rng, size: usize) -> Result<BinaryMask> {
    let s = size as f64;
    let w = uniform(rng, 0.06, 0.7) * s;
    let h = uniform(rng, 0.06, 0.7) * s;
    let angle = uniform(rng, 0.0, TAU / 4.0);
    let (sin, cos) = angle.sin_cos();
    // keep the rotated box inside the grid
    let ext_x = (w * cos.abs() + h * sin.abs()) / 2.0;
    let ext_y = (w * sin.abs() + h * cos.abs()) / 2.0;
    let cx = uniform(rng, ext_x.min(s / 2.0), (s - ext_x).max(s / 2.0));
    let cy = uniform(rng, ext_y.min(s / 2.0), (s - ext_y).max(s / 2.0));
    let corners = [(-w, -h), (w, -h), (w, h), (-w, h)]
        .into_iter()
        .map(|(dx, dy)| Point::new(cx + (dx * cos - dy * sin) / 2.0, cy + (dx * sin + dy * cos) / 2.0))
        .collect();
    rasterize_polygon(&Polygon::new(corners)?, size, size)
}

fn ring(rng: &mut ChaCha8Rng, size: usize) -> Result<BinaryMask> {
    let s = size as f64;
    let outer = uniform(rng, 0.2, 0.45) * s;
    let inner = outer * uniform(rng, 0.35, 0.6);
    let slack = (s / 2.0 - outer).max(0.0);
    let cx = s / 2.0 + uniform(rng, -slack, slack);
    let cy = s / 2.0 + uniform(rng, -slack, slack);
    let wobble = uniform(rng, 0.0, 0.08);
    let phase = uniform(rng, 0.0, TAU);
    let disk = rasterize_polygon(&radial_polygon(cx, cy, |t| outer * (1.0 + wobble * (3.0 * t + phase).cos()))?, size, size)?;
    let hole = rasterize_polygon(&radial_polygon(cx, cy, |_| inner)?, size, size)?;
    BinaryMask::from_fn(size, size, |r, c| disk.get(r, c) && !hole.get(r, c))
}

/// Deterministic corpus of `count` masks on a `size x size` grid. Entry `i`
/// depends only on `(seed, i, size)`; families cycle blob, rectangle, ring.
pub fn synthetic_corpus(seed: SamplerSeed, count: usize, size: usize) -> Result<Vec<BinaryMask>> {
    if count == 0 {
        return Err(Error::InvalidCount("corpus count must be >= 1".into()));
    }
    if size < 8 {
        return Err(Error::Dimension(format!("synthetic grid must be at least 8x8, got {size}")));
    }
    (0..count)
        .map(|i| {
            let mut rng = seed.derive(i as u64).rng(0);
            loop {
                let mask = match ShapeKind::of_index(i) {
                    ShapeKind::Blob => blob(&mut rng, size)?,
                    ShapeKind::Rectangle => rectangle(&mut rng, size)?,
                    ShapeKind::Ring => ring(&mut rng, size)?,
                };
                if mask.area() >= MIN_AREA {
                    return Ok(mask);
                }
            }
        })
        .collect()
}
