//! Point set to mask decoders.

mod delaunay;
mod hull;
mod interpolate;

pub use delaunay::{delaunay, Triangulation};
pub use hull::concave_hull_polygon;
pub use interpolate::{interpolate_scores, ScoreMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field_ops::lerp;
use crate::geom::Point;
use crate::mask::{rasterize_polygon_closed, BinaryMask, BoundingBox};
use crate::sampling::{lattice_positions, DensePointSet, GridSpec};

pub const DEFAULT_THRESHOLD: f64 = 0.5;
pub const DEFAULT_HULL_K: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecodeConfig {
    /// Foreground where score >= threshold.
    pub threshold: f64,
    /// Initial neighbor count for the concave hull.
    pub hull_k: usize,
}

impl Default for DecodeConfig {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_THRESHOLD,
            hull_k: DEFAULT_HULL_K,
        }
    }
}

impl DecodeConfig {
    pub fn new(threshold: f64, hull_k: usize) -> Result<Self> {
        if !(threshold > 0.0 && threshold < 1.0) {
            return Err(Error::Config(format!("threshold must lie in (0, 1), got {threshold}")));
        }
        if hull_k < 3 {
            return Err(Error::Config(format!("hull_k must be >= 3, got {hull_k}")));
        }
        Ok(Self { threshold, hull_k })
    }
}

/// Delaunay triangulation, barycentric score interpolation, threshold.
pub fn decode_triangulation(pts: &DensePointSet, height: usize, width: usize, cfg: &DecodeConfig) -> Result<BinaryMask> {
    BinaryMask::new(height, width)?;
    let tri = delaunay(pts)?;
    Ok(interpolate_scores(&tri, height, width).binarize(cfg.threshold))
}

/// Concave hull of the points scoring at least the threshold, rasterized with
/// edge pixels included.
pub fn concave_hull(pts: &DensePointSet, cfg: &DecodeConfig, height: usize, width: usize) -> Result<BinaryMask> {
    let fg: Vec<Point> = pts
        .points()
        .iter()
        .filter(|p| p.score >= cfg.threshold)
        .map(|p| p.pos())
        .collect();
    if fg.len() < 3 {
        return Err(Error::InsufficientPoints(fg.len()));
    }
    let poly = concave_hull_polygon(&fg, cfg.hull_k)?;
    rasterize_polygon_closed(&poly, height, width)
}

/// Bilinear upsampling of the lattice scores over the box, then threshold.
/// Pixels whose centers fall outside the box are background.
pub fn decode_grid(
    pts: &DensePointSet,
    spec: &GridSpec,
    bbox: &BoundingBox,
    height: usize,
    width: usize,
    cfg: &DecodeConfig,
) -> Result<BinaryMask> {
    let s = spec.side();
    if pts.len() != spec.n {
        return Err(Error::Layout(format!("expected {} lattice points, got {}", spec.n, pts.len())));
    }
    for (i, (p, q)) in pts.positions().zip(lattice_positions(bbox, spec)).enumerate() {
        if (p.x - q.x).abs() > 1e-9 || (p.y - q.y).abs() > 1e-9 {
            return Err(Error::Layout(format!(
                "point {i} at ({}, {}) but lattice expects ({}, {})",
                p.x, p.y, q.x, q.y
            )));
        }
    }
    let scores = pts.scores();
    let last = (s - 1) as f64;
    let sample = |u: f64, v: f64| -> f64 {
        let u = u.clamp(0.0, last);
        let v = v.clamp(0.0, last);
        let (c0, r0) = (u.floor() as usize, v.floor() as usize);
        let (c1, r1) = ((c0 + 1).min(s - 1), (r0 + 1).min(s - 1));
        let (fu, fv) = (u - c0 as f64, v - r0 as f64);
        let top = lerp(scores[r0 * s + c0], scores[r0 * s + c1], fu);
        let bottom = lerp(scores[r1 * s + c0], scores[r1 * s + c1], fu);
        lerp(top, bottom, fv)
    };
    let mut mask = BinaryMask::new(height, width)?;
    for r in 0..height {
        let y = r as f64 + 0.5;
        if y < bbox.y_min || y > bbox.y_max {
            continue;
        }
        let v = if spec.beta > 0.0 { (y - bbox.y_min) / spec.beta * last } else { 0.0 };
        for c in 0..width {
            let x = c as f64 + 0.5;
            if x < bbox.x_min || x > bbox.x_max {
                continue;
            }
            let u = if spec.alpha > 0.0 { (x - bbox.x_min) / spec.alpha * last } else { 0.0 };
            if sample(u, v) >= cfg.threshold {
                mask.set(r, c, true);
            }
        }
    }
    Ok(mask)
}
