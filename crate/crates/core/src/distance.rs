//! Normalized boundary distance and the band-limited sampling probability.
//!
//! The distance of pixel `p` is `min_e |p - e|` over the boundary set, divided
//! by `sqrt(w * h)` where `w`, `h` are the x and y extents of the boundary set,
//! each clamped below at one pixel. Sampling weight is the step function
//! `g(d) = 1` for `d <= delta`, else 0.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::BoundaryPointSet;

/// Default band threshold on the normalized distance.
pub const DEFAULT_DELTA: f64 = 0.04;

/// Per-pixel normalized distance to the nearest boundary point, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceField {
    pub height: usize,
    pub width: usize,
    /// Denominator that was applied to the raw Euclidean distances.
    pub scale: f64,
    pub values: Vec<f64>,
}

impl DistanceField {
    #[inline]
    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }
}

/// Per-pixel sampling probability, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbField {
    pub height: usize,
    pub width: usize,
    /// Band threshold the field was built with.
    pub delta: f64,
    pub values: Vec<f64>,
}

impl ProbField {
    #[inline]
    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }

    /// Row-major indices with non-zero probability.
    pub fn support(&self) -> Vec<usize> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(i, _)| i)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingBandConfig {
    pub delta: f64,
}

impl Default for SamplingBandConfig {
    fn default() -> Self {
        Self { delta: DEFAULT_DELTA }
    }
}

impl SamplingBandConfig {
    /// `delta` may be zero (band = boundary set) or `+inf` (whole grid).
    pub fn new(delta: f64) -> Result<Self> {
        if delta.is_nan() || delta < 0.0 {
            return Err(Error::Config(format!("band delta must be >= 0, got {delta}")));
        }
        Ok(Self { delta })
    }
}

/// `sqrt(max(w, 1) * max(h, 1))` over the boundary set's coordinate extents.
pub fn normalization_scale(boundary: &BoundaryPointSet) -> Result<f64> {
    let first = boundary.points.first().ok_or(Error::EmptyBoundary)?;
    let (mut x0, mut x1, mut y0, mut y1) = (first.x, first.x, first.y, first.y);
    for p in &boundary.points {
        x0 = x0.min(p.x);
        x1 = x1.max(p.x);
        y0 = y0.min(p.y);
        y1 = y1.max(p.y);
    }
    Ok(((x1 - x0).max(1.0) * (y1 - y0).max(1.0)).sqrt())
}

/// Exact squared distance transform of a 1-D sampled function: lower envelope
/// of parabolas rooted at the finite samples of `f`.
fn edt_1d(f: &[f64], out: &mut [f64], sites: &mut Vec<usize>, bounds: &mut Vec<f64>) {
    sites.clear();
    bounds.clear();
    for (q, &fq) in f.iter().enumerate() {
        if !fq.is_finite() {
            continue;
        }
        loop {
            match sites.last() {
                None => {
                    sites.push(q);
                    bounds.push(f64::NEG_INFINITY);
                    break;
                }
                Some(&v) => {
                    let qf = q as f64;
                    let vf = v as f64;
                    let s = ((fq + qf * qf) - (f[v] + vf * vf)) / (2.0 * (qf - vf));
                    if s <= *bounds.last().unwrap() {
                        sites.pop();
                        bounds.pop();
                    } else {
                        sites.push(q);
                        bounds.push(s);
                        break;
                    }
                }
            }
        }
    }
    if sites.is_empty() {
        out.fill(f64::INFINITY);
        return;
    }
    let mut k = 0;
    for (q, slot) in out.iter_mut().enumerate() {
        let qf = q as f64;
        while k + 1 < sites.len() && bounds[k + 1] < qf {
            k += 1;
        }
        let d = qf - sites[k] as f64;
        *slot = d * d + f[sites[k]];
    }
}

/// Squared Euclidean distance from every pixel center to the nearest seed
/// pixel, by two separable passes.
pub fn squared_distance_to_seeds(height: usize, width: usize, seeds: &[(usize, usize)]) -> Vec<f64> {
    let mut grid = vec![f64::INFINITY; height * width];
    for &(r, c) in seeds {
        grid[r * width + c] = 0.0;
    }
    let mut sites = Vec::new();
    let mut bounds = Vec::new();
    let mut col_in = vec![0.0; height];
    let mut col_out = vec![0.0; height];
    for c in 0..width {
        for r in 0..height {
            col_in[r] = grid[r * width + c];
        }
        edt_1d(&col_in, &mut col_out, &mut sites, &mut bounds);
        for r in 0..height {
            grid[r * width + c] = col_out[r];
        }
    }
    let mut row_out = vec![0.0; width];
    for r in 0..height {
        let row = &mut grid[r * width..(r + 1) * width];
        edt_1d(row, &mut row_out, &mut sites, &mut bounds);
        row.copy_from_slice(&row_out);
    }
    grid
}

/// Normalized distance from every pixel center to the boundary set.
///
/// Boundary points must be pixel centers inside the grid.
pub fn distance_map(boundary: &BoundaryPointSet, height: usize, width: usize) -> Result<DistanceField> {
    let scale = normalization_scale(boundary)?;
    let mut seeds = Vec::with_capacity(boundary.len());
    for p in &boundary.points {
        let (c, r) = (p.x.floor(), p.y.floor());
        if c < 0.0 || r < 0.0 || c as usize >= width || r as usize >= height {
            return Err(Error::OutOfBounds {
                x: p.x,
                y: p.y,
                width,
                height,
            });
        }
        seeds.push((r as usize, c as usize));
    }
    let values = squared_distance_to_seeds(height, width, &seeds)
        .into_iter()
        .map(|d2| d2.sqrt() / scale)
        .collect();
    Ok(DistanceField {
        height,
        width,
        scale,
        values,
    })
}

/// Uniform probability over the pixels whose distance is at most `delta`.
pub fn sampling_probability(d: &DistanceField, band: SamplingBandConfig) -> Result<ProbField> {
    let m = d.values.iter().filter(|&&v| v <= band.delta).count();
    if m == 0 {
        return Err(Error::EmptyBand { delta: band.delta });
    }
    let p = 1.0 / m as f64;
    Ok(ProbField {
        height: d.height,
        width: d.width,
        delta: band.delta,
        values: d.values.iter().map(|&v| if v <= band.delta { p } else { 0.0 }).collect(),
    })
}
