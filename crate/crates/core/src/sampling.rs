//! Mask and contour encoders producing attributed dense point sets.

use serde::{Deserialize, Serialize};

use crate::distance::{sampling_probability, DistanceField, ProbField, SamplingBandConfig};
use crate::error::{Error, Result};
use crate::geom::Point;
use crate::mask::{BinaryMask, BoundingBox, Polygon};
use crate::rng::{sample_without_replacement, SamplerSeed};

/// A point with a foreground score. Serializes as `[x, y, a]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct ScoredPoint {
    pub x: f64,
    pub y: f64,
    pub score: f64,
}

impl ScoredPoint {
    pub const fn new(x: f64, y: f64, score: f64) -> Self {
        Self { x, y, score }
    }

    pub fn pos(&self) -> Point {
        Point::new(self.x, self.y)
    }
}

impl From<[f64; 3]> for ScoredPoint {
    fn from(v: [f64; 3]) -> Self {
        Self::new(v[0], v[1], v[2])
    }
}

impl From<ScoredPoint> for [f64; 3] {
    fn from(p: ScoredPoint) -> Self {
        [p.x, p.y, p.score]
    }
}

#[derive(Serialize, Deserialize)]
struct RawPointSet {
    n: usize,
    points: Vec<ScoredPoint>,
}

/// Non-empty list of scored points with finite coordinates and scores in `[0, 1]`.
///
/// JSON form: `{"n": 3, "points": [[x, y, a], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPointSet", into = "RawPointSet")]
pub struct DensePointSet {
    points: Vec<ScoredPoint>,
}

impl TryFrom<RawPointSet> for DensePointSet {
    type Error = Error;

    fn try_from(raw: RawPointSet) -> Result<Self> {
        if raw.n != raw.points.len() {
            return Err(Error::Cardinality(format!(
                "declared n = {} but {} points present",
                raw.n,
                raw.points.len()
            )));
        }
        DensePointSet::new(raw.points)
    }
}

impl From<DensePointSet> for RawPointSet {
    fn from(s: DensePointSet) -> Self {
        RawPointSet {
            n: s.points.len(),
            points: s.points,
        }
    }
}

impl DensePointSet {
    pub fn new(points: Vec<ScoredPoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidCount("point set must hold at least one point".into()));
        }
        for p in &points {
            if !(p.x.is_finite() && p.y.is_finite()) {
                return Err(Error::Config(format!("non-finite point ({}, {})", p.x, p.y)));
            }
            if !(0.0..=1.0).contains(&p.score) {
                return Err(Error::Config(format!("score {} outside [0, 1]", p.score)));
            }
        }
        Ok(Self { points })
    }

    /// Points with every score set to 1.
    pub fn from_positions(positions: impl IntoIterator<Item = Point>) -> Result<Self> {
        Self::new(positions.into_iter().map(|p| ScoredPoint::new(p.x, p.y, 1.0)).collect())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[ScoredPoint] {
        &self.points
    }

    pub fn positions(&self) -> impl Iterator<Item = Point> + '_ {
        self.points.iter().map(ScoredPoint::pos)
    }

    pub fn scores(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.score).collect()
    }

    pub fn into_points(self) -> Vec<ScoredPoint> {
        self.points
    }
}

/// An `s x s` lattice with scales `alpha` (x) and `beta` (y).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub alpha: f64,
    pub beta: f64,
    pub n: usize,
}

impl GridSpec {
    pub fn new(alpha: f64, beta: f64, n: usize) -> Result<Self> {
        lattice_side(n)?;
        if !(alpha.is_finite() && beta.is_finite() && alpha >= 0.0 && beta >= 0.0) {
            return Err(Error::Config(format!("grid scales must be finite and >= 0, got ({alpha}, {beta})")));
        }
        Ok(Self { alpha, beta, n })
    }

    /// Scales fixed to the box extents.
    pub fn for_box(bbox: &BoundingBox, n: usize) -> Result<Self> {
        Self::new(bbox.width(), bbox.height(), n)
    }

    pub fn side(&self) -> usize {
        lattice_side(self.n).expect("validated at construction")
    }
}

/// `s` with `s * s == n` and `s >= 2`.
pub fn lattice_side(n: usize) -> Result<usize> {
    let s = (n as f64).sqrt().round() as usize;
    if s < 2 || s * s != n {
        return Err(Error::InvalidCount(format!("{n} is not a perfect square s^2 with s >= 2")));
    }
    Ok(s)
}

/// `n` points at arc-length positions `i * L / n` along the closed polygon,
/// starting at vertex 0, all scored 1.
pub fn sample_boundary(poly: &Polygon, n: usize) -> Result<DensePointSet> {
    if n == 0 {
        return Err(Error::InvalidCount("n must be >= 1".into()));
    }
    let perimeter = poly.perimeter();
    #[allow(clippy::neg_cmp_op_on_partial_ord)] // also rejects NaN
    if !(perimeter > 0.0) {
        return Err(Error::DegeneratePolygon("zero perimeter".into()));
    }
    let edges: Vec<(Point, Point, f64)> = poly.edges().map(|(a, b)| (a, b, a.dist(b))).collect();
    let mut out = Vec::with_capacity(n);
    let mut edge = 0usize;
    let mut start = 0.0f64;
    for i in 0..n {
        let t = i as f64 * perimeter / n as f64;
        while edge + 1 < edges.len() && start + edges[edge].2 <= t {
            start += edges[edge].2;
            edge += 1;
        }
        let (a, b, len) = edges[edge];
        let f = ((t - start) / len).clamp(0.0, 1.0);
        out.push(ScoredPoint::new(a.x + f * (b.x - a.x), a.y + f * (b.y - a.y), 1.0));
    }
    DensePointSet::new(out)
}

/// Lattice positions for `spec` anchored at the box's top-left corner,
/// row-major.
pub fn lattice_positions(bbox: &BoundingBox, spec: &GridSpec) -> Vec<Point> {
    let s = spec.side();
    let step = (s - 1) as f64;
    let mut out = Vec::with_capacity(s * s);
    for r in 0..s {
        for c in 0..s {
            out.push(Point::new(
                bbox.x_min + spec.alpha * c as f64 / step,
                bbox.y_min + spec.beta * r as f64 / step,
            ));
        }
    }
    out
}

/// `s x s` lattice spanning the box, scores initialized to 1.
pub fn sample_grid(bbox: &BoundingBox, spec: &GridSpec) -> Result<DensePointSet> {
    DensePointSet::from_positions(lattice_positions(bbox, spec))
}

/// Distance-transform sample with the effective band that was used.
#[derive(Debug, Clone, PartialEq)]
pub struct DtsSample {
    pub points: DensePointSet,
    /// Band threshold after any widening.
    pub delta: f64,
}

/// Draws `n` distinct pixel centers uniformly from the band support.
///
/// When the band holds fewer than `n` pixels the threshold doubles
/// (starting from the smallest positive distance when it is zero) and the
/// support is recomputed from `d` until it is large enough.
pub fn sample_dts(
    prob: &ProbField,
    n: usize,
    seed: SamplerSeed,
    band: SamplingBandConfig,
    d: &DistanceField,
) -> Result<DtsSample> {
    let total = d.height * d.width;
    if n == 0 {
        return Err(Error::InvalidCount("n must be >= 1".into()));
    }
    if n > total {
        return Err(Error::InfeasibleCount {
            requested: n,
            available: total,
        });
    }
    if prob.height != d.height || prob.width != d.width {
        return Err(Error::Dimension("probability and distance fields differ in shape".into()));
    }
    let mut delta = prob.delta.max(band.delta);
    let mut support = prob.support();
    while support.len() < n {
        delta = if delta > 0.0 {
            delta * 2.0
        } else {
            d.values
                .iter()
                .copied()
                .filter(|&v| v > 0.0)
                .fold(f64::INFINITY, f64::min)
        };
        support = sampling_probability(d, SamplingBandConfig { delta })?.support();
    }
    let mut rng = seed.rng(0);
    let picked = sample_without_replacement(&mut rng, &support, n);
    let w = d.width;
    let points = DensePointSet::from_positions(
        picked
            .into_iter()
            .map(|i| Point::new((i % w) as f64 + 0.5, (i / w) as f64 + 0.5)),
    )?;
    Ok(DtsSample { points, delta })
}

/// Score 1 when the pixel containing the point is foreground, else 0.
pub fn assign_attributes(pts: &DensePointSet, mask: &BinaryMask) -> Result<DensePointSet> {
    let (h, w) = (mask.height(), mask.width());
    let mut out = Vec::with_capacity(pts.len());
    for p in pts.points() {
        let (c, r) = (p.x.floor(), p.y.floor());
        if c < 0.0 || r < 0.0 || c >= w as f64 || r >= h as f64 {
            return Err(Error::OutOfBounds {
                x: p.x,
                y: p.y,
                width: w,
                height: h,
            });
        }
        let score = if mask.get(r as usize, c as usize) { 1.0 } else { 0.0 };
        out.push(ScoredPoint::new(p.x, p.y, score));
    }
    DensePointSet::new(out)
}
