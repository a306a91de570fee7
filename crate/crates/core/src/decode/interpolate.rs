use serde::{Deserialize, Serialize};

use super::delaunay::Triangulation;
use crate::geom::{orient, Point};
use crate::mask::BinaryMask;

/// Per-pixel interpolated score, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreMap {
    pub height: usize,
    pub width: usize,
    pub values: Vec<f64>,
}

impl ScoreMap {
    #[inline]
    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }

    /// Foreground where the score is at least `threshold`.
    pub fn binarize(&self, threshold: f64) -> BinaryMask {
        BinaryMask::from_cells(
            self.height,
            self.width,
            self.values.iter().map(|&v| v >= threshold).collect(),
        )
        .expect("score map has a valid shape")
    }
}

/// Barycentric interpolation of vertex scores at every pixel center.
///
/// Centers on a shared edge take the value of the lowest-index triangle that
/// contains them; centers outside the hull score 0.
pub fn interpolate_scores(tri: &Triangulation, height: usize, width: usize) -> ScoreMap {
    let mut values = vec![0.0; height * width];
    let mut filled = vec![false; height * width];
    for (t, &[ia, ib, ic]) in tri.triangles.iter().enumerate() {
        let [a, b, c] = tri.corners(t);
        let (sa, sb, sc) = (tri.vertices[ia].score, tri.vertices[ib].score, tri.vertices[ic].score);
        let lo = sa.min(sb).min(sc);
        let hi = sa.max(sb).max(sc);

        let xmin = a.x.min(b.x).min(c.x);
        let xmax = a.x.max(b.x).max(c.x);
        let ymin = a.y.min(b.y).min(c.y);
        let ymax = a.y.max(b.y).max(c.y);
        if xmax < 0.5 || ymax < 0.5 {
            continue;
        }
        let c0 = (xmin - 0.5).ceil().max(0.0) as usize;
        let r0 = (ymin - 0.5).ceil().max(0.0) as usize;
        let c1 = ((xmax - 0.5).floor() as usize).min(width.saturating_sub(1));
        let r1 = ((ymax - 0.5).floor() as usize).min(height.saturating_sub(1));
        if c0 > c1 || r0 > r1 {
            continue;
        }
        let denom = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
        for r in r0..=r1 {
            let py = r as f64 + 0.5;
            for col in c0..=c1 {
                let idx = r * width + col;
                if filled[idx] {
                    continue;
                }
                let p = Point::new(col as f64 + 0.5, py);
                if orient(a, b, p) < 0.0 || orient(b, c, p) < 0.0 || orient(c, a, p) < 0.0 {
                    continue;
                }
                let wa = ((b.x - p.x) * (c.y - p.y) - (c.x - p.x) * (b.y - p.y)) / denom;
                let wb = ((c.x - p.x) * (a.y - p.y) - (a.x - p.x) * (c.y - p.y)) / denom;
                let wc = 1.0 - wa - wb;
                values[idx] = (wa * sa + wb * sb + wc * sc).clamp(lo, hi);
                filled[idx] = true;
            }
        }
    }
    ScoreMap { height, width, values }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decode::delaunay::delaunay;
    use crate::sampling::{DensePointSet, ScoredPoint};

    #[test]
    fn centroid_gets_a_third() {
        let pts = DensePointSet::new(vec![
            ScoredPoint::new(0.5, 0.5, 1.0),
            ScoredPoint::new(6.5, 0.5, 0.0),
            ScoredPoint::new(0.5, 6.5, 0.0),
        ])
        .unwrap();
        let map = interpolate_scores(&delaunay(&pts).unwrap(), 8, 8);
        assert!((map.at(2, 2) - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(map.at(0, 0), 1.0);
        assert_eq!(map.at(0, 6), 0.0);
        assert_eq!(map.at(7, 7), 0.0);
    }

    #[test]
    fn uniform_scores_fill_hull() {
        let pts = DensePointSet::new(vec![
            ScoredPoint::new(1.25, 1.25, 1.0),
            ScoredPoint::new(6.75, 1.25, 1.0),
            ScoredPoint::new(6.75, 5.75, 1.0),
            ScoredPoint::new(1.25, 5.75, 1.0),
            ScoredPoint::new(4.1, 3.3, 1.0),
        ])
        .unwrap();
        let map = interpolate_scores(&delaunay(&pts).unwrap(), 8, 8);
        for r in 0..8 {
            for c in 0..8 {
                let inside = (1..=6).contains(&c) && (1..=5).contains(&r);
                assert_eq!(map.at(r, c), if inside { 1.0 } else { 0.0 }, "pixel {r},{c}");
            }
        }
    }
}
