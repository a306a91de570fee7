//! k-nearest-neighbor concave hull.
//!
//! Gift wrapping restricted to the `k` nearest remaining points: from the
//! lowest-y point, repeatedly take the candidate reached first when sweeping
//! counterclockwise from the direction back to the previous vertex (the
//! sharpest right-hand turn) whose edge does not cross the hull so far. When
//! no candidate works, or the closed hull leaves a point outside, retry with
//! `k + 1`. Once `k` covers every point the convex hull is returned.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::geom::{convex_hull, on_segment, orient, segments_intersect, Point};
use crate::mask::Polygon;

/// Concave hull of the distinct `points`, starting the search at `k`
/// (clamped to at least 3).
pub fn concave_hull_polygon(points: &[Point], k: usize) -> Result<Polygon> {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(|a, b| a.lex_cmp(b));
    pts.dedup();
    if pts.len() < 3 {
        return Err(Error::InsufficientPoints(pts.len()));
    }
    let first = pts[0];
    if pts.iter().all(|&q| orient(first, pts[1], q) == 0.0) {
        return Err(Error::DegenerateInput("all hull candidates are collinear".into()));
    }
    let mut k = k.max(3);
    while k < pts.len() - 1 {
        if let Some(hull) = try_hull(&pts, k) {
            if let Ok(poly) = Polygon::new(hull) {
                if pts.iter().all(|&p| poly.contains_closed(p)) {
                    return Ok(poly);
                }
            }
        }
        k += 1;
    }
    Polygon::new(convex_hull(&pts))
}

/// Counterclockwise angle in `(0, 2pi]` from `from` to `to`.
fn ccw_angle(from: (f64, f64), to: (f64, f64)) -> f64 {
    let cross = from.0 * to.1 - from.1 * to.0;
    let dot = from.0 * to.0 + from.1 * to.1;
    let a = cross.atan2(dot);
    if a <= 0.0 {
        a + TAU
    } else {
        a
    }
}

fn try_hull(pts: &[Point], k: usize) -> Option<Vec<Point>> {
    let start = (0..pts.len())
        .min_by(|&i, &j| pts[i].y.total_cmp(&pts[j].y).then(pts[i].x.total_cmp(&pts[j].x)))
        .unwrap();
    let mut remaining: Vec<bool> = vec![true; pts.len()];
    remaining[start] = false;
    let mut left = pts.len() - 1;
    let mut hull: Vec<usize> = vec![start];
    let mut back = (-1.0, 0.0);
    let mut current = start;

    loop {
        // The start re-enters the pool once a triangle has been formed.
        if hull.len() == 3 {
            remaining[start] = true;
            left += 1;
        }
        if left == 0 {
            return None;
        }
        let cur = pts[current];
        let mut cand: Vec<usize> = (0..pts.len()).filter(|&i| remaining[i]).collect();
        let by_distance = |i: &usize, j: &usize| {
            cur.dist(pts[*i])
                .total_cmp(&cur.dist(pts[*j]))
                .then(pts[*i].lex_cmp(&pts[*j]))
        };
        if cand.len() > k {
            cand.select_nth_unstable_by(k - 1, by_distance);
            cand.truncate(k);
        }
        let mut keyed: Vec<(f64, usize)> = cand
            .into_iter()
            .map(|i| {
                let d = (pts[i].x - cur.x, pts[i].y - cur.y);
                (ccw_angle(back, d), i)
            })
            .collect();
        keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

        let chosen = keyed.into_iter().map(|(_, i)| i).find(|&i| {
            let closing = i == start;
            // edges (hull[j], hull[j+1]) other than the one ending at `current`,
            // and the first one when closing the ring
            let m = hull.len();
            let skip_first = usize::from(closing);
            (skip_first..m.saturating_sub(2)).all(|j| {
                let (a, b) = (pts[hull[j]], pts[hull[j + 1]]);
                !segments_intersect(cur, pts[i], a, b)
            }) && !(m >= 2
                && (on_segment(cur, pts[i], pts[hull[m - 2]]) || on_segment(pts[hull[m - 2]], cur, pts[i])))
        })?;

        if chosen == start {
            return Some(hull.into_iter().map(|i| pts[i]).collect());
        }
        back = (cur.x - pts[chosen].x, cur.y - pts[chosen].y);
        remaining[chosen] = false;
        left -= 1;
        hull.push(chosen);
        current = chosen;
    }
}
