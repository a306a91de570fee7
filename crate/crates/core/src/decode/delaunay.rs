//! Incremental Bowyer–Watson Delaunay triangulation on exact predicates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{incircle, orient, Point};
use crate::sampling::{DensePointSet, ScoredPoint};

const NONE: usize = usize::MAX;

/// Delaunay triangulation over a canonicalized vertex list.
///
/// Vertices are the input points sorted lexicographically by `(x, y)` with
/// duplicates merged (their scores averaged), so the output does not depend
/// on input order. Triangles are counterclockwise in the y-up sense
/// (`orient(a, b, c) > 0`), start at their smallest vertex index and are
/// sorted lexicographically.
///
/// JSON form: `{"vertices": [[x, y, a], ...], "triangles": [[i, j, k], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Triangulation {
    pub vertices: Vec<ScoredPoint>,
    pub triangles: Vec<[usize; 3]>,
}

impl Triangulation {
    pub fn vertex(&self, i: usize) -> Point {
        self.vertices[i].pos()
    }

    pub fn corners(&self, t: usize) -> [Point; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertex(a), self.vertex(b), self.vertex(c)]
    }

    /// Sum of triangle areas.
    pub fn area(&self) -> f64 {
        (0..self.triangles.len())
            .map(|t| {
                let [a, b, c] = self.corners(t);
                0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y))
            })
            .sum()
    }
}

#[derive(Debug, Clone)]
struct Tri {
    v: [usize; 3],
    /// `n[k]` is the neighbor across the edge opposite `v[k]`.
    n: [usize; 3],
    alive: bool,
}

/// Sorts by position and merges coincident points.
fn canonicalize(points: &[ScoredPoint]) -> Vec<ScoredPoint> {
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.pos().lex_cmp(&b.pos()).then(a.score.total_cmp(&b.score)));
    let mut out: Vec<ScoredPoint> = Vec::with_capacity(sorted.len());
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        let mut sum = sorted[i].score;
        while j < sorted.len() && sorted[j].pos() == sorted[i].pos() {
            sum += sorted[j].score;
            j += 1;
        }
        out.push(ScoredPoint::new(sorted[i].x, sorted[i].y, sum / (j - i) as f64));
        i = j;
    }
    out
}

struct Builder {
    pts: Vec<Point>,
    tris: Vec<Tri>,
    last: usize,
    // scratch
    bad: Vec<usize>,
    stack: Vec<usize>,
    mark: Vec<u32>,
    epoch: u32,
}

impl Builder {
    fn locate(&self, p: Point) -> usize {
        let mut t = self.last;
        let mut turn = 0usize;
        loop {
            let tri = &self.tris[t];
            let mut moved = false;
            for s in 0..3 {
                let k = (s + turn) % 3;
                let a = self.pts[tri.v[(k + 1) % 3]];
                let b = self.pts[tri.v[(k + 2) % 3]];
                if orient(a, b, p) < 0.0 && tri.n[k] != NONE {
                    t = tri.n[k];
                    moved = true;
                    break;
                }
            }
            if !moved {
                return t;
            }
            turn += 1;
        }
    }

    fn insert(&mut self, vi: usize) {
        let p = self.pts[vi];
        let start = self.locate(p);
        self.epoch += 1;
        let epoch = self.epoch;
        if self.mark.len() < self.tris.len() {
            self.mark.resize(self.tris.len(), 0);
        }
        self.bad.clear();
        self.stack.clear();
        self.stack.push(start);
        self.mark[start] = epoch;
        while let Some(t) = self.stack.pop() {
            self.bad.push(t);
            for k in 0..3 {
                let nb = self.tris[t].n[k];
                if nb == NONE || self.mark[nb] == epoch {
                    continue;
                }
                let [a, b, c] = self.tris[nb].v.map(|i| self.pts[i]);
                if incircle(a, b, c, p) > 0.0 {
                    self.mark[nb] = epoch;
                    self.stack.push(nb);
                }
            }
        }

        // Cavity boundary: (a, b, outside neighbor), counterclockwise around p.
        let mut rim: Vec<(usize, usize, usize)> = Vec::new();
        for &t in &self.bad {
            let tri = &self.tris[t];
            for k in 0..3 {
                let nb = tri.n[k];
                if nb == NONE || self.mark[nb] != epoch {
                    rim.push((tri.v[(k + 1) % 3], tri.v[(k + 2) % 3], nb));
                }
            }
        }
        for &t in &self.bad {
            self.tris[t].alive = false;
        }

        let base = self.tris.len();
        for (i, &(a, b, nb)) in rim.iter().enumerate() {
            debug_assert!(orient(self.pts[a], self.pts[b], p) > 0.0);
            let id = base + i;
            self.tris.push(Tri {
                v: [a, b, vi],
                n: [NONE, NONE, nb],
                alive: true,
            });
            if nb != NONE {
                let slot = self.tris[nb].v.iter().position(|&x| x != a && x != b).unwrap();
                self.tris[nb].n[slot] = id;
            }
        }
        // Edge (b, p) of (a, b, p) is shared with the new triangle starting at b;
        // edge (p, a) with the one ending at a.
        for i in 0..rim.len() {
            let (a, b, _) = rim[i];
            let next = rim.iter().position(|r| r.0 == b).expect("closed cavity rim");
            let prev = rim.iter().position(|r| r.1 == a).expect("closed cavity rim");
            self.tris[base + i].n[0] = base + next;
            self.tris[base + i].n[1] = base + prev;
        }
        self.last = base;
        self.mark.resize(self.tris.len(), 0);
    }
}

/// Delaunay triangulation of the distinct input positions.
pub fn delaunay(pts: &DensePointSet) -> Result<Triangulation> {
    let verts = canonicalize(pts.points());
    if verts.len() < 3 {
        return Err(Error::DegenerateInput(format!("{} distinct points", verts.len())));
    }
    let positions: Vec<Point> = verts.iter().map(|p| p.pos()).collect();
    let (p0, p1) = (positions[0], positions[1]);
    if positions[2..].iter().all(|&q| orient(p0, p1, q) == 0.0) {
        return Err(Error::DegenerateInput("all points are collinear".into()));
    }

    let (mut x0, mut x1, mut y0, mut y1) = (p0.x, p0.x, p0.y, p0.y);
    for q in &positions {
        x0 = x0.min(q.x);
        x1 = x1.max(q.x);
        y0 = y0.min(q.y);
        y1 = y1.max(q.y);
    }
    let (cx, cy) = ((x0 + x1) / 2.0, (y0 + y1) / 2.0);
    // Far enough that the enclosing vertices never cut off a hull triangle
    // for inputs on a half-pixel lattice.
    let m = (x1 - x0).max(y1 - y0).max(1.0) * 1e7;
    let n = positions.len();
    let mut all = positions;
    all.push(Point::new(cx - 2.0 * m, cy - m));
    all.push(Point::new(cx + 2.0 * m, cy - m));
    all.push(Point::new(cx, cy + 2.0 * m));
    debug_assert!(orient(all[n], all[n + 1], all[n + 2]) > 0.0);

    let mut b = Builder {
        pts: all,
        tris: vec![Tri {
            v: [n, n + 1, n + 2],
            n: [NONE; 3],
            alive: true,
        }],
        last: 0,
        bad: Vec::new(),
        stack: Vec::new(),
        mark: vec![0],
        epoch: 0,
    };
    for vi in 0..n {
        b.insert(vi);
    }

    let mut triangles: Vec<[usize; 3]> = b
        .tris
        .iter()
        .filter(|t| t.alive && t.v.iter().all(|&v| v < n))
        .map(|t| {
            let [a, b2, c] = t.v;
            let k = (0..3).min_by_key(|&k| t.v[k]).unwrap();
            match k {
                0 => [a, b2, c],
                1 => [b2, c, a],
                _ => [c, a, b2],
            }
        })
        .collect();
    triangles.sort();
    Ok(Triangulation {
        vertices: verts,
        triangles,
    })
}
