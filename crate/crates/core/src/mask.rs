//! Binary masks, polygons, RLE, rasterization, boundary extraction and IoU.
//!
//! Pixel `(r, c)` covers `[c, c+1) x [r, r+1)` in continuous coordinates and
//! has its center at `(c + 0.5, r + 0.5)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{on_segment, signed_area2, Point};

/// Rectangular foreground/background grid, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    height: usize,
    width: usize,
    cells: Vec<bool>,
}

impl BinaryMask {
    /// All-background mask.
    pub fn new(height: usize, width: usize) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::Dimension(format!("mask must be at least 1x1, got {height}x{width}")));
        }
        Ok(Self {
            height,
            width,
            cells: vec![false; height * width],
        })
    }

    pub fn from_cells(height: usize, width: usize, cells: Vec<bool>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::Dimension(format!("mask must be at least 1x1, got {height}x{width}")));
        }
        if cells.len() != height * width {
            return Err(Error::Dimension(format!(
                "expected {} cells for {height}x{width}, got {}",
                height * width,
                cells.len()
            )));
        }
        Ok(Self { height, width, cells })
    }

    /// Builds a mask from a predicate on `(row, col)`.
    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> bool) -> Result<Self> {
        let mut m = Self::new(height, width)?;
        for r in 0..height {
            for c in 0..width {
                m.cells[r * width + c] = f(r, c);
            }
        }
        Ok(m)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        self.cells[row * self.width + col]
    }

    /// Out-of-grid coordinates read as background.
    #[inline]
    pub fn get_signed(&self, row: isize, col: isize) -> bool {
        row >= 0
            && col >= 0
            && (row as usize) < self.height
            && (col as usize) < self.width
            && self.cells[row as usize * self.width + col as usize]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        self.cells[row * self.width + col] = value;
    }

    pub fn area(&self) -> usize {
        self.cells.iter().filter(|&&v| v).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.cells.iter().any(|&v| v)
    }

    /// `(row, col)` of every foreground pixel in row-major order.
    pub fn foreground(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = self.width;
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, &v)| v)
            .map(move |(i, _)| (i / w, i % w))
    }

    /// Box spanning the centers of the extreme foreground pixels.
    pub fn center_box(&self) -> Option<BoundingBox> {
        let mut it = self.foreground();
        let (r0, c0) = it.next()?;
        let (mut rmin, mut rmax, mut cmin, mut cmax) = (r0, r0, c0, c0);
        for (r, c) in it {
            rmin = rmin.min(r);
            rmax = rmax.max(r);
            cmin = cmin.min(c);
            cmax = cmax.max(c);
        }
        Some(BoundingBox {
            x_min: cmin as f64 + 0.5,
            y_min: rmin as f64 + 0.5,
            x_max: cmax as f64 + 0.5,
            y_max: rmax as f64 + 0.5,
        })
    }

    fn check_same_shape(&self, other: &BinaryMask) -> Result<()> {
        if self.height != other.height || self.width != other.width {
            return Err(Error::Dimension(format!(
                "{}x{} vs {}x{}",
                self.height, self.width, other.height, other.width
            )));
        }
        Ok(())
    }

    /// Pixelwise OR.
    pub fn union_with(&mut self, other: &BinaryMask) -> Result<()> {
        self.check_same_shape(other)?;
        for (a, &b) in self.cells.iter_mut().zip(&other.cells) {
            *a |= b;
        }
        Ok(())
    }

    /// Binary PGM (P5), foreground 255.
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend(self.cells.iter().map(|&v| if v { 255u8 } else { 0u8 }));
        out
    }

    /// Reads a binary PGM (P5, maxval <= 255); non-zero samples are foreground.
    pub fn from_pgm(bytes: &[u8]) -> Result<Self> {
        let bad = |msg: &str| Error::Parse {
            offset: 0,
            message: format!("PGM: {msg}"),
        };
        let mut pos = 0usize;
        let mut fields = Vec::with_capacity(4);
        while fields.len() < 4 {
            while pos < bytes.len() && (bytes[pos].is_ascii_whitespace() || bytes[pos] == b'#') {
                if bytes[pos] == b'#' {
                    while pos < bytes.len() && bytes[pos] != b'\n' {
                        pos += 1;
                    }
                } else {
                    pos += 1;
                }
            }
            let start = pos;
            while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if start == pos {
                return Err(bad("truncated header"));
            }
            fields.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| bad("non-ASCII header"))?);
        }
        if fields[0] != "P5" {
            return Err(bad("only binary P5 is supported"));
        }
        let num = |s: &str| s.parse::<usize>().map_err(|_| bad("bad header number"));
        let (width, height, maxval) = (num(fields[1])?, num(fields[2])?, num(fields[3])?);
        if maxval == 0 || maxval > 255 {
            return Err(bad("maxval must be in 1..=255"));
        }
        // exactly one whitespace byte separates the header from the raster
        let data = bytes.get(pos + 1..).ok_or_else(|| bad("missing raster"))?;
        if data.len() < width * height {
            return Err(bad("raster shorter than width * height"));
        }
        Self::from_cells(height, width, data[..width * height].iter().map(|&v| v != 0).collect())
    }
}

/// Closed polygon with at least three vertices and no repeated consecutive vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polygon {
    vertices: Vec<Point>,
}

impl Polygon {
    /// Drops consecutive duplicates (including a repeated closing vertex).
    pub fn new(mut vertices: Vec<Point>) -> Result<Self> {
        if vertices.iter().any(|p| !p.is_finite()) {
            return Err(Error::DegeneratePolygon("non-finite vertex".into()));
        }
        vertices.dedup();
        while vertices.len() > 1 && vertices.first() == vertices.last() {
            vertices.pop();
        }
        if vertices.len() < 3 {
            return Err(Error::DegeneratePolygon(format!(
                "need at least 3 distinct vertices, got {}",
                vertices.len()
            )));
        }
        Ok(Self { vertices })
    }

    /// COCO flat `[x0, y0, x1, y1, ...]` layout.
    pub fn from_flat(coords: &[f64]) -> Result<Self> {
        if !coords.len().is_multiple_of(2) {
            return Err(Error::DegeneratePolygon("odd number of coordinates".into()));
        }
        Self::new(coords.chunks_exact(2).map(|c| Point::new(c[0], c[1])).collect())
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn perimeter(&self) -> f64 {
        self.edges().map(|(a, b)| a.dist(b)).sum()
    }

    pub fn area(&self) -> f64 {
        0.5 * signed_area2(&self.vertices).abs()
    }

    /// Even-odd membership with the same half-open convention as
    /// [`rasterize_polygon`].
    pub fn contains(&self, p: Point) -> bool {
        let mut inside = false;
        for (a, b) in self.edges() {
            if let Some(x) = crossing_x(a, b, p.y) {
                if x >= p.x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Even-odd membership, counting points on an edge as inside.
    pub fn contains_closed(&self, p: Point) -> bool {
        self.edges().any(|(a, b)| on_segment(a, b, p)) || self.contains(p)
    }
}

/// Axis-aligned box in continuous coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl BoundingBox {
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Result<Self> {
        if !(x_min <= x_max && y_min <= y_max) || ![x_min, y_min, x_max, y_max].iter().all(|v| v.is_finite()) {
            return Err(Error::Config(format!(
                "invalid box ({x_min}, {y_min})-({x_max}, {y_max})"
            )));
        }
        Ok(Self { x_min, y_min, x_max, y_max })
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }
}

/// Pixel centers of the mask boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryPointSet {
    pub points: Vec<Point>,
}

impl BoundaryPointSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// x coordinate where edge `a`–`b` crosses the horizontal line `y`, if the
/// edge spans it under the `(min, max]` rule.
#[inline]
fn crossing_x(a: Point, b: Point, y: f64) -> Option<f64> {
    if (a.y < y) != (b.y < y) {
        Some(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y))
    } else {
        None
    }
}

/// Fills pixel centers by the even-odd rule.
///
/// Ties on an edge are half-open: a center on an edge is inside when the
/// polygon interior lies above or to the left of it, so two polygons sharing
/// an edge never both cover the same pixel.
pub fn rasterize_polygon(poly: &Polygon, height: usize, width: usize) -> Result<BinaryMask> {
    let mut mask = BinaryMask::new(height, width)?;
    let mut xs: Vec<f64> = Vec::new();
    for r in 0..height {
        let py = r as f64 + 0.5;
        xs.clear();
        xs.extend(poly.edges().filter_map(|(a, b)| crossing_x(a, b, py)));
        xs.sort_by(f64::total_cmp);
        for pair in xs.chunks_exact(2) {
            // pixel c is inside when pair[0] < c + 0.5 <= pair[1]
            let (lo, hi) = (pair[0], pair[1]);
            if hi < 0.5 || lo >= width as f64 - 0.5 {
                continue;
            }
            let mut c = ((lo - 0.5).floor().max(0.0)) as usize;
            while c < width && (c as f64 + 0.5) <= lo {
                c += 1;
            }
            while c < width && (c as f64 + 0.5) <= hi {
                mask.set(r, c, true);
                c += 1;
            }
        }
    }
    Ok(mask)
}

/// Like [`rasterize_polygon`], but pixel centers lying exactly on an edge are
/// foreground as well.
pub fn rasterize_polygon_closed(poly: &Polygon, height: usize, width: usize) -> Result<BinaryMask> {
    let mut mask = rasterize_polygon(poly, height, width)?;
    for (a, b) in poly.edges() {
        let c0 = ((a.x.min(b.x) - 0.5).ceil().max(0.0)) as usize;
        let c1 = (a.x.max(b.x) - 0.5).floor();
        let r0 = ((a.y.min(b.y) - 0.5).ceil().max(0.0)) as usize;
        let r1 = (a.y.max(b.y) - 0.5).floor();
        if c1 < 0.0 || r1 < 0.0 {
            continue;
        }
        let c1 = (c1 as usize).min(width - 1);
        let r1 = (r1 as usize).min(height - 1);
        for r in r0..=r1 {
            for c in c0..=c1 {
                if on_segment(a, b, Point::new(c as f64 + 0.5, r as f64 + 0.5)) {
                    mask.set(r, c, true);
                }
            }
        }
    }
    Ok(mask)
}

/// Intersection over union; 1 when both masks are empty.
pub fn mask_iou(a: &BinaryMask, b: &BinaryMask) -> Result<f64> {
    a.check_same_shape(b)?;
    let (mut inter, mut union) = (0usize, 0usize);
    for (&x, &y) in a.cells.iter().zip(&b.cells) {
        inter += (x && y) as usize;
        union += (x || y) as usize;
    }
    if union == 0 {
        return Ok(1.0);
    }
    Ok(inter as f64 / union as f64)
}

/// Centers of foreground pixels with a background or off-grid 4-neighbor.
pub fn boundary_points(mask: &BinaryMask) -> Result<BoundaryPointSet> {
    let mut points = Vec::new();
    for (r, c) in mask.foreground() {
        let (ri, ci) = (r as isize, c as isize);
        let interior = mask.get_signed(ri - 1, ci)
            && mask.get_signed(ri + 1, ci)
            && mask.get_signed(ri, ci - 1)
            && mask.get_signed(ri, ci + 1);
        if !interior {
            points.push(Point::new(c as f64 + 0.5, r as f64 + 0.5));
        }
    }
    if points.is_empty() {
        return Err(Error::EmptyMask);
    }
    Ok(BoundaryPointSet { points })
}

/// COCO uncompressed RLE: column-major run lengths, first run is background.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rle {
    /// `[height, width]`
    pub size: [usize; 2],
    pub counts: Vec<u64>,
}

impl Rle {
    pub fn area(&self) -> u64 {
        self.counts.iter().skip(1).step_by(2).sum()
    }

    pub fn decode(&self) -> Result<BinaryMask> {
        rle_decode(&self.counts, self.size[0], self.size[1])
    }
}

pub fn rle_encode(mask: &BinaryMask) -> Rle {
    let mut counts = Vec::new();
    let mut current = false;
    let mut run = 0u64;
    for c in 0..mask.width {
        for r in 0..mask.height {
            let v = mask.get(r, c);
            if v != current {
                counts.push(run);
                run = 0;
                current = v;
            }
            run += 1;
        }
    }
    counts.push(run);
    Rle {
        size: [mask.height, mask.width],
        counts,
    }
}

pub fn rle_decode(counts: &[u64], height: usize, width: usize) -> Result<BinaryMask> {
    let mut mask = BinaryMask::new(height, width)?;
    let total: u64 = counts.iter().sum();
    if total != (height * width) as u64 {
        return Err(Error::MalformedRle(format!(
            "counts sum to {total}, expected {}",
            height * width
        )));
    }
    let mut idx = 0usize;
    let mut value = false;
    for &run in counts {
        if value {
            for k in idx..idx + run as usize {
                mask.set(k % height, k / height, true);
            }
        }
        idx += run as usize;
        value = !value;
    }
    Ok(mask)
}

/// Labels of the largest 4-connected foreground component (ties go to the
/// component found first in row-major order).
pub fn largest_component(mask: &BinaryMask) -> Option<BinaryMask> {
    let (h, w) = (mask.height, mask.width);
    let mut label = vec![0u32; h * w];
    let mut best: Option<(usize, u32)> = None;
    let mut next = 0u32;
    let mut stack = Vec::new();
    for start in 0..h * w {
        if !mask.cells[start] || label[start] != 0 {
            continue;
        }
        next += 1;
        label[start] = next;
        stack.push(start);
        let mut size = 0usize;
        while let Some(i) = stack.pop() {
            size += 1;
            let (r, c) = (i / w, i % w);
            let mut visit = |j: usize| {
                if mask.cells[j] && label[j] == 0 {
                    label[j] = next;
                    stack.push(j);
                }
            };
            if r > 0 {
                visit(i - w);
            }
            if r + 1 < h {
                visit(i + w);
            }
            if c > 0 {
                visit(i - 1);
            }
            if c + 1 < w {
                visit(i + 1);
            }
        }
        if best.is_none_or(|(s, _)| size > s) {
            best = Some((size, next));
        }
    }
    let (_, keep) = best?;
    Some(BinaryMask {
        height: h,
        width: w,
        cells: label.iter().map(|&l| l == keep).collect(),
    })
}

/// Outer boundary of the largest 4-connected component, traced along pixel
/// edges. Vertices sit on pixel corners; collinear runs are merged, so
/// rasterizing the result reproduces the component with its holes filled.
pub fn trace_outer_contour(mask: &BinaryMask) -> Result<Polygon> {
    let comp = largest_component(mask).ok_or(Error::EmptyMask)?;
    let (h, w) = (comp.height as isize, comp.width as isize);
    let inside = |r: isize, c: isize| comp.get_signed(r, c);

    // Topmost-leftmost pixel: its top-left corner only has the top edge leaving it.
    let first = comp.cells.iter().position(|&v| v).ok_or(Error::EmptyMask)?;
    let (r0, c0) = ((first / comp.width) as isize, (first % comp.width) as isize);
    let start = (c0, r0);
    let start_dir = (1isize, 0isize);

    // Directed boundary edges keep the component on the right (screen frame).
    let edge_exists = |(x, y): (isize, isize), (dx, dy): (isize, isize)| -> bool {
        match (dx, dy) {
            (1, 0) => inside(y, x) && !inside(y - 1, x),
            (0, 1) => inside(y, x - 1) && !inside(y, x),
            (-1, 0) => inside(y - 1, x - 1) && !inside(y, x - 1),
            (0, -1) => inside(y - 1, x) && !inside(y - 1, x - 1),
            _ => false,
        }
    };

    let mut verts: Vec<Point> = vec![Point::new(start.0 as f64, start.1 as f64)];
    let mut pos = (start.0 + start_dir.0, start.1 + start_dir.1);
    let mut dir = start_dir;
    let limit = 4 * (h as usize + 1) * (w as usize + 1);
    for _ in 0..limit {
        if pos == start {
            break;
        }
        // Prefer the right turn so diagonal contacts stay disconnected.
        let right = (-dir.1, dir.0);
        let left = (dir.1, -dir.0);
        let next = [right, dir, left]
            .into_iter()
            .find(|&d| edge_exists(pos, d))
            .ok_or_else(|| Error::DegeneratePolygon("open contour".into()))?;
        if next != dir {
            verts.push(Point::new(pos.0 as f64, pos.1 as f64));
        }
        dir = next;
        pos = (pos.0 + dir.0, pos.1 + dir.1);
    }
    Polygon::new(verts)
}
