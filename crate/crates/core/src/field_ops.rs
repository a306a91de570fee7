//! Feature-field kernels used by a dense point head: bilinear sampling,
//! group pooling, per-index offset fields and position-sensitive attribute
//! maps, plus an analytic multiply-accumulate model of the head.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::BoundingBox;
use crate::sampling::{DensePointSet, ScoredPoint};

/// Channel-major grid of values. Cell `(row, col)` sits at integer
/// coordinates `(x = col, y = row)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureField {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
    pub values: Vec<f64>,
}

impl FeatureField {
    pub fn new(channels: usize, height: usize, width: usize, values: Vec<f64>) -> Result<Self> {
        if channels == 0 || height == 0 || width == 0 {
            return Err(Error::Dimension(format!("empty field {channels}x{height}x{width}")));
        }
        if values.len() != channels * height * width {
            return Err(Error::Dimension(format!(
                "expected {} values, got {}",
                channels * height * width,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("feature values must be finite".into()));
        }
        Ok(Self {
            channels,
            height,
            width,
            values,
        })
    }

    pub fn from_fn(
        channels: usize,
        height: usize,
        width: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(channels * height * width);
        for ch in 0..channels {
            for r in 0..height {
                for c in 0..width {
                    values.push(f(ch, r, c));
                }
            }
        }
        Self::new(channels, height, width, values)
    }

    #[inline]
    pub fn at(&self, channel: usize, row: usize, col: usize) -> f64 {
        self.values[(channel * self.height + row) * self.width + col]
    }

    /// Bilinear value of one channel, coordinates clamped to the grid.
    pub fn sample_channel(&self, channel: usize, x: f64, y: f64) -> f64 {
        let x = x.clamp(0.0, (self.width - 1) as f64);
        let y = y.clamp(0.0, (self.height - 1) as f64);
        let (c0, r0) = (x.floor() as usize, y.floor() as usize);
        let (c1, r1) = ((c0 + 1).min(self.width - 1), (r0 + 1).min(self.height - 1));
        let (fx, fy) = (x - c0 as f64, y - r0 as f64);
        let top = lerp(self.at(channel, r0, c0), self.at(channel, r0, c1), fx);
        let bottom = lerp(self.at(channel, r1, c0), self.at(channel, r1, c1), fx);
        lerp(top, bottom, fy)
    }
}

/// Exact when `a == b`.
#[inline]
pub(crate) fn lerp(a: f64, b: f64, t: f64) -> f64 {
    a + (b - a) * t
}

/// Bilinear sample of every channel at `(x, y)`.
pub fn bilinear_sample(field: &FeatureField, x: f64, y: f64) -> Vec<f64> {
    (0..field.channels).map(|ch| field.sample_channel(ch, x, y)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupPoolConfig {
    pub k: usize,
}

impl Default for GroupPoolConfig {
    fn default() -> Self {
        Self { k: 9 }
    }
}

/// Index ranges of the `k` contiguous groups over `n` points.
///
/// Groups take `ceil(n / k)` points each; once the remaining points could no
/// longer give every remaining group one point, the tail groups shrink.
pub fn group_ranges(n: usize, k: usize) -> Result<Vec<std::ops::Range<usize>>> {
    if k == 0 || k > n {
        return Err(Error::Config(format!("group count must satisfy 1 <= k <= n, got k = {k}, n = {n}")));
    }
    let size = n.div_ceil(k);
    let start = |g: usize| (g * size).min(n - (k - g));
    Ok((0..k).map(|g| start(g)..if g + 1 == k { n } else { start(g + 1) }).collect())
}

/// Channelwise max within each index group, groups concatenated in order.
/// Output length is `k * channels`.
pub fn group_pool(features: &[Vec<f64>], cfg: GroupPoolConfig) -> Result<Vec<f64>> {
    let ranges = group_ranges(features.len(), cfg.k)?;
    let channels = features[0].len();
    if features.iter().any(|f| f.len() != channels) {
        return Err(Error::Dimension("point features differ in channel count".into()));
    }
    let mut out = Vec::with_capacity(cfg.k * channels);
    for range in ranges {
        for ch in 0..channels {
            out.push(
                features[range.clone()]
                    .iter()
                    .map(|f| f[ch])
                    .fold(f64::NEG_INFINITY, f64::max),
            );
        }
    }
    Ok(out)
}

/// `n` offset fields; field `i` is the channel pair `(2i, 2i + 1)` = `(dx, dy)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OffsetFieldStack {
    field: FeatureField,
}

impl OffsetFieldStack {
    pub fn new(field: FeatureField) -> Result<Self> {
        if !field.channels.is_multiple_of(2) {
            return Err(Error::Dimension(format!("{} channels is not a stack of (dx, dy) pairs", field.channels)));
        }
        Ok(Self { field })
    }

    pub fn n(&self) -> usize {
        self.field.channels / 2
    }

    pub fn field(&self) -> &FeatureField {
        &self.field
    }
}

/// Moves point `i` by field `i` sampled at the point's location.
pub fn apply_offset_fields(stack: &OffsetFieldStack, pts: &DensePointSet) -> Result<DensePointSet> {
    if stack.n() != pts.len() {
        return Err(Error::Cardinality(format!("{} offset fields for {} points", stack.n(), pts.len())));
    }
    let moved = pts
        .points()
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let dx = stack.field.sample_channel(2 * i, p.x, p.y);
            let dy = stack.field.sample_channel(2 * i + 1, p.x, p.y);
            ScoredPoint::new(p.x + dx, p.y + dy, p.score)
        })
        .collect();
    DensePointSet::new(moved)
}

/// Default number of bins per side of the position-sensitive map.
pub const DEFAULT_ATTRIBUTE_BINS: usize = 7;

/// `bins x bins` score grids; channel `r * bins + c` owns bin `(r, c)` of the box.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributeMapStack {
    bins: usize,
    maps: FeatureField,
}

impl AttributeMapStack {
    pub fn new(bins: usize, maps: FeatureField) -> Result<Self> {
        if bins == 0 || maps.channels != bins * bins {
            return Err(Error::Dimension(format!(
                "{} maps for {bins}x{bins} bins",
                maps.channels
            )));
        }
        Ok(Self { bins, maps })
    }

    pub fn bins(&self) -> usize {
        self.bins
    }
}

/// Score of each point read from the map of the bin it falls in.
pub fn sample_attribute_map(stack: &AttributeMapStack, pts: &DensePointSet, bbox: &BoundingBox) -> Result<Vec<f64>> {
    let s = stack.bins;
    let bin = |t: f64, lo: f64, extent: f64| -> usize {
        if extent <= 0.0 {
            return 0;
        }
        (((t - lo) / extent * s as f64).floor() as usize).min(s - 1)
    };
    pts.points()
        .iter()
        .map(|p| {
            if !bbox.contains(p.pos()) {
                return Err(Error::OutOfBounds {
                    x: p.x,
                    y: p.y,
                    width: stack.maps.width,
                    height: stack.maps.height,
                });
            }
            let bc = bin(p.x, bbox.x_min, bbox.width());
            let br = bin(p.y, bbox.y_min, bbox.height());
            Ok(stack.maps.sample_channel(br * s + bc, p.x, p.y))
        })
        .collect()
}

/// Head configuration for the cost model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeadMode {
    /// Concatenated point features for classification and regression.
    Concat,
    /// Group-pooled classification, concatenated regression.
    GroupPool,
    /// Group-pooled classification, shared offset fields for regression.
    SharedOffset,
}

impl HeadMode {
    pub const ALL: [HeadMode; 3] = [HeadMode::Concat, HeadMode::GroupPool, HeadMode::SharedOffset];

    pub fn as_str(&self) -> &'static str {
        match self {
            HeadMode::Concat => "concat",
            HeadMode::GroupPool => "group_pool",
            HeadMode::SharedOffset => "shared_offset",
        }
    }
}

impl fmt::Display for HeadMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for HeadMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "concat" => Ok(HeadMode::Concat),
            "group_pool" => Ok(HeadMode::GroupPool),
            "shared_offset" => Ok(HeadMode::SharedOffset),
            other => Err(Error::Config(format!("unknown head mode {other:?}"))),
        }
    }
}

/// Per-location multiply-accumulate counts of one head.
///
/// With `C` channels, `n` points and `k` groups:
///
/// | term                       | MACs       |
/// |----------------------------|------------|
/// | shared conv tower (3 x 3x3)| `27 C^2`   |
/// | concat classification      | `n C^2`    |
/// | group-pool classification  | `k C^2`    |
/// | concat regression          | `2 n^2 C`  |
/// | shared-offset regression   | `2 n C`    |
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeadCost {
    pub tower: u64,
    pub classification: u64,
    pub regression: u64,
}

impl HeadCost {
    pub fn total(&self) -> u64 {
        self.tower + self.classification + self.regression
    }
}

pub const TOWER_LAYERS: u64 = 3;

pub fn classification_macs(n: u64, k: u64, channels: u64, grouped: bool) -> u64 {
    let inputs = if grouped { k } else { n };
    inputs * channels * channels
}

pub fn regression_macs(n: u64, channels: u64, shared_offset: bool) -> u64 {
    if shared_offset {
        2 * n * channels
    } else {
        2 * n * n * channels
    }
}

pub fn head_cost(n: u64, k: u64, channels: u64, mode: HeadMode) -> HeadCost {
    let tower = TOWER_LAYERS * 9 * channels * channels;
    let (grouped, shared) = match mode {
        HeadMode::Concat => (false, false),
        HeadMode::GroupPool => (true, false),
        HeadMode::SharedOffset => (true, true),
    };
    HeadCost {
        tower,
        classification: classification_macs(n, k, channels, grouped),
        regression: regression_macs(n, channels, shared),
    }
}

/// CSV with header `n,k,mode,macs` for every mode and `n`.
pub fn head_cost_csv(n_values: &[u64], k: u64, channels: u64) -> String {
    let mut out = String::from("n,k,mode,macs\n");
    for &n in n_values {
        for mode in HeadMode::ALL {
            out.push_str(&format!("{n},{k},{mode},{}\n", head_cost(n, k, channels, mode).total()));
        }
    }
    out
}
