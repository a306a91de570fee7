//! Reconstruction sweep: encode each mask with ground-truth attributes,
//! decode it back and score the round trip by IoU.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decode::{concave_hull, decode_grid, decode_triangulation, DecodeConfig};
use crate::distance::{distance_map, sampling_probability, DistanceField, ProbField, SamplingBandConfig};
use crate::error::{Error, Result};
use crate::mask::{boundary_points, mask_iou, trace_outer_contour, BinaryMask, BoundingBox};
use crate::rng::SamplerSeed;
use crate::sampling::{assign_attributes, sample_boundary, sample_dts, sample_grid, DensePointSet, GridSpec};

pub const REPORT_SCHEMA: &str = "reppoints-reconstruction/1";
pub const CSV_VERSION_LINE: &str = "# reppoints reconstruction report v1";
pub const CSV_COLUMNS: &str = "strategy,n,decoder,mean_iou,masks,failures,small_count,small_iou,medium_count,medium_iou,large_count,large_iou,delta,tau,seed,corpus";

/// Area limits (pixels) of the small and medium size buckets.
pub const SMALL_AREA: usize = 32 * 32;
pub const MEDIUM_AREA: usize = 96 * 96;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Boundary,
    Grid,
    Dts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decoder {
    Triangulation,
    Concave,
    Grid,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Boundary, Strategy::Grid, Strategy::Dts];

    pub fn as_str(&self) -> &'static str {
        match self {
            Strategy::Boundary => "boundary",
            Strategy::Grid => "grid",
            Strategy::Dts => "dts",
        }
    }
}

impl Decoder {
    pub const ALL: [Decoder; 3] = [Decoder::Triangulation, Decoder::Concave, Decoder::Grid];

    pub fn as_str(&self) -> &'static str {
        match self {
            Decoder::Triangulation => "triangulation",
            Decoder::Concave => "concave",
            Decoder::Grid => "grid",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for Decoder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown strategy {s:?}")))
    }
}

impl FromStr for Decoder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Decoder::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown decoder {s:?}")))
    }
}

/// A point set with ground-truth attributes plus the lattice it was laid on,
/// if any.
#[derive(Debug, Clone, PartialEq)]
pub struct Encoded {
    pub points: DensePointSet,
    pub grid: Option<(GridSpec, BoundingBox)>,
}

/// Per-mask encoder state; the distance field is built once and shared by
/// every DTS request.
pub struct MaskEncoder<'a> {
    mask: &'a BinaryMask,
    band: SamplingBandConfig,
    fields: Option<(DistanceField, ProbField)>,
}

impl<'a> MaskEncoder<'a> {
    pub fn new(mask: &'a BinaryMask, band: SamplingBandConfig) -> Self {
        Self {
            mask,
            band,
            fields: None,
        }
    }

    fn fields(&mut self) -> Result<&(DistanceField, ProbField)> {
        if self.fields.is_none() {
            let b = boundary_points(self.mask)?;
            let d = distance_map(&b, self.mask.height(), self.mask.width())?;
            let p = sampling_probability(&d, self.band)?;
            self.fields = Some((d, p));
        }
        Ok(self.fields.as_ref().expect("just built"))
    }

    /// `seed` only affects DTS.
    pub fn encode(&mut self, strategy: Strategy, n: usize, seed: SamplerSeed) -> Result<Encoded> {
        match strategy {
            Strategy::Boundary => {
                // contour vertices lie on pixel corners, so scores stay at 1
                let poly = trace_outer_contour(self.mask)?;
                Ok(Encoded {
                    points: sample_boundary(&poly, n)?,
                    grid: None,
                })
            }
            Strategy::Grid => {
                let bbox = self.mask.center_box().ok_or(Error::EmptyMask)?;
                let spec = GridSpec::for_box(&bbox, n)?;
                let pts = assign_attributes(&sample_grid(&bbox, &spec)?, self.mask)?;
                Ok(Encoded {
                    points: pts,
                    grid: Some((spec, bbox)),
                })
            }
            Strategy::Dts => {
                let band = self.band;
                let mask = self.mask;
                let (d, p) = self.fields()?;
                let sample = sample_dts(p, n, seed, band, d)?;
                Ok(Encoded {
                    points: assign_attributes(&sample.points, mask)?,
                    grid: None,
                })
            }
        }
    }
}

pub fn encode_mask(mask: &BinaryMask, strategy: Strategy, n: usize, band: SamplingBandConfig, seed: SamplerSeed) -> Result<Encoded> {
    MaskEncoder::new(mask, band).encode(strategy, n, seed)
}

/// Lattice layout implied by the point positions: the box they span and
/// `n` points.
pub fn infer_grid(pts: &DensePointSet) -> Result<(GridSpec, BoundingBox)> {
    let mut it = pts.positions();
    let p0 = it.next().ok_or_else(|| Error::Layout("no points".into()))?;
    let (mut x0, mut x1, mut y0, mut y1) = (p0.x, p0.x, p0.y, p0.y);
    for p in it {
        x0 = x0.min(p.x);
        x1 = x1.max(p.x);
        y0 = y0.min(p.y);
        y1 = y1.max(p.y);
    }
    let bbox = BoundingBox::new(x0, y0, x1, y1)?;
    let spec = GridSpec::for_box(&bbox, pts.len()).map_err(|e| Error::Layout(e.to_string()))?;
    Ok((spec, bbox))
}

/// Decodes to a `height x width` mask. The grid decoder uses `grid` when
/// given and otherwise infers the lattice from the points.
pub fn decode_points(
    pts: &DensePointSet,
    decoder: Decoder,
    height: usize,
    width: usize,
    cfg: &DecodeConfig,
    grid: Option<&(GridSpec, BoundingBox)>,
) -> Result<BinaryMask> {
    match decoder {
        Decoder::Triangulation => decode_triangulation(pts, height, width, cfg),
        Decoder::Concave => concave_hull(pts, cfg, height, width),
        Decoder::Grid => {
            let (spec, bbox) = match grid {
                Some(g) => *g,
                None => infer_grid(pts)?,
            };
            decode_grid(pts, &spec, &bbox, height, width, cfg)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub strategies: Vec<Strategy>,
    pub n_values: Vec<usize>,
    pub decoders: Vec<Decoder>,
    pub delta: f64,
    pub tau: f64,
    pub hull_k: usize,
    pub seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            strategies: vec![Strategy::Dts],
            n_values: vec![9, 25, 49, 81, 225, 441, 729],
            decoders: vec![Decoder::Triangulation],
            delta: crate::distance::DEFAULT_DELTA,
            tau: crate::decode::DEFAULT_THRESHOLD,
            hull_k: crate::decode::DEFAULT_HULL_K,
            seed: 0,
        }
    }
}

impl SweepConfig {
    fn validate(&self) -> Result<(SamplingBandConfig, DecodeConfig)> {
        if self.strategies.is_empty() || self.decoders.is_empty() || self.n_values.is_empty() {
            return Err(Error::Config("strategies, decoders and n values must be non-empty".into()));
        }
        if self.n_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("n values must be strictly ascending".into()));
        }
        if self.n_values[0] == 0 {
            return Err(Error::InvalidCount("n must be >= 1".into()));
        }
        Ok((SamplingBandConfig::new(self.delta)?, DecodeConfig::new(self.tau, self.hull_k)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SizeStats {
    pub count: usize,
    /// `None` when the bucket is empty.
    pub mean_iou: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionRow {
    pub strategy: Strategy,
    pub n: usize,
    pub decoder: Decoder,
    /// Mean over all masks; a failed round trip scores 0.
    pub mean_iou: f64,
    pub masks: usize,
    pub failures: usize,
    pub small: SizeStats,
    pub medium: SizeStats,
    pub large: SizeStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionReport {
    pub schema: String,
    pub corpus: String,
    pub masks: usize,
    pub config: SweepConfig,
    pub rows: Vec<ReconstructionRow>,
}

impl ReconstructionReport {
    pub fn row(&self, strategy: Strategy, n: usize, decoder: Decoder) -> Option<&ReconstructionRow> {
        self.rows
            .iter()
            .find(|r| r.strategy == strategy && r.n == n && r.decoder == decoder)
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("{CSV_VERSION_LINE}\n{CSV_COLUMNS}\n");
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{:.6},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                r.strategy,
                r.n,
                r.decoder,
                r.mean_iou,
                r.masks,
                r.failures,
                r.small.count,
                opt(r.small.mean_iou),
                r.medium.count,
                opt(r.medium.mean_iou),
                r.large.count,
                opt(r.large.mean_iou),
                self.config.delta,
                self.config.tau,
                self.config.seed,
                csv_field(&self.corpus),
            ));
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn size_bucket(area: usize) -> usize {
    if area < SMALL_AREA {
        0
    } else if area < MEDIUM_AREA {
        1
    } else {
        2
    }
}

/// IoU of every configured cell for one mask, in (strategy, n, decoder) order.
fn mask_cells(mask: &BinaryMask, key: u64, cfg: &SweepConfig, band: SamplingBandConfig, dcfg: &DecodeConfig) -> Vec<Option<f64>> {
    let mut enc = MaskEncoder::new(mask, band);
    let seed = SamplerSeed(cfg.seed).derive(key);
    let mut out = Vec::with_capacity(cfg.strategies.len() * cfg.n_values.len() * cfg.decoders.len());
    for &strategy in &cfg.strategies {
        for &n in &cfg.n_values {
            let encoded = enc.encode(strategy, n, seed.derive(n as u64));
            for &decoder in &cfg.decoders {
                let iou = encoded.as_ref().ok().and_then(|e| {
                    decode_points(&e.points, decoder, mask.height(), mask.width(), dcfg, e.grid.as_ref())
                        .and_then(|m| mask_iou(&m, mask))
                        .ok()
                });
                out.push(iou);
            }
        }
    }
    out
}

/// Runs every (strategy, n, decoder) cell over the corpus.
///
/// Mask `i` draws its randomness from `seed.derive(i)`, work is spread over
/// the current rayon pool, and results are reduced in corpus order, so the
/// report does not depend on the thread count.
pub fn reconstruction_sweep(corpus: &[BinaryMask], corpus_id: &str, cfg: &SweepConfig) -> Result<ReconstructionReport> {
    if corpus.is_empty() {
        return Err(Error::Config("empty corpus".into()));
    }
    let (band, dcfg) = cfg.validate()?;
    let per_mask: Vec<Vec<Option<f64>>> = corpus
        .par_iter()
        .enumerate()
        .map(|(i, m)| mask_cells(m, i as u64, cfg, band, &dcfg))
        .collect();

    let buckets: Vec<usize> = corpus.iter().map(|m| size_bucket(m.area())).collect();
    let mut rows = Vec::new();
    let mut cell = 0usize;
    for &strategy in &cfg.strategies {
        for &n in &cfg.n_values {
            for &decoder in &cfg.decoders {
                let mut sum = 0.0;
                let mut failures = 0;
                let mut bucket_sum = [0.0f64; 3];
                let mut bucket_count = [0usize; 3];
                for (ious, &b) in per_mask.iter().zip(&buckets) {
                    let v = ious[cell].unwrap_or_else(|| {
                        failures += 1;
                        0.0
                    });
                    sum += v;
                    bucket_sum[b] += v;
                    bucket_count[b] += 1;
                }
                let stats = |b: usize| SizeStats {
                    count: bucket_count[b],
                    mean_iou: (bucket_count[b] > 0).then(|| bucket_sum[b] / bucket_count[b] as f64),
                };
                rows.push(ReconstructionRow {
                    strategy,
                    n,
                    decoder,
                    mean_iou: sum / corpus.len() as f64,
                    masks: corpus.len(),
                    failures,
                    small: stats(0),
                    medium: stats(1),
                    large: stats(2),
                });
                cell += 1;
            }
        }
    }
    Ok(ReconstructionReport {
        schema: REPORT_SCHEMA.to_string(),
        corpus: corpus_id.to_string(),
        masks: corpus.len(),
        config: cfg.clone(),
        rows,
    })
}

/// Runs `f` on a dedicated pool of `threads` workers, or on the global pool
/// when `threads` is `None`.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map(|pool| pool.install(f))
            .map_err(|e| Error::Config(format!("thread pool: {e}"))),
    }
}
