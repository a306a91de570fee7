//! Point-to-point versus set-to-set loss on jittered encodings.

use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sweep::{MaskEncoder, Strategy};
use crate::distance::SamplingBandConfig;
use crate::error::{Error, Result};
use crate::losses::{chamfer_loss, point_to_point_loss};
use crate::mask::BinaryMask;
use crate::rng::{sample_without_replacement, SamplerSeed};
use crate::sampling::{DensePointSet, ScoredPoint};

pub const LOSS_CSV_VERSION_LINE: &str = "# reppoints loss report v1";
pub const LOSS_CSV_COLUMNS: &str =
    "strategy,n,sigma,masks,failures,mean_point,mean_set,mean_point_shuffled,mean_set_shuffled,set_le_point,seed";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossReportConfig {
    pub strategies: Vec<Strategy>,
    pub n_values: Vec<usize>,
    /// Standard deviations (pixels) of the per-coordinate Gaussian jitter.
    pub sigmas: Vec<f64>,
    pub delta: f64,
    pub seed: u64,
}

impl Default for LossReportConfig {
    fn default() -> Self {
        Self {
            strategies: vec![Strategy::Dts],
            n_values: vec![81],
            sigmas: vec![0.0, 1.0],
            delta: crate::distance::DEFAULT_DELTA,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossRow {
    pub strategy: Strategy,
    pub n: usize,
    pub sigma: f64,
    pub masks: usize,
    /// Masks the strategy could not encode at this `n`.
    pub failures: usize,
    pub mean_point: f64,
    pub mean_set: f64,
    /// Losses after additionally shuffling the point order.
    pub mean_point_shuffled: f64,
    pub mean_set_shuffled: f64,
    /// Masks where the set loss did not exceed the point loss.
    pub set_le_point: usize,
}

#[derive(Debug, Clone, Copy)]
struct PairLosses {
    point: f64,
    set: f64,
    point_shuffled: f64,
    set_shuffled: f64,
}

fn jitter(reference: &DensePointSet, sigma: f64, seed: SamplerSeed) -> Result<(DensePointSet, DensePointSet)> {
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::Config(format!("sigma {sigma}: {e}")))?;
    let mut rng = seed.rng(1);
    let moved: Vec<ScoredPoint> = reference
        .points()
        .iter()
        .map(|p| ScoredPoint::new(p.x + normal.sample(&mut rng), p.y + normal.sample(&mut rng), p.score))
        .collect();
    let mut order_rng = seed.rng(2);
    let shuffled = sample_without_replacement(&mut order_rng, &moved, moved.len());
    Ok((DensePointSet::new(moved)?, DensePointSet::new(shuffled)?))
}

/// Per (strategy, n, sigma): mean losses between the ground-truth encoding and
/// a seeded jittered copy, plus the same after shuffling indices.
pub fn loss_report(corpus: &[BinaryMask], cfg: &LossReportConfig) -> Result<Vec<LossRow>> {
    if corpus.is_empty() {
        return Err(Error::Config("empty corpus".into()));
    }
    if cfg.sigmas.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
        return Err(Error::Config("sigmas must be finite and >= 0".into()));
    }
    let band = SamplingBandConfig::new(cfg.delta)?;
    let per_mask: Vec<Vec<Option<PairLosses>>> = corpus
        .par_iter()
        .enumerate()
        .map(|(i, mask)| -> Result<Vec<Option<PairLosses>>> {
            let seed = SamplerSeed(cfg.seed).derive(i as u64);
            let mut enc = MaskEncoder::new(mask, band);
            let mut out = Vec::new();
            for &strategy in &cfg.strategies {
                for &n in &cfg.n_values {
                    let reference = enc.encode(strategy, n, seed.derive(n as u64)).ok();
                    for (si, &sigma) in cfg.sigmas.iter().enumerate() {
                        let Some(reference) = &reference else {
                            out.push(None);
                            continue;
                        };
                        let pts = &reference.points;
                        let (moved, shuffled) = jitter(pts, sigma, seed.derive(n as u64).derive(si as u64))?;
                        out.push(Some(PairLosses {
                            point: point_to_point_loss(&moved, pts)?,
                            set: chamfer_loss(&moved, pts)?,
                            point_shuffled: point_to_point_loss(&shuffled, pts)?,
                            set_shuffled: chamfer_loss(&shuffled, pts)?,
                        }));
                    }
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    let mut cell = 0;
    for &strategy in &cfg.strategies {
        for &n in &cfg.n_values {
            for &sigma in &cfg.sigmas {
                let ok: Vec<PairLosses> = per_mask.iter().filter_map(|m| m[cell]).collect();
                let mean = |f: fn(&PairLosses) -> f64| {
                    if ok.is_empty() {
                        0.0
                    } else {
                        ok.iter().map(f).sum::<f64>() / ok.len() as f64
                    }
                };
                rows.push(LossRow {
                    strategy,
                    n,
                    sigma,
                    masks: corpus.len(),
                    failures: corpus.len() - ok.len(),
                    mean_point: mean(|l| l.point),
                    mean_set: mean(|l| l.set),
                    mean_point_shuffled: mean(|l| l.point_shuffled),
                    mean_set_shuffled: mean(|l| l.set_shuffled),
                    set_le_point: ok.iter().filter(|l| l.set <= l.point).count(),
                });
                cell += 1;
            }
        }
    }
    Ok(rows)
}

pub fn loss_report_csv(rows: &[LossRow], seed: u64) -> String {
    let mut out = format!("{LOSS_CSV_VERSION_LINE}\n{LOSS_CSV_COLUMNS}\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{:.6},{:.6},{:.6},{:.6},{},{}\n",
            r.strategy,
            r.n,
            r.sigma,
            r.masks,
            r.failures,
            r.mean_point,
            r.mean_set,
            r.mean_point_shuffled,
            r.mean_set_shuffled,
            r.set_le_point,
            seed
        ));
    }
    out
}
