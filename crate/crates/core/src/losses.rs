//! Point-level supervision metrics: indexed L2, Chamfer and point
//! classification cross entropy.

use crate::error::{Error, Result};
use crate::geom::Point;
use crate::sampling::DensePointSet;

/// Probabilities are clamped to `[PROB_EPS, 1 - PROB_EPS]` before the log.
pub const PROB_EPS: f64 = 1e-7;

/// Mean Euclidean distance between index-matched points.
pub fn point_to_point_loss(r: &DensePointSet, r_gt: &DensePointSet) -> Result<f64> {
    if r.len() != r_gt.len() {
        return Err(Error::Cardinality(format!("{} vs {} points", r.len(), r_gt.len())));
    }
    let sum: f64 = r.positions().zip(r_gt.positions()).map(|(a, b)| a.dist(b)).sum();
    Ok(sum / r.len() as f64)
}

/// Sum over `from` of the distance to the nearest point of `to`. Terms are
/// added in ascending order, so the sum does not depend on point order.
///
/// Neighbors are searched outward from the query's x position in an x-sorted
/// copy of `to`, stopping once the x gap alone exceeds the best distance.
fn directed_nn_sum(from: &[Point], to: &[Point]) -> f64 {
    let mut sorted: Vec<Point> = to.to_vec();
    sorted.sort_by(|a, b| a.x.total_cmp(&b.x));
    let mut d: Vec<f64> = from.iter().map(|&p| nearest_distance(&sorted, p)).collect();
    d.sort_by(f64::total_cmp);
    d.iter().sum()
}

fn nearest_distance(sorted: &[Point], p: Point) -> f64 {
    let split = sorted.partition_point(|q| q.x < p.x);
    let mut best = f64::INFINITY;
    for q in &sorted[split..] {
        if q.x - p.x > best {
            break;
        }
        best = best.min(p.dist(*q));
    }
    for q in sorted[..split].iter().rev() {
        if p.x - q.x > best {
            break;
        }
        best = best.min(p.dist(*q));
    }
    best
}

/// Symmetric Chamfer distance with the shared `1 / 2n` normalization.
/// Both sets must have the same size.
pub fn chamfer_loss(r: &DensePointSet, r_gt: &DensePointSet) -> Result<f64> {
    if r.len() != r_gt.len() {
        return Err(Error::Cardinality(format!(
            "chamfer needs equal sizes, got {} vs {}",
            r.len(),
            r_gt.len()
        )));
    }
    let a: Vec<Point> = r.positions().collect();
    let b: Vec<Point> = r_gt.positions().collect();
    let n2 = 2.0 * a.len() as f64;
    Ok(directed_nn_sum(&a, &b) / n2 + directed_nn_sum(&b, &a) / n2)
}

/// Chamfer variant for unequal sizes: each directed term is averaged over its
/// own source set and the two are halved. Agrees with [`chamfer_loss`] when
/// sizes match. This normalization is a harness extension.
pub fn chamfer_loss_unbalanced(r: &DensePointSet, r_gt: &DensePointSet) -> f64 {
    let a: Vec<Point> = r.positions().collect();
    let b: Vec<Point> = r_gt.positions().collect();
    0.5 * directed_nn_sum(&a, &b) / a.len() as f64 + 0.5 * directed_nn_sum(&b, &a) / b.len() as f64
}

/// Mean binary cross entropy of foreground probabilities against {0, 1} labels.
pub fn point_cls_loss(predicted: &[f64], labels: &[u8]) -> Result<f64> {
    if predicted.len() != labels.len() {
        return Err(Error::Cardinality(format!(
            "{} predictions vs {} labels",
            predicted.len(),
            labels.len()
        )));
    }
    if predicted.is_empty() {
        return Err(Error::Cardinality("no points".into()));
    }
    let mut sum = 0.0;
    for (&p, &y) in predicted.iter().zip(labels) {
        if y > 1 {
            return Err(Error::Config(format!("label {y} is not 0 or 1")));
        }
        let p = p.clamp(PROB_EPS, 1.0 - PROB_EPS);
        sum -= if y == 1 { p.ln() } else { (1.0 - p).ln() };
    }
    Ok(sum / predicted.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::ScoredPoint;

    fn set(pts: &[(f64, f64)]) -> DensePointSet {
        DensePointSet::new(pts.iter().map(|&(x, y)| ScoredPoint::new(x, y, 1.0)).collect()).unwrap()
    }

    #[test]
    fn point_to_point_cases() {
        let a = set(&[(0.0, 0.0), (1.0, 2.0), (-3.0, 5.0)]);
        assert_eq!(point_to_point_loss(&a, &a).unwrap(), 0.0);
        let moved = set(&[(3.0, 4.0), (4.0, 6.0), (0.0, 9.0)]);
        assert_eq!(point_to_point_loss(&a, &moved).unwrap(), 5.0);
        let b = set(&[(0.0, 0.0), (1.0, 1.0)]);
        assert!(matches!(point_to_point_loss(&b, &a), Err(Error::Cardinality(_))));
    }

    #[test]
    fn chamfer_cases() {
        let a = set(&[(0.0, 0.0), (2.0, 0.0)]);
        let b = set(&[(1.0, 0.0), (3.0, 0.0)]);
        assert_eq!(chamfer_loss(&a, &b).unwrap(), 1.0);
        let p = set(&[(2.0, 0.0), (0.0, 0.0)]);
        assert_eq!(chamfer_loss(&a, &p).unwrap(), 0.0);
        assert!(matches!(chamfer_loss(&a, &set(&[(0.0, 0.0)])), Err(Error::Cardinality(_))));
        assert_eq!(chamfer_loss_unbalanced(&a, &b), 1.0);
        assert!(chamfer_loss_unbalanced(&a, &set(&[(0.0, 0.0)])) > 0.0);
    }

    #[test]
    fn cls_cases() {
        let eps = 1e-7;
        let perfect = point_cls_loss(&[1.0 - eps, eps, 1.0, 0.0], &[1, 0, 1, 0]).unwrap();
        assert!(perfect <= 1e-6);
        let half = point_cls_loss(&[0.5; 6], &[1, 0, 1, 1, 0, 0]).unwrap();
        assert!((half - std::f64::consts::LN_2).abs() < 1e-15);
        let v = point_cls_loss(&[0.9, 0.2], &[1, 0]).unwrap();
        assert!((v - (-(0.9f64).ln() - (0.8f64).ln()) / 2.0).abs() < 1e-15);
        assert!(matches!(point_cls_loss(&[0.5], &[1, 0]), Err(Error::Cardinality(_))));
    }
}
