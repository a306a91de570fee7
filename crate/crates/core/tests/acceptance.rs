//! Acceptance suite. Prints one PASS/FAIL/SKIP line per criterion and exits
//! non-zero if any criterion fails.
//!
//! Set `REPPOINTS_COCO_ANNOTATIONS` to a COCO val2017 instances file to run
//! the annotation-backed reconstruction check; it is skipped otherwise.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use reppoints_core::decode::delaunay;
use reppoints_core::distance::distance_map;
use reppoints_core::field_ops::{classification_macs, head_cost, regression_macs, HeadMode};
use reppoints_core::geom::Point;
use reppoints_core::harness::{
    load_annotations, reconstruction_sweep, record_masks, synthetic_corpus, with_threads, Decoder,
    ReconstructionReport, Strategy, SweepConfig,
};
use reppoints_core::losses::{chamfer_loss, point_to_point_loss};
use reppoints_core::mask::{boundary_points, BinaryMask};
use reppoints_core::rng::{uniform_below, unit_f64};
use reppoints_core::{DensePointSet, SamplerSeed};

const N_VALUES: [usize; 7] = [9, 25, 49, 81, 225, 441, 729];
const REFERENCE_IOU: [f64; 7] = [53.9, 70.2, 78.5, 84.3, 91.2, 94.3, 95.6];
const REFERENCE_TOLERANCE: f64 = 3.0;
const CORPUS_SEED: u64 = 20240;
const SWEEP_SEED: u64 = 7;

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn dts_tri(report: &ReconstructionReport) -> Vec<f64> {
    N_VALUES
        .iter()
        .map(|&n| report.row(Strategy::Dts, n, Decoder::Triangulation).unwrap().mean_iou)
        .collect()
}

fn fmt_ious(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(" / ")
}

fn coco_reproduction() -> Outcome {
    let Ok(path) = std::env::var("REPPOINTS_COCO_ANNOTATIONS") else {
        return Outcome::Skip("REPPOINTS_COCO_ANNOTATIONS not set; needs COCO val2017 instances JSON".into());
    };
    let loaded = match load_annotations(path.as_ref()) {
        Ok(l) => l,
        Err(e) => return Outcome::Fail(format!("cannot load {path}: {e}")),
    };
    let masks = match record_masks(&loaded.records) {
        Ok(m) => m,
        Err(e) => return Outcome::Fail(format!("cannot decode {path}: {e}")),
    };
    let cfg = SweepConfig {
        seed: SWEEP_SEED,
        ..SweepConfig::default()
    };
    let report = match reconstruction_sweep(&masks, &path, &cfg) {
        Ok(r) => r,
        Err(e) => return Outcome::Fail(format!("sweep failed: {e}")),
    };
    let ours: Vec<f64> = dts_tri(&report).iter().map(|v| 100.0 * v).collect();
    let worst = ours
        .iter()
        .zip(REFERENCE_IOU)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    check(
        worst <= REFERENCE_TOLERANCE,
        format!(
            "{} annotations ({} zero-area skipped), IoU x100 {} vs {:?}, max |diff| {worst:.2} (tol {REFERENCE_TOLERANCE})",
            masks.len(),
            loaded.skipped_zero_area,
            ours.iter().map(|x| format!("{x:.1}")).collect::<Vec<_>>().join(" / "),
            REFERENCE_IOU
        ),
    )
}

fn synthetic_surrogate(report: &ReconstructionReport, elapsed: Duration) -> Outcome {
    let v = dts_tri(report);
    let monotone = v.windows(2).all(|w| w[0] <= w[1]);
    let at225 = v[4];
    let at729 = v[6];
    check(
        monotone && at225 > 0.90 && at729 > 0.95 && elapsed < Duration::from_secs(120),
        format!(
            "DTS+tri IoU {}; monotone {monotone}; n=225 {at225:.4} (>0.90); n=729 {at729:.4} (>0.95); {:.1}s (<120s)",
            fmt_ious(&v),
            elapsed.as_secs_f64()
        ),
    )
}

fn decoder_ordering(report: &ReconstructionReport) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for n in [9, 25, 49, 81, 225] {
        let tri = report.row(Strategy::Dts, n, Decoder::Triangulation).unwrap().mean_iou;
        let hull = report.row(Strategy::Dts, n, Decoder::Concave).unwrap().mean_iou;
        ok &= tri >= hull;
        parts.push(format!("n={n} {tri:.4}>={hull:.4}"));
    }
    check(ok, parts.join(", "))
}

fn strategy_ordering(report: &ReconstructionReport) -> Outcome {
    let iou = |s, n, d| report.row(s, n, d).unwrap().mean_iou;
    let b9 = iou(Strategy::Boundary, 9, Decoder::Concave);
    let g9 = iou(Strategy::Grid, 9, Decoder::Grid);
    let d729 = iou(Strategy::Dts, 729, Decoder::Triangulation);
    let b729 = iou(Strategy::Boundary, 729, Decoder::Concave);
    check(
        b9 > g9 && d729 > b729,
        format!("n=9 boundary+concave {b9:.4} > grid+grid {g9:.4}; n=729 dts+tri {d729:.4} > boundary+concave {b729:.4}"),
    )
}

fn random_mask(seed: SamplerSeed, h: usize, w: usize) -> BinaryMask {
    let mut rng = seed.rng(0);
    let density = 0.05 + 0.9 * unit_f64(&mut rng);
    loop {
        let m = BinaryMask::from_fn(h, w, |_, _| unit_f64(&mut rng) < density).unwrap();
        if !m.is_empty() {
            return m;
        }
    }
}

fn edt_oracle(m: &BinaryMask) -> Vec<f64> {
    let b = boundary_points(m).unwrap().points;
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in &b {
        x0 = x0.min(p.x);
        x1 = x1.max(p.x);
        y0 = y0.min(p.y);
        y1 = y1.max(p.y);
    }
    let scale = ((x1 - x0).max(1.0) * (y1 - y0).max(1.0)).sqrt();
    let mut out = Vec::with_capacity(m.height() * m.width());
    for r in 0..m.height() {
        for c in 0..m.width() {
            let best = b
                .iter()
                .map(|q| {
                    let (dx, dy) = (c as f64 + 0.5 - q.x, r as f64 + 0.5 - q.y);
                    (dx * dx + dy * dy).sqrt()
                })
                .fold(f64::INFINITY, f64::min);
            out.push(best / scale);
        }
    }
    out
}

fn chamfer_oracle(a: &[Point], b: &[Point]) -> f64 {
    let directed = |from: &[Point], to: &[Point]| {
        let mut d: Vec<f64> = from
            .iter()
            .map(|p| {
                to.iter()
                    .map(|q| ((p.x - q.x).powi(2) + (p.y - q.y).powi(2)).sqrt())
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        d.sort_by(|x, y| x.partial_cmp(y).unwrap());
        d.iter().sum::<f64>()
    };
    let n2 = 2.0 * a.len() as f64;
    directed(a, b) / n2 + directed(b, a) / n2
}

fn random_points(rng: &mut rand_chacha::ChaCha8Rng, n: usize, span: f64) -> Vec<Point> {
    (0..n)
        .map(|_| Point::new(span * unit_f64(rng), span * unit_f64(rng)))
        .collect()
}

/// Integer in-circle determinant (positive: `d` strictly inside the
/// circumcircle of counterclockwise `a, b, c`).
fn incircle_i128(a: [i128; 2], b: [i128; 2], c: [i128; 2], d: [i128; 2]) -> i128 {
    let row = |p: [i128; 2]| {
        let (x, y) = (p[0] - d[0], p[1] - d[1]);
        (x, y, x * x + y * y)
    };
    let (ax, ay, a2) = row(a);
    let (bx, by, b2) = row(b);
    let (cx, cy, c2) = row(c);
    ax * (by * c2 - b2 * cy) - ay * (bx * c2 - b2 * cx) + a2 * (bx * cy - by * cx)
}

fn orient_i128(a: [i128; 2], b: [i128; 2], c: [i128; 2]) -> i128 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn oracle_equivalence() -> Outcome {
    let mut edt_bad = 0;
    for i in 0..100 {
        let m = random_mask(SamplerSeed(1000 + i), 32, 32);
        let d = distance_map(&boundary_points(&m).unwrap(), 32, 32).unwrap();
        if d.values != edt_oracle(&m) {
            edt_bad += 1;
        }
    }

    let mut chamfer_bad = 0;
    let mut rng = SamplerSeed(2000).rng(0);
    let mut chamfer_cases = 0;
    for n in 1..=64 {
        for _ in 0..4 {
            let a = random_points(&mut rng, n, 100.0);
            let b = random_points(&mut rng, n, 100.0);
            let got = chamfer_loss(
                &DensePointSet::from_positions(a.clone()).unwrap(),
                &DensePointSet::from_positions(b.clone()).unwrap(),
            )
            .unwrap();
            chamfer_cases += 1;
            if got != chamfer_oracle(&a, &b) {
                chamfer_bad += 1;
            }
        }
    }

    // integer coordinates keep the oracle exact and produce many
    // collinear and cocircular configurations
    let mut tri_bad = 0;
    let mut rng = SamplerSeed(3000).rng(0);
    for _ in 0..100 {
        let coords: Vec<[i128; 2]> = (0..200)
            .map(|_| [uniform_below(&mut rng, 120) as i128, uniform_below(&mut rng, 120) as i128])
            .collect();
        let set = DensePointSet::from_positions(coords.iter().map(|p| Point::new(p[0] as f64, p[1] as f64))).unwrap();
        let t = delaunay(&set).unwrap();
        let verts: Vec<[i128; 2]> = t.vertices.iter().map(|v| [v.x as i128, v.y as i128]).collect();
        let ok = t.triangles.iter().all(|&[a, b, c]| {
            orient_i128(verts[a], verts[b], verts[c]) > 0
                && verts.iter().all(|&d| incircle_i128(verts[a], verts[b], verts[c], d) <= 0)
        });
        if !ok {
            tri_bad += 1;
        }
    }
    check(
        edt_bad == 0 && chamfer_bad == 0 && tri_bad == 0,
        format!(
            "distance_map mismatches {edt_bad}/100 masks (32x32); chamfer mismatches {chamfer_bad}/{chamfer_cases} sets (n<=64); delaunay empty-circle violations {tri_bad}/100 sets (200 pts)"
        ),
    )
}

fn loss_properties() -> Outcome {
    let mut rng = SamplerSeed(4000).rng(0);
    let (mut asym, mut perm, mut order, mut nonzero) = (0, 0, 0, 0);
    for i in 0..1000 {
        let n = 1 + (i % 64);
        let a = random_points(&mut rng, n, 64.0);
        let b = random_points(&mut rng, n, 64.0);
        let (sa, sb) = (
            DensePointSet::from_positions(a.clone()).unwrap(),
            DensePointSet::from_positions(b.clone()).unwrap(),
        );
        let set = chamfer_loss(&sa, &sb).unwrap();
        if set != chamfer_loss(&sb, &sa).unwrap() {
            asym += 1;
        }
        let mut shuffled = b.clone();
        for k in (1..shuffled.len()).rev() {
            let j = uniform_below(&mut rng, k as u64 + 1) as usize;
            shuffled.swap(k, j);
        }
        if set != chamfer_loss(&sa, &DensePointSet::from_positions(shuffled).unwrap()).unwrap() {
            perm += 1;
        }
        if set > point_to_point_loss(&sa, &sb).unwrap() {
            order += 1;
        }
        if chamfer_loss(&sa, &sa).unwrap() != 0.0 || point_to_point_loss(&sa, &sa).unwrap() != 0.0 {
            nonzero += 1;
        }
    }
    check(
        asym + perm + order + nonzero == 0,
        format!(
            "1000 pairs: asymmetric {asym}, permutation-variant {perm}, L_set > L_point {order}, identical-set non-zero {nonzero}"
        ),
    )
}

fn complexity_model() -> Outcome {
    let c = 256;
    let k = 9;
    let gp_const = classification_macs(9, k, c, true) == classification_macs(81, k, c, true)
        && classification_macs(729, k, c, true) == classification_macs(9, k, c, true);
    let sof_linear = regression_macs(81, c, true) == 9 * regression_macs(9, c, true)
        && regression_macs(729, c, true) == 81 * regression_macs(9, c, true);
    let cat_quadratic = regression_macs(81, c, false) == 81 * regression_macs(9, c, false)
        && regression_macs(729, c, false) == 6561 * regression_macs(9, c, false);
    let t9 = head_cost(9, k, c, HeadMode::SharedOffset).total() as f64;
    let t81 = head_cost(81, k, c, HeadMode::SharedOffset).total() as f64;
    let rise = (t81 - t9) / t9;
    check(
        gp_const && sof_linear && cat_quadratic && rise.abs() < 0.10,
        format!(
            "group-pool cls constant {gp_const}, shared-offset reg linear {sof_linear}, concat reg quadratic {cat_quadratic}; GP+SOF total n=9 {t9:.0} -> n=81 {t81:.0} MACs ({:+.2}%, limit 10%)",
            100.0 * rise
        ),
    )
}

fn determinism(corpus: &[BinaryMask], cfg: &SweepConfig, reference: &ReconstructionReport) -> Outcome {
    let run = |t: usize| {
        with_threads(Some(t), || reconstruction_sweep(corpus, "synthetic", cfg))
            .and_then(|r| r)
            .and_then(|r| Ok((r.to_csv(), r.to_json()?)))
    };
    let (a, b) = match (run(1), run(4)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return Outcome::Fail(format!("sweep failed: {e}")),
    };
    let r = (reference.to_csv(), reference.to_json().unwrap());
    check(
        a == b && a == r,
        format!(
            "1 thread vs 4 threads vs global pool: CSV identical {}, JSON identical {} ({} rows)",
            a.0 == b.0 && a.0 == r.0,
            a.1 == b.1 && a.1 == r.1,
            reference.rows.len()
        ),
    )
}

fn main() -> ExitCode {
    let corpus = synthetic_corpus(SamplerSeed(CORPUS_SEED), 200, 128).expect("synthetic corpus");

    let t = Instant::now();
    let dts_cfg = SweepConfig {
        seed: SWEEP_SEED,
        ..SweepConfig::default()
    };
    let dts_report = reconstruction_sweep(&corpus, "synthetic", &dts_cfg).expect("sweep");
    let dts_elapsed = t.elapsed();

    let full_cfg = SweepConfig {
        strategies: Strategy::ALL.to_vec(),
        decoders: Decoder::ALL.to_vec(),
        seed: SWEEP_SEED,
        ..SweepConfig::default()
    };
    let full = reconstruction_sweep(&corpus, "synthetic", &full_cfg).expect("sweep");

    let results: Vec<(&str, Outcome)> = vec![
        ("coco-reproduction", coco_reproduction()),
        ("synthetic-surrogate", synthetic_surrogate(&dts_report, dts_elapsed)),
        ("decoder-ordering", decoder_ordering(&full)),
        ("strategy-ordering", strategy_ordering(&full)),
        ("oracle-equivalence", oracle_equivalence()),
        ("loss-properties", loss_properties()),
        ("complexity-model", complexity_model()),
        ("determinism", determinism(&corpus, &full_cfg, &full)),
    ];

    let mut failed = 0;
    println!();
    for (name, outcome) in &results {
        match outcome {
            Outcome::Pass(d) => println!("PASS {name}: {d}"),
            Outcome::Fail(d) => {
                failed += 1;
                println!("FAIL {name}: {d}")
            }
            Outcome::Skip(d) => println!("SKIP {name}: {d}"),
        }
    }
    println!("acceptance: {} criteria, {failed} failed", results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
