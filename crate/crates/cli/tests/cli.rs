use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use reppoints_core::{rle_decode, BinaryMask, Rle};

fn reppoints(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_reppoints"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = reppoints(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn encode_then_decode_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mask = BinaryMask::from_fn(40, 48, |r, c| (r as i32 - 20).pow(2) + (c as i32 - 22).pow(2) < 150).unwrap();
    let pgm = dir.path().join("mask.pgm");
    fs::write(&pgm, mask.to_pgm()).unwrap();
    let pts = dir.path().join("pts.json");
    let fields = dir.path().join("fields.json");
    ok(&["encode", "--input", s(&pgm), "--strategy", "dts", "--n", "400", "--seed", "3", "--fields", s(&fields), "--out", s(&pts)]);

    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&pts).unwrap()).unwrap();
    assert_eq!((doc["height"].as_u64(), doc["width"].as_u64(), doc["n"].as_u64()), (Some(40), Some(48), Some(400)));
    assert_eq!(doc["points"].as_array().unwrap().len(), 400);
    let f: serde_json::Value = serde_json::from_str(&fs::read_to_string(&fields).unwrap()).unwrap();
    assert_eq!(f["distance"]["values"].as_array().unwrap().len(), 40 * 48);

    let prefix = dir.path().join("decoded");
    ok(&["decode", "--input", s(&pts), "--decoder", "triangulation", "--out", s(&prefix)]);
    let decoded = BinaryMask::from_pgm(&fs::read(dir.path().join("decoded.pgm")).unwrap()).unwrap();
    let rle: Rle = serde_json::from_str(&fs::read_to_string(dir.path().join("decoded.rle.json")).unwrap()).unwrap();
    assert_eq!(rle_decode(&rle.counts, 40, 48).unwrap(), decoded);
    assert!(reppoints_core::mask_iou(&decoded, &mask).unwrap() > 0.9);
}

#[test]
fn encode_from_annotations_and_rle() {
    let dir = tempfile::tempdir().unwrap();
    let ann = dir.path().join("ann.json");
    fs::write(
        &ann,
        r#"{"images": [{"id": 1, "height": 20, "width": 20}],
            "annotations": [{"id": 5, "image_id": 1, "segmentation": [[2, 2, 15, 3, 14, 16, 3, 15]]}]}"#,
    )
    .unwrap();
    let out = ok(&["encode", "--annotations", s(&ann), "--strategy", "grid", "--n", "16"]);
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["strategy"], "grid");
    assert_eq!(doc["points"].as_array().unwrap().len(), 16);

    let rle = dir.path().join("m.json");
    fs::write(&rle, r#"{"size": [4, 4], "counts": [5, 2, 2, 2, 5]}"#).unwrap();
    let out = ok(&["encode", "--input", s(&rle), "--strategy", "boundary", "--n", "8"]);
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["n"], 8);
}

#[test]
fn sweep_outputs_do_not_depend_on_threads() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str, name: &str| {
        let prefix = dir.path().join(name);
        ok(&[
            "sweep", "--synthetic-count", "12", "--synthetic-size", "48", "--strategy", "dts,grid", "--decoder",
            "triangulation,concave", "--n", "9,49", "--seed", "5", "--threads", threads, "--out", s(&prefix),
        ]);
        (
            fs::read(prefix.with_extension("csv")).unwrap(),
            fs::read(prefix.with_extension("json")).unwrap(),
        )
    };
    let a = run("1", "a");
    let b = run("3", "b");
    assert_eq!(a, b);
    let csv = String::from_utf8(a.0).unwrap();
    assert_eq!(csv.lines().count(), 2 + 2 * 2 * 2);
    assert!(csv.starts_with("# reppoints reconstruction report v1\nstrategy,n,decoder,mean_iou"));
}

#[test]
fn cost_losses_and_synth() {
    let out = ok(&["cost", "--n", "9,81", "--channels", "4"]);
    let csv = String::from_utf8(out.stdout).unwrap();
    assert_eq!(csv.lines().next(), Some("n,k,mode,macs"));
    assert_eq!(csv.lines().count(), 1 + 2 * 3);

    let out = ok(&["losses", "--synthetic-count", "6", "--synthetic-size", "48", "--n", "16", "--sigma", "0"]);
    let csv = String::from_utf8(out.stdout).unwrap();
    let row: Vec<&str> = csv.lines().nth(2).unwrap().split(',').collect();
    assert_eq!(&row[..7], &["dts", "16", "0", "6", "0", "0.000000", "0.000000"]);

    let dir = tempfile::tempdir().unwrap();
    ok(&["synth", "--count", "3", "--size", "32", "--seed", "1", "--out", s(dir.path())]);
    let rles: Vec<Rle> = serde_json::from_str(&fs::read_to_string(dir.path().join("corpus.json")).unwrap()).unwrap();
    assert_eq!(rles.len(), 3);
    let first = BinaryMask::from_pgm(&fs::read(dir.path().join("0000.pgm")).unwrap()).unwrap();
    assert_eq!(rles[0].decode().unwrap(), first);
}

#[test]
fn errors_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\"images\": [").unwrap();
    let out = reppoints(&["encode", "--annotations", s(&bad)]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("parse error at byte 11"));

    let out = reppoints(&["sweep", "--synthetic-count", "2", "--strategy", "hull", "--out", s(&dir.path().join("x"))]);
    assert!(!out.status.success());
}
