use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use reppoints_core::decode::DecodeConfig;
use reppoints_core::field_ops::head_cost_csv;
use reppoints_core::harness::{
    decode_points, encode_mask, field_dump_json, load_annotations, loss_report, loss_report_csv, reconstruction_sweep,
    record_masks, synthetic_corpus, with_threads, Decoder, LossReportConfig, Strategy, SweepConfig,
};
use reppoints_core::{rle_encode, BinaryMask, DensePointSet, Rle, SamplerSeed, SamplingBandConfig};

#[derive(Parser)]
#[command(name = "reppoints", version, about = "Encode masks as attributed dense point sets and decode them back")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mask (PGM, RLE JSON or annotation) to point-set JSON
    Encode(EncodeArgs),
    /// Point-set JSON to mask (PGM and RLE JSON)
    Decode(DecodeArgs),
    /// Reconstruction IoU sweep, written as CSV and JSON
    Sweep(SweepArgs),
    /// Point vs set loss report on jittered encodings
    Losses(LossesArgs),
    /// Head multiply-accumulate model as CSV
    Cost(CostArgs),
    /// Write a synthetic mask corpus
    Synth(SynthArgs),
}

#[derive(Args)]
struct EncodeArgs {
    /// Mask file: binary PGM or RLE JSON `{"size": [h, w], "counts": [...]}`
    #[arg(long, conflicts_with = "annotations", required_unless_present = "annotations")]
    input: Option<PathBuf>,
    /// COCO-style annotation file; picks the record at --index
    #[arg(long)]
    annotations: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    index: usize,
    #[arg(long, default_value = "dts")]
    strategy: Strategy,
    #[arg(long, default_value_t = 81)]
    n: usize,
    #[arg(long, default_value_t = reppoints_core::distance::DEFAULT_DELTA)]
    delta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write the distance and sampling-probability fields as JSON
    #[arg(long)]
    fields: Option<PathBuf>,
    /// Output path; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DecodeArgs {
    /// Point-set JSON as written by `encode`, or a bare `{"n", "points"}` set
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "triangulation")]
    decoder: Decoder,
    #[arg(long, default_value_t = reppoints_core::decode::DEFAULT_THRESHOLD)]
    tau: f64,
    #[arg(long, default_value_t = reppoints_core::decode::DEFAULT_HULL_K)]
    hull_k: usize,
    /// Required for a bare point set
    #[arg(long)]
    height: Option<usize>,
    #[arg(long)]
    width: Option<usize>,
    /// Output prefix: writes `<out>.pgm` and `<out>.rle.json`
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CorpusArgs {
    /// COCO-style annotation file; the synthetic corpus is used when omitted
    #[arg(long)]
    annotations: Option<PathBuf>,
    #[arg(long, default_value_t = 200)]
    synthetic_count: usize,
    #[arg(long, default_value_t = 128)]
    synthetic_size: usize,
    #[arg(long, default_value_t = 20240)]
    corpus_seed: u64,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[arg(long, value_delimiter = ',', default_value = "dts")]
    strategy: Vec<Strategy>,
    #[arg(long, value_delimiter = ',', default_value = "triangulation")]
    decoder: Vec<Decoder>,
    #[arg(long, value_delimiter = ',', default_value = "9,25,49,81,225,441,729")]
    n: Vec<usize>,
    #[arg(long, default_value_t = reppoints_core::distance::DEFAULT_DELTA)]
    delta: f64,
    #[arg(long, default_value_t = reppoints_core::decode::DEFAULT_THRESHOLD)]
    tau: f64,
    #[arg(long, default_value_t = reppoints_core::decode::DEFAULT_HULL_K)]
    hull_k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; all cores when omitted. Output does not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    /// Output prefix: writes `<out>.csv` and `<out>.json`
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct LossesArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[arg(long, value_delimiter = ',', default_value = "dts")]
    strategy: Vec<Strategy>,
    #[arg(long, value_delimiter = ',', default_value = "81")]
    n: Vec<usize>,
    /// Jitter standard deviations in pixels
    #[arg(long, value_delimiter = ',', default_value = "0,1")]
    sigma: Vec<f64>,
    #[arg(long, default_value_t = reppoints_core::distance::DEFAULT_DELTA)]
    delta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    threads: Option<usize>,
    /// CSV path; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CostArgs {
    #[arg(long, value_delimiter = ',', default_value = "9,25,49,81")]
    n: Vec<u64>,
    #[arg(long, default_value_t = 9)]
    k: u64,
    #[arg(long, default_value_t = 256)]
    channels: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 200)]
    count: usize,
    #[arg(long, default_value_t = 128)]
    size: usize,
    #[arg(long, default_value_t = 20240)]
    seed: u64,
    /// Directory receiving `corpus.json` (RLE list) and `NNNN.pgm` files
    #[arg(long)]
    out: PathBuf,
}

/// Output of `encode`, input of `decode`.
#[derive(Serialize, Deserialize)]
struct PointSetDocument {
    height: usize,
    width: usize,
    strategy: Strategy,
    #[serde(flatten)]
    points: DensePointSet,
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn read_mask(path: &Path) -> Result<BinaryMask> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    if bytes.starts_with(b"P5") {
        return Ok(BinaryMask::from_pgm(&bytes)?);
    }
    let rle: Rle = serde_json::from_slice(&bytes).with_context(|| format!("{} is neither P5 PGM nor RLE JSON", path.display()))?;
    Ok(rle.decode()?)
}

fn load_corpus(args: &CorpusArgs) -> Result<(Vec<BinaryMask>, String)> {
    match &args.annotations {
        Some(path) => {
            let loaded = load_annotations(path).with_context(|| format!("loading {}", path.display()))?;
            if loaded.skipped_zero_area > 0 {
                eprintln!("skipped {} zero-area annotations", loaded.skipped_zero_area);
            }
            let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            Ok((record_masks(&loaded.records)?, format!("annotations:{name}")))
        }
        None => Ok((
            synthetic_corpus(SamplerSeed(args.corpus_seed), args.synthetic_count, args.synthetic_size)?,
            format!(
                "synthetic:seed={}:count={}:size={}",
                args.corpus_seed, args.synthetic_count, args.synthetic_size
            ),
        )),
    }
}

fn encode(args: EncodeArgs) -> Result<()> {
    let mask = match (&args.input, &args.annotations) {
        (Some(p), _) => read_mask(p)?,
        (None, Some(p)) => {
            let loaded = load_annotations(p).with_context(|| format!("loading {}", p.display()))?;
            let Some(rec) = loaded.records.get(args.index) else {
                bail!("annotation index {} out of range ({} records)", args.index, loaded.records.len());
            };
            rec.mask()?
        }
        (None, None) => bail!("one of --input or --annotations is required"),
    };
    let band = SamplingBandConfig::new(args.delta)?;
    if let Some(path) = &args.fields {
        fs::write(path, field_dump_json(&mask, band)?).with_context(|| format!("writing {}", path.display()))?;
    }
    let encoded = encode_mask(&mask, args.strategy, args.n, band, SamplerSeed(args.seed))?;
    let doc = PointSetDocument {
        height: mask.height(),
        width: mask.width(),
        strategy: args.strategy,
        points: encoded.points,
    };
    write_or_print(args.out.as_deref(), &(serde_json::to_string_pretty(&doc)? + "\n"))
}

fn decode(args: DecodeArgs) -> Result<()> {
    let text = fs::read_to_string(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    let (points, height, width) = match serde_json::from_str::<PointSetDocument>(&text) {
        Ok(doc) => (
            doc.points,
            args.height.unwrap_or(doc.height),
            args.width.unwrap_or(doc.width),
        ),
        Err(_) => {
            let pts: DensePointSet = serde_json::from_str(&text).context("parsing point set")?;
            let (Some(h), Some(w)) = (args.height, args.width) else {
                bail!("a bare point set needs --height and --width");
            };
            (pts, h, w)
        }
    };
    let cfg = DecodeConfig::new(args.tau, args.hull_k)?;
    let mask = decode_points(&points, args.decoder, height, width, &cfg, None)?;
    let pgm = with_suffix(&args.out, ".pgm");
    let rle = with_suffix(&args.out, ".rle.json");
    fs::write(&pgm, mask.to_pgm()).with_context(|| format!("writing {}", pgm.display()))?;
    fs::write(&rle, serde_json::to_string(&rle_encode(&mask))? + "\n").with_context(|| format!("writing {}", rle.display()))?;
    eprintln!("{} foreground pixels", mask.area());
    Ok(())
}

fn sweep(args: SweepArgs) -> Result<()> {
    let (corpus, corpus_id) = load_corpus(&args.corpus)?;
    let cfg = SweepConfig {
        strategies: args.strategy,
        n_values: args.n,
        decoders: args.decoder,
        delta: args.delta,
        tau: args.tau,
        hull_k: args.hull_k,
        seed: args.seed,
    };
    let report = with_threads(args.threads, || reconstruction_sweep(&corpus, &corpus_id, &cfg))??;
    let csv = with_suffix(&args.out, ".csv");
    let json = with_suffix(&args.out, ".json");
    fs::write(&csv, report.to_csv()).with_context(|| format!("writing {}", csv.display()))?;
    fs::write(&json, report.to_json()? + "\n").with_context(|| format!("writing {}", json.display()))?;
    for row in &report.rows {
        eprintln!(
            "{:>8} n={:<4} {:>13}  IoU {:.4}  failures {}",
            row.strategy, row.n, row.decoder, row.mean_iou, row.failures
        );
    }
    Ok(())
}

fn losses(args: LossesArgs) -> Result<()> {
    let (corpus, _) = load_corpus(&args.corpus)?;
    let cfg = LossReportConfig {
        strategies: args.strategy,
        n_values: args.n,
        sigmas: args.sigma,
        delta: args.delta,
        seed: args.seed,
    };
    let rows = with_threads(args.threads, || loss_report(&corpus, &cfg))??;
    write_or_print(args.out.as_deref(), &loss_report_csv(&rows, args.seed))
}

fn synth(args: SynthArgs) -> Result<()> {
    let corpus = synthetic_corpus(SamplerSeed(args.seed), args.count, args.size)?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let width = args.count.saturating_sub(1).to_string().len().max(4);
    for (i, m) in corpus.iter().enumerate() {
        fs::write(args.out.join(format!("{i:0width$}.pgm")), m.to_pgm())?;
    }
    let rles: Vec<Rle> = corpus.iter().map(rle_encode).collect();
    fs::write(args.out.join("corpus.json"), serde_json::to_string(&rles)? + "\n")?;
    eprintln!("wrote {} masks to {}", corpus.len(), args.out.display());
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Encode(a) => encode(a),
        Command::Decode(a) => decode(a),
        Command::Sweep(a) => sweep(a),
        Command::Losses(a) => losses(a),
        Command::Cost(a) => write_or_print(a.out.as_deref(), &head_cost_csv(&a.n, a.k, a.channels)),
        Command::Synth(a) => synth(a),
    }
}
