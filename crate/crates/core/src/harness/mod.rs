//! Evaluation harness: annotation ingestion, synthetic masks, reconstruction
//! sweeps, loss reports and field dumps.

mod coco;
mod loss_report;
mod sweep;
mod synth;

pub use coco::{
    decode_compressed_counts, load_annotations, parse_annotations, record_masks, AnnotationRecord, LoadedAnnotations,
    Segmentation,
};
pub use loss_report::{loss_report, loss_report_csv, LossReportConfig, LossRow, LOSS_CSV_COLUMNS, LOSS_CSV_VERSION_LINE};
pub use sweep::{
    decode_points, encode_mask, infer_grid, reconstruction_sweep, with_threads, Decoder, Encoded, MaskEncoder,
    ReconstructionReport, ReconstructionRow, SizeStats, Strategy, SweepConfig, CSV_COLUMNS, CSV_VERSION_LINE,
    MEDIUM_AREA, REPORT_SCHEMA, SMALL_AREA,
};
pub use synth::{synthetic_corpus, ShapeKind};

use serde::Serialize;

use crate::distance::{distance_map, sampling_probability, DistanceField, ProbField, SamplingBandConfig};
use crate::error::{Error, Result};
use crate::mask::{boundary_points, BinaryMask};

#[derive(Serialize)]
struct FieldDump<'a> {
    distance: &'a DistanceField,
    probability: &'a ProbField,
}

/// Distance and sampling-probability fields of a mask as JSON. Each field
/// records `height`, `width` and row-major `values`.
pub fn field_dump_json(mask: &BinaryMask, band: SamplingBandConfig) -> Result<String> {
    let d = distance_map(&boundary_points(mask)?, mask.height(), mask.width())?;
    let p = sampling_probability(&d, band)?;
    serde_json::to_string(&FieldDump {
        distance: &d,
        probability: &p,
    })
    .map_err(|e| Error::Io(e.to_string()))
}
