//! COCO-style instance annotation ingestion.

use std::collections::HashMap;
use std::path::Path;

use serde::Deserialize;
use serde_json::error::Category;

use crate::error::{Error, Result};
use crate::mask::{rasterize_polygon, BinaryMask, Polygon, Rle};

/// Instance segmentation as stored in the annotation file.
#[derive(Debug, Clone, PartialEq)]
pub enum Segmentation {
    /// One or more polygons, unioned.
    Polygons(Vec<Polygon>),
    /// Column-major run lengths, decoded on demand.
    Rle(Rle),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnotationRecord {
    pub id: u64,
    pub image_id: u64,
    pub height: usize,
    pub width: usize,
    pub category_id: u64,
    pub segmentation: Segmentation,
}

impl AnnotationRecord {
    pub fn mask(&self) -> Result<BinaryMask> {
        match &self.segmentation {
            Segmentation::Polygons(polys) => {
                let mut mask = BinaryMask::new(self.height, self.width)?;
                for poly in polys {
                    mask.union_with(&rasterize_polygon(poly, self.height, self.width)?)?;
                }
                Ok(mask)
            }
            Segmentation::Rle(rle) => rle.decode(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedAnnotations {
    pub records: Vec<AnnotationRecord>,
    /// Annotations dropped because their segmentation covers no pixel.
    pub skipped_zero_area: usize,
}

#[derive(Deserialize)]
struct RawFile {
    images: Vec<RawImage>,
    annotations: Vec<RawAnnotation>,
}

#[derive(Deserialize)]
struct RawImage {
    id: u64,
    height: Option<usize>,
    width: Option<usize>,
}

#[derive(Deserialize)]
struct RawAnnotation {
    id: Option<u64>,
    image_id: u64,
    #[serde(default)]
    category_id: u64,
    segmentation: RawSegmentation,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawSegmentation {
    Polygons(Vec<Vec<f64>>),
    Rle { size: [usize; 2], counts: RawCounts },
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawCounts {
    Runs(Vec<u64>),
    Compressed(String),
}

/// Decodes the LEB128-style string form of COCO run lengths.
pub fn decode_compressed_counts(s: &str) -> Result<Vec<u64>> {
    let bytes = s.as_bytes();
    let mut counts: Vec<i64> = Vec::new();
    let mut p = 0usize;
    while p < bytes.len() {
        let mut x: i64 = 0;
        let mut k = 0u32;
        loop {
            let Some(&b) = bytes.get(p) else {
                return Err(Error::MalformedRle("truncated count string".into()));
            };
            if !(48..48 + 64).contains(&b) || k >= 13 {
                return Err(Error::MalformedRle(format!("bad count byte {b:#x} at {p}")));
            }
            let c = (b - 48) as i64;
            x |= (c & 0x1f) << (5 * k);
            p += 1;
            k += 1;
            if c & 0x20 == 0 {
                if c & 0x10 != 0 {
                    x |= -1i64 << (5 * k);
                }
                break;
            }
        }
        if counts.len() > 2 {
            x += counts[counts.len() - 2];
        }
        counts.push(x);
    }
    counts
        .into_iter()
        .map(|c| u64::try_from(c).map_err(|_| Error::MalformedRle(format!("negative run {c}"))))
        .collect()
}

fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let start: usize = text.split_inclusive('\n').take(line - 1).map(str::len).sum();
    (start + column.saturating_sub(1)).min(text.len())
}

/// Parses COCO-style annotation JSON text.
pub fn parse_annotations(text: &str) -> Result<LoadedAnnotations> {
    let raw: RawFile = serde_json::from_str(text).map_err(|e| match e.classify() {
        Category::Data => Error::Schema(e.to_string()),
        _ => Error::Parse {
            offset: byte_offset(text, e.line(), e.column()),
            message: e.to_string(),
        },
    })?;

    let mut sizes: HashMap<u64, (usize, usize)> = HashMap::with_capacity(raw.images.len());
    for img in &raw.images {
        match (img.height, img.width) {
            (Some(h), Some(w)) if h > 0 && w > 0 => {
                sizes.insert(img.id, (h, w));
            }
            _ => return Err(Error::Schema(format!("image {} has no positive height/width", img.id))),
        }
    }

    let mut records = Vec::with_capacity(raw.annotations.len());
    let mut skipped_zero_area = 0;
    for (i, ann) in raw.annotations.into_iter().enumerate() {
        let id = ann.id.unwrap_or(i as u64);
        let &(height, width) = sizes
            .get(&ann.image_id)
            .ok_or_else(|| Error::Schema(format!("annotation {id} references missing image id {}", ann.image_id)))?;
        let segmentation = match ann.segmentation {
            RawSegmentation::Polygons(parts) => {
                // pieces with fewer than three distinct vertices cover nothing
                Segmentation::Polygons(parts.iter().filter_map(|flat| Polygon::from_flat(flat).ok()).collect())
            }
            RawSegmentation::Rle { size, counts } => {
                if size != [height, width] {
                    return Err(Error::Schema(format!(
                        "annotation {id}: RLE size {size:?} differs from image size [{height}, {width}]"
                    )));
                }
                let counts = match counts {
                    RawCounts::Runs(c) => c,
                    RawCounts::Compressed(s) => decode_compressed_counts(&s)?,
                };
                Segmentation::Rle(Rle { size, counts })
            }
        };
        let record = AnnotationRecord {
            id,
            image_id: ann.image_id,
            height,
            width,
            category_id: ann.category_id,
            segmentation,
        };
        let empty = match &record.segmentation {
            Segmentation::Rle(rle) => {
                if rle.counts.iter().sum::<u64>() != (height * width) as u64 {
                    return Err(Error::MalformedRle(format!("annotation {id}: counts do not cover the image")));
                }
                rle.area() == 0
            }
            Segmentation::Polygons(p) => p.is_empty() || record.mask()?.is_empty(),
        };
        if empty {
            skipped_zero_area += 1;
        } else {
            records.push(record);
        }
    }
    if skipped_zero_area > 0 {
        log::warn!("skipped {skipped_zero_area} zero-area annotations");
    }
    Ok(LoadedAnnotations {
        records,
        skipped_zero_area,
    })
}

pub fn load_annotations(path: &Path) -> Result<LoadedAnnotations> {
    parse_annotations(&std::fs::read_to_string(path)?)
}

/// Decodes every record, keeping annotation order.
pub fn record_masks(records: &[AnnotationRecord]) -> Result<Vec<BinaryMask>> {
    records.iter().map(AnnotationRecord::mask).collect()
}
