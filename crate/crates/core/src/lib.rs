//! Mask to dense point set encoding and point set to mask decoding.
//!
//! A mask is sampled into `n` scored points (boundary, grid or
//! distance-transform sampling), compared with set losses, and turned back
//! into a mask by a Delaunay, concave hull or grid decoder.

pub mod decode;
pub mod distance;
pub mod error;
pub mod field_ops;
pub mod geom;
pub mod harness;
pub mod losses;
pub mod mask;
pub mod rng;
pub mod sampling;

pub use decode::{concave_hull, decode_grid, decode_triangulation, DecodeConfig, ScoreMap, Triangulation};
pub use distance::{distance_map, sampling_probability, DistanceField, ProbField, SamplingBandConfig};
pub use error::{Error, Result};
pub use geom::Point;
pub use losses::{chamfer_loss, point_cls_loss, point_to_point_loss};
pub use mask::{
    boundary_points, mask_iou, rasterize_polygon, rle_decode, rle_encode, BinaryMask, BoundaryPointSet, BoundingBox,
    Polygon, Rle,
};
pub use rng::SamplerSeed;
pub use sampling::{sample_boundary, sample_dts, sample_grid, DensePointSet, GridSpec, ScoredPoint};
