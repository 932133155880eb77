//! Binary masks, contours and the scalar metrics built on them.

pub mod contour;
pub mod mask;
pub mod metrics;
pub mod pgm;

pub use contour::{boundary_edges, extract_contours, fill_contour, longest_chord, BoundaryEdge, Contour, Pixel};
pub use mask::{BinaryMask, Grid, ScalarGrid};
pub use metrics::{centroid, chamfer, chamfer_points, iou, tversky_loss, MetricReport, PointIndex};
