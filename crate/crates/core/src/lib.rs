//! Tactile geometry reconstruction and fragment reassembly for fractured
//! transparent objects.
//!
//! The crate is organised bottom-up:
//!
//! * [`raster`]: masks, contours, IoU / chamfer / Tversky metrics.
//! * [`tactile`]: photometric stereo, gradient fields and the cosine-transform
//!   Poisson solver that turns tactile frames into height maps.
//! * [`synth`]: seeded ground-truth scenes (2D cell fracture, complementary
//!   fracture-edge relief, Lambertian tactile rendering).
//! * [`matching`]: the fused edge / gradient / height-extrema score and the
//!   candidate transform search.
//! * [`partial`]: vision-only alignment of a fragment to a gap.
//! * [`db`]: fragment database, retrieval with fallback, material rematching
//!   and assembly planning.

pub mod db;
pub mod error;
pub mod geom;
pub mod material;
pub mod matching;
pub mod partial;
pub mod raster;
pub mod synth;
pub mod tactile;

pub use error::{Error, Result};
pub use geom::{RigidTransform2D, Vec2};
pub use material::{ColourStats, Material};
pub use raster::{BinaryMask, Contour, Pixel, ScalarGrid};
