//! Seeded ground truth: 2D cell fracture, complementary crack relief and
//! Lambertian tactile rendering.

pub mod capture;
pub mod fracture;
pub mod io;
pub mod mixed;
pub mod noise;
pub mod notch;
pub mod polygon;
pub mod relief;
pub mod render;

pub use capture::{capture, edge_samples, fragment_captures, CaptureParams, TactileSample, MIN_SAMPLE_EDGE_PX};
pub use fracture::{fracture, Adjacency, Fragment, FracturedScene, CANVAS_SIZE, SCENE_SIZE};
pub use io::{generate_scene, read_lights, write_lights, write_scene, LoadedSample, LoadedScene, SceneBundle, SceneManifest, SceneSpec};
pub use mixed::{rotate_mask, MixedEntry, MixedObject, MixedScene, MIXED_FRAGMENTS_PER_OBJECT};
pub use notch::{notched_square_scene, NotchScene};
pub use polygon::{Polygon, ShapeKind};
pub use relief::{synth_edge_heights, EdgeHeightProfile, EdgeRelief, SceneRelief, Side, DEFAULT_AMPLITUDE, EDGE_BAND_PX};
pub use render::{render_baseline, render_tactile};
