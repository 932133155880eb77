//! Tactile frames to local geometry: contact segmentation, photometric
//! normals, gradient fields, Neumann Poisson integration and height extrema.

pub mod extrema;
pub mod ffh;
pub mod frame;
pub mod normals;
pub mod pipeline;
pub mod poisson;
pub mod segment;

pub use extrema::{find_extrema, ExtremaParams, ExtremaSet, Extremum};
pub use frame::{default_lights, LightMatrix, TactileFrame, Vec3};
pub use normals::{normals_to_gradients, solve_normals, GradientField, NormalMap, NZ_FLOOR};
pub use pipeline::{reconstruct, Reconstruction};
pub use poisson::{divergence, integrate_gradients, poisson_solve_dct, HeightMap};
pub use segment::{segment_contact, Contact, CONTACT_THRESHOLD};
