use serde::{Deserialize, Serialize};

use super::fracture::FracturedScene;
use super::noise::mix_seed;
use super::relief::SceneRelief;
use super::render::{render_baseline, render_tactile};
use crate::error::Result;
use crate::raster::ScalarGrid;
use crate::tactile::frame::{default_lights, TactileFrame, Vec3};

/// Cracks shorter than this along their chord get no edge sample.
pub const MIN_SAMPLE_EDGE_PX: f64 = 16.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaptureParams {
    pub lights: [Vec3; 3],
    pub noise_sigma: f64,
    pub noise_seed: u64,
}

impl Default for CaptureParams {
    fn default() -> Self {
        CaptureParams {
            lights: default_lights(),
            noise_sigma: 0.0,
            noise_seed: 0,
        }
    }
}

/// One simulated press on a fragment, with its ground-truth height.
#[derive(Debug, Clone, PartialEq)]
pub struct TactileSample {
    pub fragment: usize,
    /// Crack index for an edge press; `None` for a whole-fragment capture.
    pub edge: Option<usize>,
    pub truth: ScalarGrid,
    pub frame: TactileFrame,
    pub baseline: TactileFrame,
}

/// Renders the press on `fragment` (one crack or all of them). `stream`
/// selects independent noise for frame and baseline.
pub fn capture(
    scene: &FracturedScene,
    relief: &SceneRelief,
    fragment: usize,
    edge: Option<usize>,
    params: &CaptureParams,
    stream: u64,
) -> Result<TactileSample> {
    let truth = relief.canvas_height(scene, fragment, edge)?;
    let (w, h) = truth.dims();
    let frame = render_tactile(&truth, params.lights, params.noise_sigma, mix_seed(params.noise_seed, 2 * stream))?;
    let baseline = render_baseline(w, h, params.lights, params.noise_sigma, mix_seed(params.noise_seed, 2 * stream + 1))?;
    Ok(TactileSample {
        fragment,
        edge,
        truth,
        frame,
        baseline,
    })
}

/// Both sides of every crack at least [`MIN_SAMPLE_EDGE_PX`] long, ordered
/// by crack then side.
pub fn edge_samples(scene: &FracturedScene, relief: &SceneRelief, params: &CaptureParams) -> Result<Vec<TactileSample>> {
    let mut out = Vec::new();
    for e in &relief.edges {
        if e.frame.length() < MIN_SAMPLE_EDGE_PX {
            continue;
        }
        for (k, id) in [e.a, e.b].into_iter().enumerate() {
            let stream = 2 * e.adjacency as u64 + k as u64;
            out.push(capture(scene, relief, id, Some(e.adjacency), params, stream)?);
        }
    }
    Ok(out)
}

/// One whole-fragment capture per fragment.
pub fn fragment_captures(scene: &FracturedScene, relief: &SceneRelief, params: &CaptureParams) -> Result<Vec<TactileSample>> {
    (0..scene.fragments.len())
        .map(|id| capture(scene, relief, id, None, params, (1u64 << 32) + id as u64))
        .collect()
}
