//! Scene directories: `scene.json` plus the rasters it names.
//!
//! ```text
//! scene.json          manifest (generator parameters, poses, adjacency)
//! lights.txt          one light direction per line, `x y z`
//! object.pgm          object mask
//! fragments/fNN.pgm   fragment masks in their observation canvases
//! samples/sNN_*.pgm   16-bit tactile frames and flat baselines (r, g, b)
//! truth/sNN.ffh       ground-truth press heights
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use super::capture::{edge_samples, fragment_captures, CaptureParams, TactileSample};
use super::fracture::{fracture, FracturedScene, SCENE_SIZE};
use super::noise::mix_seed;
use super::polygon::ShapeKind;
use super::relief::{synth_edge_heights, SceneRelief, DEFAULT_AMPLITUDE};
use crate::error::{Error, Result};
use crate::geom::RigidTransform2D;
use crate::material::{ColourStats, Material};
use crate::raster::{pgm, BinaryMask, ScalarGrid};
use crate::tactile::ffh::{self, RasterMeta};
use crate::tactile::{TactileFrame, Vec3};

pub const SCENE_FORMAT_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "scene.json";
pub const LIGHTS_FILE: &str = "lights.txt";

/// Everything that determines a generated scene.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    pub shape: ShapeKind,
    pub n_seeds: usize,
    pub roughness: f64,
    pub seed: u64,
    pub amplitude: f64,
    pub material: Material,
    pub noise_sigma: f64,
    /// Defaults to a value derived from `seed`.
    pub noise_seed: u64,
}

impl SceneSpec {
    pub fn new(shape: ShapeKind, n_seeds: usize, seed: u64) -> Self {
        SceneSpec {
            shape,
            n_seeds,
            roughness: 0.5,
            seed,
            amplitude: DEFAULT_AMPLITUDE,
            material: Material::Glass,
            noise_sigma: 0.0,
            noise_seed: mix_seed(seed, 7),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_seeds == 0 {
            return Err(Error::InvalidArgument("n_seeds must be at least 1".into()));
        }
        if !(self.roughness.is_finite() && self.roughness >= 0.0) {
            return Err(Error::InvalidArgument(format!("roughness {} must be finite and >= 0", self.roughness)));
        }
        if !(self.amplitude.is_finite() && self.amplitude > 0.0) {
            return Err(Error::InvalidArgument(format!("amplitude {} must be finite and > 0", self.amplitude)));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(Error::InvalidArgument(format!("noise_sigma {} must be finite and >= 0", self.noise_sigma)));
        }
        Ok(())
    }

    pub fn capture_params(&self) -> CaptureParams {
        CaptureParams {
            noise_sigma: self.noise_sigma,
            noise_seed: self.noise_seed,
            ..CaptureParams::default()
        }
    }
}

/// A generated scene with its crack presses followed by its whole-fragment
/// presses. A scene without cracks has no relief and no presses.
#[derive(Debug, Clone)]
pub struct SceneBundle {
    pub spec: SceneSpec,
    pub scene: FracturedScene,
    pub relief: Option<SceneRelief>,
    pub samples: Vec<TactileSample>,
}

pub fn generate_scene(spec: &SceneSpec) -> Result<SceneBundle> {
    spec.validate()?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(spec.seed);
    let poly = spec.shape.polygon(SCENE_SIZE, &mut rng)?;
    let mut scene = fracture(&poly, spec.n_seeds, spec.roughness, spec.seed)?;
    scene.set_material(spec.material, mix_seed(spec.seed, 1));
    let mut samples = Vec::new();
    let relief = if scene.adjacency.is_empty() {
        None
    } else {
        let relief = synth_edge_heights(&scene, spec.amplitude * spec.material.relief_scale(), spec.seed)?;
        let cp = spec.capture_params();
        samples = edge_samples(&scene, &relief, &cp)?;
        samples.extend(fragment_captures(&scene, &relief, &cp)?);
        Some(relief)
    };
    Ok(SceneBundle {
        spec: *spec,
        scene,
        relief,
        samples,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FragmentEntry {
    pub id: usize,
    pub mask: String,
    /// Observation canvas into the object frame.
    pub pose: RigidTransform2D,
    pub material: Material,
    pub colour: ColourStats,
    pub area_px: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdjacencyEntry {
    pub a: usize,
    pub b: usize,
    pub crack_px: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleEntry {
    pub index: usize,
    pub fragment: usize,
    /// Crack index for an edge press; absent for a whole-fragment press.
    pub edge: Option<usize>,
    /// r, g, b.
    pub frame: [String; 3],
    pub baseline: [String; 3],
    pub truth: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneManifest {
    pub format_version: u32,
    pub spec: SceneSpec,
    pub width: usize,
    pub height: usize,
    pub object_mask: String,
    pub lights_file: String,
    pub fragments: Vec<FragmentEntry>,
    pub adjacency: Vec<AdjacencyEntry>,
    pub samples: Vec<SampleEntry>,
}

impl SceneManifest {
    pub fn are_adjacent(&self, a: usize, b: usize) -> bool {
        let (a, b) = (a.min(b), a.max(b));
        self.adjacency.iter().any(|e| e.a == a && e.b == b)
    }

    /// Canvas pose of `b` expressed in `a`'s canvas.
    pub fn true_relative(&self, a: usize, b: usize) -> RigidTransform2D {
        self.fragments[a].pose.inverse().compose(&self.fragments[b].pose)
    }

    /// True when the adjacency graph links every fragment.
    pub fn adjacency_connected(&self) -> bool {
        let n = self.fragments.len();
        if n == 0 {
            return false;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for e in &self.adjacency {
                let v = if e.a == u {
                    e.b
                } else if e.b == u {
                    e.a
                } else {
                    continue;
                };
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.iter().all(|&s| s)
    }
}

pub fn write_lights(path: &Path, lights: &[Vec3; 3]) -> Result<()> {
    let text: String = lights.iter().map(|l| format!("{:.17e} {:.17e} {:.17e}\n", l[0], l[1], l[2])).collect();
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_lights(path: &Path) -> Result<[Vec3; 3]> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let rows: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).collect();
    if rows.len() != 3 {
        return Err(Error::format("lights", path, format!("expected 3 light rows, found {}", rows.len())));
    }
    let mut out = [[0.0; 3]; 3];
    for (k, row) in rows.iter().enumerate() {
        let v: Vec<f64> = row
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|e| Error::format("lights", path, format!("row {}: {e}", k + 1))))
            .collect::<Result<_>>()?;
        if v.len() != 3 {
            return Err(Error::format("lights", path, format!("row {} has {} values", k + 1, v.len())));
        }
        out[k] = [v[0], v[1], v[2]];
    }
    Ok(out)
}

pub(crate) fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn mkdir(p: &Path) -> Result<()> {
    fs::create_dir_all(p).map_err(|e| Error::io(p, e))
}

const CHANNELS: [&str; 3] = ["r", "g", "b"];

/// Writes `bundle` under `dir` and returns its manifest.
pub fn write_scene(dir: &Path, bundle: &SceneBundle) -> Result<SceneManifest> {
    mkdir(&dir.join("fragments"))?;
    mkdir(&dir.join("samples"))?;
    mkdir(&dir.join("truth"))?;
    let scene = &bundle.scene;
    pgm::write_mask(&dir.join("object.pgm"), &scene.object_mask)?;
    write_lights(&dir.join(LIGHTS_FILE), &bundle.spec.capture_params().lights)?;
    let fragments = scene
        .fragments
        .iter()
        .map(|f| {
            let name = format!("fragments/f{:02}.pgm", f.id);
            pgm::write_mask(&dir.join(&name), &f.mask)?;
            Ok(FragmentEntry {
                id: f.id,
                mask: name,
                pose: f.pose,
                material: f.material,
                colour: f.colour,
                area_px: f.mask.count(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let truth_meta = RasterMeta::new("px", "flat gel at zero");
    let samples = bundle
        .samples
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let frame = CHANNELS.map(|c| format!("samples/s{i:02}_{c}.pgm"));
            let baseline = CHANNELS.map(|c| format!("samples/s{i:02}_base_{c}.pgm"));
            for k in 0..3 {
                pgm::write_gray16(&dir.join(&frame[k]), &s.frame.channels()[k])?;
                pgm::write_gray16(&dir.join(&baseline[k]), &s.baseline.channels()[k])?;
            }
            let truth = format!("truth/s{i:02}.ffh");
            ffh::write(&dir.join(&truth), &s.truth, &truth_meta)?;
            Ok(SampleEntry {
                index: i,
                fragment: s.fragment,
                edge: s.edge,
                frame,
                baseline,
                truth: Some(truth),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let manifest = SceneManifest {
        format_version: SCENE_FORMAT_VERSION,
        spec: bundle.spec,
        width: scene.object_mask.width(),
        height: scene.object_mask.height(),
        object_mask: "object.pgm".into(),
        lights_file: LIGHTS_FILE.into(),
        fragments,
        adjacency: scene
            .adjacency
            .iter()
            .map(|e| AdjacencyEntry {
                a: e.a,
                b: e.b,
                crack_px: e.crack.len(),
            })
            .collect(),
        samples,
    };
    write_json(&dir.join(MANIFEST_FILE), &manifest)?;
    Ok(manifest)
}

/// A press read back from disk.
#[derive(Debug, Clone)]
pub struct LoadedSample {
    pub entry: SampleEntry,
    pub frame: TactileFrame,
    pub baseline: TactileFrame,
    pub truth: Option<ScalarGrid>,
}

#[derive(Debug, Clone)]
pub struct LoadedScene {
    pub dir: PathBuf,
    pub manifest: SceneManifest,
    pub masks: Vec<BinaryMask>,
}

fn file(dir: &Path, rel: &str) -> Result<PathBuf> {
    let p = dir.join(rel);
    if !p.is_file() {
        return Err(Error::io(&p, std::io::Error::new(std::io::ErrorKind::NotFound, "missing scene file")));
    }
    Ok(p)
}

impl LoadedScene {
    /// Reads the manifest and the fragment masks. Presses load lazily.
    pub fn open(dir: &Path) -> Result<Self> {
        let path = file(dir, MANIFEST_FILE)?;
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let manifest: SceneManifest = serde_json::from_str(&text).map_err(|e| Error::format("scene manifest", &path, e.to_string()))?;
        if manifest.format_version != SCENE_FORMAT_VERSION {
            return Err(Error::format("scene manifest", &path, format!("unsupported format_version {}", manifest.format_version)));
        }
        for (i, f) in manifest.fragments.iter().enumerate() {
            if f.id != i {
                return Err(Error::format("scene manifest", &path, format!("fragment {i} has id {}", f.id)));
            }
        }
        let n = manifest.fragments.len();
        if manifest.adjacency.iter().any(|e| e.a >= n || e.b >= n || e.a >= e.b) {
            return Err(Error::format("scene manifest", &path, "adjacency refers to an unknown fragment"));
        }
        if manifest.samples.iter().any(|s| s.fragment >= n) {
            return Err(Error::format("scene manifest", &path, "sample refers to an unknown fragment"));
        }
        let masks = manifest
            .fragments
            .iter()
            .map(|f| pgm::read_mask(&file(dir, &f.mask)?))
            .collect::<Result<_>>()?;
        Ok(LoadedScene {
            dir: dir.to_path_buf(),
            manifest,
            masks,
        })
    }

    pub fn lights(&self) -> Result<[Vec3; 3]> {
        read_lights(&file(&self.dir, &self.manifest.lights_file)?)
    }

    pub fn load_sample(&self, index: usize, lights: &[Vec3; 3]) -> Result<LoadedSample> {
        let entry = self
            .manifest
            .samples
            .get(index)
            .cloned()
            .ok_or_else(|| Error::InvalidArgument(format!("no sample {index}")))?;
        let read = |names: &[String; 3]| -> Result<TactileFrame> {
            let ch = [
                pgm::read_gray(&file(&self.dir, &names[0])?)?,
                pgm::read_gray(&file(&self.dir, &names[1])?)?,
                pgm::read_gray(&file(&self.dir, &names[2])?)?,
            ];
            TactileFrame::new(ch, *lights)
        };
        let frame = read(&entry.frame)?;
        let baseline = read(&entry.baseline)?;
        let truth = match &entry.truth {
            Some(t) => Some(ffh::read(&file(&self.dir, t)?)?),
            None => None,
        };
        Ok(LoadedSample {
            entry,
            frame,
            baseline,
            truth,
        })
    }

    pub fn load_samples(&self) -> Result<Vec<LoadedSample>> {
        let lights = self.lights()?;
        (0..self.manifest.samples.len()).map(|i| self.load_sample(i, &lights)).collect()
    }
}
