use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::capture::{capture, CaptureParams, TactileSample};
use super::fracture::{fracture, FracturedScene};
use super::noise::mix_seed;
use super::polygon::ShapeKind;
use super::relief::{synth_edge_heights, SceneRelief, DEFAULT_AMPLITUDE};
use super::SCENE_SIZE;
use crate::error::{Error, Result};
use crate::geom::{RigidTransform2D, Vec2};
use crate::material::Material;
use crate::raster::{centroid, BinaryMask};

pub const MIXED_FRAGMENTS_PER_OBJECT: usize = 4;

/// One broken object of a single material.
#[derive(Debug, Clone)]
pub struct MixedObject {
    pub material: Material,
    pub scene: FracturedScene,
    pub relief: SceneRelief,
}

/// A fragment of the mixed pile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedEntry {
    pub id: String,
    pub object: usize,
    pub fragment: usize,
    pub material: Material,
    /// False for the held-out fragment, which is queried but never stored.
    pub in_database: bool,
    /// The entry of another material with the identical outline.
    pub twin_of: Option<String>,
    /// Rotation, radians, of the re-observed query view.
    pub query_rotation: f64,
}

/// Twenty fragments of five materials. The last object is an exact copy of
/// the coloured-crystal object relabelled as colourless crystal with its own
/// relief; one of its fragments joins the pile as the shape twin.
#[derive(Debug, Clone)]
pub struct MixedScene {
    pub seed: u64,
    pub objects: Vec<MixedObject>,
    pub entries: Vec<MixedEntry>,
}

fn four_piece(kind: ShapeKind, seed: u64) -> Result<FracturedScene> {
    for attempt in 0..64 {
        let s = mix_seed(seed, attempt);
        let poly = kind.polygon(SCENE_SIZE, &mut ChaCha8Rng::seed_from_u64(s))?;
        let scene = fracture(&poly, MIXED_FRAGMENTS_PER_OBJECT, 0.5, s)?;
        if scene.fragments.len() == MIXED_FRAGMENTS_PER_OBJECT {
            return Ok(scene);
        }
    }
    Err(Error::InvalidArgument(format!("no four-piece fracture for seed {seed}")))
}

impl MixedScene {
    pub fn generate(seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut objects = Vec::new();
        for (k, &material) in Material::ALL.iter().enumerate() {
            let mut scene = four_piece(ShapeKind::ALL[k % 4], mix_seed(seed, 100 + k as u64))?;
            scene.set_material(material, mix_seed(seed, 200 + k as u64));
            let relief = synth_edge_heights(&scene, DEFAULT_AMPLITUDE * material.relief_scale(), mix_seed(seed, 300 + k as u64))?;
            objects.push(MixedObject { material, scene, relief });
        }
        let coloured = Material::ALL.iter().position(|&m| m == Material::ColoredCrystal).expect("listed");
        let colourless = Material::ALL.iter().position(|&m| m == Material::ColorlessCrystal).expect("listed");
        let mut twin_scene = objects[coloured].scene.clone();
        twin_scene.set_material(Material::ColorlessCrystal, mix_seed(seed, 400));
        let twin_relief = synth_edge_heights(
            &twin_scene,
            DEFAULT_AMPLITUDE * Material::ColorlessCrystal.relief_scale(),
            mix_seed(seed, 401),
        )?;
        objects.push(MixedObject {
            material: Material::ColorlessCrystal,
            scene: twin_scene,
            relief: twin_relief,
        });
        let twin_object = objects.len() - 1;
        let twin_fragment = rng.random_range(0..MIXED_FRAGMENTS_PER_OBJECT);
        let held_object = Material::ALL.iter().position(|&m| m == Material::Plastic).expect("listed");
        let held_fragment = rng.random_range(0..MIXED_FRAGMENTS_PER_OBJECT);

        let mut entries = Vec::new();
        let mut push = |object: usize, fragment: usize, twin_of: Option<String>, rng: &mut ChaCha8Rng| {
            let material = objects[object].material;
            entries.push(MixedEntry {
                id: format!("{}-{object}-{fragment}", material.as_str()),
                object,
                fragment,
                material,
                in_database: !(object == held_object && fragment == held_fragment),
                twin_of,
                query_rotation: rng.random_range(0.0..std::f64::consts::TAU),
            });
        };
        for object in 0..Material::ALL.len() {
            for fragment in 0..MIXED_FRAGMENTS_PER_OBJECT {
                // The colourless object gives up one slot to the twin.
                if object == colourless && fragment == MIXED_FRAGMENTS_PER_OBJECT - 1 {
                    continue;
                }
                push(object, fragment, None, &mut rng);
            }
        }
        let original = format!("{}-{coloured}-{twin_fragment}", Material::ColoredCrystal.as_str());
        push(twin_object, twin_fragment, Some(original.clone()), &mut rng);
        let twin_id = entries.last().expect("just pushed").id.clone();
        if let Some(e) = entries.iter_mut().find(|e| e.id == original) {
            e.twin_of = Some(twin_id);
        }
        Ok(MixedScene { seed, objects, entries })
    }

    pub fn mask(&self, e: &MixedEntry) -> &BinaryMask {
        &self.objects[e.object].scene.fragment(e.fragment).mask
    }

    /// The fragment as seen again from above: its mask turned by
    /// `query_rotation` about its centroid, resampled bilinearly.
    pub fn query_mask(&self, e: &MixedEntry) -> Result<BinaryMask> {
        rotate_mask(self.mask(e), e.query_rotation)
    }

    /// Whole-fragment press. `pass` 0 is the stored capture, later passes
    /// are fresh presses with independent noise.
    pub fn press(&self, e: &MixedEntry, pass: u64, params: &CaptureParams) -> Result<TactileSample> {
        let o = &self.objects[e.object];
        let p = CaptureParams {
            noise_seed: mix_seed(params.noise_seed, pass),
            ..*params
        };
        capture(&o.scene, &o.relief, e.fragment, None, &p, (1u64 << 32) + e.fragment as u64)
    }
}

/// `mask` turned by `theta` about its centroid, bilinear resampling
/// thresholded at 0.5.
pub fn rotate_mask(mask: &BinaryMask, theta: f64) -> Result<BinaryMask> {
    let c = centroid(mask)?;
    let inv = RigidTransform2D::about(false, theta, c, c).inverse();
    let (w, h) = mask.dims();
    BinaryMask::from_fn(w, h, |x, y| {
        mask.sample_bilinear(inv.apply(Vec2::new(x as f64, y as f64))) >= 0.5
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn composition_of_the_pile() {
        let m = MixedScene::generate(7).unwrap();
        assert_eq!(m.entries.len(), 20);
        for mat in Material::ALL {
            assert_eq!(m.entries.iter().filter(|e| e.material == mat).count(), 4);
        }
        assert_eq!(m.entries.iter().filter(|e| !e.in_database).count(), 1);
        let twins: Vec<_> = m.entries.iter().filter(|e| e.twin_of.is_some()).collect();
        assert_eq!(twins.len(), 2);
        assert_eq!(m.mask(twins[0]), m.mask(twins[1]));
        assert_ne!(twins[0].material, twins[1].material);
        let ids: std::collections::BTreeSet<_> = m.entries.iter().map(|e| &e.id).collect();
        assert_eq!(ids.len(), 20);
    }
}
