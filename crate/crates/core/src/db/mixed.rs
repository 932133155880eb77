use super::classify::{classify_material, NearestCentroid};
use super::eval::EvalQuery;
use super::record::FragmentRecord;
use crate::error::Result;
use crate::matching::TactileProfile;
use crate::synth::{CaptureParams, MixedEntry, MixedScene};
use crate::tactile::{reconstruct, Reconstruction};

/// Reconstruction and profile of one whole-fragment press.
pub fn press_profile(scene: &MixedScene, e: &MixedEntry, pass: u64, params: &CaptureParams) -> Result<(Reconstruction, TactileProfile)> {
    let press = scene.press(e, pass, params)?;
    let mask = scene.mask(e);
    let rec = reconstruct(&press.frame, &press.baseline, Some(mask))?;
    let profile = TactileProfile::from_reconstruction(&rec, mask)?;
    Ok((rec, profile))
}

/// Stored records for every in-database entry, from press pass 0 and the
/// ground-truth material.
pub fn mixed_records(scene: &MixedScene, params: &CaptureParams, source: &str) -> Result<Vec<FragmentRecord>> {
    scene
        .entries
        .iter()
        .filter(|e| e.in_database)
        .map(|e| {
            let (_, profile) = press_profile(scene, e, 0, params)?;
            let colour = scene.objects[e.object].scene.fragment(e.fragment).colour;
            FragmentRecord::new(e.id.clone(), scene.mask(e).clone(), Some(profile), e.material, Some(colour), source)
        })
        .collect()
}

/// One query per entry: the re-observed mask and a fresh press (pass 1)
/// whose material label comes from `model`.
pub fn mixed_queries(scene: &MixedScene, params: &CaptureParams, model: &NearestCentroid) -> Result<Vec<EvalQuery>> {
    scene
        .entries
        .iter()
        .map(|e| {
            let (rec, profile) = press_profile(scene, e, 1, params)?;
            let colour = scene.objects[e.object].scene.fragment(e.fragment).colour;
            let material = classify_material(model, &rec.height, &rec.gradients, &colour)?;
            let probe = FragmentRecord::new(format!("query-{}", e.id), scene.mask(e).clone(), Some(profile), material, Some(colour), "query")?;
            Ok(EvalQuery {
                mask: scene.query_mask(e)?,
                probe,
                truth: e.in_database.then(|| e.id.clone()),
            })
        })
        .collect()
}
