use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::params::MatchParams;
use super::profile::TactileProfile;
use super::search::{search_transform, SearchResult};
use crate::error::Result;
use crate::geom::{circular_diff, RigidTransform2D};
use crate::synth::{FracturedScene, TactileSample};
use crate::tactile::reconstruct;

/// Reconstructs one capture and attaches the fragment's visual edge.
pub fn sample_profile(scene: &FracturedScene, sample: &TactileSample) -> Result<TactileProfile> {
    let mask = &scene.fragment(sample.fragment).mask;
    let rec = reconstruct(&sample.frame, &sample.baseline, Some(mask))?;
    TactileProfile::from_reconstruction(&rec, mask)
}

/// A query capture's verdict on every other fragment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MateRanking {
    pub query: usize,
    pub query_fragment: usize,
    /// `(fragment, best fused score)`, best first; ties by fragment id.
    pub ranked: Vec<(usize, f64)>,
}

impl MateRanking {
    /// 1-based rank of `fragment`, if it was scored.
    pub fn rank_of(&self, fragment: usize) -> Option<usize> {
        self.ranked.iter().position(|&(f, _)| f == fragment).map(|i| i + 1)
    }
}

/// Pairwise best searches between captures `i` and `j` for `i ≠ j` on
/// different fragments. `None` marks pairs with no gradient support.
pub fn pairwise_search(profiles: &[TactileProfile], owners: &[usize], params: &MatchParams) -> Result<Vec<Vec<Option<SearchResult>>>> {
    let n = profiles.len();
    let jobs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| owners[i] != owners[j])
        .collect();
    let found: Vec<Result<Option<SearchResult>>> = jobs
        .par_iter()
        .map(|&(i, j)| match search_transform(&profiles[i], &profiles[j], params) {
            Ok(r) => Ok(Some(r)),
            Err(crate::Error::Empty(_)) => Ok(None),
            Err(e) => Err(e),
        })
        .collect();
    let mut table = vec![vec![None; n]; n];
    for (&(i, j), r) in jobs.iter().zip(found) {
        table[i][j] = r?;
    }
    Ok(table)
}

/// Ranks fragments for each capture by the best fused score over that
/// fragment's captures.
pub fn rank_mates(table: &[Vec<Option<SearchResult>>], owners: &[usize]) -> Vec<MateRanking> {
    let n = owners.len();
    (0..n)
        .map(|i| {
            let mut best: std::collections::BTreeMap<usize, f64> = Default::default();
            for j in 0..n {
                if let Some(r) = &table[i][j] {
                    let s = r.best().score.fused;
                    let e = best.entry(owners[j]).or_insert(f64::NEG_INFINITY);
                    *e = e.max(s);
                }
            }
            let mut ranked: Vec<(usize, f64)> = best.into_iter().collect();
            ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            MateRanking {
                query: i,
                query_fragment: owners[i],
                ranked,
            }
        })
        .collect()
}

/// Pose error of an estimate against the truth, measured at a probe point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransformError {
    pub mirror_ok: bool,
    /// Radians.
    pub rotation: f64,
    /// Pixels, at the probe point.
    pub translation: f64,
}

pub fn transform_error(est: &RigidTransform2D, truth: &RigidTransform2D, probe: crate::Vec2) -> TransformError {
    TransformError {
        mirror_ok: est.mirror == truth.mirror,
        rotation: circular_diff(est.theta, truth.theta),
        translation: est.apply(probe).dist(truth.apply(probe)),
    }
}
