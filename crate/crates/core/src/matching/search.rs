use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::params::MatchParams;
use super::profile::TactileProfile;
use super::scores::{score_prepared, PreparedProfile, ScoreBreakdown};
use crate::error::{Error, Result};
use crate::geom::{wrap_angle, RigidTransform2D};

/// Fine rotation steps per coarse step.
pub const REFINE_DIVISIONS: i64 = 8;

/// One scored pose hypothesis. `fine_index` counts rotations in units of
/// `sweep_step / REFINE_DIVISIONS`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub mirror: bool,
    pub fine_index: i64,
    pub score: ScoreBreakdown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    /// All evaluated candidates, best first.
    pub ranked: Vec<Candidate>,
    /// Hypotheses dropped because no edge point had gradient support.
    pub unsupported: usize,
}

impl SearchResult {
    pub fn best(&self) -> &Candidate {
        &self.ranked[0]
    }
}

fn fine_count(step: f64) -> i64 {
    let coarse = (std::f64::consts::TAU / step).round().max(1.0) as i64;
    coarse * REFINE_DIVISIONS
}

fn theta_of(m: i64, step: f64, period: i64) -> f64 {
    wrap_angle(m.rem_euclid(period) as f64 * step / REFINE_DIVISIONS as f64)
}

/// Total order: fused descending, then θ, tx, ty ascending, unmirrored first.
fn rank(a: &Candidate, b: &Candidate) -> std::cmp::Ordering {
    let (ta, tb) = (&a.score.transform, &b.score.transform);
    b.score
        .fused
        .total_cmp(&a.score.fused)
        .then(ta.theta.total_cmp(&tb.theta))
        .then(ta.tx.total_cmp(&tb.tx))
        .then(ta.ty.total_cmp(&tb.ty))
        .then(a.mirror.cmp(&b.mirror))
}

/// Rotation sweep over both mirror states with the edge-set centroids
/// aligned, followed by a fine sweep around the strongest coarse hypotheses.
pub fn search_transform(f1: &TactileProfile, f2: &TactileProfile, params: &MatchParams) -> Result<SearchResult> {
    params.validate()?;
    let p1 = PreparedProfile::new(f1, params);
    let p2 = PreparedProfile::new(f2, params);
    // The coarse step is snapped so that it divides the full turn.
    let period = fine_count(params.sweep_step);
    let step = std::f64::consts::TAU / (period / REFINE_DIVISIONS) as f64;

    let eval = |keys: &[(bool, i64)]| -> Result<(Vec<Candidate>, usize)> {
        let scored: Vec<Result<Option<Candidate>>> = keys
            .par_iter()
            .map(|&(mirror, m)| {
                let t = RigidTransform2D::about(mirror, theta_of(m, step, period), p2.centroid, p1.centroid);
                match score_prepared(&p1, &p2, &t, params) {
                    Ok(score) => Ok(Some(Candidate {
                        mirror,
                        fine_index: m.rem_euclid(period),
                        score,
                    })),
                    Err(Error::Empty(_)) => Ok(None),
                    Err(e) => Err(e),
                }
            })
            .collect();
        let mut out = Vec::with_capacity(keys.len());
        let mut dropped = 0;
        for s in scored {
            match s? {
                Some(c) => out.push(c),
                None => dropped += 1,
            }
        }
        Ok((out, dropped))
    };

    let coarse_keys: Vec<(bool, i64)> = [false, true]
        .into_iter()
        .flat_map(|mir| (0..period / REFINE_DIVISIONS).map(move |k| (mir, k * REFINE_DIVISIONS)))
        .collect();
    let (mut ranked, mut unsupported) = eval(&coarse_keys)?;
    ranked.sort_by(rank);

    let mut seen: std::collections::BTreeSet<(bool, i64)> = coarse_keys.iter().copied().collect();
    let mut fine_keys = Vec::new();
    for c in ranked.iter().take(params.refine_top) {
        for j in -REFINE_DIVISIONS..=REFINE_DIVISIONS {
            let key = (c.mirror, (c.fine_index + j).rem_euclid(period));
            if seen.insert(key) {
                fine_keys.push(key);
            }
        }
    }
    let (fine, dropped) = eval(&fine_keys)?;
    unsupported += dropped;
    ranked.extend(fine);
    ranked.sort_by(rank);
    if ranked.is_empty() {
        return Err(Error::Empty("no pose hypothesis had gradient support"));
    }
    Ok(SearchResult { ranked, unsupported })
}
