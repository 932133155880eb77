use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::record::FragmentRecord;
use super::store::FragmentDb;
use crate::error::{Error, Result};
use crate::matching::{search_transform, MatchParams};
use crate::partial::{align_gap, GapParams};
use crate::raster::BinaryMask;

/// Relative gap between the Top-1 score and a runner-up below which the
/// ranking is considered ambiguous.
pub const FALLBACK_REL_GAP: f64 = 0.05;
/// Best IoU below which the visual ranking is considered unreliable.
pub const FALLBACK_MIN_IOU: f64 = 0.70;
/// Best fused tactile score below which a fragment is declared unknown.
pub const UNKNOWN_FLOOR: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FallbackReason {
    None,
    CloseScores,
    LowIou,
}

/// Ambiguity test on a ranking. `scores` are best first; only the first
/// three are consulted. The close-score clause takes precedence.
pub fn fallback_decision(scores: &[f64], max_iou: f64) -> (bool, FallbackReason) {
    let close = match scores {
        [s1, rest @ ..] => rest.iter().take(2).any(|s| (s1 - s).abs() / s1 < FALLBACK_REL_GAP),
        [] => false,
    };
    if close {
        (true, FallbackReason::CloseScores)
    } else if max_iou < FALLBACK_MIN_IOU {
        (true, FallbackReason::LowIou)
    } else {
        (false, FallbackReason::None)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryHit {
    pub id: String,
    /// Visual combined score for a query, fused tactile score for a rematch.
    pub score: f64,
    pub iou: Option<f64>,
    pub chamfer_px: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryResult {
    /// Best first; ties by id.
    pub ranked: Vec<QueryHit>,
    pub fallback_triggered: bool,
    pub fallback_reason: FallbackReason,
    /// Set by a rematch whose best score is under [`UNKNOWN_FLOOR`].
    pub unknown: bool,
    /// Records that could not be compared, with the reason.
    pub skipped: Vec<(String, String)>,
}

fn sort_hits(hits: &mut [QueryHit]) {
    hits.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.id.cmp(&b.id)));
}

impl FragmentDb {
    /// Aligns `mask` to every record and ranks by the visual combined score.
    /// The fallback test sees the full ranking; `k` only truncates the
    /// returned list. Records whose area is out of the rescaling range are
    /// skipped.
    pub fn query(&self, mask: &BinaryMask, k: usize, params: &GapParams) -> Result<QueryResult> {
        if self.is_empty() {
            return Err(Error::Empty("database"));
        }
        if mask.is_empty() {
            return Err(Error::Empty("query mask"));
        }
        let records: Vec<&FragmentRecord> = self.records().collect();
        let scored: Vec<(String, Result<crate::partial::GapAlignment>)> =
            records.par_iter().map(|r| (r.id.clone(), align_gap(mask, &r.visual_mask, params))).collect();
        let mut ranked = Vec::new();
        let mut skipped = Vec::new();
        for (id, res) in scored {
            match res {
                Ok(a) => ranked.push(QueryHit {
                    id,
                    score: a.combined,
                    iou: Some(a.iou),
                    chamfer_px: Some(a.chamfer_px),
                }),
                Err(e @ Error::AreaRatio { .. }) => skipped.push((id, e.to_string())),
                Err(e) => return Err(e),
            }
        }
        sort_hits(&mut ranked);
        let scores: Vec<f64> = ranked.iter().map(|h| h.score).collect();
        let max_iou = ranked.iter().filter_map(|h| h.iou).fold(0.0, f64::max);
        let (fallback_triggered, fallback_reason) = fallback_decision(&scores, max_iou);
        ranked.truncate(k);
        Ok(QueryResult {
            ranked,
            fallback_triggered,
            fallback_reason,
            unknown: false,
            skipped,
        })
    }
}

/// Restricts `candidates` to the query's material and re-ranks them by the
/// best fused tactile score. An empty or weak result marks the query
/// unknown.
pub fn rematch_with_tactile(query: &FragmentRecord, candidates: &[&FragmentRecord], params: &MatchParams) -> Result<QueryResult> {
    let probe = query
        .tactile
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument(format!("query `{}` has no tactile profile", query.id)))?;
    let mut skipped = Vec::new();
    let pool: Vec<&FragmentRecord> = candidates
        .iter()
        .copied()
        .filter(|c| c.material == query.material)
        .filter(|c| {
            if c.tactile.is_none() {
                skipped.push((c.id.clone(), "no tactile profile".to_string()));
            }
            c.tactile.is_some()
        })
        .collect();
    if pool.is_empty() {
        skipped.push((query.id.clone(), format!("no {} candidate with a tactile profile", query.material)));
    }
    let scored: Vec<(String, Result<f64>)> = pool
        .iter()
        .map(|c| {
            let t = c.tactile.as_ref().expect("filtered");
            (c.id.clone(), search_transform(probe, t, params).map(|r| r.best().score.fused))
        })
        .collect();
    let mut ranked = Vec::new();
    for (id, res) in scored {
        match res {
            Ok(score) => ranked.push(QueryHit {
                id,
                score,
                iou: None,
                chamfer_px: None,
            }),
            Err(Error::Empty(why)) => skipped.push((id, why.to_string())),
            Err(e) => return Err(e),
        }
    }
    sort_hits(&mut ranked);
    let unknown = ranked.first().is_none_or(|h| h.score < UNKNOWN_FLOOR);
    Ok(QueryResult {
        ranked,
        fallback_triggered: false,
        fallback_reason: FallbackReason::None,
        unknown,
        skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fallback_examples() {
        assert_eq!(fallback_decision(&[0.90, 0.88], 0.85), (true, FallbackReason::CloseScores));
        assert_eq!(fallback_decision(&[0.90, 0.60, 0.50], 0.65), (true, FallbackReason::LowIou));
        assert_eq!(fallback_decision(&[0.95, 0.70], 0.90), (false, FallbackReason::None));
        assert_eq!(fallback_decision(&[0.9], 0.9), (false, FallbackReason::None));
        assert_eq!(fallback_decision(&[0.9, 0.5, 0.88, 0.89], 0.9), (true, FallbackReason::CloseScores));
        assert_eq!(fallback_decision(&[0.9, 0.5, 0.4, 0.89], 0.9), (false, FallbackReason::None));
    }
}
