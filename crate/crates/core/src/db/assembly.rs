use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::RigidTransform2D;

/// Best pose of fragment `j` in fragment `i`'s frame and its fused score,
/// stored at `[i][j]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairScore {
    pub score: f64,
    pub transform: RigidTransform2D,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanStep {
    pub fragment: String,
    /// Fragment frame into the seed fragment's frame.
    pub transform: RigidTransform2D,
    /// Already placed fragment this one is attached to; `None` for the seed.
    pub mate: Option<String>,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssemblyPlan {
    pub steps: Vec<PlanStep>,
}

/// Best directed evidence for the unordered pair: `(score, pose of b in a)`.
/// The `[a][b]` entry wins ties.
fn link(pairwise: &[Vec<Option<PairScore>>], a: usize, b: usize) -> Option<(f64, RigidTransform2D)> {
    let fwd = pairwise[a][b].map(|p| (p.score, p.transform));
    let back = pairwise[b][a].map(|p| (p.score, p.transform.inverse()));
    match (fwd, back) {
        (Some(f), Some(r)) => Some(if r.0 > f.0 { r } else { f }),
        (f, r) => f.or(r),
    }
}

/// Greedy growth from the strongest pair: each round attaches the unplaced
/// fragment with the highest score against any placed one. Ties go to the
/// lower index, first for the newcomer and then for its mate.
pub fn plan_assembly(ids: &[String], pairwise: &[Vec<Option<PairScore>>]) -> Result<AssemblyPlan> {
    let n = ids.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!("assembly needs at least 2 fragments, got {n}")));
    }
    if pairwise.len() != n || pairwise.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidArgument(format!("pairwise table must be {n}x{n}")));
    }
    let mut seed: Option<(f64, usize, usize, RigidTransform2D)> = None;
    for a in 0..n {
        for b in a + 1..n {
            if let Some((s, t)) = link(pairwise, a, b) {
                if seed.is_none_or(|best| s > best.0) {
                    seed = Some((s, a, b, t));
                }
            }
        }
    }
    let (s0, a, b, t0) = seed.ok_or(Error::Empty("no scored pair"))?;
    let mut pose: Vec<Option<RigidTransform2D>> = vec![None; n];
    pose[a] = Some(RigidTransform2D::identity());
    pose[b] = Some(t0);
    let mut steps = vec![
        PlanStep {
            fragment: ids[a].clone(),
            transform: RigidTransform2D::identity(),
            mate: None,
            score: s0,
        },
        PlanStep {
            fragment: ids[b].clone(),
            transform: t0,
            mate: Some(ids[a].clone()),
            score: s0,
        },
    ];
    while steps.len() < n {
        let mut pick: Option<(f64, usize, usize, RigidTransform2D)> = None;
        for u in (0..n).filter(|&u| pose[u].is_none()) {
            for p in (0..n).filter(|&p| pose[p].is_some()) {
                if let Some((s, t)) = link(pairwise, p, u) {
                    if pick.is_none_or(|best| s > best.0) {
                        pick = Some((s, u, p, t));
                    }
                }
            }
        }
        let (s, u, p, t) = pick.ok_or(Error::Empty("fragment with no scored pair to the placed set"))?;
        let placed = pose[p].expect("mate is placed").compose(&t);
        pose[u] = Some(placed);
        steps.push(PlanStep {
            fragment: ids[u].clone(),
            transform: placed,
            mate: Some(ids[p].clone()),
            score: s,
        });
    }
    Ok(AssemblyPlan { steps })
}
