use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use shardmatch_core::db::{plan_assembly, AssemblyPlan, PairScore};
use shardmatch_core::matching::{pairwise_search, rank_mates, transform_error, ScoreBreakdown, SearchResult, TactileProfile};
use shardmatch_core::raster::{centroid, pgm};
use shardmatch_core::synth::io::SampleEntry;
use shardmatch_core::synth::{generate_scene, write_scene, LoadedScene, SceneManifest, SceneSpec};
use shardmatch_core::tactile::ffh::{self, RasterMeta};
use shardmatch_core::tactile::{reconstruct, ExtremaSet, HeightMap, Reconstruction};
use shardmatch_core::{RigidTransform2D, Vec2};

use crate::args::{GenArgs, ReconstructArgs, SceneRunArgs};
use crate::common::*;

/// Interior of a press domain used for the round-trip error.
pub const QA_ERODE_PX: usize = 2;
/// Pose tolerance of the pairwise match audit.
pub const POSE_TOL_DEG: f64 = 0.25;
pub const POSE_TOL_PX: f64 = 2.0;
/// Pose tolerance of the assembly audit, after aligning the seed fragment.
pub const ASSEMBLY_TOL_DEG: f64 = 1.0;
pub const ASSEMBLY_TOL_PX: f64 = 2.0;

pub fn spec_of(a: &GenArgs) -> SceneSpec {
    let mut s = SceneSpec::new(a.shape, a.seeds, a.seed);
    s.roughness = a.roughness;
    if let Some(amp) = a.amplitude {
        s.amplitude = amp;
    }
    s.material = a.material;
    s.noise_sigma = a.noise_sigma;
    if let Some(ns) = a.noise_seed {
        s.noise_seed = ns;
    }
    s
}

pub fn gen(a: &GenArgs) -> CliResult<String> {
    let spec = spec_of(a);
    usage(spec.validate())?;
    let bundle = generate_scene(&spec)?;
    let m = write_scene(&a.out, &bundle)?;
    Ok(format!(
        "wrote {} fragments, {} cracks, {} presses to {}",
        m.fragments.len(),
        m.adjacency.len(),
        m.samples.len(),
        a.out.display()
    ))
}

fn reconstruct_sample(scene: &LoadedScene, i: usize, lights: &[shardmatch_core::tactile::Vec3; 3]) -> CliResult<(SampleEntry, Reconstruction, Option<HeightMap>)> {
    let s = scene.load_sample(i, lights)?;
    let rec = reconstruct(&s.frame, &s.baseline, Some(&scene.masks[s.entry.fragment]))?;
    let truth = s.truth.map(HeightMap::full).transpose()?;
    Ok((s.entry, rec, truth))
}

#[derive(Debug, Serialize)]
struct SampleQa {
    index: usize,
    fragment: usize,
    edge: Option<usize>,
    domain_px: usize,
    interior_px: usize,
    rest_level: f64,
    /// Over the interior, after removing the mean.
    rmse_px: Option<f64>,
    truth_range_px: Option<f64>,
    /// `rmse_px / truth_range_px`.
    rel_rmse: Option<f64>,
    extrema: ExtremaSet,
}

#[derive(Debug, Serialize)]
struct ReconstructSummary {
    samples: usize,
    max_rel_rmse: Option<f64>,
    mean_rel_rmse: Option<f64>,
    per_sample: Vec<SampleQa>,
}

#[derive(Debug, Serialize)]
struct ReconstructConfig {
    scene: String,
    scene_spec: SceneSpec,
    qa_erode_px: usize,
}

pub fn reconstruct_cmd(a: &ReconstructArgs) -> CliResult<String> {
    distinct_out(&a.out, &[&a.scene])?;
    let scene = LoadedScene::open(&a.scene)?;
    let lights = scene.lights()?;
    let n = scene.manifest.samples.len();
    let recs: Vec<_> = (0..n).into_par_iter().map(|i| reconstruct_sample(&scene, i, &lights)).collect::<CliResult<_>>()?;
    let dir = a.out.join("profiles");
    ensure_dir(&dir)?;
    let height_meta = RasterMeta::new("px", "zero mean over domain");
    let slope_meta = RasterMeta::new("height px per lateral px", "none");
    let mut per_sample = Vec::with_capacity(n);
    for (entry, rec, truth) in &recs {
        let i = entry.index;
        ffh::write(&dir.join(format!("s{i:02}_height.ffh")), rec.height.values(), &height_meta)?;
        ffh::write(&dir.join(format!("s{i:02}_gradx.ffh")), &rec.gradients.gx, &slope_meta)?;
        ffh::write(&dir.join(format!("s{i:02}_grady.ffh")), &rec.gradients.gy, &slope_meta)?;
        pgm::write_mask(&dir.join(format!("s{i:02}_domain.pgm")), &rec.domain)?;
        let interior = rec.domain.erode(QA_ERODE_PX);
        let interior = if interior.is_empty() { rec.domain.clone() } else { interior };
        let (rmse, range) = match truth {
            Some(t) => {
                let rmse = rec.height.rmse(t, &interior)?;
                let (lo, hi) = interior
                    .foreground()
                    .map(|(x, y)| t.get(x, y))
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
                (Some(rmse), Some(hi - lo))
            }
            None => (None, None),
        };
        per_sample.push(SampleQa {
            index: i,
            fragment: entry.fragment,
            edge: entry.edge,
            domain_px: rec.domain.count(),
            interior_px: interior.count(),
            rest_level: rec.rest_level,
            rmse_px: rmse,
            truth_range_px: range,
            rel_rmse: rmse.zip(range).filter(|&(_, r)| r > 0.0).map(|(e, r)| e / r),
            extrema: rec.extrema.clone(),
        });
    }
    let rel: Vec<f64> = per_sample.iter().filter_map(|s| s.rel_rmse).collect();
    let summary = ReconstructSummary {
        samples: n,
        max_rel_rmse: rel.iter().copied().reduce(f64::max),
        mean_rel_rmse: (!rel.is_empty()).then(|| rel.iter().sum::<f64>() / rel.len() as f64),
        per_sample,
    };
    let line = format!(
        "reconstructed {n} presses; max relative RMSE {}",
        summary.max_rel_rmse.map_or("n/a".into(), |v| format!("{v:.3e}"))
    );
    let config = ReconstructConfig {
        scene: path_str(&a.scene),
        scene_spec: scene.manifest.spec,
        qa_erode_px: QA_ERODE_PX,
    };
    write_text(&a.out.join("reconstruct.json"), &report_json("reconstruct", config, summary)?)?;
    Ok(line)
}

/// Crack presses of a scene with their profiles, in sample order.
pub struct ScenePresses {
    pub scene: LoadedScene,
    pub entries: Vec<SampleEntry>,
    pub profiles: Vec<TactileProfile>,
}

impl ScenePresses {
    pub fn load(dir: &Path) -> CliResult<Self> {
        let scene = LoadedScene::open(dir)?;
        let lights = scene.lights()?;
        let idx: Vec<usize> = scene.manifest.samples.iter().filter(|s| s.edge.is_some()).map(|s| s.index).collect();
        let loaded: Vec<(SampleEntry, TactileProfile)> = idx
            .par_iter()
            .map(|&i| {
                let (entry, rec, _) = reconstruct_sample(&scene, i, &lights)?;
                let profile = TactileProfile::from_reconstruction(&rec, &scene.masks[entry.fragment])?;
                Ok((entry, profile))
            })
            .collect::<CliResult<_>>()?;
        let (entries, profiles) = loaded.into_iter().unzip();
        Ok(ScenePresses { scene, entries, profiles })
    }

    pub fn owners(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.fragment).collect()
    }

    pub fn manifest(&self) -> &SceneManifest {
        &self.scene.manifest
    }
}

#[derive(Debug, Serialize)]
struct PoseCheck {
    rotation_deg: f64,
    translation_px: f64,
    mirror_ok: bool,
    within_tolerance: bool,
}

fn pose_check(est: &RigidTransform2D, truth: &RigidTransform2D, probe: Vec2, tol: (f64, f64)) -> PoseCheck {
    let e = transform_error(est, truth, probe);
    let rotation_deg = e.rotation.to_degrees();
    PoseCheck {
        rotation_deg,
        translation_px: e.translation,
        mirror_ok: e.mirror_ok,
        within_tolerance: e.mirror_ok && rotation_deg <= tol.0 && e.translation <= tol.1,
    }
}

#[derive(Debug, Serialize)]
struct FragmentHit {
    fragment: usize,
    /// Press on `fragment` that scored best.
    sample: usize,
    score: ScoreBreakdown,
    /// Present when `fragment` is a true neighbour of the query.
    pose_check: Option<PoseCheck>,
}

#[derive(Debug, Serialize)]
struct QueryReport {
    sample: usize,
    fragment: usize,
    edge: usize,
    true_mate: usize,
    true_mate_rank: Option<usize>,
    ranked: Vec<FragmentHit>,
}

#[derive(Debug, Serialize)]
struct MatchSummary {
    queries: usize,
    top1_rate: f64,
    top3_rate: f64,
    /// Crack press pairs whose best transform meets the pose tolerance.
    mate_pairs: usize,
    mate_pairs_within_tolerance: usize,
    per_query: Vec<QueryReport>,
}

#[derive(Debug, Serialize)]
struct SceneRunConfig {
    scene: String,
    scene_spec: SceneSpec,
    params: RunParams,
    pose_tol_deg: f64,
    pose_tol_px: f64,
}

/// Best search from press `i` into any press of `fragment`; ties go to the
/// lower press index.
fn best_into<'a>(table: &'a [Vec<Option<SearchResult>>], owners: &[usize], i: usize, fragment: usize) -> Option<(usize, &'a SearchResult)> {
    let mut best: Option<(usize, &SearchResult)> = None;
    for (j, r) in table[i].iter().enumerate() {
        if owners[j] != fragment {
            continue;
        }
        if let Some(r) = r {
            if best.is_none_or(|(_, b)| r.best().score.fused > b.best().score.fused) {
                best = Some((j, r));
            }
        }
    }
    best
}

pub fn match_cmd(a: &SceneRunArgs) -> CliResult<String> {
    let params = RunParams::resolve(&a.params)?;
    distinct_out(&a.out, &[&a.scene])?;
    let p = ScenePresses::load(&a.scene)?;
    let owners = p.owners();
    let table = pairwise_search(&p.profiles, &owners, &params.matching)?;
    let ranks = rank_mates(&table, &owners);
    let m = p.manifest();
    let mut per_query = Vec::new();
    let (mut top1, mut top3, mut pairs, mut pairs_ok) = (0, 0, 0, 0);
    for (i, r) in ranks.iter().enumerate() {
        let entry = &p.entries[i];
        let edge = entry.edge.expect("crack press");
        let adj = &m.adjacency[edge];
        let mate = if adj.a == entry.fragment { adj.b } else { adj.a };
        let rank = r.rank_of(mate);
        top1 += usize::from(rank == Some(1));
        top3 += usize::from(rank.is_some_and(|k| k <= 3));
        let ranked = r
            .ranked
            .iter()
            .filter_map(|&(f, _)| {
                let (j, res) = best_into(&table, &owners, i, f)?;
                let score = res.best().score;
                let pose = m
                    .are_adjacent(entry.fragment, f)
                    .then(|| pose_check(&score.transform, &m.true_relative(entry.fragment, f), p.profiles[j].edge_centroid(), (POSE_TOL_DEG, POSE_TOL_PX)));
                Some(FragmentHit {
                    fragment: f,
                    sample: p.entries[j].index,
                    score,
                    pose_check: pose,
                })
            })
            .collect::<Vec<_>>();
        // Each crack's pair is counted once, from its first press.
        if let Some(j) = (i + 1..p.entries.len()).find(|&j| p.entries[j].edge == Some(edge) && owners[j] == mate) {
            if let Some(res) = &table[i][j] {
                pairs += 1;
                let c = pose_check(&res.best().score.transform, &m.true_relative(entry.fragment, mate), p.profiles[j].edge_centroid(), (POSE_TOL_DEG, POSE_TOL_PX));
                pairs_ok += usize::from(c.within_tolerance);
            }
        }
        per_query.push(QueryReport {
            sample: entry.index,
            fragment: entry.fragment,
            edge,
            true_mate: mate,
            true_mate_rank: rank,
            ranked,
        });
    }
    let q = per_query.len();
    let rate = |k: usize| if q == 0 { 0.0 } else { k as f64 / q as f64 };
    let summary = MatchSummary {
        queries: q,
        top1_rate: rate(top1),
        top3_rate: rate(top3),
        mate_pairs: pairs,
        mate_pairs_within_tolerance: pairs_ok,
        per_query,
    };
    let line = format!(
        "{q} crack presses: top-1 {:.3}, top-3 {:.3}, poses within tolerance {pairs_ok}/{pairs}",
        summary.top1_rate, summary.top3_rate
    );
    let config = SceneRunConfig {
        scene: path_str(&a.scene),
        scene_spec: m.spec,
        params,
        pose_tol_deg: POSE_TOL_DEG,
        pose_tol_px: POSE_TOL_PX,
    };
    ensure_dir(&a.out)?;
    write_text(&a.out.join("matches.json"), &report_json("match", config, summary)?)?;
    Ok(line)
}

pub fn fragment_name(id: usize) -> String {
    format!("f{id:02}")
}

/// Per fragment pair, the best fused score over all press pairs.
pub fn fragment_pair_table(p: &ScenePresses, table: &[Vec<Option<SearchResult>>]) -> Vec<Vec<Option<PairScore>>> {
    let n = p.manifest().fragments.len();
    let owners = p.owners();
    let mut out: Vec<Vec<Option<PairScore>>> = vec![vec![None; n]; n];
    for (i, row) in table.iter().enumerate() {
        for (j, r) in row.iter().enumerate() {
            let Some(r) = r else { continue };
            let c = r.best().score;
            let slot = &mut out[owners[i]][owners[j]];
            if slot.is_none_or(|s| c.fused > s.score) {
                *slot = Some(PairScore {
                    score: c.fused,
                    transform: c.transform,
                });
            }
        }
    }
    out
}

#[derive(Debug, Serialize)]
struct StepAudit {
    fragment: usize,
    mate: Option<usize>,
    mate_adjacent: Option<bool>,
    /// Against the true pose after aligning the seed fragment to its truth.
    pose_check: PoseCheck,
}

#[derive(Debug, Serialize)]
struct AssembleSummary {
    plan: AssemblyPlan,
    audit: Vec<StepAudit>,
    all_mates_adjacent: bool,
    all_poses_within_tolerance: bool,
}

pub fn assemble_cmd(a: &SceneRunArgs) -> CliResult<String> {
    let params = RunParams::resolve(&a.params)?;
    distinct_out(&a.out, &[&a.scene])?;
    let p = ScenePresses::load(&a.scene)?;
    let m = p.manifest();
    let table = pairwise_search(&p.profiles, &p.owners(), &params.matching)?;
    let pairs = fragment_pair_table(&p, &table);
    let ids: Vec<String> = (0..m.fragments.len()).map(fragment_name).collect();
    let plan = plan_assembly(&ids, &pairs)?;
    let index = |name: &str| ids.iter().position(|s| s == name).expect("plan uses scene ids");
    let seed = index(&plan.steps[0].fragment);
    let anchor = m.fragments[seed].pose;
    let mut audit = Vec::new();
    for step in &plan.steps {
        let f = index(&step.fragment);
        let mate = step.mate.as_deref().map(index);
        let probe = centroid(&p.scene.masks[f])?;
        audit.push(StepAudit {
            fragment: f,
            mate,
            mate_adjacent: mate.map(|g| m.are_adjacent(f, g)),
            pose_check: pose_check(&anchor.compose(&step.transform), &m.fragments[f].pose, probe, (ASSEMBLY_TOL_DEG, ASSEMBLY_TOL_PX)),
        });
    }
    let summary = AssembleSummary {
        all_mates_adjacent: audit.iter().all(|s| s.mate_adjacent != Some(false)),
        all_poses_within_tolerance: audit.iter().all(|s| s.pose_check.within_tolerance),
        plan,
        audit,
    };
    let line = format!(
        "placed {} fragments; mates adjacent: {}; poses within tolerance: {}",
        summary.plan.steps.len(),
        summary.all_mates_adjacent,
        summary.all_poses_within_tolerance
    );
    let config = SceneRunConfig {
        scene: path_str(&a.scene),
        scene_spec: m.spec,
        params,
        pose_tol_deg: ASSEMBLY_TOL_DEG,
        pose_tol_px: ASSEMBLY_TOL_PX,
    };
    ensure_dir(&a.out)?;
    write_text(&a.out.join("plan.json"), &report_json("assemble", config, summary)?)?;
    Ok(line)
}
