use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use shardmatch_core::db::{
    eval_csv, evaluate, leave_one_out_accuracy, mixed_queries, mixed_records, synth_training_set, EvalQuery, EvalRow, EvalSummary, FragmentDb,
    FragmentRecord, NearestCentroid, EVAL_CSV_HEADER,
};
use shardmatch_core::matching::TactileProfile;
use shardmatch_core::raster::pgm;
use shardmatch_core::synth::io::MANIFEST_FILE;
use shardmatch_core::synth::{CaptureParams, LoadedScene, MixedEntry, MixedScene, SceneSpec};
use shardmatch_core::tactile::reconstruct;
use shardmatch_core::{Error, Material};

use crate::args::{DbBuildArgs, EvalArgs, GenMixedArgs};
use crate::common::*;

pub const QUERIES_FILE: &str = "queries.json";

/// Database id of fragment `f` of a generated scene.
pub fn record_id(spec: &SceneSpec, f: usize) -> String {
    format!("{}-n{}-s{}-f{f:02}", spec.shape.as_str(), spec.n_seeds, spec.seed)
}

/// One record per fragment, with the whole-fragment press as its tactile
/// profile when the scene has one.
fn scene_records(scene: &LoadedScene, source: &str) -> CliResult<Vec<FragmentRecord>> {
    let m = &scene.manifest;
    let lights = if m.samples.is_empty() { None } else { Some(scene.lights()?) };
    (0..m.fragments.len())
        .into_par_iter()
        .map(|f| {
            let press = m.samples.iter().find(|s| s.fragment == f && s.edge.is_none());
            let tactile = match (press, &lights) {
                (Some(s), Some(l)) => {
                    let s = scene.load_sample(s.index, l)?;
                    let rec = reconstruct(&s.frame, &s.baseline, Some(&scene.masks[f]))?;
                    Some(TactileProfile::from_reconstruction(&rec, &scene.masks[f])?)
                }
                _ => None,
            };
            let e = &m.fragments[f];
            Ok(FragmentRecord::new(record_id(&m.spec, f), scene.masks[f].clone(), tactile, e.material, Some(e.colour), source)?)
        })
        .collect()
}

#[derive(Debug, Serialize)]
struct DbBuildConfig {
    db: String,
    scene: String,
    scene_spec: SceneSpec,
}

#[derive(Debug, Serialize)]
struct DbBuildResult {
    inserted: Vec<String>,
    tactile_missing: Vec<String>,
    records_total: usize,
}

pub fn db_build(a: &DbBuildArgs) -> CliResult<String> {
    distinct_out(&a.db, &[&a.scene])?;
    let scene = LoadedScene::open(&a.scene)?;
    let records = scene_records(&scene, &path_str(&a.scene))?;
    let mut db = FragmentDb::open(&a.db)?;
    for r in &records {
        if db.get(&r.id).is_ok() {
            return Err(Error::DuplicateId(r.id.clone()).into());
        }
    }
    let tactile_missing = records.iter().filter(|r| r.tactile_missing()).map(|r| r.id.clone()).collect();
    let mut inserted = Vec::new();
    for r in records {
        inserted.push(db.insert(r)?);
    }
    let result = DbBuildResult {
        inserted,
        tactile_missing,
        records_total: db.len(),
    };
    let config = DbBuildConfig {
        db: path_str(&a.db),
        scene: path_str(&a.scene),
        scene_spec: scene.manifest.spec,
    };
    let text = report_json("db-build", config, result)?;
    match &a.out {
        Some(p) => {
            if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                ensure_dir(parent)?;
            }
            write_text(p, &text)?;
            Ok(format!("database {} now holds {} records", a.db.display(), db.len()))
        }
        None => Ok(text.trim_end().to_string()),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryEntry {
    /// Probe record id in `probes/`.
    pub id: String,
    pub mask: String,
    /// Expected database id; absent for a held-out fragment.
    pub truth: Option<String>,
    pub true_material: Material,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuerySet {
    pub format_version: u32,
    pub seed: u64,
    pub noise_sigma: f64,
    pub queries: Vec<QueryEntry>,
}

#[derive(Debug, Serialize)]
struct GenMixedConfig {
    seed: u64,
    noise_sigma: f64,
    train_per_class: usize,
}

#[derive(Debug, Serialize)]
struct GenMixedResult {
    entries: Vec<MixedEntry>,
    classifier: NearestCentroid,
    classifier_loo_accuracy: f64,
    probe_material_correct: usize,
    database: &'static str,
    queries: &'static str,
}

pub fn gen_mixed(a: &GenMixedArgs) -> CliResult<String> {
    if !(a.noise_sigma.is_finite() && a.noise_sigma >= 0.0) {
        return Err(CliError::Usage(format!("--noise-sigma {} must be finite and >= 0", a.noise_sigma)));
    }
    if a.train_per_class < 2 {
        return Err(CliError::Usage("--train-per-class must be at least 2".into()));
    }
    let scene = MixedScene::generate(a.seed)?;
    let cp = CaptureParams {
        noise_sigma: a.noise_sigma,
        noise_seed: a.seed,
        ..CaptureParams::default()
    };
    let training = synth_training_set(a.seed, a.train_per_class)?;
    let loo = leave_one_out_accuracy(&training)?;
    let model = NearestCentroid::fit(&training)?;
    let source = format!("mixed-s{}", a.seed);
    let records = mixed_records(&scene, &cp, &source)?;
    let queries = mixed_queries(&scene, &cp, &model)?;

    let db_dir = a.out.join("db");
    let q_dir = a.out.join("queries");
    if db_dir.exists() || q_dir.exists() {
        return Err(Error::InvalidArgument(format!("{} already holds a mixed scene", a.out.display())).into());
    }
    let mut db = FragmentDb::open(&db_dir)?;
    for r in records {
        db.insert(r)?;
    }
    let mut probes = FragmentDb::open(q_dir.join("probes"))?;
    ensure_dir(&q_dir.join("masks"))?;
    let mut entries = Vec::new();
    let mut material_ok = 0;
    for (q, e) in queries.into_iter().zip(&scene.entries) {
        let mask = format!("masks/{}.pgm", q.probe.id);
        pgm::write_mask(&q_dir.join(&mask), &q.mask)?;
        material_ok += usize::from(q.probe.material == e.material);
        entries.push(QueryEntry {
            id: probes.insert(q.probe)?,
            mask,
            truth: q.truth,
            true_material: e.material,
        });
    }
    let set = QuerySet {
        format_version: REPORT_FORMAT_VERSION,
        seed: a.seed,
        noise_sigma: a.noise_sigma,
        queries: entries,
    };
    let mut text = serde_json::to_string_pretty(&set).map_err(Error::from)?;
    text.push('\n');
    write_text(&q_dir.join(QUERIES_FILE), &text)?;
    let n = set.queries.len();
    let result = GenMixedResult {
        entries: scene.entries.clone(),
        classifier: model,
        classifier_loo_accuracy: loo,
        probe_material_correct: material_ok,
        database: "db",
        queries: "queries",
    };
    let config = GenMixedConfig {
        seed: a.seed,
        noise_sigma: a.noise_sigma,
        train_per_class: a.train_per_class,
    };
    write_text(&a.out.join("mixed.json"), &report_json("gen-mixed", config, result)?)?;
    Ok(format!("wrote {} records and {n} queries; {material_ok}/{n} probe materials correct", db.len()))
}

fn load_query_set(dir: &Path) -> CliResult<Vec<EvalQuery>> {
    let path = dir.join(QUERIES_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let set: QuerySet = serde_json::from_str(&text).map_err(|e| Error::format("query set", &path, e.to_string()))?;
    if set.format_version != REPORT_FORMAT_VERSION {
        return Err(Error::format("query set", &path, format!("unsupported format_version {}", set.format_version)).into());
    }
    let probes = FragmentDb::open(dir.join("probes"))?;
    set.queries
        .iter()
        .map(|q| {
            Ok(EvalQuery {
                mask: pgm::read_mask(&dir.join(&q.mask))?,
                probe: probes.get(&q.id)?.clone(),
                truth: q.truth.clone(),
            })
        })
        .collect()
}

/// Every fragment of a scene as a query whose answer is its own record.
fn scene_queries(dir: &Path, db: &FragmentDb) -> CliResult<Vec<EvalQuery>> {
    let scene = LoadedScene::open(dir)?;
    let records = scene_records(&scene, "query")?;
    records
        .into_iter()
        .map(|r| {
            let truth = db.get(&r.id).is_ok().then(|| r.id.clone());
            let mask = r.visual_mask.clone();
            let probe = FragmentRecord { id: format!("query-{}", r.id), ..r };
            Ok(EvalQuery { mask, probe, truth })
        })
        .collect()
}

#[derive(Debug, Serialize)]
struct EvalConfig {
    db: String,
    scene: String,
    params: RunParams,
}

#[derive(Debug, Serialize)]
struct EvalResult {
    csv_header: &'static str,
    summary: EvalSummary,
    rows: Vec<EvalRow>,
}

pub fn eval_cmd(a: &EvalArgs) -> CliResult<String> {
    let params = RunParams::resolve(&a.params)?;
    distinct_out(&a.out, &[&a.db, &a.scene])?;
    if !a.db.is_dir() {
        return Err(Error::io(&a.db, std::io::Error::new(std::io::ErrorKind::NotFound, "missing database")).into());
    }
    let db = FragmentDb::open(&a.db)?;
    let queries = if a.scene.join(MANIFEST_FILE).is_file() {
        scene_queries(&a.scene, &db)?
    } else {
        load_query_set(&a.scene)?
    };
    let rows = evaluate(&db, &queries, &params.gap, &params.matching)?;
    let summary = EvalSummary::of(&rows);
    ensure_dir(&a.out)?;
    write_text(&a.out.join("eval.csv"), &eval_csv(&rows))?;
    let line = format!(
        "{} queries: top-1 {:.3}, top-3 {:.3}, mean IoU {:.3}, fallbacks {}, final top-1 {:.3}, unknown {}/{}",
        rows.len(),
        summary.top1,
        summary.top3,
        summary.mean_iou,
        summary.fallbacks,
        summary.final_top1,
        summary.unknown_flagged,
        summary.held_out
    );
    let config = EvalConfig {
        db: path_str(&a.db),
        scene: path_str(&a.scene),
        params,
    };
    let result = EvalResult {
        csv_header: EVAL_CSV_HEADER,
        summary,
        rows,
    };
    write_text(&a.out.join("eval.json"), &report_json("eval", config, result)?)?;
    Ok(line)
}
