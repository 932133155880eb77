use serde::Serialize;
use shardmatch_core::partial::{align_gap, best_row, place, sweep_csv, sweep_profile, GapAlignment};
use shardmatch_core::raster::pgm;
use shardmatch_core::synth::notched_square_scene;

use crate::args::{AlignGapArgs, GenNotchArgs};
use crate::common::*;

#[derive(Debug, Serialize)]
struct AlignConfig {
    gap: String,
    fragment: String,
    params: RunParams,
}

#[derive(Debug, Serialize)]
struct AlignResult {
    alignment: GapAlignment,
    theta_deg: f64,
    /// Row of `sweep.csv` (0-based, header excluded) holding the optimum.
    best_row: usize,
    rows: usize,
}

pub fn align_gap_cmd(a: &AlignGapArgs) -> CliResult<String> {
    let mut params = RunParams::resolve(&a.params)?;
    params.gap.mirror |= a.mirror;
    distinct_out(&a.out, &[&a.gap, &a.fragment])?;
    let gap = pgm::read_mask(&a.gap)?;
    let fragment = pgm::read_mask(&a.fragment)?;
    let rows = sweep_profile(&fragment, &gap, &params.gap)?;
    let best = best_row(&rows).ok_or(shardmatch_core::Error::Empty("sweep"))?;
    let alignment = align_gap(&fragment, &gap, &params.gap)?;
    ensure_dir(&a.out)?;
    write_text(&a.out.join("sweep.csv"), &sweep_csv(&rows, params.gap.mirror))?;
    pgm::write_mask(&a.out.join("placed.pgm"), &place(&fragment, &alignment, gap.dims())?)?;
    let result = AlignResult {
        theta_deg: rows[best].theta_deg,
        alignment,
        best_row: best,
        rows: rows.len(),
    };
    let line = format!(
        "best rotation {:.2} deg, IoU {:.4}, chamfer {:.3} px",
        result.theta_deg, alignment.iou, alignment.chamfer_px
    );
    let config = AlignConfig {
        gap: path_str(&a.gap),
        fragment: path_str(&a.fragment),
        params,
    };
    write_text(&a.out.join("alignment.json"), &report_json("align-gap", config, result)?)?;
    Ok(line)
}

#[derive(Debug, Serialize)]
struct NotchConfig {
    size: usize,
    rotation_deg: f64,
}

#[derive(Debug, Serialize)]
struct NotchResult {
    intact: &'static str,
    gap: &'static str,
    fragment: &'static str,
    gap_px: usize,
    fragment_px: usize,
}

pub fn gen_notch(a: &GenNotchArgs) -> CliResult<String> {
    if !a.rotation_deg.is_finite() {
        return Err(CliError::Usage("--rotation-deg must be finite".into()));
    }
    let s = usage(notched_square_scene(a.size, a.rotation_deg.to_radians()))?;
    ensure_dir(&a.out)?;
    pgm::write_mask(&a.out.join("intact.pgm"), &s.intact)?;
    pgm::write_mask(&a.out.join("gap.pgm"), &s.gap)?;
    pgm::write_mask(&a.out.join("fragment.pgm"), &s.fragment)?;
    let result = NotchResult {
        intact: "intact.pgm",
        gap: "gap.pgm",
        fragment: "fragment.pgm",
        gap_px: s.gap.count(),
        fragment_px: s.fragment.count(),
    };
    let config = NotchConfig {
        size: a.size,
        rotation_deg: a.rotation_deg,
    };
    write_text(&a.out.join("notch.json"), &report_json("gen-notch", config, result)?)?;
    Ok(format!("wrote notch scene to {}", a.out.display()))
}
