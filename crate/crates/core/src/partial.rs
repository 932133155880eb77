//! Vision-only alignment of a detached fragment to the gap it left in a
//! mostly intact object.
//!
//! The fragment is rescaled by `sqrt(area(gap) / area(fragment))`, its
//! centroid is placed on the gap centroid and it is swept through a full
//! turn. Every pose is rasterised into the gap's canvas by bilinear
//! resampling and re-thresholding at 0.5.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{RigidTransform2D, Vec2};
use crate::raster::{centroid, chamfer_points, iou, BinaryMask};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GapParams {
    pub w_iou: f64,
    pub w_chamfer: f64,
    /// Chamfer decay length, px.
    pub kappa: f64,
    pub step_deg: f64,
    /// Also sweep the mirrored fragment.
    pub mirror: bool,
    pub min_area_ratio: f64,
    pub max_area_ratio: f64,
}

impl Default for GapParams {
    fn default() -> Self {
        GapParams {
            w_iou: 0.7,
            w_chamfer: 0.3,
            kappa: 10.0,
            step_deg: 1.0,
            mirror: false,
            min_area_ratio: 0.8,
            max_area_ratio: 1.25,
        }
    }
}

impl GapParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.w_iou >= 0.0
            && self.w_chamfer >= 0.0
            && ((self.w_iou + self.w_chamfer) - 1.0).abs() < 1e-9
            && self.kappa > 0.0
            && self.step_deg > 0.0
            && self.step_deg <= 360.0
            && self.min_area_ratio > 0.0
            && self.min_area_ratio <= self.max_area_ratio;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid gap parameters {self:?}")))
        }
    }

    pub fn combine(&self, iou: f64, chamfer_px: f64) -> f64 {
        self.w_iou * iou + self.w_chamfer * (-chamfer_px / self.kappa).exp()
    }
}

/// One pose of the sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub theta_deg: f64,
    pub mirror: bool,
    pub iou: f64,
    pub chamfer_px: f64,
    pub combined: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapAlignment {
    /// Rigid part: fragment canvas into gap canvas, centroid onto centroid.
    pub transform: RigidTransform2D,
    /// Isotropic scale applied about the gap centroid after `transform`.
    pub scale: f64,
    pub iou: f64,
    pub chamfer_px: f64,
    pub combined: f64,
}

struct Setup {
    scale: f64,
    from: Vec2,
    to: Vec2,
    gap_edge: Vec<Vec2>,
}

fn setup(fragment: &BinaryMask, gap: &BinaryMask, params: &GapParams) -> Result<Setup> {
    params.validate()?;
    if fragment.is_empty() {
        return Err(Error::Empty("fragment mask"));
    }
    if gap.is_empty() {
        return Err(Error::Empty("gap mask"));
    }
    let ratio = gap.count() as f64 / fragment.count() as f64;
    let scale = ratio.sqrt();
    if !(params.min_area_ratio..=params.max_area_ratio).contains(&scale) {
        return Err(Error::AreaRatio {
            ratio: scale,
            min: params.min_area_ratio,
            max: params.max_area_ratio,
        });
    }
    Ok(Setup {
        scale,
        from: centroid(fragment)?,
        to: centroid(gap)?,
        gap_edge: edge_points(gap),
    })
}

fn edge_points(mask: &BinaryMask) -> Vec<Vec2> {
    mask.boundary().foreground().map(|(x, y)| Vec2::new(x as f64, y as f64)).collect()
}

impl Setup {
    fn pose(&self, mirror: bool, theta: f64) -> RigidTransform2D {
        RigidTransform2D::about(mirror, theta, self.from, self.to)
    }

    /// Fragment resampled into the gap canvas at `pose`, then scaled about
    /// the gap centroid.
    fn warp(&self, fragment: &BinaryMask, pose: &RigidTransform2D, dims: (usize, usize)) -> BinaryMask {
        let inv = pose.inverse();
        let to = self.to;
        let s = self.scale;
        BinaryMask::from_fn(dims.0, dims.1, |x, y| {
            let q = Vec2::new(to.x + (x as f64 - to.x) / s, to.y + (y as f64 - to.y) / s);
            fragment.sample_bilinear(inv.apply(q)) >= 0.5
        })
        .expect("gap dims are valid")
    }

    fn row(&self, fragment: &BinaryMask, gap: &BinaryMask, mirror: bool, theta_deg: f64, params: &GapParams) -> Result<SweepRow> {
        let pose = self.pose(mirror, theta_deg.to_radians());
        let warped = self.warp(fragment, &pose, gap.dims());
        let overlap = iou(&warped, gap)?;
        let edge = edge_points(&warped);
        let chamfer_px = if edge.is_empty() {
            f64::INFINITY
        } else {
            chamfer_points(&edge, &self.gap_edge, true)?
        };
        Ok(SweepRow {
            theta_deg,
            mirror,
            iou: overlap,
            chamfer_px,
            combined: params.combine(overlap, chamfer_px),
        })
    }
}

fn angles(params: &GapParams) -> Vec<f64> {
    let n = (360.0 / params.step_deg - 1e-9).ceil() as usize;
    (0..n).map(|k| k as f64 * params.step_deg).collect()
}

/// Every pose of the sweep, ordered by angle and, within an angle,
/// unmirrored first.
pub fn sweep_profile(fragment: &BinaryMask, gap: &BinaryMask, params: &GapParams) -> Result<Vec<SweepRow>> {
    let s = setup(fragment, gap, params)?;
    let mirrors: &[bool] = if params.mirror { &[false, true] } else { &[false] };
    let keys: Vec<(f64, bool)> = angles(params).into_iter().flat_map(|a| mirrors.iter().map(move |&m| (a, m))).collect();
    keys.par_iter().map(|&(a, m)| s.row(fragment, gap, m, a, params)).collect()
}

/// Index of the best row: highest combined score, ties to the earliest row,
/// which is the smallest angle and then the unmirrored pose.
pub fn best_row(rows: &[SweepRow]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, r) in rows.iter().enumerate() {
        if best.is_none_or(|b| r.combined > rows[b].combined) {
            best = Some(i);
        }
    }
    best
}

pub fn align_gap(fragment: &BinaryMask, gap: &BinaryMask, params: &GapParams) -> Result<GapAlignment> {
    let s = setup(fragment, gap, params)?;
    let rows = sweep_profile(fragment, gap, params)?;
    let r = rows[best_row(&rows).ok_or(Error::Empty("sweep"))?];
    Ok(GapAlignment {
        transform: s.pose(r.mirror, r.theta_deg.to_radians()),
        scale: s.scale,
        iou: r.iou,
        chamfer_px: r.chamfer_px,
        combined: r.combined,
    })
}

/// `theta_deg,iou,chamfer_px,combined`, with a trailing `mirror` column when
/// the sweep included mirrored poses.
pub fn sweep_csv(rows: &[SweepRow], with_mirror: bool) -> String {
    let mut out = String::from(if with_mirror {
        "theta_deg,iou,chamfer_px,combined,mirror\n"
    } else {
        "theta_deg,iou,chamfer_px,combined\n"
    });
    for r in rows {
        out.push_str(&format!("{},{:.9},{:.9},{:.9}", r.theta_deg, r.iou, r.chamfer_px, r.combined));
        if with_mirror {
            out.push_str(if r.mirror { ",1" } else { ",0" });
        }
        out.push('\n');
    }
    out
}

/// Fragment mask carried through an alignment into a canvas of `dims`.
pub fn place(fragment: &BinaryMask, a: &GapAlignment, dims: (usize, usize)) -> Result<BinaryMask> {
    if fragment.is_empty() {
        return Err(Error::Empty("fragment mask"));
    }
    let s = Setup {
        scale: a.scale,
        from: Vec2::new(0.0, 0.0),
        to: a.transform.apply(centroid(fragment)?),
        gap_edge: Vec::new(),
    };
    Ok(s.warp(fragment, &a.transform, dims))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::Polygon;

    fn blob() -> BinaryMask {
        let v = [(20.0, 18.0), (44.0, 22.0), (40.0, 34.0), (30.0, 30.0), (22.0, 42.0)];
        Polygon::new(v.iter().map(|&(x, y)| Vec2::new(x, y)).collect()).unwrap().rasterize(64, 64).unwrap()
    }

    #[test]
    fn identity_scores_one() {
        let m = blob();
        let a = align_gap(&m, &m, &GapParams::default()).unwrap();
        assert_eq!(a.transform.theta, 0.0);
        assert!(!a.transform.mirror);
        assert_eq!((a.iou, a.chamfer_px, a.combined), (1.0, 0.0, 1.0));
        assert_eq!(place(&m, &a, m.dims()).unwrap(), m);
    }

    #[test]
    fn rejects_bad_inputs() {
        let m = blob();
        let e = BinaryMask::empty(64, 64).unwrap();
        assert!(matches!(align_gap(&e, &m, &GapParams::default()), Err(Error::Empty(_))));
        assert!(matches!(align_gap(&m, &e, &GapParams::default()), Err(Error::Empty(_))));
        let big = m.dilate(4);
        assert!(matches!(align_gap(&m, &big, &GapParams::default()), Err(Error::AreaRatio { .. })));
        let p = GapParams {
            w_iou: 0.5,
            ..GapParams::default()
        };
        assert!(align_gap(&m, &m, &p).is_err());
    }

    #[test]
    fn combined_is_one_only_when_perfect() {
        let p = GapParams::default();
        assert_eq!(p.combine(1.0, 0.0), 1.0);
        assert!(p.combine(0.999, 0.0) < 1.0);
        assert!(p.combine(1.0, 0.01) < 1.0);
    }

    #[test]
    fn best_row_prefers_earliest_tie() {
        let r = |theta_deg, mirror, combined| SweepRow {
            theta_deg,
            mirror,
            iou: 0.0,
            chamfer_px: 0.0,
            combined,
        };
        let rows = [r(0.0, false, 0.5), r(10.0, false, 0.9), r(10.0, true, 0.9), r(20.0, false, 0.9)];
        assert_eq!(best_row(&rows), Some(1));
        assert_eq!(best_row(&[]), None);
    }

    #[test]
    fn square_has_four_fold_maxima() {
        let sq = Polygon::square(Vec2::new(32.0, 32.0), 24.0).unwrap().rasterize(64, 64).unwrap();
        let rows = sweep_profile(&sq, &sq, &GapParams::default()).unwrap();
        for k in 0..4 {
            assert!((rows[90 * k].combined - 1.0).abs() < 1e-12, "{k}");
        }
        assert!(rows[45].combined < 0.95);
    }

    #[test]
    fn mirrored_inputs_mirror_the_result() {
        let m = blob();
        let gap = {
            let t = RigidTransform2D::about(false, 0.6, Vec2::new(32.0, 30.0), Vec2::new(30.0, 32.0));
            let inv = t.inverse();
            BinaryMask::from_fn(64, 64, |x, y| m.sample_bilinear(inv.apply(Vec2::new(x as f64, y as f64))) >= 0.5).unwrap()
        };
        let p = GapParams::default();
        let a = align_gap(&m, &gap, &p).unwrap();
        let b = align_gap(&m.flip_horizontal(), &gap.flip_horizontal(), &p).unwrap();
        assert_eq!((a.iou, a.chamfer_px), (b.iou, b.chamfer_px));
        let deg = |t: f64| t.to_degrees().rem_euclid(360.0).round();
        assert_eq!(deg(a.transform.theta), deg(-b.transform.theta));
    }

    #[test]
    fn notch_rotated_thirty_degrees() {
        let s = crate::synth::notched_square_scene(128, 30f64.to_radians()).unwrap();
        let p = GapParams::default();
        let a = align_gap(&s.fragment, &s.gap, &p).unwrap();
        assert!((a.transform.theta.to_degrees() - 30.0).abs() <= 1.0, "{a:?}");
        assert!(a.iou >= 0.95, "{a:?}");
        let rows = sweep_profile(&s.fragment, &s.gap, &p).unwrap();
        let r = rows[best_row(&rows).unwrap()];
        assert_eq!((r.iou, r.chamfer_px, r.combined), (a.iou, a.chamfer_px, a.combined));
    }
}
