//! Scalar agreement metrics between masks and point sets.

use serde::{Deserialize, Serialize};

use super::contour::Contour;
use super::mask::BinaryMask;
use crate::error::{Error, Result};
use crate::geom::Vec2;

/// Tversky weights used for the detector loss.
pub const TVERSKY_ALPHA: f64 = 0.7;
pub const TVERSKY_BETA: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub iou: f64,
    pub chamfer_px: f64,
    pub tversky_loss: f64,
}

impl MetricReport {
    /// Compares a predicted mask to ground truth. Chamfer is the symmetric
    /// variant over the largest contours of each mask.
    pub fn compare(pred: &BinaryMask, truth: &BinaryMask) -> Result<Self> {
        let iou = iou(pred, truth)?;
        let tversky_loss = tversky_loss(pred, truth, TVERSKY_ALPHA, TVERSKY_BETA)?;
        let pc = super::contour::extract_contours(pred);
        let tc = super::contour::extract_contours(truth);
        let chamfer_px = match (pc.first(), tc.first()) {
            (Some(a), Some(b)) => chamfer(a, b, true)?,
            _ => return Err(Error::Empty("mask")),
        };
        Ok(MetricReport {
            iou,
            chamfer_px,
            tversky_loss,
        })
    }

    /// `pair_id,iou,chamfer_px,tversky`
    pub fn csv_row(&self, pair_id: &str) -> String {
        format!(
            "{pair_id},{:.6},{:.6},{:.6}",
            self.iou, self.chamfer_px, self.tversky_loss
        )
    }

    pub const CSV_HEADER: &'static str = "pair_id,iou,chamfer_px,tversky";
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

pub fn confusion(pred: &BinaryMask, truth: &BinaryMask) -> Result<Confusion> {
    pred.ensure_same_dims(truth)?;
    let mut c = Confusion::default();
    for (&p, &t) in pred.as_slice().iter().zip(truth.as_slice()) {
        match (p, t) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
            _ => {}
        }
    }
    Ok(c)
}

/// Intersection over union; two empty masks agree perfectly (1.0).
pub fn iou(a: &BinaryMask, b: &BinaryMask) -> Result<f64> {
    let c = confusion(a, b)?;
    let union = c.tp + c.fp + c.fn_;
    if union == 0 {
        return Ok(1.0);
    }
    Ok(c.tp as f64 / union as f64)
}

pub fn tversky_from_counts(c: Confusion, alpha: f64, beta: f64) -> Result<f64> {
    if !(alpha >= 0.0 && beta >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tversky weights must be nonnegative, got alpha={alpha} beta={beta}"
        )));
    }
    if c.tp + c.fn_ + c.fp == 0 {
        return Err(Error::Empty("tversky: both masks empty"));
    }
    let tp = c.tp as f64;
    let denom = tp + alpha * c.fn_ as f64 + beta * c.fp as f64;
    if denom == 0.0 {
        // only reachable with zero weights and no true positives
        return Ok(1.0);
    }
    Ok(1.0 - tp / denom)
}

/// `1 - TP / (TP + α·FN + β·FP)` over pixel counts.
pub fn tversky_loss(pred: &BinaryMask, truth: &BinaryMask, alpha: f64, beta: f64) -> Result<f64> {
    tversky_from_counts(confusion(pred, truth)?, alpha, beta)
}

/// Mean foreground pixel position.
pub fn centroid(mask: &BinaryMask) -> Result<Vec2> {
    let mut n = 0usize;
    let (mut sx, mut sy) = (0.0, 0.0);
    for (x, y) in mask.foreground() {
        n += 1;
        sx += x as f64;
        sy += y as f64;
    }
    if n == 0 {
        return Err(Error::Empty("centroid of empty mask"));
    }
    Ok(Vec2::new(sx / n as f64, sy / n as f64))
}

/// Mean distance from each point of `e1` to its nearest point of `e2`;
/// `symmetric` averages that with the reverse direction.
pub fn chamfer(e1: &Contour, e2: &Contour, symmetric: bool) -> Result<f64> {
    chamfer_points(&e1.to_vec2(), &e2.to_vec2(), symmetric)
}

pub fn chamfer_points(e1: &[Vec2], e2: &[Vec2], symmetric: bool) -> Result<f64> {
    if e1.is_empty() || e2.is_empty() {
        return Err(Error::Empty("chamfer point set"));
    }
    let forward = PointIndex::new(e2).mean_nearest(e1);
    if !symmetric {
        return Ok(forward);
    }
    let backward = PointIndex::new(e1).mean_nearest(e2);
    Ok(0.5 * (forward + backward))
}

#[inline]
pub(crate) fn dist2(a: Vec2, b: Vec2) -> f64 {
    let dx = a.x - b.x;
    let dy = a.y - b.y;
    dx * dx + dy * dy
}

/// Uniform-grid bucket index for exact nearest-neighbour queries.
#[derive(Debug, Clone)]
pub struct PointIndex {
    points: Vec<Vec2>,
    origin: Vec2,
    cell: f64,
    cols: i64,
    rows: i64,
    // bucket -> point indices, CSR layout
    starts: Vec<usize>,
    items: Vec<usize>,
}

impl PointIndex {
    pub fn new(points: &[Vec2]) -> Self {
        Self::with_cell(points, 4.0)
    }

    pub fn with_cell(points: &[Vec2], cell: f64) -> Self {
        assert!(!points.is_empty(), "PointIndex needs points");
        let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
        for p in points {
            x0 = x0.min(p.x);
            y0 = y0.min(p.y);
            x1 = x1.max(p.x);
            y1 = y1.max(p.y);
        }
        let cols = ((x1 - x0) / cell).floor() as i64 + 1;
        let rows = ((y1 - y0) / cell).floor() as i64 + 1;
        let origin = Vec2::new(x0, y0);
        let bucket = |p: &Vec2| -> usize {
            let cx = ((p.x - x0) / cell).floor() as i64;
            let cy = ((p.y - y0) / cell).floor() as i64;
            (cy.clamp(0, rows - 1) * cols + cx.clamp(0, cols - 1)) as usize
        };
        let nb = (cols * rows) as usize;
        let mut counts = vec![0usize; nb + 1];
        for p in points {
            counts[bucket(p) + 1] += 1;
        }
        for i in 0..nb {
            counts[i + 1] += counts[i];
        }
        let starts = counts.clone();
        let mut fill = counts;
        let mut items = vec![0usize; points.len()];
        for (i, p) in points.iter().enumerate() {
            let b = bucket(p);
            items[fill[b]] = i;
            fill[b] += 1;
        }
        PointIndex {
            points: points.to_vec(),
            origin,
            cell,
            cols,
            rows,
            starts,
            items,
        }
    }

    pub fn points(&self) -> &[Vec2] {
        &self.points
    }

    /// Index and squared distance of the nearest stored point. Among equal
    /// distances the lowest index wins.
    pub fn nearest(&self, p: Vec2) -> (usize, f64) {
        let cx = ((p.x - self.origin.x) / self.cell).floor() as i64;
        let cy = ((p.y - self.origin.y) / self.cell).floor() as i64;
        // Chebyshev cell distance from the query cell to the occupied box.
        let gap = |c: i64, n: i64| if c < 0 { -c } else if c >= n { c - n + 1 } else { 0 };
        let r0 = gap(cx, self.cols).max(gap(cy, self.rows));
        let far = |c: i64, n: i64| c.abs().max((c - (n - 1)).abs());
        let rmax = far(cx, self.cols).max(far(cy, self.rows));
        let mut best = (usize::MAX, f64::INFINITY);
        let mut r = r0;
        while r <= rmax {
            for gy in (cy - r)..=(cy + r) {
                if gy < 0 || gy >= self.rows {
                    continue;
                }
                let on_edge_row = gy == cy - r || gy == cy + r;
                let mut gx = cx - r;
                while gx <= cx + r {
                    if gx >= 0 && gx < self.cols {
                        let b = (gy * self.cols + gx) as usize;
                        for &i in &self.items[self.starts[b]..self.starts[b + 1]] {
                            let d = dist2(p, self.points[i]);
                            if d < best.1 || (d == best.1 && i < best.0) {
                                best = (i, d);
                            }
                        }
                    }
                    gx += if on_edge_row || r == 0 { 1 } else { 2 * r };
                }
            }
            // Cells in ring r+1 and beyond lie at least r cells away.
            let bound = r as f64 * self.cell;
            if best.0 != usize::MAX && best.1 < bound * bound {
                break;
            }
            r += 1;
        }
        best
    }

    pub fn nearest_dist(&self, p: Vec2) -> f64 {
        self.nearest(p).1.sqrt()
    }

    /// Mean nearest distance over `queries`, summed in query order.
    pub fn mean_nearest(&self, queries: &[Vec2]) -> f64 {
        let sum: f64 = queries.iter().map(|&q| self.nearest_dist(q)).sum();
        sum / queries.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::contour::Pixel;

    fn block(w: usize, h: usize, x0: usize, y0: usize, bw: usize, bh: usize) -> BinaryMask {
        BinaryMask::from_fn(w, h, |x, y| (x0..x0 + bw).contains(&x) && (y0..y0 + bh).contains(&y))
            .unwrap()
    }

    #[test]
    fn iou_cases() {
        let a = block(8, 8, 1, 1, 3, 3);
        assert_eq!(iou(&a, &a).unwrap(), 1.0);
        assert_eq!(iou(&a, &block(8, 8, 5, 5, 2, 2)).unwrap(), 0.0);
        assert_eq!(iou(&block(8, 8, 0, 0, 2, 2), &block(8, 8, 0, 0, 4, 2)).unwrap(), 0.5);
        let e = BinaryMask::empty(8, 8).unwrap();
        assert_eq!(iou(&e, &e).unwrap(), 1.0);
        assert!(iou(&a, &BinaryMask::empty(7, 8).unwrap()).is_err());
    }

    #[test]
    fn tversky_cases() {
        let a = block(8, 8, 1, 1, 3, 3);
        assert_eq!(tversky_loss(&a, &a, 0.7, 0.3).unwrap(), 0.0);
        let e = BinaryMask::empty(8, 8).unwrap();
        assert_eq!(tversky_loss(&e, &a, 0.7, 0.3).unwrap(), 1.0);
        assert!(tversky_loss(&e, &e, 0.7, 0.3).is_err());
        let c = Confusion { tp: 70, fn_: 10, fp: 20 };
        let v = tversky_from_counts(c, 0.7, 0.3).unwrap();
        assert!((v - (1.0 - 70.0 / 83.0)).abs() < 1e-12);
        assert!((v - 0.15663).abs() < 1e-5);
    }

    #[test]
    fn tversky_half_weights_is_dice_form() {
        let c = Confusion { tp: 12, fn_: 5, fp: 9 };
        let v = tversky_from_counts(c, 0.5, 0.5).unwrap();
        assert!((v - (1.0 - 12.0 / (12.0 + 0.5 * 14.0))).abs() < 1e-15);
    }

    #[test]
    fn centroid_cases() {
        let mut m = BinaryMask::empty(10, 10).unwrap();
        m.set(5, 7, true);
        assert_eq!(centroid(&m).unwrap(), Vec2::new(5.0, 7.0));
        assert_eq!(centroid(&block(10, 10, 0, 0, 3, 3)).unwrap(), Vec2::new(1.0, 1.0));
        let mut l = BinaryMask::empty(3, 3).unwrap();
        for (x, y) in [(0, 0), (0, 1), (1, 0)] {
            l.set(x, y, true);
        }
        let c = centroid(&l).unwrap();
        assert!((c.x - 1.0 / 3.0).abs() < 1e-15 && (c.y - 1.0 / 3.0).abs() < 1e-15);
        assert!(centroid(&BinaryMask::empty(3, 3).unwrap()).is_err());
    }

    #[test]
    fn chamfer_cases() {
        let a = Contour::new(vec![Pixel::new(0, 0)]).unwrap();
        let b = Contour::new(vec![Pixel::new(3, 4)]).unwrap();
        assert_eq!(chamfer(&a, &b, false).unwrap(), 5.0);
        assert_eq!(chamfer(&a, &a, true).unwrap(), 0.0);
        assert!(chamfer_points(&[], &[Vec2::default()], false).is_err());
    }

    #[test]
    fn index_handles_far_queries() {
        let pts = vec![Vec2::new(0.0, 0.0), Vec2::new(10.0, 0.0)];
        let idx = PointIndex::with_cell(&pts, 1.0);
        assert_eq!(idx.nearest(Vec2::new(-100.0, 3.0)).0, 0);
        assert_eq!(idx.nearest(Vec2::new(200.0, -50.0)).0, 1);
        // equidistant: lowest index
        assert_eq!(idx.nearest(Vec2::new(5.0, 7.0)).0, 0);
    }

    #[test]
    fn report_csv_row() {
        let a = block(8, 8, 1, 1, 3, 3);
        let r = MetricReport::compare(&a, &a).unwrap();
        assert_eq!(r.csv_row("p0"), "p0,1.000000,0.000000,0.000000");
    }
}
