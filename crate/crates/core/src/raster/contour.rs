use serde::{Deserialize, Serialize};

use super::mask::{flood_from_border, BinaryMask, Grid};
use crate::error::{Error, Result};
use crate::geom::Vec2;

/// Integer pixel position, x = column and y = row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Pixel {
    pub x: i32,
    pub y: i32,
}

impl Pixel {
    pub const fn new(x: i32, y: i32) -> Self {
        Pixel { x, y }
    }

    pub fn to_vec2(self) -> Vec2 {
        Vec2::new(self.x as f64, self.y as f64)
    }

    /// Row-major ordering key: topmost first, then leftmost.
    pub fn raster_key(self) -> (i32, i32) {
        (self.y, self.x)
    }

    pub fn dist2(self, other: Pixel) -> i64 {
        let dx = (self.x - other.x) as i64;
        let dy = (self.y - other.y) as i64;
        dx * dx + dy * dy
    }
}

/// Ordered boundary of one connected foreground region.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Contour {
    points: Vec<Pixel>,
}

impl Contour {
    pub fn new(points: Vec<Pixel>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Empty("contour"));
        }
        Ok(Contour { points })
    }

    pub fn points(&self) -> &[Pixel] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn to_vec2(&self) -> Vec<Vec2> {
        self.points.iter().map(|p| p.to_vec2()).collect()
    }

    /// Mean point position.
    pub fn centroid(&self) -> Vec2 {
        let n = self.points.len() as f64;
        let (sx, sy) = self
            .points
            .iter()
            .fold((0.0, 0.0), |(sx, sy), p| (sx + p.x as f64, sy + p.y as f64));
        Vec2::new(sx / n, sy / n)
    }

    /// Keeps the points for which `keep` holds, preserving order.
    pub fn filter(&self, keep: impl Fn(Pixel) -> bool) -> Option<Contour> {
        let pts: Vec<Pixel> = self.points.iter().copied().filter(|&p| keep(p)).collect();
        Contour::new(pts).ok()
    }
}

/// Midpoint of a unit pixel side separating a foreground pixel from a
/// background (or off-grid) 4-neighbour.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryEdge {
    pub pos: Vec2,
    /// The foreground pixel.
    pub inside: Pixel,
    /// The background neighbour, possibly off-grid.
    pub outside: Pixel,
}

const SIDES: [(i32, i32); 4] = [(1, 0), (0, 1), (-1, 0), (0, -1)];

/// Every foreground/background pixel side of `mask`, in raster order of the
/// inside pixel and then east, south, west, north. Two masks that share a
/// side report the same midpoint.
pub fn boundary_edges(mask: &BinaryMask) -> Vec<BoundaryEdge> {
    let mut out = Vec::new();
    for (x, y) in mask.foreground() {
        let p = Pixel::new(x as i32, y as i32);
        for (dx, dy) in SIDES {
            let q = Pixel::new(p.x + dx, p.y + dy);
            if !mask.is_set(q.x as i64, q.y as i64) {
                out.push(BoundaryEdge {
                    pos: Vec2::new(p.x as f64 + 0.5 * dx as f64, p.y as f64 + 0.5 * dy as f64),
                    inside: p,
                    outside: q,
                });
            }
        }
    }
    out
}

// Clockwise on screen (y grows downward), starting west.
const MOORE: [(i32, i32); 8] = [
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
];

fn dir_index(dx: i32, dy: i32) -> usize {
    MOORE
        .iter()
        .position(|&d| d == (dx, dy))
        .expect("neighbour offset")
}

/// Traces the outer boundary of every 4-connected component, largest
/// component first (ties by start pixel in raster order).
///
/// Each trace starts at the component's topmost-leftmost pixel and walks
/// clockwise with Moore (8-neighbour) tracing restricted to that component.
/// Pixels visited more than once (one-pixel-wide bridges) are kept at their
/// first visit only.
pub fn extract_contours(mask: &BinaryMask) -> Vec<Contour> {
    let (labels, sizes) = mask.label_components();
    let mut starts: Vec<Option<Pixel>> = vec![None; sizes.len()];
    for y in 0..mask.height() {
        for x in 0..mask.width() {
            let l = *labels.get(x, y) as usize;
            if l != 0 && starts[l].is_none() {
                starts[l] = Some(Pixel::new(x as i32, y as i32));
            }
        }
    }
    let mut order: Vec<usize> = (1..sizes.len()).collect();
    order.sort_by(|&a, &b| {
        sizes[b]
            .cmp(&sizes[a])
            .then_with(|| starts[a].unwrap().raster_key().cmp(&starts[b].unwrap().raster_key()))
    });
    order
        .into_iter()
        .map(|l| trace_component(&labels, l as u32, starts[l].unwrap()))
        .collect()
}

fn trace_component(labels: &Grid<u32>, label: u32, start: Pixel) -> Contour {
    let inside = |p: Pixel| labels.at(p.x as i64, p.y as i64) == Some(&label);
    // The west neighbour of the topmost-leftmost pixel is never in the component.
    let start_back = 0usize;
    let mut points = vec![start];
    let mut seen = std::collections::HashSet::new();
    seen.insert(start);

    let mut cur = start;
    let mut back = start_back;
    // Jacob's stopping criterion; the cap only guards malformed input.
    let cap = 8 * labels.as_slice().iter().filter(|&&l| l == label).count() + 8;
    for _ in 0..cap {
        let Some((n, prev_dir)) = (1..=8).find_map(|k| {
            let d = (back + k) % 8;
            let cand = Pixel::new(cur.x + MOORE[d].0, cur.y + MOORE[d].1);
            inside(cand).then_some((cand, (back + k - 1) % 8))
        }) else {
            break; // isolated pixel
        };
        // New backtrack: the background pixel examined just before `n`,
        // expressed relative to `n`.
        let bpix = Pixel::new(cur.x + MOORE[prev_dir].0, cur.y + MOORE[prev_dir].1);
        let nb = dir_index(bpix.x - n.x, bpix.y - n.y);
        if n == start && nb == start_back {
            break;
        }
        if seen.insert(n) {
            points.push(n);
        }
        cur = n;
        back = nb;
    }
    Contour { points }
}

/// Rasterises a closed contour and fills its interior: every pixel that
/// cannot be reached from the grid border by 4-steps without crossing the
/// contour.
pub fn fill_contour(contour: &Contour, width: usize, height: usize) -> Result<BinaryMask> {
    let mut walls = BinaryMask::empty(width, height)?;
    for p in contour.points() {
        if p.x < 0 || p.y < 0 || p.x as usize >= width || p.y as usize >= height {
            return Err(Error::InvalidArgument(format!(
                "contour point ({}, {}) outside {width}x{height}",
                p.x, p.y
            )));
        }
        walls.set(p.x as usize, p.y as usize, true);
    }
    let outside = flood_from_border(&walls);
    Ok(outside.map(|&r| !r))
}

/// Endpoints of the longest chord of a contour.
///
/// The pair is returned ordered in raster order (topmost-leftmost first);
/// among equally long chords the lexicographically smallest pair wins.
pub fn longest_chord(contour: &Contour) -> Result<(Pixel, Pixel)> {
    let pts = contour.points();
    if pts.len() < 2 {
        return Err(Error::InvalidArgument(
            "longest chord needs at least two points".into(),
        ));
    }
    // Farthest pairs are always extreme points of the hull.
    let hull = convex_hull(pts);
    let candidates: &[Pixel] = if hull.len() >= 2 { &hull } else { pts };
    let mut best: Option<(i64, (i32, i32), (i32, i32), Pixel, Pixel)> = None;
    for (i, &a) in candidates.iter().enumerate() {
        for &b in &candidates[i + 1..] {
            if a == b {
                continue;
            }
            let (p, q) = if a.raster_key() <= b.raster_key() { (a, b) } else { (b, a) };
            let d = p.dist2(q);
            let key = (d, p.raster_key(), q.raster_key());
            let better = match &best {
                None => true,
                Some((bd, bp, bq, _, _)) => d > *bd || (d == *bd && (key.1, key.2) < (*bp, *bq)),
            };
            if better {
                best = Some((d, key.1, key.2, p, q));
            }
        }
    }
    match best {
        Some((_, _, _, p, q)) => Ok((p, q)),
        // all points coincide
        None => Ok((pts[0], pts[0])),
    }
}

/// Strict convex hull (collinear points dropped), monotone chain.
fn convex_hull(points: &[Pixel]) -> Vec<Pixel> {
    let mut pts: Vec<Pixel> = points.to_vec();
    pts.sort_by_key(|p| (p.x, p.y));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: Pixel, a: Pixel, b: Pixel| -> i64 {
        (a.x - o.x) as i64 * (b.y - o.y) as i64 - (a.y - o.y) as i64 * (b.x - o.x) as i64
    };
    let mut lower: Vec<Pixel> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Pixel> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}
