use std::collections::{BTreeMap, VecDeque};
use std::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::noise::ValueNoise2;
use super::polygon::Polygon;
use crate::error::{Error, Result};
use crate::geom::{RigidTransform2D, Vec2};
use crate::material::{ColourStats, Material};
use crate::raster::{BinaryMask, Grid};

/// Side of the square object canvas.
pub const SCENE_SIZE: usize = 128;
/// Side of the square canvas each fragment is observed in.
pub const CANVAS_SIZE: usize = 128;

/// Crack displacement at roughness 1.
const WARP_AMPLITUDE_PX: f64 = 12.0;
const WARP_CELL_PX: f64 = 22.0;
const POSE_JITTER_PX: i64 = 6;
const CANVAS_MARGIN: i64 = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct Fragment {
    pub id: usize,
    /// Occupancy in the fragment's own observation canvas.
    pub mask: BinaryMask,
    /// Maps observation-canvas coordinates into the object frame. Always a
    /// quarter turn, an optional mirror and an integer shift, so it is a
    /// pixel permutation.
    pub pose: RigidTransform2D,
    pub material: Material,
    pub colour: ColourStats,
}

/// Shared crack between fragments `a < b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Adjacency {
    pub a: usize,
    pub b: usize,
    /// Midpoints between 4-adjacent pixel pairs straddling the crack, in the
    /// object frame and raster order.
    pub crack: Vec<Vec2>,
}

impl Adjacency {
    pub fn other(&self, id: usize) -> Option<usize> {
        if id == self.a {
            Some(self.b)
        } else if id == self.b {
            Some(self.a)
        } else {
            None
        }
    }

    pub fn touches(&self, id: usize) -> bool {
        self.a == id || self.b == id
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FracturedScene {
    pub object_mask: BinaryMask,
    /// Object-frame labels: 0 outside, `id + 1` inside fragment `id`.
    pub labels: Grid<u32>,
    pub fragments: Vec<Fragment>,
    pub adjacency: Vec<Adjacency>,
    pub rng_seed: u64,
    pub n_seeds: usize,
    pub roughness: f64,
}

fn round_px(p: Vec2) -> (i64, i64) {
    (p.x.round() as i64, p.y.round() as i64)
}

impl FracturedScene {
    pub fn fragment(&self, id: usize) -> &Fragment {
        &self.fragments[id]
    }

    /// Canvas pixel → object pixel for fragment `id`.
    pub fn to_object(&self, id: usize, x: usize, y: usize) -> (i64, i64) {
        round_px(self.fragments[id].pose.apply(Vec2::new(x as f64, y as f64)))
    }

    /// Fragment `id` in the object frame.
    pub fn object_fragment_mask(&self, id: usize) -> BinaryMask {
        self.labels.map(|&l| l == id as u32 + 1)
    }

    /// Union of all fragments mapped back through their poses, and the
    /// number of object pixels hit more than once.
    pub fn placed_union(&self) -> (BinaryMask, usize) {
        let (w, h) = self.object_mask.dims();
        let mut hits = Grid::filled(w, h, 0u32).expect("object dims");
        for f in &self.fragments {
            for (x, y) in f.mask.foreground() {
                let (ox, oy) = round_px(f.pose.apply(Vec2::new(x as f64, y as f64)));
                if ox >= 0 && oy >= 0 && (ox as usize) < w && (oy as usize) < h {
                    *hits.get_mut(ox as usize, oy as usize) += 1;
                }
            }
        }
        let overlaps = hits.as_slice().iter().filter(|&&c| c > 1).count();
        (hits.map(|&c| c > 0), overlaps)
    }

    pub fn fragment_area_sum(&self) -> usize {
        self.fragments.iter().map(|f| f.mask.count()).sum()
    }

    pub fn neighbours(&self, id: usize) -> Vec<usize> {
        self.adjacency.iter().filter_map(|a| a.other(id)).collect()
    }

    pub fn are_adjacent(&self, a: usize, b: usize) -> bool {
        self.adjacency.iter().any(|e| e.touches(a) && e.touches(b) && a != b)
    }

    pub fn adjacency_connected(&self) -> bool {
        let n = self.fragments.len();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(i) = queue.pop_front() {
            for j in self.neighbours(i) {
                if !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Ground-truth transform taking fragment `b`'s canvas into fragment
    /// `a`'s canvas.
    pub fn true_relative(&self, a: usize, b: usize) -> RigidTransform2D {
        self.fragments[a].pose.inverse().compose(&self.fragments[b].pose)
    }

    /// Relabels every fragment with `material` and draws fresh colour
    /// statistics from `seed`.
    pub fn set_material(&mut self, material: Material, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for f in &mut self.fragments {
            f.material = material;
            f.colour = material.sample_colour(&mut rng);
        }
    }
}

fn place_seeds(rng: &mut ChaCha8Rng, pixels: &[(usize, usize)], n: usize) -> Vec<Vec2> {
    let mut min_sep = 0.55 * (pixels.len() as f64 / n as f64).sqrt();
    let mut seeds: Vec<Vec2> = Vec::with_capacity(n);
    let mut attempts = 0;
    while seeds.len() < n {
        let (x, y) = pixels[rng.random_range(0..pixels.len())];
        let p = Vec2::new(
            x as f64 + rng.random_range(-0.45..0.45),
            y as f64 + rng.random_range(-0.45..0.45),
        );
        if seeds.iter().all(|s| s.dist(p) >= min_sep) {
            seeds.push(p);
            attempts = 0;
        } else {
            attempts += 1;
            if attempts > 2000 {
                min_sep *= 0.9;
                attempts = 0;
            }
        }
    }
    seeds
}

/// Keeps the largest 4-component of every label and regrows the orphaned
/// pixels from their labelled 4-neighbours, so every label ends connected.
fn make_labels_connected(labels: &mut Grid<u32>, n_labels: u32) {
    let (w, h) = labels.dims();
    for l in 1..=n_labels {
        let m = labels.map(|&v| v == l);
        let keep = m.largest_component();
        for (x, y) in m.foreground() {
            if !*keep.get(x, y) {
                labels.set(x, y, u32::MAX);
            }
        }
    }
    loop {
        let orphans: Vec<(usize, usize)> = (0..h)
            .flat_map(|y| (0..w).map(move |x| (x, y)))
            .filter(|&(x, y)| *labels.get(x, y) == u32::MAX)
            .collect();
        if orphans.is_empty() {
            return;
        }
        let mut assigned = Vec::new();
        for &(x, y) in &orphans {
            let mut votes: BTreeMap<u32, usize> = BTreeMap::new();
            for (dx, dy) in [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)] {
                if let Some(&v) = labels.at(x as i64 + dx, y as i64 + dy) {
                    if v != 0 && v != u32::MAX {
                        *votes.entry(v).or_default() += 1;
                    }
                }
            }
            // Most votes, then lowest label.
            if let Some((&v, _)) = votes.iter().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0))) {
                assigned.push((x, y, v));
            }
        }
        assert!(!assigned.is_empty(), "object mask is connected");
        for (x, y, v) in assigned {
            labels.set(x, y, v);
        }
    }
}

fn observation_pose(rng: &mut ChaCha8Rng, pixels: &[(usize, usize)]) -> Result<RigidTransform2D> {
    let quarter = rng.random_range(0..4u32);
    let mirror = rng.random_bool(0.5);
    let jx = rng.random_range(-POSE_JITTER_PX..=POSE_JITTER_PX);
    let jy = rng.random_range(-POSE_JITTER_PX..=POSE_JITTER_PX);
    let lin = RigidTransform2D::new(mirror, quarter as f64 * FRAC_PI_2, 0.0, 0.0);
    let (mut x0, mut y0, mut x1, mut y1) = (i64::MAX, i64::MAX, i64::MIN, i64::MIN);
    for &(x, y) in pixels {
        let (px, py) = round_px(lin.apply(Vec2::new(x as f64, y as f64)));
        x0 = x0.min(px);
        y0 = y0.min(py);
        x1 = x1.max(px);
        y1 = y1.max(py);
    }
    let c = CANVAS_SIZE as i64;
    let (lo, hi) = (CANVAS_MARGIN, c - 1 - CANVAS_MARGIN);
    if x1 - x0 > hi - lo || y1 - y0 > hi - lo {
        return Err(Error::InvalidArgument(format!(
            "fragment of {}x{} px does not fit the {c} px canvas",
            x1 - x0 + 1,
            y1 - y0 + 1
        )));
    }
    let shift = |a0: i64, a1: i64, j: i64| -> i64 {
        let centred = (c - 1 - (a0 + a1)) / 2;
        (centred + j).clamp(lo - a0, hi - a1)
    };
    let (tx, ty) = (shift(x0, x1, jx), shift(y0, y1, jy));
    Ok(RigidTransform2D::new(mirror, lin.theta, tx as f64, ty as f64))
}

/// Partitions `object` into at most `n_seeds` connected fragments.
///
/// Each object pixel takes the label of the site nearest to its position
/// displaced by a seeded smooth warp of size `roughness · 12 px`. Because
/// labels are assigned per pixel the fragments are disjoint and cover the
/// object exactly, and every crack is shared verbatim by both sides. Each
/// fragment is then re-observed in its own canvas under a random quarter
/// turn, mirror and shift.
pub fn fracture(object: &Polygon, n_seeds: usize, roughness: f64, seed: u64) -> Result<FracturedScene> {
    if n_seeds == 0 {
        return Err(Error::InvalidArgument("n_seeds must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&roughness) {
        return Err(Error::InvalidArgument(format!("roughness {roughness} outside [0, 1]")));
    }
    let object_mask = object.rasterize(SCENE_SIZE, SCENE_SIZE)?;
    let pixels: Vec<(usize, usize)> = object_mask.foreground().collect();
    if pixels.is_empty() {
        return Err(Error::InvalidArgument("polygon covers no pixel centre".into()));
    }
    if object_mask.label_components().1.len() != 2 {
        return Err(Error::InvalidArgument("polygon raster is not 4-connected".into()));
    }
    if n_seeds > pixels.len() {
        return Err(Error::InvalidArgument(format!(
            "{n_seeds} seeds exceed the {} object pixels",
            pixels.len()
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sites = place_seeds(&mut rng, &pixels, n_seeds);
    let warp_x = ValueNoise2::new(rng.random(), WARP_CELL_PX);
    let warp_y = ValueNoise2::new(rng.random(), WARP_CELL_PX);
    let amp = roughness * WARP_AMPLITUDE_PX;

    let mut labels = Grid::filled(SCENE_SIZE, SCENE_SIZE, 0u32)?;
    for &(x, y) in &pixels {
        let (fx, fy) = (x as f64, y as f64);
        let q = Vec2::new(fx + amp * warp_x.sample(fx, fy), fy + amp * warp_y.sample(fx, fy));
        let mut best = (0usize, f64::INFINITY);
        for (i, s) in sites.iter().enumerate() {
            let d = (q - *s).norm2();
            if d < best.1 {
                best = (i, d);
            }
        }
        labels.set(x, y, best.0 as u32 + 1);
    }
    make_labels_connected(&mut labels, n_seeds as u32);

    // Compact away sites that lost every pixel.
    let mut counts = vec![0usize; n_seeds + 1];
    for &l in labels.as_slice() {
        counts[l as usize] += 1;
    }
    let mut remap = vec![0u32; n_seeds + 1];
    let mut next = 0u32;
    for l in 1..=n_seeds {
        if counts[l] > 0 {
            next += 1;
            remap[l] = next;
        }
    }
    let labels = labels.map(|&l| remap[l as usize]);
    let n = next as usize;

    let mut cracks: BTreeMap<(usize, usize), Vec<Vec2>> = BTreeMap::new();
    for y in 0..SCENE_SIZE {
        for x in 0..SCENE_SIZE {
            let l = *labels.get(x, y);
            if l == 0 {
                continue;
            }
            for (dx, dy) in [(1usize, 0usize), (0, 1)] {
                let (nx, ny) = (x + dx, y + dy);
                if nx >= SCENE_SIZE || ny >= SCENE_SIZE {
                    continue;
                }
                let m = *labels.get(nx, ny);
                if m != 0 && m != l {
                    let key = ((l.min(m) - 1) as usize, (l.max(m) - 1) as usize);
                    let mid = Vec2::new(x as f64 + dx as f64 / 2.0, y as f64 + dy as f64 / 2.0);
                    cracks.entry(key).or_default().push(mid);
                }
            }
        }
    }
    let adjacency = cracks
        .into_iter()
        .map(|((a, b), crack)| Adjacency { a, b, crack })
        .collect();

    let mut fragments = Vec::with_capacity(n);
    for id in 0..n {
        let own: Vec<(usize, usize)> = pixels
            .iter()
            .copied()
            .filter(|&(x, y)| *labels.get(x, y) == id as u32 + 1)
            .collect();
        let view = observation_pose(&mut rng, &own)?;
        let mut mask = BinaryMask::empty(CANVAS_SIZE, CANVAS_SIZE)?;
        for &(x, y) in &own {
            let (lx, ly) = round_px(view.apply(Vec2::new(x as f64, y as f64)));
            mask.set(lx as usize, ly as usize, true);
        }
        fragments.push(Fragment {
            id,
            mask,
            pose: view.inverse(),
            material: Material::Glass,
            colour: Material::Glass.sample_colour(&mut rng),
        });
    }

    Ok(FracturedScene {
        object_mask,
        labels,
        fragments,
        adjacency,
        rng_seed: seed,
        n_seeds,
        roughness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::polygon::ShapeKind;

    fn square() -> Polygon {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        ShapeKind::Square.polygon(SCENE_SIZE, &mut rng).unwrap()
    }

    #[test]
    fn single_seed_is_whole_object() {
        let s = fracture(&square(), 1, 0.5, 7).unwrap();
        assert_eq!(s.fragments.len(), 1);
        assert!(s.adjacency.is_empty());
        let (u, overlaps) = s.placed_union();
        assert_eq!(u, s.object_mask);
        assert_eq!(overlaps, 0);
    }

    #[test]
    fn two_seeds_partition_square() {
        let s = fracture(&square(), 2, 0.5, 11).unwrap();
        assert_eq!(s.fragments.len(), 2);
        assert_eq!(s.adjacency.len(), 1);
        let (u, overlaps) = s.placed_union();
        assert_eq!(u, s.object_mask);
        assert_eq!(overlaps, 0);
    }

    #[test]
    fn fragments_are_single_components() {
        let s = fracture(&square(), 7, 1.0, 3).unwrap();
        for f in &s.fragments {
            assert_eq!(f.mask.label_components().1.len(), 2, "fragment {}", f.id);
        }
    }

    #[test]
    fn poses_are_pixel_exact() {
        let s = fracture(&square(), 5, 0.5, 21).unwrap();
        for f in &s.fragments {
            for (x, y) in f.mask.foreground() {
                let p = f.pose.apply(Vec2::new(x as f64, y as f64));
                assert!((p.x - p.x.round()).abs() < 1e-9 && (p.y - p.y.round()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn true_relative_maps_b_into_a() {
        let s = fracture(&square(), 4, 0.5, 2).unwrap();
        let e = &s.adjacency[0];
        let t = s.true_relative(e.a, e.b);
        let fb = &s.fragments[e.b];
        let (x, y) = fb.mask.foreground().next().unwrap();
        let via = s.fragments[e.a].pose.apply(t.apply(Vec2::new(x as f64, y as f64)));
        let direct = fb.pose.apply(Vec2::new(x as f64, y as f64));
        assert!(via.dist(direct) < 1e-9);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(fracture(&square(), 0, 0.5, 1).is_err());
        assert!(fracture(&square(), 3, 1.5, 1).is_err());
        let tiny = Polygon::square(Vec2::new(10.2, 10.2), 0.5).unwrap();
        assert!(fracture(&tiny, 2, 0.5, 1).is_err());
    }

    #[test]
    fn deterministic() {
        assert_eq!(fracture(&square(), 6, 0.5, 42).unwrap(), fracture(&square(), 6, 0.5, 42).unwrap());
    }
}
