use std::f64::consts::{PI, TAU};
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::raster::BinaryMask;

/// Simple polygon in scene pixel coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polygon {
    vertices: Vec<Vec2>,
}

fn cross(a: Vec2, b: Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

fn segments_cross(p1: Vec2, p2: Vec2, q1: Vec2, q2: Vec2) -> bool {
    let d1 = cross(q2 - q1, p1 - q1);
    let d2 = cross(q2 - q1, p2 - q1);
    let d3 = cross(p2 - p1, q1 - p1);
    let d4 = cross(p2 - p1, q2 - p1);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

impl Polygon {
    /// Rejects fewer than three vertices, non-finite coordinates, zero area
    /// and crossing edges.
    pub fn new(vertices: Vec<Vec2>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::InvalidArgument(format!("polygon needs 3 vertices, got {n}")));
        }
        if vertices.iter().any(|v| !v.x.is_finite() || !v.y.is_finite()) {
            return Err(Error::InvalidArgument("non-finite polygon vertex".into()));
        }
        let p = Polygon { vertices };
        if p.area() < 1e-9 {
            return Err(Error::InvalidArgument("degenerate polygon (zero area)".into()));
        }
        for i in 0..n {
            for j in i + 1..n {
                if j == i + 1 || (i == 0 && j == n - 1) {
                    continue;
                }
                let (a1, a2) = (p.vertices[i], p.vertices[(i + 1) % n]);
                let (b1, b2) = (p.vertices[j], p.vertices[(j + 1) % n]);
                if segments_cross(a1, a2, b1, b2) {
                    return Err(Error::InvalidArgument("self-intersecting polygon".into()));
                }
            }
        }
        Ok(p)
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    /// Unsigned shoelace area.
    pub fn area(&self) -> f64 {
        let n = self.vertices.len();
        let twice: f64 = (0..n)
            .map(|i| cross(self.vertices[i], self.vertices[(i + 1) % n]))
            .sum();
        twice.abs() / 2.0
    }

    /// Even-odd test.
    pub fn contains(&self, p: Vec2) -> bool {
        let n = self.vertices.len();
        let mut inside = false;
        let mut j = n - 1;
        for i in 0..n {
            let (a, b) = (self.vertices[i], self.vertices[j]);
            if (a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x {
                inside = !inside;
            }
            j = i;
        }
        inside
    }

    /// Pixels whose centre lies inside the polygon.
    pub fn rasterize(&self, width: usize, height: usize) -> Result<BinaryMask> {
        BinaryMask::from_fn(width, height, |x, y| self.contains(Vec2::new(x as f64, y as f64)))
    }

    pub fn square(center: Vec2, side: f64) -> Result<Self> {
        let h = side / 2.0;
        Polygon::new(vec![
            Vec2::new(center.x - h, center.y - h),
            Vec2::new(center.x + h, center.y - h),
            Vec2::new(center.x + h, center.y + h),
            Vec2::new(center.x - h, center.y + h),
        ])
    }

    pub fn regular(n: usize, center: Vec2, radius: f64, rotation: f64) -> Result<Self> {
        Polygon::new(
            (0..n)
                .map(|k| {
                    let a = rotation + TAU * k as f64 / n as f64;
                    Vec2::new(center.x + radius * a.cos(), center.y + radius * a.sin())
                })
                .collect(),
        )
    }

    /// Star-convex blob: `n` vertices at sorted random angles with radii in
    /// `[0.75, 1] · radius`.
    pub fn random_blob<R: Rng + ?Sized>(rng: &mut R, n: usize, center: Vec2, radius: f64) -> Result<Self> {
        let n = n.max(3);
        let mut angles: Vec<f64> = (0..n)
            .map(|k| (k as f64 + rng.random_range(0.15..0.85)) * TAU / n as f64)
            .collect();
        angles.sort_by(f64::total_cmp);
        Polygon::new(
            angles
                .into_iter()
                .map(|a| {
                    let r = radius * rng.random_range(0.75..1.0);
                    Vec2::new(center.x + r * a.cos(), center.y + r * a.sin())
                })
                .collect(),
        )
    }

    /// Axis-aligned square with a rectangular bite taken out of its top
    /// edge: `notch = (offset from left, width, depth)`.
    pub fn notched_square(origin: Vec2, side: f64, notch: (f64, f64, f64)) -> Result<Self> {
        let (off, w, d) = notch;
        if off <= 0.0 || w <= 0.0 || d <= 0.0 || off + w >= side || d >= side {
            return Err(Error::InvalidArgument("notch must lie strictly inside the square".into()));
        }
        let (x0, y0) = (origin.x, origin.y);
        Polygon::new(vec![
            Vec2::new(x0, y0),
            Vec2::new(x0 + off, y0),
            Vec2::new(x0 + off, y0 + d),
            Vec2::new(x0 + off + w, y0 + d),
            Vec2::new(x0 + off + w, y0),
            Vec2::new(x0 + side, y0),
            Vec2::new(x0 + side, y0 + side),
            Vec2::new(x0, y0 + side),
        ])
    }
}

/// Named object outlines used by scene generators and the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeKind {
    Square,
    Hexagon,
    Triangle,
    Blob,
}

impl ShapeKind {
    pub const ALL: [ShapeKind; 4] = [ShapeKind::Square, ShapeKind::Hexagon, ShapeKind::Triangle, ShapeKind::Blob];

    pub fn as_str(self) -> &'static str {
        match self {
            ShapeKind::Square => "square",
            ShapeKind::Hexagon => "hexagon",
            ShapeKind::Triangle => "triangle",
            ShapeKind::Blob => "blob",
        }
    }

    /// Outline centred in a `scene`-pixel square canvas. Only `Blob` uses
    /// the generator.
    pub fn polygon<R: Rng + ?Sized>(self, scene: usize, rng: &mut R) -> Result<Polygon> {
        let c = Vec2::new((scene as f64 - 1.0) / 2.0, (scene as f64 - 1.0) / 2.0);
        let r = 0.39 * scene as f64;
        match self {
            ShapeKind::Square => Polygon::square(c, r * 2.0 / 2f64.sqrt() * 1.2),
            ShapeKind::Hexagon => Polygon::regular(6, c, r * 1.05, 0.0),
            ShapeKind::Triangle => Polygon::regular(3, Vec2::new(c.x, c.y + 0.12 * r), r * 1.25, -PI / 2.0),
            ShapeKind::Blob => Polygon::random_blob(rng, 9, c, r * 1.1),
        }
    }
}

impl FromStr for ShapeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ShapeKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown shape `{s}`")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn square_raster_count() {
        let p = Polygon::square(Vec2::new(9.5, 9.5), 10.0).unwrap();
        assert_eq!(p.rasterize(20, 20).unwrap().count(), 100);
        assert_eq!(p.area(), 100.0);
    }

    #[test]
    fn rejects_degenerate_and_crossing() {
        let line = vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 1.0), Vec2::new(2.0, 2.0)];
        assert!(Polygon::new(line).is_err());
        let bow = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(4.0, 4.0),
            Vec2::new(4.0, 0.0),
            Vec2::new(0.0, 4.0),
        ];
        assert!(Polygon::new(bow).is_err());
    }

    #[test]
    fn notch_removes_area() {
        let p = Polygon::notched_square(Vec2::new(0.0, 0.0), 10.0, (3.0, 4.0, 5.0)).unwrap();
        assert_eq!(p.area(), 80.0);
        assert!(!p.contains(Vec2::new(5.0, 2.0)));
        assert!(p.contains(Vec2::new(1.0, 2.0)));
    }

    #[test]
    fn shapes_fit_scene() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for k in ShapeKind::ALL {
            let m = k.polygon(128, &mut rng).unwrap().rasterize(128, 128).unwrap();
            let (x0, y0, x1, y1) = m.bbox().unwrap();
            assert!(x0 >= 4 && y0 >= 4 && x1 <= 123 && y1 <= 123, "{k:?}");
            assert!(m.count() > 4000, "{k:?}");
        }
    }
}
