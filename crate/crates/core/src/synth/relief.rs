use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::fracture::FracturedScene;
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::raster::{PointIndex, ScalarGrid};

/// Relief falls to zero this far from the crack.
pub const EDGE_BAND_PX: f64 = 8.0;
/// Length over which the sensor pad fades in at each end of a crack. The
/// fade is centred on the crack end so both mates see the same window.
pub const PAD_FADE_PX: f64 = 10.0;
pub const DEFAULT_AMPLITUDE: f64 = 3.0;

const PROFILE_BASE: f64 = 0.75;
const PROFILE_SWING: f64 = 0.15;
const CREST_WIDTH_PX: f64 = 6.0;
/// Crest position as a fraction of crack length; the middle is avoided so
/// a crack's profile is not symmetric about its midpoint.
const CREST_SPAN: [(f64, f64); 2] = [(0.2, 0.4), (0.6, 0.8)];

/// Crack-line profile `g(s) = base + swing · exp(-(s - centre)² / 2 width²)`,
/// a gentle plateau with one crest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrestProfile {
    pub base: f64,
    pub swing: f64,
    pub centre: f64,
    pub width: f64,
}

impl CrestProfile {
    pub fn value(&self, s: f64) -> f64 {
        let u = (s - self.centre) / self.width;
        self.base + self.swing * (-0.5 * u * u).exp()
    }
}

/// Across-crack falloff `(1 - d/w)²` on `[0, w]`, zero beyond.
pub fn band_falloff(d: f64) -> f64 {
    if d >= EDGE_BAND_PX {
        0.0
    } else {
        (1.0 - d / EDGE_BAND_PX).powi(2)
    }
}

fn fade(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        (PI * t / 2.0).sin().powi(2)
    }
}

/// Chord parametrisation of one crack: `s` runs along the longest chord
/// of the crack midpoints, `d` is the distance to the nearest midpoint.
#[derive(Debug, Clone)]
pub struct SeamFrame {
    origin: Vec2,
    dir: Vec2,
    s_min: f64,
    s_max: f64,
    index: PointIndex,
}

impl SeamFrame {
    pub fn new(crack: &[Vec2]) -> Result<Self> {
        if crack.is_empty() {
            return Err(Error::Empty("crack without midpoints"));
        }
        let mut best = (0, 0, -1.0);
        for i in 0..crack.len() {
            for j in i + 1..crack.len() {
                let d = (crack[i] - crack[j]).norm2();
                if d > best.2 {
                    best = (i, j, d);
                }
            }
        }
        let (p, q) = (crack[best.0], crack[best.1]);
        let dir = if best.2 > 0.0 {
            (q - p) * (1.0 / best.2.sqrt())
        } else {
            Vec2::new(1.0, 0.0)
        };
        let mut s_min = f64::INFINITY;
        let mut s_max = f64::NEG_INFINITY;
        for c in crack {
            let s = (*c - p).dot(dir);
            s_min = s_min.min(s);
            s_max = s_max.max(s);
        }
        Ok(SeamFrame {
            origin: p,
            dir,
            s_min,
            s_max,
            index: PointIndex::with_cell(crack, 2.0),
        })
    }

    pub fn s(&self, p: Vec2) -> f64 {
        (p - self.origin).dot(self.dir)
    }

    pub fn d(&self, p: Vec2) -> f64 {
        self.index.nearest_dist(p)
    }

    pub fn s_range(&self) -> (f64, f64) {
        (self.s_min, self.s_max)
    }

    pub fn length(&self) -> f64 {
        self.s_max - self.s_min
    }

    /// Sensor-pad window along the crack.
    pub fn pad(&self, s: f64) -> f64 {
        let half = 0.5 * PAD_FADE_PX;
        fade((s - self.s_min + half) / PAD_FADE_PX) * fade((self.s_max + half - s) / PAD_FADE_PX)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// The lower fragment id; carries `+h(s)`.
    A,
    /// The higher fragment id; carries `c − h(s)` with `c = 0`.
    B,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::A => 1.0,
            Side::B => -1.0,
        }
    }
}

/// Crack-line height samples for one side of one crack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeHeightProfile {
    pub adjacency: usize,
    pub fragment: usize,
    pub side: Side,
    /// `(s, h)` on a unit grid in `s`, strictly increasing.
    pub samples: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct EdgeRelief {
    pub adjacency: usize,
    pub a: usize,
    pub b: usize,
    pub frame: SeamFrame,
    pub profile: CrestProfile,
    pub amplitude: f64,
}

impl EdgeRelief {
    pub fn side_of(&self, fragment: usize) -> Option<Side> {
        if fragment == self.a {
            Some(Side::A)
        } else if fragment == self.b {
            Some(Side::B)
        } else {
            None
        }
    }

    /// Crack-line profile `±amplitude · g(s)` before embedding.
    pub fn line_height(&self, side: Side, s: f64) -> f64 {
        side.sign() * self.amplitude * self.profile.value(s)
    }

    /// Embedded relief at an object-frame point. The band is symmetric in
    /// `d`, so beyond the fragment outline the field continues smoothly as
    /// the gel drapes over the edge.
    pub fn height_at(&self, side: Side, p: Vec2) -> f64 {
        let w = band_falloff(self.frame.d(p));
        if w == 0.0 {
            return 0.0;
        }
        let s = self.frame.s(p);
        self.line_height(side, s) * w * self.frame.pad(s)
    }

    pub fn profiles(&self) -> [EdgeHeightProfile; 2] {
        let (lo, hi) = self.frame.s_range();
        let n = (hi - lo).floor() as usize + 1;
        let make = |fragment, side| EdgeHeightProfile {
            adjacency: self.adjacency,
            fragment,
            side,
            samples: (0..n)
                .map(|k| {
                    let s = lo + k as f64;
                    (s, self.line_height(side, s))
                })
                .collect(),
        };
        [make(self.a, Side::A), make(self.b, Side::B)]
    }
}

#[derive(Debug, Clone)]
pub struct SceneRelief {
    pub edges: Vec<EdgeRelief>,
    pub amplitude: f64,
    pub seed: u64,
}

/// Draws one smooth profile per crack. Side A gets `amplitude · g(s)` with
/// `g ∈ [0.75, 0.9]`, side B the negation, so the two sides sum to zero.
pub fn synth_edge_heights(scene: &FracturedScene, amplitude: f64, seed: u64) -> Result<SceneRelief> {
    if scene.adjacency.is_empty() {
        return Err(Error::Empty("scene has no adjacency"));
    }
    if !(amplitude >= 0.0 && amplitude.is_finite()) {
        return Err(Error::InvalidArgument(format!("amplitude {amplitude} must be finite and ≥ 0")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges = scene
        .adjacency
        .iter()
        .enumerate()
        .map(|(k, adj)| {
            let frame = SeamFrame::new(&adj.crack)?;
            let (lo, hi) = frame.s_range();
            let (f0, f1) = CREST_SPAN[usize::from(rng.random_bool(0.5))];
            let centre = (lo + (hi - lo) * rng.random_range(f0..f1)).clamp(lo + PAD_FADE_PX, (hi - PAD_FADE_PX).max(lo + PAD_FADE_PX));
            let profile = CrestProfile {
                base: PROFILE_BASE,
                swing: PROFILE_SWING,
                centre,
                width: CREST_WIDTH_PX,
            };
            Ok(EdgeRelief {
                adjacency: k,
                a: adj.a,
                b: adj.b,
                frame,
                profile,
                amplitude,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SceneRelief { edges, amplitude, seed })
}

impl SceneRelief {
    /// Height over fragment `id`'s whole canvas. `edge = Some(k)` renders
    /// only crack `k` (a pad pressed on one edge); `None` sums every crack
    /// of the fragment.
    pub fn canvas_height(&self, scene: &FracturedScene, id: usize, edge: Option<usize>) -> Result<ScalarGrid> {
        let edges: Vec<(&EdgeRelief, Side)> = self
            .edges
            .iter()
            .filter(|e| edge.is_none_or(|k| e.adjacency == k))
            .filter_map(|e| e.side_of(id).map(|s| (e, s)))
            .collect();
        if let Some(k) = edge {
            if edges.is_empty() {
                return Err(Error::InvalidArgument(format!("crack {k} does not touch fragment {id}")));
            }
        }
        let f = &scene.fragments[id];
        let (w, h) = f.mask.dims();
        ScalarGrid::from_fn(w, h, |x, y| {
            let p = f.pose.apply(Vec2::new(x as f64, y as f64));
            edges.iter().map(|(e, s)| e.height_at(*s, p)).sum()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::fracture::fracture;
    use crate::synth::polygon::ShapeKind;

    fn scene() -> FracturedScene {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let p = ShapeKind::Square.polygon(128, &mut rng).unwrap();
        fracture(&p, 4, 0.5, 5).unwrap()
    }

    #[test]
    fn sides_are_complementary() {
        let s = scene();
        let r = synth_edge_heights(&s, 2.5, 9).unwrap();
        for e in &r.edges {
            let [pa, pb] = e.profiles();
            assert_eq!(pa.samples.len(), pb.samples.len());
            for (a, b) in pa.samples.iter().zip(&pb.samples) {
                assert_eq!(a.0, b.0);
                assert!((a.1 + b.1).abs() < 1e-9 * 2.5);
            }
            assert!(pa.samples.windows(2).all(|w| w[1].0 > w[0].0));
        }
    }

    #[test]
    fn zero_amplitude_is_flat() {
        let s = scene();
        let r = synth_edge_heights(&s, 0.0, 9).unwrap();
        let h = r.canvas_height(&s, 0, None).unwrap();
        assert!(h.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn band_and_pad_shapes() {
        assert_eq!(band_falloff(0.0), 1.0);
        assert_eq!(band_falloff(EDGE_BAND_PX), 0.0);
        assert!((band_falloff(EDGE_BAND_PX / 2.0) - 0.25).abs() < 1e-12);
        let f = SeamFrame::new(&[Vec2::new(0.0, 0.5), Vec2::new(30.0, 0.5)]).unwrap();
        assert_eq!(f.pad(-0.5 * PAD_FADE_PX), 0.0);
        assert!((f.pad(0.0) - 0.5).abs() < 1e-12);
        assert_eq!(f.pad(15.0), 1.0);
        assert_eq!(f.length(), 30.0);
    }

    #[test]
    fn single_edge_sample_touches_its_fragment_only() {
        let s = scene();
        let r = synth_edge_heights(&s, 3.0, 1).unwrap();
        let e = &r.edges[0];
        let other = (0..s.fragments.len()).find(|&i| e.side_of(i).is_none());
        if let Some(o) = other {
            assert!(r.canvas_height(&s, o, Some(0)).is_err());
        }
        let h = r.canvas_height(&s, e.a, Some(0)).unwrap();
        assert!(h.as_slice().iter().any(|&v| v > 0.5));
        assert!(h.as_slice().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn needs_adjacency() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let p = ShapeKind::Square.polygon(128, &mut rng).unwrap();
        let one = fracture(&p, 1, 0.5, 5).unwrap();
        assert!(synth_edge_heights(&one, 1.0, 0).is_err());
    }
}
