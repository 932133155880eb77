use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::raster::{boundary_edges, BinaryMask, BoundaryEdge};
use crate::tactile::{ExtremaSet, GradientField, HeightMap, Reconstruction};

/// A boundary side belongs to the edge set when the relief across it is at
/// least this fraction of the strongest relief in the domain.
pub const CORE_FRACTION: f64 = 0.5;

/// What the matcher knows about one press on one fragment.
#[derive(Debug, Clone, PartialEq)]
pub struct TactileProfile {
    /// Outline sides of the fragment where the press met the edge.
    pub edge: Vec<BoundaryEdge>,
    pub gradients: GradientField,
    pub height: HeightMap,
    pub extrema: ExtremaSet,
}

impl TactileProfile {
    /// Keeps the outline sides of `visual` whose relief, averaged over the
    /// two pixels that share the side, reaches [`CORE_FRACTION`] of the
    /// peak relief. Mates see the same relief magnitude on both sides of
    /// their common crack, so they select the same sides.
    pub fn from_reconstruction(rec: &Reconstruction, visual: &BinaryMask) -> Result<Self> {
        rec.domain.ensure_same_dims(visual)?;
        let h = &rec.height;
        let (w, hh) = h.dims();
        let dev = |x: usize, y: usize| (h.get(x, y) - rec.rest_level).abs();
        let peak = rec.domain.foreground().map(|(x, y)| dev(x, y)).fold(0.0, f64::max);
        if !(peak > 0.0) {
            return Err(Error::Empty("flat reconstruction"));
        }
        let at = |p: crate::raster::Pixel| {
            if p.x >= 0 && p.y >= 0 && (p.x as usize) < w && (p.y as usize) < hh {
                dev(p.x as usize, p.y as usize)
            } else {
                0.0
            }
        };
        let edge: Vec<BoundaryEdge> = boundary_edges(visual)
            .into_iter()
            .filter(|b| *rec.domain.get(b.inside.x as usize, b.inside.y as usize))
            .filter(|b| 0.5 * (at(b.inside) + at(b.outside)) >= CORE_FRACTION * peak)
            .collect();
        if edge.is_empty() {
            return Err(Error::Empty("no outline side under the press"));
        }
        Ok(TactileProfile {
            edge,
            gradients: rec.gradients.clone(),
            height: rec.height.clone(),
            extrema: rec.extrema.clone(),
        })
    }

    pub fn edge_points(&self) -> Vec<Vec2> {
        self.edge.iter().map(|b| b.pos).collect()
    }

    pub fn edge_centroid(&self) -> Vec2 {
        let n = self.edge.len() as f64;
        let s = self.edge.iter().fold(Vec2::new(0.0, 0.0), |acc, b| acc + b.pos);
        Vec2::new(s.x / n, s.y / n)
    }
}
