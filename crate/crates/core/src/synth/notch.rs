use serde::{Deserialize, Serialize};

use super::polygon::Polygon;
use crate::error::{Error, Result};
use crate::geom::{RigidTransform2D, Vec2};
use crate::raster::BinaryMask;

/// A square with an irregular piece broken out of its top edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NotchScene {
    /// The object with the piece missing.
    pub intact: BinaryMask,
    /// Where the piece belongs, in the object canvas.
    pub gap: BinaryMask,
    /// The piece, centred in its own canvas and rotated by `-rotation`.
    pub fragment: BinaryMask,
    /// Rotation, radians, that carries `fragment` back into `gap`.
    pub rotation: f64,
}

/// Object canvas and fragment canvas are both `size × size`.
pub fn notched_square_scene(size: usize, rotation: f64) -> Result<NotchScene> {
    if size < 48 {
        return Err(Error::InvalidArgument(format!("notch scene needs size ≥ 48, got {size}")));
    }
    let n = size as f64;
    let square = Polygon::square(Vec2::new((n - 1.0) / 2.0, (n - 1.0) / 2.0), 0.7 * n)?;
    let (x0, y0) = (0.15 * n - 0.5, 0.15 * n - 0.5);
    // Asymmetric bite: no rotation other than the identity maps it to itself.
    let piece = Polygon::new(
        [(0.18, 0.0), (0.50, 0.0), (0.47, 0.12), (0.36, 0.24), (0.30, 0.17), (0.21, 0.20)]
            .iter()
            .map(|&(u, v)| Vec2::new(x0 + u * n, y0 + v * n))
            .collect(),
    )?;
    let object = square.rasterize(size, size)?;
    let gap = piece.rasterize(size, size)?.and(&object)?;
    let intact = BinaryMask::from_fn(size, size, |x, y| *object.get(x, y) && !*gap.get(x, y))?;
    let c = crate::raster::centroid(&gap)?;
    let centre = Vec2::new((n - 1.0) / 2.0, (n - 1.0) / 2.0);
    let to_canvas = RigidTransform2D::about(false, -rotation, c, centre);
    let moved = Polygon::new(piece.vertices().iter().map(|&v| to_canvas.apply(v)).collect())?;
    let fragment = moved.rasterize(size, size)?;
    Ok(NotchScene {
        intact,
        gap,
        fragment,
        rotation,
    })
}
