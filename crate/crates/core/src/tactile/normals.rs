use super::frame::{norm3, TactileFrame, Vec3};
use crate::error::{Error, Result};
use crate::raster::{BinaryMask, Grid, ScalarGrid};

/// Normals with `n_z` at or below this floor are dropped before the slope
/// division, which caps slopes near 1000.
pub const NZ_FLOOR: f64 = 1e-3;

const MIN_RAW_NORM: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct NormalMap {
    pub normals: Grid<Vec3>,
    pub valid: BinaryMask,
}

impl NormalMap {
    pub fn dims(&self) -> (usize, usize) {
        self.normals.dims()
    }
}

/// Surface slope field `(∂h/∂x, ∂h/∂y)` on a domain; zero elsewhere.
///
/// Slopes live on the staggered grid: `gx(x, y)` is the forward difference
/// `h(x+1, y) - h(x, y)`, and the last column of `gx` (last row of `gy`)
/// carries no flux.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientField {
    pub gx: ScalarGrid,
    pub gy: ScalarGrid,
    pub domain: BinaryMask,
}

impl GradientField {
    pub fn new(gx: ScalarGrid, gy: ScalarGrid, domain: BinaryMask) -> Result<Self> {
        gx.ensure_same_dims(&gy)?;
        gx.ensure_same_dims(&domain)?;
        let mut gx = gx;
        let mut gy = gy;
        for i in 0..domain.as_slice().len() {
            if !domain.as_slice()[i] {
                gx.as_mut_slice()[i] = 0.0;
                gy.as_mut_slice()[i] = 0.0;
            } else if !gx.as_slice()[i].is_finite() || !gy.as_slice()[i].is_finite() {
                return Err(Error::InvalidArgument("non-finite gradient".into()));
            }
        }
        Ok(GradientField { gx, gy, domain })
    }

    pub fn dims(&self) -> (usize, usize) {
        self.gx.dims()
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> (f64, f64) {
        (*self.gx.get(x, y), *self.gy.get(x, y))
    }

    /// Forward-difference slopes of a full height grid.
    pub fn from_heights(h: &ScalarGrid) -> Self {
        let (w, hh) = h.dims();
        let gx = ScalarGrid::from_fn(w, hh, |x, y| {
            if x + 1 < w {
                h.get(x + 1, y) - h.get(x, y)
            } else {
                0.0
            }
        })
        .expect("dims");
        let gy = ScalarGrid::from_fn(w, hh, |x, y| {
            if y + 1 < hh {
                h.get(x, y + 1) - h.get(x, y)
            } else {
                0.0
            }
        })
        .expect("dims");
        GradientField {
            gx,
            gy,
            domain: BinaryMask::full(w, hh).expect("dims"),
        }
    }

    /// Slopes moved to pixel centres by averaging the two staggered
    /// differences that straddle each pixel, which is the central
    /// difference of the underlying heights. Border pixels keep their one
    /// inner difference. Unlike the staggered field, the centred field
    /// turns with the image under quarter turns and reflections.
    pub fn centred(&self) -> Self {
        let (w, h) = self.dims();
        let avg = |g: &ScalarGrid, x: usize, y: usize, back: Option<(usize, usize)>, last: bool| match (back, last) {
            (None, _) => *g.get(x, y),
            (Some((bx, by)), true) => *g.get(bx, by),
            (Some((bx, by)), false) => 0.5 * (g.get(bx, by) + g.get(x, y)),
        };
        let gx = ScalarGrid::from_fn(w, h, |x, y| avg(&self.gx, x, y, x.checked_sub(1).map(|bx| (bx, y)), x + 1 == w)).expect("dims");
        let gy = ScalarGrid::from_fn(w, h, |x, y| avg(&self.gy, x, y, y.checked_sub(1).map(|by| (x, by)), y + 1 == h)).expect("dims");
        GradientField::new(gx, gy, self.domain.clone()).expect("finite slopes stay finite")
    }

    /// Same slopes, zeroed outside `domain`.
    pub fn restricted(&self, domain: &BinaryMask) -> Result<Self> {
        let d = self.domain.and(domain)?;
        GradientField::new(self.gx.clone(), self.gy.clone(), d)
    }
}

/// Per contact pixel, solves `S n = I` for the scaled normal and normalises
/// it. Pixels whose raw solution is degenerate or faces away from the sensor
/// are marked invalid.
pub fn solve_normals(frame: &TactileFrame, contact: &BinaryMask) -> Result<NormalMap> {
    if frame.dims() != contact.dims() {
        return Err(Error::DimensionMismatch {
            left: frame.dims(),
            right: contact.dims(),
        });
    }
    if contact.is_empty() {
        return Err(Error::Empty("contact mask"));
    }
    let s = frame.light_matrix()?;
    let (w, h) = frame.dims();
    let mut normals = Grid::filled(w, h, [0.0, 0.0, 1.0])?;
    let mut valid = BinaryMask::empty(w, h)?;
    for (x, y) in contact.foreground() {
        let raw = s.solve(frame.intensity(x, y));
        let len = norm3(raw);
        if !(len >= MIN_RAW_NORM) {
            continue;
        }
        let n = [raw[0] / len, raw[1] / len, raw[2] / len];
        if n[2] <= NZ_FLOOR {
            continue;
        }
        normals.set(x, y, n);
        valid.set(x, y, true);
    }
    Ok(NormalMap { normals, valid })
}

/// `G = (-n_x / n_z, -n_y / n_z)` on valid pixels with `n_z > NZ_FLOOR`.
pub fn normals_to_gradients(n: &NormalMap) -> GradientField {
    let (w, h) = n.dims();
    let mut gx = ScalarGrid::filled(w, h, 0.0).expect("dims");
    let mut gy = ScalarGrid::filled(w, h, 0.0).expect("dims");
    let mut domain = BinaryMask::empty(w, h).expect("dims");
    for (x, y) in n.valid.foreground() {
        let v = n.normals.get(x, y);
        if v[2] > NZ_FLOOR {
            gx.set(x, y, -v[0] / v[2]);
            gy.set(x, y, -v[1] / v[2]);
            domain.set(x, y, true);
        }
    }
    GradientField { gx, gy, domain }
}

/// Unit normal of a surface with the given slopes.
pub fn normal_from_slope(gx: f64, gy: f64) -> Vec3 {
    let len = (gx * gx + gy * gy + 1.0).sqrt();
    [-gx / len, -gy / len, 1.0 / len]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tactile::frame::TactileFrame;

    fn axis_frame(i: Vec3) -> TactileFrame {
        let ch = i.map(|v| ScalarGrid::filled(5, 4, v).unwrap());
        TactileFrame::new(ch, [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]).unwrap()
    }

    #[test]
    fn identity_lights_recover_up_normal() {
        let f = axis_frame([0.0, 0.0, 1.0]);
        let n = solve_normals(&f, &BinaryMask::full(5, 4).unwrap()).unwrap();
        assert_eq!(n.valid.count(), 20);
        assert!(n.normals.as_slice().iter().all(|v| *v == [0.0, 0.0, 1.0]));
    }

    #[test]
    fn empty_contact_is_an_error() {
        let f = axis_frame([0.0, 0.0, 1.0]);
        assert!(solve_normals(&f, &BinaryMask::empty(5, 4).unwrap()).is_err());
    }

    #[test]
    fn black_pixels_are_invalid() {
        let f = axis_frame([0.0, 0.0, 0.0]);
        let n = solve_normals(&f, &BinaryMask::full(5, 4).unwrap()).unwrap();
        assert!(n.valid.is_empty());
    }

    #[test]
    fn gradient_substitution() {
        let mut normals = Grid::filled(2, 1, [0.0, 0.0, 1.0]).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        normals.set(1, 0, [-r, 0.0, r]);
        let nm = NormalMap {
            normals,
            valid: BinaryMask::full(2, 1).unwrap(),
        };
        let g = normals_to_gradients(&nm);
        assert_eq!(g.at(0, 0), (0.0, 0.0));
        let (gx, gy) = g.at(1, 0);
        assert!((gx - 1.0).abs() < 1e-15 && gy == 0.0);
    }

    #[test]
    fn grazing_normals_are_dropped() {
        let mut normals = Grid::filled(1, 1, [0.0, 0.0, 1.0]).unwrap();
        normals.set(0, 0, [1.0, 0.0, 5e-4]);
        let nm = NormalMap {
            normals,
            valid: BinaryMask::full(1, 1).unwrap(),
        };
        assert!(normals_to_gradients(&nm).domain.is_empty());
    }
}
