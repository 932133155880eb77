use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::ScalarGrid;

pub type Vec3 = [f64; 3];

/// Light directions above this condition number are rejected.
pub const MAX_CONDITION: f64 = 1e6;

pub fn dot3(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn norm3(a: Vec3) -> f64 {
    dot3(a, a).sqrt()
}

/// Three unit lights at 45° elevation, azimuths 0°, 120°, 240°.
pub fn default_lights() -> [Vec3; 3] {
    let el = std::f64::consts::FRAC_PI_4;
    let mut out = [[0.0; 3]; 3];
    for (k, l) in out.iter_mut().enumerate() {
        let az = (k as f64) * 2.0 * std::f64::consts::PI / 3.0;
        *l = [el.cos() * az.cos(), el.cos() * az.sin(), el.sin()];
    }
    out
}

/// The 3x3 matrix whose rows are the light directions, with its inverse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LightMatrix {
    rows: [Vec3; 3],
    inverse: [Vec3; 3],
    condition: f64,
}

impl LightMatrix {
    pub fn new(rows: [Vec3; 3]) -> Result<Self> {
        let condition = condition_number(&rows);
        if !(condition < MAX_CONDITION) {
            return Err(Error::IllConditioned(condition));
        }
        let inverse = invert3(&rows).ok_or(Error::IllConditioned(f64::INFINITY))?;
        Ok(LightMatrix {
            rows,
            inverse,
            condition,
        })
    }

    pub fn rows(&self) -> &[Vec3; 3] {
        &self.rows
    }

    pub fn condition(&self) -> f64 {
        self.condition
    }

    /// Least-squares solution of `S n = i`. With three independent lights
    /// the pseudo-inverse is the plain inverse.
    pub fn solve(&self, intensity: Vec3) -> Vec3 {
        let m = &self.inverse;
        [dot3(m[0], intensity), dot3(m[1], intensity), dot3(m[2], intensity)]
    }
}

fn invert3(m: &[Vec3; 3]) -> Option<[Vec3; 3]> {
    let c = |r0: usize, c0: usize, r1: usize, c1: usize| m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
    let cof = [
        [c(1, 1, 2, 2), -c(1, 0, 2, 2), c(1, 0, 2, 1)],
        [-c(0, 1, 2, 2), c(0, 0, 2, 2), -c(0, 0, 2, 1)],
        [c(0, 1, 1, 2), -c(0, 0, 1, 2), c(0, 0, 1, 1)],
    ];
    let det = m[0][0] * cof[0][0] + m[0][1] * cof[0][1] + m[0][2] * cof[0][2];
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    let mut inv = [[0.0; 3]; 3];
    for (i, row) in inv.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = cof[j][i] / det;
        }
    }
    Some(inv)
}

/// Ratio of largest to smallest singular value, from the eigenvalues of SᵀS.
fn condition_number(s: &[Vec3; 3]) -> f64 {
    let mut a = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            a[i][j] = (0..3).map(|k| s[k][i] * s[k][j]).sum();
        }
    }
    let eig = symmetric_eigenvalues(a);
    let max = eig.iter().cloned().fold(f64::MIN, f64::max);
    let min = eig.iter().cloned().fold(f64::MAX, f64::min);
    if min <= max * 1e-30 {
        return f64::INFINITY;
    }
    (max / min).sqrt()
}

/// Cyclic Jacobi rotations; plenty for a 3x3.
fn symmetric_eigenvalues(mut a: [Vec3; 3]) -> Vec3 {
    for _ in 0..64 {
        let off = a[0][1].abs() + a[0][2].abs() + a[1][2].abs();
        if off < 1e-300 {
            break;
        }
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            if a[p][q].abs() < 1e-300 {
                continue;
            }
            let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let t = if theta == 0.0 { 1.0 } else { t };
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;
            let mut b = a;
            for k in 0..3 {
                b[k][p] = c * a[k][p] - s * a[k][q];
                b[k][q] = s * a[k][p] + c * a[k][q];
            }
            let mut d = b;
            for k in 0..3 {
                d[p][k] = c * b[p][k] - s * b[q][k];
                d[q][k] = s * b[p][k] + c * b[q][k];
            }
            a = d;
        }
    }
    [a[0][0], a[1][1], a[2][2]]
}

/// Three intensity channels captured under three known lights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TactileFrame {
    channels: [ScalarGrid; 3],
    lights: [Vec3; 3],
    #[serde(skip)]
    condition: f64,
}

impl TactileFrame {
    pub fn new(channels: [ScalarGrid; 3], lights: [Vec3; 3]) -> Result<Self> {
        channels[0].ensure_same_dims(&channels[1])?;
        channels[0].ensure_same_dims(&channels[2])?;
        for ch in &channels {
            if let Some(v) = ch.as_slice().iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(Error::InvalidArgument(format!(
                    "intensity {v} outside [0, 1]"
                )));
            }
        }
        for l in &lights {
            if (norm3(*l) - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidArgument(format!(
                    "light {l:?} is not unit length"
                )));
            }
        }
        let condition = condition_number(&lights);
        Ok(TactileFrame {
            channels,
            lights,
            condition,
        })
    }

    pub fn width(&self) -> usize {
        self.channels[0].width()
    }

    pub fn height(&self) -> usize {
        self.channels[0].height()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.channels[0].dims()
    }

    pub fn channels(&self) -> &[ScalarGrid; 3] {
        &self.channels
    }

    pub fn lights(&self) -> &[Vec3; 3] {
        &self.lights
    }

    /// Condition number of the light matrix.
    pub fn light_condition(&self) -> f64 {
        self.condition
    }

    pub fn light_matrix(&self) -> Result<LightMatrix> {
        LightMatrix::new(self.lights)
    }

    #[inline]
    pub fn intensity(&self, x: usize, y: usize) -> Vec3 {
        [
            *self.channels[0].get(x, y),
            *self.channels[1].get(x, y),
            *self.channels[2].get(x, y),
        ]
    }

    /// The frame a flat, untouched gel produces under the same lights.
    pub fn flat_like(&self) -> Result<Self> {
        let (w, h) = self.dims();
        let chans = self
            .lights
            .map(|l| ScalarGrid::filled(w, h, l[2].clamp(0.0, 1.0)).expect("dims"));
        TactileFrame::new(chans, self.lights)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_lights_are_unit_and_well_conditioned() {
        let l = default_lights();
        for v in &l {
            assert!((norm3(*v) - 1.0).abs() < 1e-12);
        }
        let m = LightMatrix::new(l).unwrap();
        assert!(m.condition() < 10.0);
    }

    #[test]
    fn identity_lights_have_unit_condition() {
        let m = LightMatrix::new([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]).unwrap();
        assert!((m.condition() - 1.0).abs() < 1e-12);
        assert_eq!(m.solve([0.2, 0.3, 0.4]), [0.2, 0.3, 0.4]);
    }

    #[test]
    fn collinear_lights_are_rejected() {
        let a = [1.0, 0.0, 0.0];
        let r = LightMatrix::new([a, a, [0.0, 0.0, 1.0]]);
        assert!(matches!(r, Err(Error::IllConditioned(_))));
    }

    #[test]
    fn frame_validates_inputs() {
        let g = ScalarGrid::filled(4, 4, 0.5).unwrap();
        let l = default_lights();
        assert!(TactileFrame::new([g.clone(), g.clone(), g.clone()], l).is_ok());
        let bad = ScalarGrid::filled(4, 4, 1.5).unwrap();
        assert!(TactileFrame::new([g.clone(), g.clone(), bad], l).is_err());
        let mut l2 = l;
        l2[0] = [1.0, 1.0, 0.0];
        assert!(TactileFrame::new([g.clone(), g.clone(), g.clone()], l2).is_err());
        let small = ScalarGrid::filled(3, 4, 0.5).unwrap();
        assert!(TactileFrame::new([g.clone(), g, small], l).is_err());
    }
}
