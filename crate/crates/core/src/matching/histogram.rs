use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::wrap_angle;
use crate::raster::Pixel;
use crate::tactile::GradientField;

/// Magnitude-weighted orientation histogram, L2-normalised, with the
/// dominant angle of its heaviest bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrientationHistogram {
    pub bins: Vec<f64>,
    pub phi_star: f64,
}

/// `(orientation in [0, 2π), magnitude)` of every nonzero slope of the
/// domain inside the square window, in raster order.
pub fn window_samples(g: &GradientField, center: Pixel, window: usize) -> Vec<(f64, f64)> {
    let (w, h) = g.dims();
    let r = window as i64;
    let (cx, cy) = (center.x as i64, center.y as i64);
    let mut out = Vec::new();
    for y in (cy - r).max(0)..=(cy + r).min(h as i64 - 1) {
        for x in (cx - r).max(0)..=(cx + r).min(w as i64 - 1) {
            let (ux, uy) = (x as usize, y as usize);
            if !*g.domain.get(ux, uy) {
                continue;
            }
            let (gx, gy) = g.at(ux, uy);
            let m = gx.hypot(gy);
            if m > 0.0 {
                out.push((wrap_angle(gy.atan2(gx)), m));
            }
        }
    }
    out
}

pub fn bin_of(phi: f64, bins: usize) -> usize {
    ((phi / std::f64::consts::TAU * bins as f64) as usize).min(bins - 1)
}

/// Histogram of `(angle, magnitude)` samples. `None` when no sample has
/// positive magnitude.
pub fn histogram_from_samples(samples: impl Iterator<Item = (f64, f64)> + Clone, bins: usize) -> Option<OrientationHistogram> {
    let mut hist = vec![0.0; bins];
    for (phi, m) in samples.clone() {
        hist[bin_of(phi, bins)] += m;
    }
    let norm = hist.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(norm > 0.0) {
        return None;
    }
    let top = (0..bins).fold(0, |b, i| if hist[i] > hist[b] { i } else { b });
    let (mut s, mut c) = (0.0, 0.0);
    for (phi, m) in samples {
        if bin_of(phi, bins) == top {
            s += m * phi.sin();
            c += m * phi.cos();
        }
    }
    for v in &mut hist {
        *v /= norm;
    }
    Some(OrientationHistogram {
        bins: hist,
        phi_star: wrap_angle(s.atan2(c)),
    })
}

/// Histogram of the slope field around `center`.
pub fn orientation_histogram(g: &GradientField, center: Pixel, window: usize, bins: usize) -> Result<OrientationHistogram> {
    let samples = window_samples(g, center, window);
    histogram_from_samples(samples.iter().copied(), bins)
        .ok_or_else(|| Error::InvalidArgument(format!("window around ({}, {}) misses the gradient domain", center.x, center.y)))
}
