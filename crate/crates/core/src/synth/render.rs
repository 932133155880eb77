use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::raster::ScalarGrid;
use crate::tactile::frame::{dot3, TactileFrame, Vec3};
use crate::tactile::normals::{normal_from_slope, GradientField};

/// Lambertian three-light render of a height field.
///
/// Normals come from the same forward differences the reconstruction
/// inverts. Channel `k` is `clamp(max(0, s_k·n) + ε, 0, 1)` with
/// `ε ~ N(0, noise_sigma)` drawn from a stream seeded by `noise_seed` in
/// channel-major raster order.
pub fn render_tactile(h: &ScalarGrid, lights: [Vec3; 3], noise_sigma: f64, noise_seed: u64) -> Result<TactileFrame> {
    if !(noise_sigma >= 0.0 && noise_sigma.is_finite()) {
        return Err(Error::InvalidArgument(format!("noise sigma {noise_sigma} must be finite and ≥ 0")));
    }
    let g = GradientField::from_heights(h);
    let (w, hh) = h.dims();
    let normals: Vec<Vec3> = (0..w * hh)
        .map(|i| {
            let (gx, gy) = (g.gx.as_slice()[i], g.gy.as_slice()[i]);
            normal_from_slope(gx, gy)
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(noise_seed);
    let noise = Normal::new(0.0, noise_sigma.max(f64::MIN_POSITIVE)).expect("finite sigma");
    let channels = lights.map(|s| {
        let data = normals
            .iter()
            .map(|n| {
                let e = if noise_sigma > 0.0 { noise.sample(&mut rng) } else { 0.0 };
                (dot3(s, *n).max(0.0) + e).clamp(0.0, 1.0)
            })
            .collect();
        ScalarGrid::from_vec(w, hh, data).expect("dims")
    });
    TactileFrame::new(channels, lights)
}

/// Untouched-gel frame for contact segmentation.
pub fn render_baseline(width: usize, height: usize, lights: [Vec3; 3], noise_sigma: f64, noise_seed: u64) -> Result<TactileFrame> {
    render_tactile(&ScalarGrid::filled(width, height, 0.0)?, lights, noise_sigma, noise_seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tactile::frame::default_lights;

    const AXES: [Vec3; 3] = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

    #[test]
    fn flat_under_axis_lights() {
        let f = render_tactile(&ScalarGrid::filled(6, 5, 2.0).unwrap(), AXES, 0.0, 0).unwrap();
        for (x, y) in [(0, 0), (3, 2), (5, 4)] {
            assert_eq!(f.intensity(x, y), [0.0, 0.0, 1.0]);
        }
    }

    #[test]
    fn tilted_plane_closed_form() {
        let slope = 0.3;
        let h = ScalarGrid::from_fn(8, 8, |x, _| slope * x as f64).unwrap();
        let f = render_tactile(&h, default_lights(), 0.0, 0).unwrap();
        let n = normal_from_slope(slope, 0.0);
        for (k, s) in default_lights().iter().enumerate() {
            let want = dot3(*s, n).max(0.0);
            assert!((f.channels()[k].get(2, 3) - want).abs() < 1e-15);
        }
    }

    #[test]
    fn noisy_render_stays_in_range() {
        let h = ScalarGrid::from_fn(16, 16, |x, y| ((x * y) as f64).sin() * 4.0).unwrap();
        let f = render_tactile(&h, default_lights(), 0.5, 3).unwrap();
        for c in f.channels() {
            assert!(c.as_slice().iter().all(|v| (0.0..=1.0).contains(v)));
        }
        let again = render_tactile(&h, default_lights(), 0.5, 3).unwrap();
        assert_eq!(f, again);
    }
}
