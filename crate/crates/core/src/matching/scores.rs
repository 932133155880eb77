use serde::{Deserialize, Serialize};

use super::histogram::{histogram_from_samples, window_samples, OrientationHistogram};
use super::params::{validate_weights, MatchParams};
use super::profile::TactileProfile;
use crate::error::{Error, Result};
use crate::geom::{circular_diff, RigidTransform2D, Vec2};
use crate::raster::{chamfer_points, Contour, PointIndex};
use crate::tactile::ExtremaSet;

/// `exp(-chamfer(e1, T(e2)) / scale)` with the one-sided chamfer.
pub fn edge_score(e1: &Contour, e2: &Contour, t: &RigidTransform2D, scale: f64) -> Result<f64> {
    edge_score_points(&e1.to_vec2(), &e2.to_vec2(), t, scale)
}

pub fn edge_score_points(e1: &[Vec2], e2: &[Vec2], t: &RigidTransform2D, scale: f64) -> Result<f64> {
    let moved: Vec<Vec2> = e2.iter().map(|&p| t.apply(p)).collect();
    let c = chamfer_points(e1, &moved, false)?;
    Ok((-c / scale).exp())
}

fn l2_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// `exp(-|φ₁ - φ₂| / σ_φ - ‖h₁ - h₂‖₂ / σ_h)` with a circular angle
/// difference.
pub fn local_grad_score(h1: &[f64], phi1: f64, h2: &[f64], phi2: f64, params: &MatchParams) -> f64 {
    (-circular_diff(phi1, phi2) / params.sigma_phi - l2_dist(h1, h2) / params.sigma_h).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradScore {
    pub score: f64,
    pub used: usize,
    /// Edge points whose window on either side held no slope.
    pub skipped: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeightScore {
    pub score: f64,
    /// Best peak-to-trough distance, absent when neither cross pairing has
    /// candidates.
    pub d: Option<f64>,
    pub rho: f64,
}

/// `α / (1 + d/δ) + (1 - α)·ρ`: peak-to-trough proximity blended with the
/// height-range ratio.
pub fn height_score(x1: &ExtremaSet, x2: &ExtremaSet, t: &RigidTransform2D, params: &MatchParams) -> Result<HeightScore> {
    if !(x1.range > 0.0 && x2.range > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "height ranges must be positive, got {} and {}",
            x1.range, x2.range
        )));
    }
    let mut d = f64::INFINITY;
    for (tops, bottoms) in [(&x1.maxima, &x2.minima), (&x1.minima, &x2.maxima)] {
        for p in tops.iter() {
            for q in bottoms.iter() {
                d = d.min(p.pos().dist(t.apply(q.pos())));
            }
        }
    }
    let rho = x1.range.min(x2.range) / x1.range.max(x2.range);
    let a = params.alpha_height;
    let (near, d) = if d.is_finite() {
        (a / (1.0 + d / params.delta), Some(d))
    } else {
        (0.0, None)
    };
    Ok(HeightScore {
        score: near + (1.0 - a) * rho,
        d,
        rho,
    })
}

/// `w_e·edge + w_g·grad + w_h·height`.
pub fn fuse(edge: f64, grad: f64, height: f64, weights: [f64; 3]) -> Result<f64> {
    validate_weights(weights)?;
    Ok(weights[0] * edge + weights[1] * grad + weights[2] * height)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreBreakdown {
    pub edge: f64,
    pub gradient: f64,
    pub height: f64,
    pub fused: f64,
    pub transform: RigidTransform2D,
    pub grad_used: usize,
    pub grad_skipped: usize,
    pub height_pairs_missing: bool,
}

/// Edge points, their native histograms and the raw window samples that
/// transformed histograms are rebuilt from.
#[derive(Debug, Clone)]
pub struct PreparedProfile<'a> {
    pub profile: &'a TactileProfile,
    pub points: Vec<Vec2>,
    pub centroid: Vec2,
    hists: Vec<Option<OrientationHistogram>>,
    samples: Vec<Vec<(f64, f64)>>,
}

impl<'a> PreparedProfile<'a> {
    pub fn new(profile: &'a TactileProfile, params: &MatchParams) -> Self {
        let points = profile.edge_points();
        let samples: Vec<Vec<(f64, f64)>> = profile
            .edge
            .iter()
            .map(|b| window_samples(&profile.gradients, b.inside, params.window))
            .collect();
        let hists = samples
            .iter()
            .map(|s| histogram_from_samples(s.iter().copied(), params.hist_bins))
            .collect();
        PreparedProfile {
            profile,
            centroid: profile.edge_centroid(),
            points,
            hists,
            samples,
        }
    }

    fn transformed_hist(&self, j: usize, t: &RigidTransform2D, bins: usize) -> Option<OrientationHistogram> {
        histogram_from_samples(self.samples[j].iter().map(|&(phi, m)| (t.apply_angle(phi), m)), bins)
    }
}

struct Correspondence {
    chamfer: f64,
    nearest: Vec<usize>,
}

fn correspond(p1: &PreparedProfile, p2: &PreparedProfile, t: &RigidTransform2D) -> Correspondence {
    let moved: Vec<Vec2> = p2.points.iter().map(|&p| t.apply(p)).collect();
    let index = PointIndex::new(&moved);
    let mut sum = 0.0;
    let nearest = p1
        .points
        .iter()
        .map(|&p| {
            let (j, d2) = index.nearest(p);
            sum += d2.sqrt();
            j
        })
        .collect();
    Correspondence {
        chamfer: sum / p1.points.len() as f64,
        nearest,
    }
}

fn grad_from(p1: &PreparedProfile, p2: &PreparedProfile, t: &RigidTransform2D, nearest: &[usize], params: &MatchParams) -> Result<GradScore> {
    let mut cache: Vec<Option<Option<OrientationHistogram>>> = vec![None; p2.points.len()];
    let (mut sum, mut used, mut skipped) = (0.0, 0usize, 0usize);
    for (i, &j) in nearest.iter().enumerate() {
        let h2 = cache[j].get_or_insert_with(|| p2.transformed_hist(j, t, params.hist_bins));
        match (&p1.hists[i], h2) {
            (Some(a), Some(b)) => {
                sum += local_grad_score(&a.bins, a.phi_star, &b.bins, b.phi_star, params);
                used += 1;
            }
            _ => skipped += 1,
        }
    }
    if used == 0 {
        return Err(Error::Empty("no usable gradient sample"));
    }
    Ok(GradScore {
        score: sum / used as f64,
        used,
        skipped,
    })
}

/// Mean local gradient score over edge points of `f1` paired with their
/// nearest neighbour on `T(E₂)`. The second histogram is built from `f2`'s
/// window with every orientation mapped through `T`.
pub fn region_grad_score(f1: &TactileProfile, f2: &TactileProfile, t: &RigidTransform2D, params: &MatchParams) -> Result<GradScore> {
    let (p1, p2) = (PreparedProfile::new(f1, params), PreparedProfile::new(f2, params));
    let c = correspond(&p1, &p2, t);
    grad_from(&p1, &p2, t, &c.nearest, params)
}

/// All three components and their fusion for one transform.
pub fn score_prepared(p1: &PreparedProfile, p2: &PreparedProfile, t: &RigidTransform2D, params: &MatchParams) -> Result<ScoreBreakdown> {
    let c = correspond(p1, p2, t);
    let edge = (-c.chamfer / params.chamfer_scale).exp();
    let g = grad_from(p1, p2, t, &c.nearest, params)?;
    let h = height_score(&p1.profile.extrema, &p2.profile.extrema, t, params)?;
    Ok(ScoreBreakdown {
        edge,
        gradient: g.score,
        height: h.score,
        fused: fuse(edge, g.score, h.score, params.weights)?,
        transform: *t,
        grad_used: g.used,
        grad_skipped: g.skipped,
        height_pairs_missing: h.d.is_none(),
    })
}

pub fn score_transform(f1: &TactileProfile, f2: &TactileProfile, t: &RigidTransform2D, params: &MatchParams) -> Result<ScoreBreakdown> {
    score_prepared(&PreparedProfile::new(f1, params), &PreparedProfile::new(f2, params), t, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::Pixel;
    use crate::tactile::Extremum;

    #[test]
    fn edge_score_cases() {
        let a = Contour::new(vec![Pixel::new(3, 3)]).unwrap();
        assert_eq!(edge_score(&a, &a, &RigidTransform2D::identity(), 1.0).unwrap(), 1.0);
        let t = RigidTransform2D::new(false, 0.0, 2.0, 0.0);
        assert!((edge_score(&a, &a, &t, 1.0).unwrap() - (-2.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn local_grad_cases() {
        let p = MatchParams::default();
        let h = [1.0, 0.0];
        assert_eq!(local_grad_score(&h, 0.2, &h, 0.2, &p), 1.0);
        let s = local_grad_score(&h, 0.0, &h, p.sigma_phi, &p);
        assert!((s - (-1.0f64).exp()).abs() < 1e-15);
        let wrapped = local_grad_score(&h, 0.0, &h, std::f64::consts::TAU - 0.1, &p);
        assert!((wrapped - (-0.1 / 0.35f64).exp()).abs() < 1e-12);
    }

    fn ext(maxima: &[(usize, usize)], minima: &[(usize, usize)], range: f64) -> ExtremaSet {
        let e = |v: &[(usize, usize)]| v.iter().map(|&(x, y)| Extremum { x, y, h: 0.0 }).collect();
        ExtremaSet {
            maxima: e(maxima),
            minima: e(minima),
            range,
        }
    }

    #[test]
    fn height_cases() {
        let p = MatchParams::default();
        let id = RigidTransform2D::identity();
        let a = ext(&[(5, 5)], &[], 2.0);
        let b = ext(&[], &[(5, 5)], 2.0);
        assert!((height_score(&a, &b, &id, &p).unwrap().score - 1.0).abs() < 1e-15);
        let c = ext(&[], &[(15, 5)], 2.0);
        assert!((height_score(&a, &c, &id, &p).unwrap().score - 0.7).abs() < 1e-12);
        let none = height_score(&a, &a, &id, &p).unwrap();
        assert!(none.d.is_none());
        assert!((none.score - 0.4).abs() < 1e-15);
        assert!(height_score(&a, &ext(&[], &[], 0.0), &id, &p).is_err());
    }

    #[test]
    fn fuse_cases() {
        let w = [0.4, 0.3, 0.3];
        assert!((fuse(0.857, 0.814, 0.913, w).unwrap() - 0.8609).abs() < 1e-12);
        assert!((fuse(0.6, 0.6, 0.6, w).unwrap() - 0.6).abs() < 1e-15);
        assert_eq!(fuse(0.3, 0.9, 0.1, [1.0, 0.0, 0.0]).unwrap(), 0.3);
        assert!(fuse(0.3, 0.9, 0.1, [0.5, 0.5, 0.5]).is_err());
    }
}
