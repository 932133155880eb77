use super::extrema::{find_extrema, ExtremaParams, ExtremaSet};
use super::frame::TactileFrame;
use super::normals::{normals_to_gradients, solve_normals, GradientField};
use super::poisson::{integrate_gradients, HeightMap};
use super::segment::{segment_contact, Contact};
use crate::error::{Error, Result};
use crate::raster::BinaryMask;

/// Local geometry recovered from one press.
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub contact: Contact,
    /// Hole-filled contact clipped to the fragment.
    pub domain: BinaryMask,
    /// Pixel-centred slopes on `domain`.
    pub gradients: GradientField,
    /// Heights gauged to zero mean on `domain`.
    pub height: HeightMap,
    /// Height of the undeformed surface in `height`'s gauge: the median of
    /// the recovered field over pixels outside the filled contact.
    pub rest_level: f64,
    /// Extrema that stand out from the rest level by the prominence.
    pub extrema: ExtremaSet,
}

/// Segments contact, then integrates photometric slopes over the whole
/// frame and restricts the result to the contact domain.
///
/// Integrating the full frame keeps the Neumann solve on a rectangle, where
/// the cosine basis is exact; the contact mask only selects which part of
/// the recovered surface belongs to the fragment. `region` (usually the
/// fragment's visual mask) clips the domain.
pub fn reconstruct(frame: &TactileFrame, baseline: &TactileFrame, region: Option<&BinaryMask>) -> Result<Reconstruction> {
    let contact = segment_contact(frame, baseline)?;
    if contact.mask.is_empty() {
        return Err(Error::Empty("no contact in tactile frame"));
    }
    let mut domain = contact.mask.fill_holes();
    if let Some(r) = region {
        domain = domain.and(r)?;
    }
    if domain.is_empty() {
        return Err(Error::Empty("contact does not overlap the fragment"));
    }
    let (w, h) = frame.dims();
    let normals = solve_normals(frame, &BinaryMask::full(w, h)?)?;
    let slopes = normals_to_gradients(&normals);
    let full = integrate_gradients(&slopes)?;
    let height = full.restricted(&domain)?;
    let rest_level = rest_level(&full, &contact.mask.fill_holes()) - full.mean_over(&domain);
    let gradients = slopes.centred().restricted(&domain)?;
    let p = ExtremaParams::default_for(&height);
    let mut extrema = find_extrema(&height, p.window, p.prominence)?;
    // Peaks must rise above the undeformed surface and troughs sink below
    // it; this drops the shelves where the contact is cut off.
    extrema.maxima.retain(|e| e.h - rest_level >= p.prominence);
    extrema.minima.retain(|e| rest_level - e.h >= p.prominence);
    Ok(Reconstruction {
        contact,
        domain,
        gradients,
        height,
        rest_level,
        extrema,
    })
}

/// Median over pixels outside `contact`, or the frame mean when the press
/// fills the frame.
fn rest_level(full: &HeightMap, contact: &BinaryMask) -> f64 {
    let mut v: Vec<f64> = full
        .values()
        .as_slice()
        .iter()
        .zip(contact.as_slice())
        .filter(|(_, &c)| !c)
        .map(|(&h, _)| h)
        .collect();
    if v.is_empty() {
        return full.mean();
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::ScalarGrid;
    use crate::synth::render::{render_baseline, render_tactile};
    use crate::tactile::frame::default_lights;

    fn bump(w: usize, h: usize) -> ScalarGrid {
        ScalarGrid::from_fn(w, h, |x, y| {
            let d2 = (x as f64 - 30.0).powi(2) + (y as f64 - 26.0).powi(2);
            4.0 * (-d2 / 60.0).exp()
        })
        .unwrap()
    }

    #[test]
    fn noiseless_bump_round_trip() {
        let truth = bump(64, 56);
        let f = render_tactile(&truth, default_lights(), 0.0, 0).unwrap();
        let b = render_baseline(64, 56, default_lights(), 0.0, 0).unwrap();
        let r = reconstruct(&f, &b, None).unwrap();
        let t = HeightMap::new(truth, r.domain.clone()).unwrap();
        assert!(r.height.rmse(&t, &r.domain).unwrap() < 1e-9);
        assert_eq!(r.extrema.maxima.len(), 1);
        assert_eq!((r.extrema.maxima[0].x, r.extrema.maxima[0].y), (30, 26));
    }

    #[test]
    fn flat_frame_has_no_contact() {
        let b = render_baseline(16, 16, default_lights(), 0.0, 0).unwrap();
        assert!(reconstruct(&b, &b, None).is_err());
    }
}
