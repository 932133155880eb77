use super::frame::TactileFrame;
use crate::error::{Error, Result};
use crate::raster::BinaryMask;

/// Per-pixel intensity change that counts as contact.
pub const CONTACT_THRESHOLD: f64 = 0.04;

/// Contact masks covering more than this fraction of the frame usually mean
/// the baseline does not belong to the frame.
pub const SATURATION_RATIO: f64 = 0.9;

#[derive(Debug, Clone, PartialEq)]
pub struct Contact {
    pub mask: BinaryMask,
    pub area_ratio: f64,
}

impl Contact {
    pub fn saturated(&self) -> bool {
        self.area_ratio > SATURATION_RATIO
    }
}

/// Thresholds the largest per-channel change against an untouched baseline,
/// cleans it with a 3x3 opening and closing and keeps the largest component.
pub fn segment_contact(frame: &TactileFrame, baseline: &TactileFrame) -> Result<Contact> {
    segment_contact_with(frame, baseline, CONTACT_THRESHOLD)
}

pub fn segment_contact_with(frame: &TactileFrame, baseline: &TactileFrame, threshold: f64) -> Result<Contact> {
    if frame.dims() != baseline.dims() {
        return Err(Error::DimensionMismatch {
            left: frame.dims(),
            right: baseline.dims(),
        });
    }
    if frame.lights() != baseline.lights() {
        return Err(Error::InvalidArgument(
            "frame and baseline were captured under different lights".into(),
        ));
    }
    let (w, h) = frame.dims();
    let raw = BinaryMask::from_fn(w, h, |x, y| {
        let a = frame.intensity(x, y);
        let b = baseline.intensity(x, y);
        let delta = (0..3).map(|k| (a[k] - b[k]).abs()).fold(0.0, f64::max);
        delta > threshold
    })?;
    let mask = raw.open(1).close(1).largest_component();
    let area_ratio = mask.count() as f64 / (w * h) as f64;
    Ok(Contact { mask, area_ratio })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::ScalarGrid;
    use crate::tactile::frame::default_lights;

    fn flat(v: f64) -> TactileFrame {
        let g = ScalarGrid::filled(16, 16, v).unwrap();
        TactileFrame::new([g.clone(), g.clone(), g], default_lights()).unwrap()
    }

    #[test]
    fn identical_frames_have_no_contact() {
        let f = flat(0.4);
        let c = segment_contact(&f, &f).unwrap();
        assert!(c.mask.is_empty());
        assert!(!c.saturated());
    }

    #[test]
    fn uniform_offset_saturates() {
        let c = segment_contact(&flat(0.9), &flat(0.4)).unwrap();
        assert_eq!(c.mask.count(), 256);
        assert!(c.saturated());
    }

    #[test]
    fn mismatched_frames_error() {
        let g = ScalarGrid::filled(8, 16, 0.4).unwrap();
        let f = TactileFrame::new([g.clone(), g.clone(), g], default_lights()).unwrap();
        assert!(segment_contact(&f, &flat(0.4)).is_err());
    }
}
