use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::material::{ColourStats, Material};
use crate::matching::TactileProfile;
use crate::raster::{extract_contours, BinaryMask, Contour};

/// Everything the database knows about one fragment.
#[derive(Debug, Clone, PartialEq)]
pub struct FragmentRecord {
    pub id: String,
    pub visual_mask: BinaryMask,
    /// Outer boundary of the largest component of `visual_mask`.
    pub contour: Contour,
    pub tactile: Option<TactileProfile>,
    pub material: Material,
    pub colour: Option<ColourStats>,
    /// Manifest the fragment came from.
    pub source_scene: String,
}

fn outer_contour(mask: &BinaryMask) -> Result<Contour> {
    extract_contours(mask).into_iter().next().ok_or(Error::Empty("visual mask"))
}

/// Ids become directory names, so they are restricted to a portable set.
pub fn validate_id(id: &str) -> Result<()> {
    let ok = !id.is_empty()
        && id.len() <= 128
        && !id.starts_with('.')
        && id.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'));
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("record id `{id}` must be 1-128 chars of [A-Za-z0-9._-] not starting with `.`")))
    }
}

impl FragmentRecord {
    /// Derives the contour from the mask.
    pub fn new(
        id: impl Into<String>,
        visual_mask: BinaryMask,
        tactile: Option<TactileProfile>,
        material: Material,
        colour: Option<ColourStats>,
        source_scene: impl Into<String>,
    ) -> Result<Self> {
        let contour = outer_contour(&visual_mask)?;
        let r = FragmentRecord {
            id: id.into(),
            visual_mask,
            contour,
            tactile,
            material,
            colour,
            source_scene: source_scene.into(),
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        validate_id(&self.id)?;
        if self.contour != outer_contour(&self.visual_mask)? {
            return Err(Error::InvalidArgument(format!("record `{}`: contour does not trace the mask", self.id)));
        }
        if let Some(t) = &self.tactile {
            if t.height.dims() != t.gradients.dims() {
                return Err(Error::InvalidArgument(format!("record `{}`: tactile rasters disagree in size", self.id)));
            }
        }
        Ok(())
    }

    pub fn tactile_missing(&self) -> bool {
        self.tactile.is_none()
    }
}

/// The JSON half of a stored record; rasters live beside it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct RecordMeta {
    pub format_version: u32,
    pub id: String,
    pub material: Material,
    pub colour: Option<ColourStats>,
    pub source_scene: String,
    pub tactile_missing: bool,
    #[serde(default)]
    pub edge: Vec<crate::raster::BoundaryEdge>,
    #[serde(default)]
    pub extrema: Option<crate::tactile::ExtremaSet>,
}
