use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Five transparent material classes. Declaration order is the tie-break
/// order wherever classes are ranked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Material {
    Glass,
    Acrylic,
    Plastic,
    ColoredCrystal,
    ColorlessCrystal,
}

impl Material {
    pub const ALL: [Material; 5] = [
        Material::Glass,
        Material::Acrylic,
        Material::Plastic,
        Material::ColoredCrystal,
        Material::ColorlessCrystal,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Material::Glass => "glass",
            Material::Acrylic => "acrylic",
            Material::Plastic => "plastic",
            Material::ColoredCrystal => "colored_crystal",
            Material::ColorlessCrystal => "colorless_crystal",
        }
    }

    /// Multiplier on fracture-edge relief amplitude.
    pub fn relief_scale(self) -> f64 {
        match self {
            Material::Glass => 1.0,
            Material::Acrylic => 0.8,
            Material::Plastic => 0.65,
            Material::ColoredCrystal => 1.2,
            Material::ColorlessCrystal => 1.2,
        }
    }

    /// Typical per-channel RGB mean and variance of the fragment's image.
    fn colour_prototype(self) -> ([f64; 3], [f64; 3]) {
        match self {
            Material::Glass => ([0.82, 0.86, 0.84], [0.004, 0.004, 0.004]),
            Material::Acrylic => ([0.90, 0.90, 0.92], [0.002, 0.002, 0.002]),
            Material::Plastic => ([0.74, 0.74, 0.70], [0.008, 0.008, 0.008]),
            Material::ColoredCrystal => ([0.55, 0.30, 0.70], [0.020, 0.020, 0.020]),
            Material::ColorlessCrystal => ([0.88, 0.88, 0.88], [0.030, 0.030, 0.030]),
        }
    }

    /// Seeded colour statistics scattered around the class prototype.
    pub fn sample_colour<R: Rng + ?Sized>(self, rng: &mut R) -> ColourStats {
        let (m, v) = self.colour_prototype();
        let jm = Normal::new(0.0, 0.015).expect("finite sigma");
        let jv = Normal::new(0.0, 0.0008).expect("finite sigma");
        let mut mean = [0.0; 3];
        let mut var = [0.0; 3];
        for k in 0..3 {
            mean[k] = (m[k] + jm.sample(rng)).clamp(0.0, 1.0);
            var[k] = (v[k] + jv.sample(rng)).max(0.0);
        }
        ColourStats { mean, var }
    }
}

impl fmt::Display for Material {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Material {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Material::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown material `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColourStats {
    pub mean: [f64; 3],
    pub var: [f64; 3],
}
