use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::material::{ColourStats, Material};
use crate::tactile::{GradientField, HeightMap};

pub const FEATURE_LEN: usize = 9;

/// Height RMS, height range, mean slope magnitude, then RGB means and
/// variances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialFeatures(pub [f64; FEATURE_LEN]);

impl MaterialFeatures {
    pub fn extract(height: &HeightMap, gradients: &GradientField, colour: &ColourStats) -> Result<Self> {
        let dom = height.domain();
        let n = dom.count();
        if n == 0 {
            return Err(Error::Empty("height domain"));
        }
        let rms = (dom.foreground().map(|(x, y)| height.get(x, y).powi(2)).sum::<f64>() / n as f64).sqrt();
        let g = gradients.domain.count();
        if g == 0 {
            return Err(Error::Empty("gradient domain"));
        }
        let slope = gradients
            .domain
            .foreground()
            .map(|(x, y)| {
                let (a, b) = gradients.at(x, y);
                a.hypot(b)
            })
            .sum::<f64>()
            / g as f64;
        let mut f = [0.0; FEATURE_LEN];
        f[0] = rms;
        f[1] = height.range();
        f[2] = slope;
        f[3..6].copy_from_slice(&colour.mean);
        f[6..9].copy_from_slice(&colour.var);
        if f.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite material feature".into()));
        }
        Ok(MaterialFeatures(f))
    }
}

/// Nearest class mean after scaling every feature by its spread over the
/// training set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NearestCentroid {
    /// In [`Material::ALL`] order; classes absent from training are omitted.
    pub centroids: Vec<(Material, [f64; FEATURE_LEN])>,
    pub scale: [f64; FEATURE_LEN],
}

impl NearestCentroid {
    pub fn fit(samples: &[(Material, MaterialFeatures)]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Empty("training set"));
        }
        let n = samples.len() as f64;
        let mut mean = [0.0; FEATURE_LEN];
        for (_, f) in samples {
            for k in 0..FEATURE_LEN {
                mean[k] += f.0[k] / n;
            }
        }
        let mut scale = [0.0; FEATURE_LEN];
        for (_, f) in samples {
            for k in 0..FEATURE_LEN {
                scale[k] += (f.0[k] - mean[k]).powi(2) / n;
            }
        }
        for s in &mut scale {
            *s = if *s > 0.0 { s.sqrt() } else { 1.0 };
        }
        let centroids = Material::ALL
            .into_iter()
            .filter_map(|m| {
                let members: Vec<&MaterialFeatures> = samples.iter().filter(|(c, _)| *c == m).map(|(_, f)| f).collect();
                if members.is_empty() {
                    return None;
                }
                let mut c = [0.0; FEATURE_LEN];
                for f in &members {
                    for k in 0..FEATURE_LEN {
                        c[k] += f.0[k] / members.len() as f64;
                    }
                }
                Some((m, c))
            })
            .collect();
        Ok(NearestCentroid { centroids, scale })
    }

    pub fn distance2(&self, f: &MaterialFeatures, centroid: &[f64; FEATURE_LEN]) -> f64 {
        (0..FEATURE_LEN).map(|k| ((f.0[k] - centroid[k]) / self.scale[k]).powi(2)).sum()
    }

    /// Ties go to the class listed first in [`Material::ALL`].
    pub fn predict(&self, f: &MaterialFeatures) -> Material {
        let mut best = (self.centroids[0].0, f64::INFINITY);
        for (m, c) in &self.centroids {
            let d = self.distance2(f, c);
            if d < best.1 {
                best = (*m, d);
            }
        }
        best.0
    }
}

pub fn classify_material(model: &NearestCentroid, height: &HeightMap, gradients: &GradientField, colour: &ColourStats) -> Result<Material> {
    Ok(model.predict(&MaterialFeatures::extract(height, gradients, colour)?))
}

/// Fraction of `samples` classified correctly by a model fitted on all the
/// others.
pub fn leave_one_out_accuracy(samples: &[(Material, MaterialFeatures)]) -> Result<f64> {
    if samples.len() < 2 {
        return Err(Error::Empty("leave-one-out needs two samples"));
    }
    let mut hits = 0;
    for i in 0..samples.len() {
        let rest: Vec<_> = samples.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, s)| *s).collect();
        if NearestCentroid::fit(&rest)?.predict(&samples[i].1) == samples[i].0 {
            hits += 1;
        }
    }
    Ok(hits as f64 / samples.len() as f64)
}

/// Labelled features from whole-fragment presses on freshly fractured
/// objects, `per_class` per material, cycling through outline kinds.
pub fn synth_training_set(seed: u64, per_class: usize) -> Result<Vec<(Material, MaterialFeatures)>> {
    use crate::synth::noise::mix_seed;
    use crate::synth::{capture, fracture, synth_edge_heights, CaptureParams, ShapeKind, DEFAULT_AMPLITUDE, SCENE_SIZE};
    use rand::SeedableRng;

    let mut out = Vec::with_capacity(5 * per_class);
    for (k, m) in Material::ALL.into_iter().enumerate() {
        for i in 0..per_class {
            let s = mix_seed(seed, (k * 100_000 + i) as u64);
            let kind = ShapeKind::ALL[(k + i) % ShapeKind::ALL.len()];
            let poly = kind.polygon(SCENE_SIZE, &mut rand_chacha::ChaCha8Rng::seed_from_u64(s))?;
            let mut scene = fracture(&poly, 4, 0.5, s)?;
            scene.set_material(m, mix_seed(s, 1));
            let relief = synth_edge_heights(&scene, DEFAULT_AMPLITUDE * m.relief_scale(), mix_seed(s, 2))?;
            let id = i % scene.fragments.len();
            let press = capture(&scene, &relief, id, None, &CaptureParams::default(), 0)?;
            let f = &scene.fragments[id];
            let rec = crate::tactile::reconstruct(&press.frame, &press.baseline, Some(&f.mask))?;
            out.push((m, MaterialFeatures::extract(&rec.height, &rec.gradients, &f.colour)?));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(v: f64) -> MaterialFeatures {
        MaterialFeatures([v; FEATURE_LEN])
    }

    #[test]
    fn centroid_query_returns_its_class() {
        let m = NearestCentroid::fit(&[(Material::Glass, f(0.0)), (Material::Plastic, f(2.0))]).unwrap();
        assert_eq!(m.predict(&f(0.0)), Material::Glass);
        assert_eq!(m.predict(&f(2.0)), Material::Plastic);
    }

    #[test]
    fn equidistant_goes_to_first_class() {
        let m = NearestCentroid::fit(&[(Material::Plastic, f(0.0)), (Material::Acrylic, f(2.0))]).unwrap();
        assert_eq!(m.predict(&f(1.0)), Material::Acrylic);
    }

    #[test]
    fn synthetic_classes_separate() {
        let set = synth_training_set(5, 10).unwrap();
        assert_eq!(set.len(), 50);
        let acc = leave_one_out_accuracy(&set).unwrap();
        assert!(acc >= 0.9, "{acc}");
    }
}
