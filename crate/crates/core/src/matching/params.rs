use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `w_e + w_g + w_h = 1`.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MatchParams {
    /// Radians.
    pub sigma_phi: f64,
    pub sigma_h: f64,
    /// Pixels.
    pub delta: f64,
    pub alpha_height: f64,
    /// `(w_e, w_g, w_h)`.
    pub weights: [f64; 3],
    pub hist_bins: usize,
    /// Histogram window half-width in pixels.
    pub window: usize,
    /// Coarse rotation step in radians.
    pub sweep_step: f64,
    /// Pixels.
    pub chamfer_scale: f64,
    /// Coarse candidates that receive the fine sweep.
    pub refine_top: usize,
}

impl Default for MatchParams {
    fn default() -> Self {
        MatchParams {
            sigma_phi: 0.35,
            sigma_h: 0.5,
            delta: 10.0,
            alpha_height: 0.6,
            weights: [0.4, 0.3, 0.3],
            hist_bins: 16,
            window: 8,
            sweep_step: 2f64.to_radians(),
            chamfer_scale: 1.0,
            refine_top: 8,
        }
    }
}

pub fn validate_weights(w: [f64; 3]) -> Result<()> {
    let ok = w.iter().all(|v| v.is_finite() && *v >= 0.0) && (w.iter().sum::<f64>() - 1.0).abs() <= WEIGHT_SUM_TOL;
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidWeights(w))
    }
}

impl MatchParams {
    pub fn validate(&self) -> Result<()> {
        validate_weights(self.weights)?;
        let positive = [
            ("sigma_phi", self.sigma_phi),
            ("sigma_h", self.sigma_h),
            ("delta", self.delta),
            ("sweep_step", self.sweep_step),
            ("chamfer_scale", self.chamfer_scale),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        if !(0.0..=1.0).contains(&self.alpha_height) {
            return Err(Error::InvalidArgument(format!("alpha_height {} outside [0, 1]", self.alpha_height)));
        }
        if self.hist_bins == 0 || self.window == 0 || self.refine_top == 0 {
            return Err(Error::InvalidArgument("hist_bins, window and refine_top must be ≥ 1".into()));
        }
        if self.sweep_step > std::f64::consts::TAU {
            return Err(Error::InvalidArgument("sweep_step exceeds a full turn".into()));
        }
        Ok(())
    }

    /// Rescales weights to sum to one.
    pub fn with_weights(mut self, w: [f64; 3]) -> Result<Self> {
        let s: f64 = w.iter().sum();
        if !(s > 0.0) || w.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidWeights(w));
        }
        self.weights = w.map(|v| v / s);
        // Park rounding drift on the largest weight so the sum is exact.
        let drift = 1.0 - self.weights.iter().sum::<f64>();
        let k = (0..3).fold(0, |b, i| if self.weights[i] > self.weights[b] { i } else { b });
        self.weights[k] += drift;
        validate_weights(self.weights)?;
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        MatchParams::default().validate().unwrap();
    }

    #[test]
    fn weights_must_sum_to_one() {
        assert!(validate_weights([0.5, 0.3, 0.3]).is_err());
        assert!(validate_weights([1.2, -0.1, -0.1]).is_err());
        validate_weights([1.0, 0.0, 0.0]).unwrap();
    }

    #[test]
    fn renormalised_weights() {
        let p = MatchParams::default().with_weights([2.0, 1.0, 1.0]).unwrap();
        assert_eq!(p.weights, [0.5, 0.25, 0.25]);
        assert!(MatchParams::default().with_weights([0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(serde_json::from_str::<MatchParams>(r#"{"sigma_phi": 0.3, "bogus": 1}"#).is_err());
        let p: MatchParams = serde_json::from_str(r#"{"delta": 5.0}"#).unwrap();
        assert_eq!(p.delta, 5.0);
        assert_eq!(p.window, 8);
    }
}
