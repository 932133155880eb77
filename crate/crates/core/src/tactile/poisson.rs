//! Height from slopes: divergence with Neumann border flux and an exact
//! solve of the discrete Poisson equation in the cosine basis.

use std::f64::consts::PI;

use super::normals::GradientField;
use crate::error::{Error, Result};
use crate::raster::{BinaryMask, ScalarGrid};

/// Scalar height field with a zero-mean gauge over its domain.
#[derive(Debug, Clone, PartialEq)]
pub struct HeightMap {
    values: ScalarGrid,
    domain: BinaryMask,
}

impl HeightMap {
    /// Removes the domain mean from `values`.
    pub fn new(values: ScalarGrid, domain: BinaryMask) -> Result<Self> {
        values.ensure_same_dims(&domain)?;
        if domain.is_empty() {
            return Err(Error::Empty("height map domain"));
        }
        if values.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite height".into()));
        }
        let mean = domain_mean(&values, &domain);
        let values = values.map(|v| v - mean);
        Ok(HeightMap { values, domain })
    }

    /// Accepts values that already carry the zero-mean gauge, bit for bit.
    pub fn gauged(values: ScalarGrid, domain: BinaryMask) -> Result<Self> {
        values.ensure_same_dims(&domain)?;
        if domain.is_empty() {
            return Err(Error::Empty("height map domain"));
        }
        if values.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite height".into()));
        }
        let mean = domain_mean(&values, &domain);
        if mean.abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!("height mean {mean:e} breaks the zero-mean gauge")));
        }
        Ok(HeightMap { values, domain })
    }

    pub fn full(values: ScalarGrid) -> Result<Self> {
        let (w, h) = values.dims();
        HeightMap::new(values, BinaryMask::full(w, h)?)
    }

    pub fn values(&self) -> &ScalarGrid {
        &self.values
    }

    pub fn domain(&self) -> &BinaryMask {
        &self.domain
    }

    pub fn dims(&self) -> (usize, usize) {
        self.values.dims()
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        *self.values.get(x, y)
    }

    /// Re-gauges on a smaller domain.
    pub fn restricted(&self, domain: &BinaryMask) -> Result<Self> {
        HeightMap::new(self.values.clone(), self.domain.and(domain)?)
    }

    pub fn mean(&self) -> f64 {
        domain_mean(&self.values, &self.domain)
    }

    /// Mean of the stored values over `region`, ignoring this map's domain.
    pub fn mean_over(&self, region: &BinaryMask) -> f64 {
        domain_mean(&self.values, region)
    }

    /// `max - min` over the domain.
    pub fn range(&self) -> f64 {
        let (lo, hi) = self.min_max();
        hi - lo
    }

    pub fn min_max(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (x, y) in self.domain.foreground() {
            let v = self.get(x, y);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }

    /// Root-mean-square difference over `region ∩ domain`, after removing
    /// each map's mean over that region.
    pub fn rmse(&self, other: &HeightMap, region: &BinaryMask) -> Result<f64> {
        self.values.ensure_same_dims(&other.values)?;
        let r = self.domain.and(&other.domain)?.and(region)?;
        if r.is_empty() {
            return Err(Error::Empty("rmse region"));
        }
        let ma = domain_mean(&self.values, &r);
        let mb = domain_mean(&other.values, &r);
        let mut acc = 0.0;
        for (x, y) in r.foreground() {
            let d = (self.get(x, y) - ma) - (other.get(x, y) - mb);
            acc += d * d;
        }
        Ok((acc / r.count() as f64).sqrt())
    }
}

fn domain_mean(values: &ScalarGrid, domain: &BinaryMask) -> f64 {
    let mut sum = 0.0;
    let mut n = 0usize;
    for (v, &d) in values.as_slice().iter().zip(domain.as_slice()) {
        if d {
            sum += v;
            n += 1;
        }
    }
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Divergence of a staggered slope field.
///
/// Interior cells take the backward difference of the forward-difference
/// slopes (`gx(x) - gx(x-1)`), which makes `div ∘ grad` the five-point
/// Laplacian. Border cells keep only the one-sided flux that lies inside
/// the grid, which encodes zero-flux Neumann data from the slopes.
pub fn divergence(g: &GradientField) -> Result<ScalarGrid> {
    let (w, h) = g.dims();
    if w < 2 || h < 2 {
        return Err(Error::InvalidArgument(format!(
            "divergence needs at least 2x2, got {w}x{h}"
        )));
    }
    ScalarGrid::from_fn(w, h, |x, y| {
        let mut f = 0.0;
        if x + 1 < w {
            f += g.gx.get(x, y);
        }
        if x > 0 {
            f -= g.gx.get(x - 1, y);
        }
        if y + 1 < h {
            f += g.gy.get(x, y);
        }
        if y > 0 {
            f -= g.gy.get(x, y - 1);
        }
        f
    })
}

/// Orthonormal type-II cosine transform of length `n` as a dense matrix.
/// Row `k` holds `c_k cos(π (i + ½) k / n)`.
struct CosineBasis {
    n: usize,
    table: Vec<f64>,
}

impl CosineBasis {
    fn new(n: usize) -> Self {
        let mut table = vec![0.0; n * n];
        let c0 = (1.0 / n as f64).sqrt();
        let ck = (2.0 / n as f64).sqrt();
        for k in 0..n {
            let c = if k == 0 { c0 } else { ck };
            for i in 0..n {
                table[k * n + i] = c * (PI * (i as f64 + 0.5) * k as f64 / n as f64).cos();
            }
        }
        CosineBasis { n, table }
    }

    fn forward(&self, input: &[f64], out: &mut [f64]) {
        for (k, o) in out.iter_mut().enumerate().take(self.n) {
            let row = &self.table[k * self.n..(k + 1) * self.n];
            *o = row.iter().zip(input).map(|(a, b)| a * b).sum();
        }
    }

    fn inverse(&self, input: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (k, &c) in input.iter().enumerate().take(self.n) {
            let row = &self.table[k * self.n..(k + 1) * self.n];
            for (o, b) in out.iter_mut().zip(row) {
                *o += c * b;
            }
        }
    }
}

fn transform_2d(grid: &ScalarGrid, inverse: bool) -> ScalarGrid {
    let (w, h) = grid.dims();
    let bx = CosineBasis::new(w);
    let by = CosineBasis::new(h);
    let mut rows = vec![0.0; w * h];
    for y in 0..h {
        let src = &grid.as_slice()[y * w..(y + 1) * w];
        let dst = &mut rows[y * w..(y + 1) * w];
        if inverse {
            bx.inverse(src, dst);
        } else {
            bx.forward(src, dst);
        }
    }
    let mut out = vec![0.0; w * h];
    let mut col = vec![0.0; h];
    let mut res = vec![0.0; h];
    for x in 0..w {
        for y in 0..h {
            col[y] = rows[y * w + x];
        }
        if inverse {
            by.inverse(&col, &mut res);
        } else {
            by.forward(&col, &mut res);
        }
        for y in 0..h {
            out[y * w + x] = res[y];
        }
    }
    ScalarGrid::from_vec(w, h, out).expect("dims")
}

/// Eigenvalue of the Neumann five-point Laplacian for cosine mode `(u, v)`.
pub fn laplacian_eigenvalue(u: usize, v: usize, w: usize, h: usize) -> f64 {
    2.0 * (PI * u as f64 / w as f64).cos() + 2.0 * (PI * v as f64 / h as f64).cos() - 4.0
}

/// Solves `∇²H = f` with Neumann borders. The constant mode is fixed to
/// zero, so the result has zero mean over the full grid.
pub fn poisson_solve_dct(f: &ScalarGrid) -> Result<HeightMap> {
    let (w, h) = f.dims();
    if w < 2 || h < 2 {
        return Err(Error::InvalidArgument(format!(
            "poisson solve needs at least 2x2, got {w}x{h}"
        )));
    }
    let mut spec = transform_2d(f, false);
    for v in 0..h {
        for u in 0..w {
            let val = if u == 0 && v == 0 {
                0.0
            } else {
                spec.get(u, v) / laplacian_eigenvalue(u, v, w, h)
            };
            spec.set(u, v, val);
        }
    }
    HeightMap::full(transform_2d(&spec, true))
}

/// Gradient field → divergence → Poisson solve.
pub fn integrate_gradients(g: &GradientField) -> Result<HeightMap> {
    poisson_solve_dct(&divergence(g)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dct_roundtrip_is_identity() {
        let g = ScalarGrid::from_fn(7, 5, |x, y| ((x * 3 + y * 7) % 11) as f64 - 4.0).unwrap();
        let back = transform_2d(&transform_2d(&g, false), true);
        for (a, b) in g.as_slice().iter().zip(back.as_slice()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_source_gives_zero_height() {
        let h = poisson_solve_dct(&ScalarGrid::filled(8, 6, 0.0).unwrap()).unwrap();
        assert!(h.values().as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn constant_gradient_has_zero_interior_divergence() {
        let d = BinaryMask::full(6, 6).unwrap();
        let g = GradientField::new(
            ScalarGrid::filled(6, 6, 0.3).unwrap(),
            ScalarGrid::filled(6, 6, -0.2).unwrap(),
            d,
        )
        .unwrap();
        let f = divergence(&g).unwrap();
        for y in 1..5 {
            for x in 1..5 {
                assert!(f.get(x, y).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn linear_gradient_has_divergence_two() {
        let g = GradientField::new(
            ScalarGrid::from_fn(6, 6, |x, _| x as f64).unwrap(),
            ScalarGrid::from_fn(6, 6, |_, y| y as f64).unwrap(),
            BinaryMask::full(6, 6).unwrap(),
        )
        .unwrap();
        let f = divergence(&g).unwrap();
        for y in 1..5 {
            for x in 1..5 {
                assert_eq!(*f.get(x, y), 2.0);
            }
        }
    }

    #[test]
    fn degenerate_grid_rejected() {
        let g = GradientField::from_heights(&ScalarGrid::filled(1, 4, 0.0).unwrap());
        assert!(divergence(&g).is_err());
        assert!(poisson_solve_dct(&ScalarGrid::filled(4, 1, 0.0).unwrap()).is_err());
    }

    #[test]
    fn gauge_is_mean_zero() {
        let d = BinaryMask::from_fn(4, 4, |x, _| x < 2).unwrap();
        let h = HeightMap::new(ScalarGrid::from_fn(4, 4, |x, y| (x + y) as f64 + 10.0).unwrap(), d).unwrap();
        assert!(h.mean().abs() < 1e-12);
        assert!(HeightMap::new(ScalarGrid::filled(2, 2, 0.0).unwrap(), BinaryMask::empty(2, 2).unwrap()).is_err());
    }
}
