use serde::{Deserialize, Serialize};

use super::poisson::HeightMap;
use crate::error::{Error, Result};
use crate::geom::Vec2;

pub const DEFAULT_EXTREMA_WINDOW: usize = 5;
pub const DEFAULT_PROMINENCE_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    pub x: usize,
    pub y: usize,
    pub h: f64,
}

impl Extremum {
    pub fn pos(&self) -> Vec2 {
        Vec2::new(self.x as f64, self.y as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ExtremaSet {
    pub maxima: Vec<Extremum>,
    pub minima: Vec<Extremum>,
    /// Height range over the whole domain.
    pub range: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtremaParams {
    /// Half-width of the square neighbourhood.
    pub window: usize,
    pub prominence: f64,
}

impl ExtremaParams {
    /// Window radius 5 and 5% of the height range.
    pub fn default_for(h: &HeightMap) -> Self {
        ExtremaParams {
            window: DEFAULT_EXTREMA_WINDOW,
            prominence: DEFAULT_PROMINENCE_FRACTION * h.range(),
        }
    }
}

/// Local maxima and minima of a height map.
///
/// A maximum is strictly higher than every other domain pixel in its
/// `(2·window+1)²` neighbourhood, lies at least `prominence` above the domain
/// minimum, and rises at least `prominence` above the lowest pixel of its
/// neighbourhood. The last rule rejects numerically flat plateaus. Minima
/// mirror this. Both lists are sorted by `|h|` descending, then raster order.
pub fn find_extrema(h: &HeightMap, window: usize, prominence: f64) -> Result<ExtremaSet> {
    let dom = h.domain();
    if dom.is_empty() {
        return Err(Error::Empty("extrema domain"));
    }
    let (lo, hi) = h.min_max();
    let (w, hh) = h.dims();
    let r = window as i64;
    let mut maxima = Vec::new();
    let mut minima = Vec::new();
    for (x, y) in dom.foreground() {
        let v = h.get(x, y);
        let mut is_max = true;
        let mut is_min = true;
        let mut wmin = v;
        let mut wmax = v;
        for dy in -r..=r {
            let ny = y as i64 + dy;
            if ny < 0 || ny >= hh as i64 {
                continue;
            }
            for dx in -r..=r {
                let nx = x as i64 + dx;
                if nx < 0 || nx >= w as i64 || (dx == 0 && dy == 0) {
                    continue;
                }
                let (ux, uy) = (nx as usize, ny as usize);
                if !*dom.get(ux, uy) {
                    continue;
                }
                let u = h.get(ux, uy);
                is_max &= v > u;
                is_min &= v < u;
                wmin = wmin.min(u);
                wmax = wmax.max(u);
            }
            if !is_max && !is_min {
                break;
            }
        }
        if is_max && v >= lo + prominence && v - wmin >= prominence {
            maxima.push(Extremum { x, y, h: v });
        }
        if is_min && v <= hi - prominence && wmax - v >= prominence {
            minima.push(Extremum { x, y, h: v });
        }
    }
    let order = |a: &Extremum, b: &Extremum| {
        b.h.abs()
            .total_cmp(&a.h.abs())
            .then((a.y, a.x).cmp(&(b.y, b.x)))
    };
    maxima.sort_by(order);
    minima.sort_by(order);
    Ok(ExtremaSet {
        maxima,
        minima,
        range: hi - lo,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::{BinaryMask, ScalarGrid};

    fn bumps(specs: &[(f64, f64, f64)]) -> HeightMap {
        let g = ScalarGrid::from_fn(48, 40, |x, y| {
            specs
                .iter()
                .map(|&(cx, cy, a)| {
                    let d2 = (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2);
                    a * (-d2 / (2.0 * 16.0)).exp()
                })
                .sum()
        })
        .unwrap();
        HeightMap::full(g).unwrap()
    }

    #[test]
    fn single_bump_single_maximum() {
        let h = bumps(&[(20.0, 18.0, 1.0)]);
        let p = ExtremaParams::default_for(&h);
        let e = find_extrema(&h, p.window, p.prominence).unwrap();
        assert_eq!(e.maxima.len(), 1);
        assert_eq!((e.maxima[0].x, e.maxima[0].y), (20, 18));
        assert!(e.minima.is_empty());
    }

    #[test]
    fn negated_bump_single_minimum() {
        let h = bumps(&[(20.0, 18.0, -1.0)]);
        let p = ExtremaParams::default_for(&h);
        let e = find_extrema(&h, p.window, p.prominence).unwrap();
        assert!(e.maxima.is_empty());
        assert_eq!(e.minima.len(), 1);
        assert_eq!((e.minima[0].x, e.minima[0].y), (20, 18));
    }

    #[test]
    fn two_bumps_sorted_by_height() {
        let h = bumps(&[(12.0, 12.0, 0.4), (34.0, 26.0, 1.0)]);
        let e = find_extrema(&h, 5, 0.2).unwrap();
        assert_eq!(e.maxima.len(), 2);
        assert_eq!((e.maxima[0].x, e.maxima[0].y), (34, 26));
        assert_eq!((e.maxima[1].x, e.maxima[1].y), (12, 12));
    }

    #[test]
    fn range_covers_domain() {
        let h = bumps(&[(20.0, 18.0, 1.0)]);
        let e = find_extrema(&h, 5, 0.05).unwrap();
        assert!((e.range - h.range()).abs() < 1e-15);
    }

    #[test]
    fn plateau_has_no_extrema() {
        let h = HeightMap::full(ScalarGrid::filled(10, 10, 3.0).unwrap()).unwrap();
        let e = find_extrema(&h, 2, 0.0).unwrap();
        assert!(e.maxima.is_empty() && e.minima.is_empty());
        assert_eq!(e.range, 0.0);
    }

    #[test]
    fn restricted_domain_ignores_outside() {
        let h = bumps(&[(20.0, 18.0, 1.0)]);
        let d = BinaryMask::from_fn(48, 40, |x, _| x > 30).unwrap();
        let e = find_extrema(&h.restricted(&d).unwrap(), 3, 0.01).unwrap();
        assert!(e.maxima.iter().all(|m| m.x > 30));
    }
}
