//! Brute-force oracles for the numeric kernels. Each check returns a short
//! summary on success and the first disagreement on failure.

#![allow(dead_code)]

use std::f64::consts::TAU;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shardmatch_core::matching::{bin_of, histogram_from_samples};
use shardmatch_core::raster::metrics::{tversky_from_counts, Confusion};
use shardmatch_core::raster::{chamfer, longest_chord, BinaryMask, Contour, Pixel, ScalarGrid};
use shardmatch_core::synth::render_tactile;
use shardmatch_core::tactile::{
    default_lights, divergence, find_extrema, integrate_gradients, normals_to_gradients, poisson_solve_dct, solve_normals, Extremum,
    GradientField, HeightMap, TactileFrame, Vec3,
};

pub type Check = Result<String, String>;

pub const INSTANCES: usize = 1000;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($fmt)+));
        }
    };
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_pixels(r: &mut ChaCha8Rng, n: usize, span: i32) -> Vec<Pixel> {
    (0..n).map(|_| Pixel::new(r.random_range(0..span), r.random_range(0..span))).collect()
}

pub fn chamfer_oracle() -> Check {
    let mut r = rng(1);
    let nearest = |p: Pixel, set: &[Pixel]| set.iter().map(|q| (p.dist2(*q) as f64).sqrt()).fold(f64::INFINITY, f64::min);
    let mean_nearest = |a: &[Pixel], b: &[Pixel]| a.iter().map(|&p| nearest(p, b)).sum::<f64>() / a.len() as f64;
    for _ in 0..INSTANCES {
        let na = r.random_range(1..40);
        let nb = r.random_range(1..40);
        let span = r.random_range(2..60);
        let a = random_pixels(&mut r, na, span);
        let b = random_pixels(&mut r, nb, span);
        let (ca, cb) = (Contour::new(a.clone()).unwrap(), Contour::new(b.clone()).unwrap());
        let one = mean_nearest(&a, &b);
        let sym = 0.5 * (one + mean_nearest(&b, &a));
        let (g1, g2) = (chamfer(&ca, &cb, false).unwrap(), chamfer(&ca, &cb, true).unwrap());
        ensure!((g1 - one).abs() <= 1e-12, "one-sided chamfer {g1} vs {one} on {a:?} {b:?}");
        ensure!((g2 - sym).abs() <= 1e-12, "symmetric chamfer {g2} vs {sym} on {a:?} {b:?}");
    }
    Ok(format!("chamfer {INSTANCES}/{INSTANCES}"))
}

pub fn longest_chord_oracle() -> Check {
    let mut r = rng(2);
    for _ in 0..INSTANCES {
        let n = r.random_range(2..24);
        let span = r.random_range(1..12);
        let pts = random_pixels(&mut r, n, span);
        let mut best: Option<(i64, Pixel, Pixel)> = None;
        for &a in &pts {
            for &b in &pts {
                if a.raster_key() >= b.raster_key() {
                    continue;
                }
                let d = a.dist2(b);
                let wins = match best {
                    None => true,
                    Some((bd, bp, bq)) => d > bd || (d == bd && (a.raster_key(), b.raster_key()) < (bp.raster_key(), bq.raster_key())),
                };
                if wins {
                    best = Some((d, a, b));
                }
            }
        }
        let expect = best.map_or((pts[0], pts[0]), |(_, a, b)| (a, b));
        let got = longest_chord(&Contour::new(pts.clone()).unwrap()).unwrap();
        ensure!(got == expect, "longest chord {got:?} vs {expect:?} on {pts:?}");
    }
    Ok(format!("longest_chord {INSTANCES}/{INSTANCES}"))
}

pub fn binning_oracle() -> Check {
    let mut r = rng(3);
    for _ in 0..INSTANCES {
        let bins = r.random_range(1..64);
        let k = r.random_range(0..bins);
        let u: f64 = r.random_range(0.001..0.999);
        let phi = (k as f64 + u) * TAU / bins as f64;
        ensure!(bin_of(phi, bins) == k, "bin_of({phi}, {bins}) != {k}");
    }
    ensure!(bin_of(0.0, 16) == 0 && bin_of(TAU - 1e-15, 16) == 15, "range ends misbinned");
    let mut r = rng(4);
    for _ in 0..INSTANCES {
        let bins = r.random_range(2..24);
        let n = r.random_range(1..30);
        let samples: Vec<(f64, f64)> = (0..n)
            .map(|_| {
                let k = r.random_range(0..bins);
                let phi = (k as f64 + r.random_range(0.01..0.99)) * TAU / bins as f64;
                let m = if r.random_bool(0.2) { 0.0 } else { r.random_range(0.0..3.0) };
                (phi, m)
            })
            .collect();
        let bin = |phi: f64| (phi * bins as f64 / TAU).floor() as usize;
        let mut hist = vec![0.0; bins];
        for &(phi, m) in &samples {
            hist[bin(phi)] += m;
        }
        let norm = hist.iter().map(|v| v * v).sum::<f64>().sqrt();
        let got = histogram_from_samples(samples.iter().copied(), bins);
        if norm == 0.0 {
            ensure!(got.is_none(), "all-zero samples gave a histogram");
            continue;
        }
        let Some(got) = got else {
            return Err(format!("no histogram for {samples:?}"));
        };
        let top = (0..bins).fold(0, |t, i| if hist[i] > hist[t] { i } else { t });
        for (g, e) in got.bins.iter().zip(&hist) {
            ensure!((g - e / norm).abs() <= 1e-12, "bin weight {g} vs {}", e / norm);
        }
        let (s, c) = samples
            .iter()
            .filter(|(phi, _)| bin(*phi) == top)
            .fold((0.0, 0.0), |(s, c), &(phi, m)| (s + m * phi.sin(), c + m * phi.cos()));
        let expect = s.atan2(c).rem_euclid(TAU);
        let d = (got.phi_star - expect).abs();
        ensure!(d.min(TAU - d) <= 1e-12, "dominant angle {} vs {expect}", got.phi_star);
    }
    Ok(format!("binning {INSTANCES}/{INSTANCES}, histograms {INSTANCES}/{INSTANCES}"))
}

type Points = Vec<(usize, usize, f64)>;

/// The extrema rule restated with whole-domain scans.
fn brute_extrema(h: &HeightMap, window: usize, prominence: f64) -> (Points, Points) {
    let dom: Vec<(usize, usize)> = h.domain().foreground().collect();
    let lo = dom.iter().map(|&(x, y)| h.get(x, y)).fold(f64::INFINITY, f64::min);
    let hi = dom.iter().map(|&(x, y)| h.get(x, y)).fold(f64::NEG_INFINITY, f64::max);
    let (mut maxima, mut minima) = (Vec::new(), Vec::new());
    for &(x, y) in &dom {
        let v = h.get(x, y);
        let nb: Vec<f64> = dom
            .iter()
            .filter(|&&(a, b)| (a, b) != (x, y) && a.abs_diff(x) <= window && b.abs_diff(y) <= window)
            .map(|&(a, b)| h.get(a, b))
            .collect();
        let wmin = nb.iter().copied().fold(v, f64::min);
        let wmax = nb.iter().copied().fold(v, f64::max);
        if nb.iter().all(|&u| v > u) && v >= lo + prominence && v - wmin >= prominence {
            maxima.push((x, y, v));
        }
        if nb.iter().all(|&u| v < u) && v <= hi - prominence && wmax - v >= prominence {
            minima.push((x, y, v));
        }
    }
    for list in [&mut maxima, &mut minima] {
        list.sort_by(|a, b| b.2.abs().total_cmp(&a.2.abs()).then((a.1, a.0).cmp(&(b.1, b.0))));
    }
    (maxima, minima)
}

pub fn extrema_oracle() -> Check {
    let mut r = rng(5);
    let mut nonempty = 0;
    let flat = |l: &[Extremum]| l.iter().map(|e| (e.x, e.y, e.h)).collect::<Vec<_>>();
    for _ in 0..INSTANCES {
        let (w, hh) = (r.random_range(2..12), r.random_range(2..12));
        let levels = r.random_range(2..8);
        let values = ScalarGrid::from_fn(w, hh, |_, _| r.random_range(0..levels) as f64).unwrap();
        let fill = r.random_range(0.4..1.0);
        let mut domain = BinaryMask::from_fn(w, hh, |_, _| r.random_bool(fill)).unwrap();
        if domain.is_empty() {
            domain.set(0, 0, true);
        }
        let h = HeightMap::new(values, domain).unwrap();
        let window = r.random_range(1..4);
        let prominence = [0.0, 0.5, 1.0, 2.5][r.random_range(0..4)];
        let got = find_extrema(&h, window, prominence).unwrap();
        let (maxima, minima) = brute_extrema(&h, window, prominence);
        ensure!(flat(&got.maxima) == maxima, "maxima {:?} vs {maxima:?}", flat(&got.maxima));
        ensure!(flat(&got.minima) == minima, "minima {:?} vs {minima:?}", flat(&got.minima));
        nonempty += usize::from(!maxima.is_empty() || !minima.is_empty());
    }
    ensure!(nonempty > INSTANCES / 4, "instances too degenerate: {nonempty} with extrema");
    Ok(format!("extrema {INSTANCES}/{INSTANCES} ({nonempty} with extrema)"))
}

pub fn metric_oracles() -> Check {
    let parts = [chamfer_oracle()?, longest_chord_oracle()?, binning_oracle()?, extrema_oracle()?];
    Ok(parts.join(", "))
}

pub fn tversky_check() -> Check {
    let c = Confusion { tp: 70, fn_: 10, fp: 20 };
    let l = tversky_from_counts(c, 0.7, 0.3).map_err(|e| e.to_string())?;
    let expect = 1.0 - 70.0 / 83.0;
    ensure!((l - expect).abs() <= 1e-12, "tversky {l} vs {expect}");
    Ok(format!("loss {l:.15} (|err| {:.1e})", (l - expect).abs()))
}

/// Max abs error of the ramp recovered on a 64x64 grid, and the solve time.
pub fn ramp_error() -> (f64, f64) {
    let n = 64;
    let truth = ScalarGrid::from_fn(n, n, |x, y| 0.37 * x as f64 - 0.21 * y as f64 + 3.0).unwrap();
    let t = Instant::now();
    let h = integrate_gradients(&GradientField::from_heights(&truth)).unwrap();
    let secs = t.elapsed().as_secs_f64();
    let expect = HeightMap::full(truth).unwrap();
    let err = h.values().as_slice().iter().zip(expect.values().as_slice()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    (err, secs)
}

/// Successive over-relaxation on the Neumann five-point system, driven to
/// a max residual of 1e-12 and gauged to zero mean.
pub fn relaxation_solve(f: &ScalarGrid) -> Vec<f64> {
    let (w, h) = f.dims();
    let nbrs = |x: usize, y: usize| {
        let mut v = Vec::with_capacity(4);
        if x > 0 {
            v.push(y * w + x - 1);
        }
        if x + 1 < w {
            v.push(y * w + x + 1);
        }
        if y > 0 {
            v.push((y - 1) * w + x);
        }
        if y + 1 < h {
            v.push((y + 1) * w + x);
        }
        v
    };
    let mut u = vec![0.0; w * h];
    let omega = 1.9;
    for _ in 0..200_000 {
        for y in 0..h {
            for x in 0..w {
                let nb = nbrs(x, y);
                let s: f64 = nb.iter().map(|&i| u[i]).sum();
                let i = y * w + x;
                let gs = (s - f.get(x, y)) / nb.len() as f64;
                u[i] += omega * (gs - u[i]);
            }
        }
        let mut res: f64 = 0.0;
        for y in 0..h {
            for x in 0..w {
                let c = u[y * w + x];
                let lap: f64 = nbrs(x, y).iter().map(|&i| u[i] - c).sum();
                res = res.max((lap - f.get(x, y)).abs());
            }
        }
        if res <= 1e-12 {
            let mean = u.iter().sum::<f64>() / u.len() as f64;
            return u.into_iter().map(|v| v - mean).collect();
        }
    }
    panic!("relaxation did not reach the residual target");
}

/// Max abs difference between the cosine solve and relaxation on a random
/// divergence field.
pub fn relaxation_gap() -> f64 {
    let mut r = rng(6);
    let (w, h) = (24, 20);
    let gx = ScalarGrid::from_fn(w, h, |_, _| r.random_range(-1.0..1.0)).unwrap();
    let gy = ScalarGrid::from_fn(w, h, |_, _| r.random_range(-1.0..1.0)).unwrap();
    let f = divergence(&GradientField::new(gx, gy, BinaryMask::full(w, h).unwrap()).unwrap()).unwrap();
    let dct = poisson_solve_dct(&f).unwrap();
    let gs = relaxation_solve(&f);
    dct.values().as_slice().iter().zip(&gs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

/// Interior relative RMSE of a Gaussian bump rendered at 128x128 and
/// inverted through normals and the cosine solve, and the inversion time.
pub fn bump_round_trip() -> (f64, f64) {
    let n = 128;
    let c = (n as f64 - 1.0) / 2.0;
    let truth = ScalarGrid::from_fn(n, n, |x, y| 6.0 * (-((x as f64 - c).powi(2) + (y as f64 - c).powi(2)) / 288.0).exp()).unwrap();
    let frame = render_tactile(&truth, default_lights(), 0.0, 0).unwrap();
    let full = BinaryMask::full(n, n).unwrap();
    let t = Instant::now();
    let g = normals_to_gradients(&solve_normals(&frame, &full).unwrap());
    let h = integrate_gradients(&g).unwrap();
    let secs = t.elapsed().as_secs_f64();
    let expect = HeightMap::full(truth).unwrap();
    let (lo, hi) = expect.min_max();
    (h.rmse(&expect, &full.erode(2)).unwrap() / (hi - lo), secs)
}

pub fn poisson_checks() -> Check {
    let (ramp, t1) = ramp_error();
    let gap = relaxation_gap();
    let (bump, t2) = bump_round_trip();
    let summary = format!("ramp max err {ramp:.1e}, relaxation gap {gap:.1e}, bump rel RMSE {bump:.1e}, slowest solve {:.3} s", t1.max(t2));
    ensure!(ramp < 1e-9 && gap < 1e-6 && bump < 1e-3 && t1 < 1.0 && t2 < 1.0, "{summary}");
    Ok(summary)
}

fn unit(v: Vec3) -> Vec3 {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

fn angle(a: Vec3, b: Vec3) -> f64 {
    (a[0] * b[0] + a[1] * b[1] + a[2] * b[2]).clamp(-1.0, 1.0).acos()
}

/// Mean angular error, radians, of normals recovered from a Lambertian
/// render of random normals tilted up to 30 degrees.
pub fn stereo_error(noise: f64, seed: u64) -> f64 {
    let mut r = rng(seed);
    let (w, h) = (48, 40);
    let lights = default_lights();
    let normals: Vec<Vec3> = (0..w * h)
        .map(|_| {
            let tilt = r.random_range(0.0..30f64.to_radians());
            let az = r.random_range(0.0..TAU);
            unit([tilt.sin() * az.cos(), tilt.sin() * az.sin(), tilt.cos()])
        })
        .collect();
    let channels = lights.map(|l| {
        let data = normals
            .iter()
            .map(|n| {
                let e = if noise > 0.0 { noise * r.sample::<f64, _>(rand_distr::StandardNormal) } else { 0.0 };
                (l[0] * n[0] + l[1] * n[1] + l[2] * n[2] + e).clamp(0.0, 1.0)
            })
            .collect();
        ScalarGrid::from_vec(w, h, data).unwrap()
    });
    let frame = TactileFrame::new(channels, lights).unwrap();
    let got = solve_normals(&frame, &BinaryMask::full(w, h).unwrap()).unwrap();
    assert_eq!(got.valid.count(), w * h, "every pixel must yield a normal");
    let total: f64 = got.normals.as_slice().iter().zip(&normals).map(|(a, b)| angle(*a, *b)).sum();
    total / (w * h) as f64
}

pub fn stereo_checks() -> Check {
    let clean = stereo_error(0.0, 7);
    let noisy = stereo_error(0.01, 8).to_degrees();
    let summary = format!("noiseless {clean:.1e} rad, 1% noise {noisy:.3} deg");
    ensure!(clean < 1e-6 && noisy < 2.0, "{summary}");
    Ok(summary)
}
