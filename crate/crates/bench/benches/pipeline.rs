use criterion::{criterion_group, criterion_main, Criterion};
use shardmatch_core::matching::{search_transform, MatchParams};
use shardmatch_core::partial::{align_gap, GapParams};
use shardmatch_core::raster::{chamfer, extract_contours};
use shardmatch_core::synth::notched_square_scene;
use shardmatch_core::tactile::{integrate_gradients, normals_to_gradients, reconstruct, solve_normals};
use shardmatch_core::BinaryMask;

fn tactile(c: &mut Criterion) {
    let b = shardmatch_bench::scene();
    let s = &b.samples[0];
    let (w, h) = s.frame.dims();
    let full = BinaryMask::full(w, h).unwrap();
    let slopes = normals_to_gradients(&solve_normals(&s.frame, &full).unwrap());
    c.bench_function("solve_normals_128", |bn| bn.iter(|| solve_normals(&s.frame, &full).unwrap()));
    c.bench_function("poisson_dct_128", |bn| bn.iter(|| integrate_gradients(&slopes).unwrap()));
    let mask = &b.scene.fragment(s.fragment).mask;
    c.bench_function("reconstruct_press", |bn| bn.iter(|| reconstruct(&s.frame, &s.baseline, Some(mask)).unwrap()));
}

fn matching(c: &mut Criterion) {
    let b = shardmatch_bench::scene();
    let (p, q) = shardmatch_bench::mate_profiles(&b);
    let params = MatchParams::default();
    let mut g = c.benchmark_group("matching");
    g.sample_size(10);
    g.bench_function("search_transform_pair", |bn| bn.iter(|| search_transform(&p, &q, &params).unwrap()));
    g.finish();
}

fn visual(c: &mut Criterion) {
    let n = notched_square_scene(128, 30f64.to_radians()).unwrap();
    let params = GapParams::default();
    let (a, b) = (&extract_contours(&n.gap)[0], &extract_contours(&n.fragment)[0]);
    c.bench_function("chamfer_gap_vs_fragment", |bn| bn.iter(|| chamfer(a, b, true).unwrap()));
    let mut g = c.benchmark_group("partial");
    g.sample_size(10);
    g.bench_function("align_gap_1deg", |bn| bn.iter(|| align_gap(&n.fragment, &n.gap, &params).unwrap()));
    g.finish();
}

criterion_group!(benches, tactile, matching, visual);
criterion_main!(benches);
