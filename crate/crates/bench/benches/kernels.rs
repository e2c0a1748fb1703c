use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use owwe::laguerre::forward_transform;
use owwe::numkernels::{direct_convolve, fft_convolve, BandedMatrix};
use owwe::schemes1d::{solve_1d, Mesh1D, SchemeSpec};
use owwe::solver2d::{
    filter_phi_fields, Method2D, Solver2D, Solver2DConfig, VelocityModel2D, WavefieldState2D,
};
use owwe::splines::SplineFilter;
use owwe::{LaguerreParams, SourceWavelet};
use std::hint::black_box;

fn noise(n: usize, seed: u64) -> Vec<f64> {
    let mut s = seed;
    (0..n)
        .map(|_| {
            s = s
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        })
        .collect()
}

fn banded(c: &mut Criterion) {
    let mut g = c.benchmark_group("banded");
    for bw in [6usize, 18] {
        let n = 2000;
        let mut m = BandedMatrix::zeros(n, bw, bw);
        let vals = noise(n * (2 * bw + 1), 1);
        let mut it = vals.iter();
        for i in 0..n {
            for j in i.saturating_sub(bw)..(i + bw + 1).min(n) {
                m.set(i, j, *it.next().unwrap());
            }
            m.add_at(i, i, 4.0 * bw as f64);
        }
        let rhs = noise(n, 2);
        g.bench_with_input(BenchmarkId::new("factor", bw), &m, |b, m| {
            b.iter(|| m.factor().unwrap())
        });
        let lu = m.factor().unwrap();
        g.bench_with_input(BenchmarkId::new("solve", bw), &rhs, |b, rhs| {
            b.iter(|| lu.solve(black_box(rhs)))
        });
    }
    g.finish();
}

fn convolution(c: &mut Criterion) {
    let mut g = c.benchmark_group("convolution");
    for m in [512usize, 2500] {
        let (a, b) = (noise(m, 3), noise(m, 4));
        g.bench_function(BenchmarkId::new("fft", m), |bn| {
            bn.iter(|| fft_convolve(black_box(&a), black_box(&b)))
        });
        g.bench_function(BenchmarkId::new("direct", m), |bn| {
            bn.iter(|| direct_convolve(black_box(&a), black_box(&b)))
        });
    }
    g.finish();
}

fn filtration(c: &mut Criterion) {
    let mut f = SplineFilter::new(2001, 5).unwrap();
    let mut v = noise(2001, 5);
    c.bench_function("spline_filter_quintic_2001", |b| {
        b.iter(|| f.apply_in_place(black_box(&mut v)))
    });
}

fn march_1d(c: &mut Criterion) {
    let params = LaguerreParams::new(600.0, 500).unwrap();
    let (t, v) = SourceWavelet::default().sample(1e-4, 2.0);
    let fbar = forward_transform(&t, &v, params).unwrap();
    let mesh = Mesh1D::with_intervals(7500.0, 1000).unwrap();
    let mut g = c.benchmark_group("march_1d_500_terms");
    g.sample_size(10);
    for spec in [
        SchemeSpec::am5_i5(),
        SchemeSpec::richardson_cn(),
        SchemeSpec::crank_nicolson(),
    ] {
        g.bench_function(spec.name(), |b| {
            b.iter(|| solve_1d(spec, mesh, &fbar, 3000.0).unwrap())
        });
    }
    g.finish();
}

/// One depth step at nx = 512 with a filled history.
fn depth_step(c: &mut Criterion) {
    let (nx, nz) = (512, 21);
    let model = VelocityModel2D::constant(nx, nz, 10.0, 2.5, 250.0).unwrap();
    let mut g = c.benchmark_group("depth_step_nx512");
    for method in [Method2D::AdamsMoulton, Method2D::PredictorCorrector] {
        let cfg = Solver2DConfig {
            method,
            ..Default::default()
        };
        let solver = Solver2D::new(model.clone(), 60.0, cfg).unwrap();
        let mut st = solver.new_state();
        for (v, r) in st.u.iter_mut().zip(noise(nx * nz, 6)) {
            *v = r;
        }
        for (v, r) in st.theta_rhs.iter_mut().zip(noise(nx * nz, 7)) {
            *v = r;
        }
        g.bench_function(method.name(), |b| {
            b.iter(|| match method {
                Method2D::AdamsMoulton => solver.am_downward_step(&mut st, 10).unwrap(),
                Method2D::PredictorCorrector => solver.pc_downward_step(&mut st, 10).unwrap(),
            })
        });
    }
    g.finish();
    let nz = 401;
    let mut st = WavefieldState2D::new(nx, nz);
    let mut f = SplineFilter::new(nz, 5).unwrap();
    c.bench_function("filter_phi_fields_512x401", |b| {
        b.iter(|| filter_phi_fields(&mut st, &mut f, true).unwrap())
    });
}

criterion_group!(
    benches,
    banded,
    convolution,
    filtration,
    march_1d,
    depth_step
);
criterion_main!(benches);
