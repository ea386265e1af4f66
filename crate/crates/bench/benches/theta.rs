use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use indeftheta::gerf::{self, NegDefFrame};
use indeftheta::theta::{self, JacobiPoint};
use indeftheta::*;
use num_complex::Complex64;

fn smoothed_signs(c: &mut Criterion) {
    let sp = QuadSpace::from_i64(&[vec![-2, 1, 0], vec![1, -4, 1], vec![0, 1, -2]]).unwrap();
    let cfg = QuadratureConfig::default();
    let walls = [vec![1, 0, 0], vec![0, 1, 1], vec![1, -1, 2]];
    let v = [0.3, -0.2, 0.15];
    let mut g = c.benchmark_group("sgn_hat");
    for k in 1..=3 {
        let frame = NegDefFrame::from_i64(&sp, &walls[..k]).unwrap();
        g.bench_with_input(BenchmarkId::new("decomposed", k), &frame, |b, f| {
            b.iter(|| gerf::sgn_hat(f, black_box(&v), &cfg).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("orthant", k), &frame, |b, f| {
            b.iter(|| gerf::sgn_hat_orthant(f, black_box(&v), &cfg).unwrap())
        });
    }
    g.finish();

    let p = Problem::example("running").unwrap();
    let sm = p.smoother().unwrap();
    c.bench_function("cone_smoother/running", |b| b.iter(|| sm.eval(black_box(&[0.4, 0.9, 0.1]))));
}

fn series(c: &mut Criterion) {
    let mut g = c.benchmark_group("theta");
    g.sample_size(10);
    let p = Problem::example("running").unwrap();
    let pt = p.point().unwrap().clone();
    for r in [8usize, 16] {
        g.bench_with_input(BenchmarkId::new("sign/running", r), &r, |b, &r| {
            b.iter(|| theta::theta_sign(&p.lattice, &p.walls, &p.poly, &pt, &TruncationPolicy::fixed(r)).unwrap())
        });
    }
    let al = Problem::example("appell-lerch").unwrap();
    let sm = al.smoother().unwrap();
    let pt = al.point().unwrap().clone();
    g.bench_function("hat/appell-lerch/16", |b| {
        b.iter(|| theta::theta_hat_smoother(&al.lattice, &al.walls, &sm, &pt, &TruncationPolicy::fixed(16)).unwrap())
    });
    let ctl = Problem::example("control-posdef").unwrap();
    let pt = JacobiPoint::new(Complex64::new(0.13, 0.87), vec![Complex64::new(0.21, 0.17)]).unwrap();
    g.bench_function("cone/control/32", |b| {
        b.iter(|| theta::theta_cone(&ctl.lattice, &ctl.walls, &pt, &TruncationPolicy::fixed(32)).unwrap())
    });
    g.finish();
}

fn weil(c: &mut Criterion) {
    let l = Lattice::from_i64(&[vec![2, 1, 0], vec![1, -2, 1], vec![0, 1, 6]]).unwrap();
    c.bench_function("build_weil/det-32", |b| b.iter(|| build_weil(black_box(&l))));
}

criterion_group!(benches, smoothed_signs, series, weil);
criterion_main!(benches);
