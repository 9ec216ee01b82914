use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use spraylift::{integrate, kappa, make_sphere, p_geodesic, JetPoint};
use spraylift_bench::{sphere_point, sphere_tower};

fn coefficients(c: &mut Criterion) {
    let tower = sphere_tower();
    for (k, s) in tower.iter().enumerate() {
        let p = sphere_point(k + 1);
        c.bench_function(&format!("sphere lift {k} coefficients"), |b| {
            b.iter(|| s.coeffs(black_box(&p)).unwrap())
        });
    }
}

fn involution(c: &mut Criterion) {
    for level in [2, 4, 6] {
        let p = sphere_point(level);
        c.bench_function(&format!("kappa level {level}"), |b| {
            b.iter(|| kappa(black_box(&p)).unwrap())
        });
    }
}

fn integration(c: &mut Criterion) {
    let tower = sphere_tower();
    for (k, s) in tower.iter().enumerate() {
        let p = sphere_point(k + 1);
        c.bench_function(&format!("rk4 sphere lift {k}, 100 steps"), |b| {
            b.iter(|| integrate(s, black_box(&p), (0.0, 0.1), 1e-3).unwrap())
        });
    }
    let s = make_sphere();
    let c0 = JetPoint::new(1, 2, vec![1.2, 0.0, 0.1, 1.0]).unwrap();
    c.bench_function("p-geodesic, 100 steps", |b| {
        b.iter(|| p_geodesic(&s, black_box(&c0), 0.5, -0.3, (0.0, 0.1), 1e-3).unwrap())
    });
}

criterion_group!(benches, coefficients, involution, integration);
criterion_main!(benches);
