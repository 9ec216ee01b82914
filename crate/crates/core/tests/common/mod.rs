//! Sampling helpers shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spraylift::jetspace::{
    dproject, kappa, project, tangent_kappa, tangent_map, ChartTransition, FnField,
};
use spraylift::{
    make_finsler_example, make_flat, make_sphere, Jet, JetPoint, Result, Scalar, Spray,
};

pub const FINSLER_C: [f64; 2] = [0.3, 0.6];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..hi)
}

pub fn vector(rng: &mut ChaCha8Rng, len: usize, scale: f64) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(-scale..scale)).collect()
}

/// Random point of `T^level R^dim` with coordinates in `[-scale, scale]`.
pub fn point(rng: &mut ChaCha8Rng, level: usize, dim: usize, scale: f64) -> JetPoint {
    JetPoint::new(level, dim, vector(rng, dim << level, scale)).unwrap()
}

/// Random slashed point: the block read by the slashed test has norm ≥ 0.1.
pub fn slashed(rng: &mut ChaCha8Rng, level: usize, dim: usize, scale: f64) -> JetPoint {
    loop {
        let p = point(rng, level, dim, scale);
        let b = p.block(1 << (level - 1));
        if b.iter().map(|v| v * v).sum::<f64>().sqrt() > 0.1 {
            return p;
        }
    }
}

/// Slashed point over the sphere chart, base colatitude well inside `(0, π)`.
pub fn sphere_slashed(rng: &mut ChaCha8Rng, level: usize) -> JetPoint {
    let mut p = slashed(rng, level, 2, 1.0);
    p.block_mut(0)[0] = uniform(rng, 0.6, PI - 0.6);
    p.block_mut(0)[1] = uniform(rng, -PI, PI);
    p
}

/// Slashed point adapted to a built-in spray's chart.
pub fn slashed_for(rng: &mut ChaCha8Rng, s: &Spray, level: usize) -> JetPoint {
    if s.tag().contains("sphere") {
        sphere_slashed(rng, level)
    } else {
        slashed(rng, level, s.dim(), 1.0)
    }
}

/// Unit-speed initial velocity near the equator whose great circle stays
/// at least 0.4 away from the poles.
pub fn sphere_init(rng: &mut ChaCha8Rng) -> JetPoint {
    let incl = uniform(rng, -0.9, 0.9);
    let phi = uniform(rng, -PI, PI);
    // start on the equator heading at angle `incl` to it
    JetPoint::new(1, 2, vec![PI / 2.0, phi, -incl.sin(), incl.cos()]).unwrap()
}

/// Flat, sphere and Finsler sprays on `M`.
pub fn builtin() -> Vec<(&'static str, Spray)> {
    vec![
        ("flat", make_flat(2)),
        ("sphere", make_sphere()),
        ("finsler", make_finsler_example(&FINSLER_C)),
    ]
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dd(p: &JetPoint) -> Result<JetPoint> {
    tangent_map(p, dproject)
}

fn dkappa(p: &JetPoint) -> Result<JetPoint> {
    tangent_map(p, kappa)
}

/// First identity between κ and the projections that fails at a point of
/// `T^{level}M`, if any.
pub fn structural_violation(level: usize, p: &JetPoint) -> Option<&'static str> {
    let k = |q: &JetPoint| kappa(q).unwrap();
    let pr = |q: &JetPoint| project(q).unwrap();
    let dp = |q: &JetPoint| dproject(q).unwrap();
    if k(&k(p)) != *p {
        return Some("kappa^2 = id");
    }
    if level >= 2 {
        // p ∈ T^{r+1}M with r = level - 1
        if pr(&dkappa(p).unwrap()) != k(&pr(p)) {
            return Some("pi Dkappa = kappa pi");
        }
        if dp(p) != pr(&k(p)) {
            return Some("Dpi = pi kappa");
        }
        if pr(&dp(p)) != pr(&pr(p)) {
            return Some("pi Dpi = pi pi");
        }
        if pr(&pr(&k(p))) != pr(&pr(p)) {
            return Some("pi pi kappa = pi pi");
        }
        if tangent_kappa(p).unwrap() != dkappa(p).unwrap() {
            return Some("tangent_kappa = Dkappa");
        }
    }
    if level >= 3 {
        // p ∈ T^{r+2}M with r = level - 2
        if dp(&pr(p)) != pr(&dd(p).unwrap()) {
            return Some("Dpi pi = pi DDpi");
        }
        if dd(&k(p)).unwrap() != k(&dd(p).unwrap()) {
            return Some("DDpi kappa = kappa DDpi");
        }
    }
    None
}

pub fn f1<T: Scalar>(c: &[T]) -> T {
    c[0].sin() * c[3].clone() * c[3].clone() + c[1].clone() * c[2].clone()
}

pub fn f2<T: Scalar>(c: &[T]) -> T {
    (c[0].clone() * c[3].clone() * 0.3).exp() * (c[2].clone() * c[2].clone() + 1.0).recip()
}

pub fn f3<T: Scalar>(c: &[T]) -> T {
    (c[0].clone() * c[0].clone() + c[2].clone() * c[3].clone() * c[3].clone() + 2.0).ln()
        * c[1].cos()
}

/// Three nonlinear functions on `TR²`.
pub fn fields() -> Vec<FnField> {
    vec![
        FnField::new(1, 2, |c: &[Jet]| f1(c)),
        FnField::new(1, 2, |c: &[Jet]| f2(c)),
        FnField::new(1, 2, |c: &[Jet]| f3(c)),
    ]
}

pub fn shear_transitions() -> Vec<ChartTransition> {
    vec![
        ChartTransition::quadratic_shear(0.7),
        ChartTransition::quadratic_shear(-1.3).inverted(),
    ]
}

/// `f ∘ T t⁻¹` for `f` on `TR²`, as a field in the new chart.
pub fn pulled(f: FnField, t: ChartTransition) -> FnField {
    FnField::new(1, 2, move |c: &[Jet]| {
        let d = c.iter().map(Jet::depth).max().unwrap();
        let packed: Vec<Jet> = (0..2).map(|i| Jet::extend(&c[i], &c[2 + i], d)).collect();
        let back = t.map().inverse(&packed);
        let (lo, hi): (Vec<Jet>, Vec<Jet>) = back.iter().map(|j| j.split(d)).unzip();
        let coords: Vec<Jet> = lo.into_iter().chain(hi).collect();
        spraylift::ScalarField::eval(&f, &coords)
    })
}
