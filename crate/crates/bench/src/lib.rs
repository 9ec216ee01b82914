//! Fixtures shared by the criterion benches.

use spraylift::{complete_lift, make_sphere, JetPoint, Spray};

/// Sphere spray and its first two complete lifts.
pub fn sphere_tower() -> [Spray; 3] {
    let s = make_sphere();
    let sc = complete_lift(&s);
    let scc = complete_lift(&sc);
    [s, sc, scc]
}

/// An arbitrary slashed point of `T^{level}` over the sphere chart.
pub fn sphere_point(level: usize) -> JetPoint {
    let n = 2usize;
    let mut c: Vec<f64> = (0..(n << level))
        .map(|i| 0.1 + 0.05 * ((i * 7) % 11) as f64)
        .collect();
    c[0] = 1.2;
    JetPoint::new(level, n, c).expect("valid shape")
}
