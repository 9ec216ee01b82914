mod common;

use common::{
    fields, max_abs_diff, pulled, rng, shear_transitions, slashed, structural_violation, vector,
};
use proptest::prelude::*;
use spraylift::jetspace::{
    clift_fn, dfiber_combine, dproject, eval_field, fiber_combine, is_slashed, kappa, liouville,
    project, pullback, pushforward, tangent_kappa, ChartTransition, CompleteLift, FnField,
    JetPoint, VerticalLift,
};
use spraylift::{Jet, Scalar};

#[test]
fn structural_identities_exhaustive() {
    let mut g = rng(1);
    for level in 1..=5 {
        for dim in 1..=3 {
            for _ in 0..40 {
                assert_eq!(
                    structural_violation(level, &common::point(&mut g, level, dim, 10.0)),
                    None
                );
            }
        }
    }
}

proptest! {
    #[test]
    fn structural_identities(level in 1usize..=5, dim in 1usize..=3, seed in any::<u64>()) {
        prop_assert_eq!(structural_violation(level, &common::point(&mut rng(seed), level, dim, 10.0)), None);
    }

    #[test]
    fn slashed_bundle_maps(level in 2usize..=4, dim in 1usize..=3, seed in any::<u64>()) {
        let mut g = rng(seed);
        let mut p = common::point(&mut g, level, dim, 1.0);
        if seed % 3 == 0 {
            p.block_mut(1 << (level - 1)).iter_mut().for_each(|v| *v = 0.0);
        }
        let slash = is_slashed(&p);
        // κ_{r+1}(T^{r+1}M∖0) = T(T^rM∖0)
        prop_assert_eq!(is_slashed(&project(&kappa(&p).unwrap()).unwrap()), slash);
        prop_assert_eq!(is_slashed(&dproject(&p).unwrap()), slash);
        prop_assert_eq!(is_slashed(&tangent_kappa(&p).unwrap()), slash);
    }

    #[test]
    fn liouville_section(level in 1usize..=4, dim in 1usize..=3, seed in any::<u64>()) {
        let p = common::point(&mut rng(seed), level, dim, 3.0);
        let e = liouville(&p).unwrap();
        prop_assert_eq!(project(&e).unwrap(), p.clone());
        // Dπ_r ∘ κ_{r+1} ∘ E_r = id
        prop_assert_eq!(dproject(&kappa(&e).unwrap()).unwrap(), p);
    }
}

/// `c(t,s)` into `T^{level-2}R^dim`: each coordinate a random trigonometric
/// polynomial, differentiated by evaluating on `(t0 + ε_t, s0 + ε_s)`.
#[test]
fn kappa_exchanges_mixed_partials() {
    let mut g = rng(7);
    for level in 2..=4 {
        let dim = 2;
        let comps = dim << (level - 2);
        let coefs: Vec<Vec<f64>> = (0..comps).map(|_| vector(&mut g, 5, 1.0)).collect();
        let (t0, s0) = (0.3, -0.7);
        // depth-2 jets: bit 0 = t, bit 1 = s
        let t = Jet::from_coeffs(&[t0, 1.0, 0.0, 0.0]);
        let s = Jet::from_coeffs(&[s0, 0.0, 1.0, 0.0]);
        let partials: Vec<Jet> = coefs
            .iter()
            .map(|a| {
                (t.clone() * a[0]).sin() * (s.clone() * a[1] + a[2]).cos()
                    + t.clone() * s.clone() * a[3]
                    + (s.clone() * a[4]).exp()
            })
            .collect();
        // ∂_s ∂_t c: bit level-1 = s, bit level-2 = t, low bits = block of c
        let assemble = |outer: usize, inner: usize| -> JetPoint {
            let low = 1usize << (level - 2);
            let mut coords = vec![0.0; dim << level];
            for mask in 0..(1usize << level) {
                let m = mask & (low - 1);
                let bi = (mask >> (level - 2)) & 1;
                let bo = (mask >> (level - 1)) & 1;
                let jm = (bi << inner) | (bo << outer);
                for i in 0..dim {
                    coords[mask * dim + i] = partials[m * dim + i].coeff(jm);
                }
            }
            JetPoint::new(level, dim, coords).unwrap()
        };
        let st = assemble(1, 0);
        let ts = assemble(0, 1);
        assert_eq!(kappa(&st).unwrap(), ts);
    }
}

fn small_slashed(seed: u64, level: usize) -> JetPoint {
    // keeps ln argument of f3 positive: |y| ≤ 0.5 in every block
    slashed(&mut rng(seed), level, 2, 0.5)
}

proptest! {
    #[test]
    fn lift_commutation(seed in any::<u64>()) {
        let p = small_slashed(seed, 3);
        let q = tangent_kappa(&p).unwrap();
        for f in fields() {
            let vv = VerticalLift(VerticalLift(f.clone()));
            let vc = CompleteLift(VerticalLift(f.clone()));
            let cv = VerticalLift(CompleteLift(f.clone()));
            let cc = CompleteLift(CompleteLift(f.clone()));
            let at = |g: &dyn spraylift::ScalarField, x: &JetPoint| eval_field(g, x).unwrap();
            prop_assert!((at(&vv, &p) - at(&vv, &q)).abs() <= 1e-12);
            prop_assert!((at(&vc, &p) - at(&cv, &q)).abs() <= 1e-12);
            prop_assert!((at(&cc, &p) - at(&cc, &q)).abs() <= 1e-12);
        }
    }
}

/// Closed forms for `f(x,y) = sin(x) y²` on `TR`.
#[test]
fn lifts_match_local_formulas() {
    let f = FnField::new(1, 1, |c: &[Jet]| c[0].sin() * c[1].clone() * c[1].clone());
    let mut g = rng(11);
    for _ in 0..50 {
        let p = slashed(&mut g, 2, 1, 2.0);
        let [x, y, xx, yy]: [f64; 4] = p.coords().try_into().unwrap();
        let fc = x.cos() * xx * xx * y + 2.0 * x.sin() * xx * yy;
        assert!((clift_fn(&f, &p).unwrap() - fc).abs() < 1e-12);

        let q = slashed(&mut g, 3, 1, 2.0);
        let [x, y, xx, yy, u, v, uu, vv]: [f64; 8] = q.coords().try_into().unwrap();
        let cc = eval_field(&CompleteLift(CompleteLift(f.clone())), &q).unwrap();
        let want = (x.cos() * u * u * yy + 2.0 * x.sin() * u * vv)
            + (-x.sin() * u * u * y + 2.0 * x.cos() * u * v) * xx
            + (2.0 * x.cos() * u * y + 2.0 * x.sin() * v) * uu;
        assert!((cc - want).abs() < 1e-11, "{cc} vs {want}");
        let vc = eval_field(&CompleteLift(VerticalLift(f.clone())), &q).unwrap();
        let want = x.cos() * u * u * xx + 2.0 * x.sin() * u * uu;
        assert!((vc - want).abs() < 1e-12);
        let cv = eval_field(&VerticalLift(CompleteLift(f.clone())), &q).unwrap();
        let want = x.cos() * u * u * y + 2.0 * x.sin() * u * v;
        assert!((cv - want).abs() < 1e-12);
    }
}

#[test]
fn pushforward_second_order_rule() {
    let mut g = rng(3);
    for t in shear_transitions() {
        for _ in 0..100 {
            let p = common::point(&mut g, 2, 2, 2.0);
            let q = pushforward(&t, &p).unwrap();
            let (x, y, xx, yy) = (p.block(0), p.block(1), p.block(2), p.block(3));
            let jac = t.map().jacobian(x);
            let hes = t.map().hessian(x);
            let n = 2;
            let lin = |v: &[f64]| -> Vec<f64> {
                (0..n)
                    .map(|i| (0..n).map(|a| jac[i * n + a] * v[a]).sum())
                    .collect()
            };
            let mut want_y = lin(yy);
            for (i, w) in want_y.iter_mut().enumerate() {
                for a in 0..n {
                    for b in 0..n {
                        *w += hes[(i * n + a) * n + b] * y[a] * xx[b];
                    }
                }
            }
            assert!(max_abs_diff(q.block(0), &t.forward_point(x)) <= 1e-12);
            assert!(max_abs_diff(q.block(1), &lin(y)) <= 1e-12);
            assert!(max_abs_diff(q.block(2), &lin(xx)) <= 1e-12);
            assert!(max_abs_diff(q.block(3), &want_y) <= 1e-12);
            assert!(pullback(&t, &q).unwrap().max_abs_diff(&p) <= 1e-12);
        }
    }
}

#[test]
fn pushforward_example() {
    let t = ChartTransition::quadratic_shear(1.0);
    let p = JetPoint::new(1, 2, vec![1., 1., 0., 1.]).unwrap();
    assert_eq!(pushforward(&t, &p).unwrap().coords(), &[2., 1., 2., 1.]);
}

proptest! {
    #[test]
    fn pushforward_is_fiber_linear(seed in any::<u64>(), a in -2.0f64..2.0, c in -2.0f64..2.0) {
        let mut g = rng(seed);
        for t in shear_transitions() {
            for level in 1..=2 {
                let p = common::point(&mut g, level, 2, 2.0);
                let mut q = common::point(&mut g, level, 2, 2.0);
                let top = 1 << (level - 1);
                for b in 0..p.block_count() {
                    if b & top == 0 {
                        q.block_mut(b).copy_from_slice(p.block(b));
                    }
                }
                let lhs = pushforward(&t, &fiber_combine(&p, a, &q, c).unwrap()).unwrap();
                let (pp, pq) = (pushforward(&t, &p).unwrap(), pushforward(&t, &q).unwrap());
                let rhs = fiber_combine(&pp, a, &pq, c).unwrap();
                prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12);
            }
            // second structure on TTM: fibers of Dπ_0 share (x, X)
            let p = common::point(&mut g, 2, 2, 2.0);
            let mut q = common::point(&mut g, 2, 2, 2.0);
            q.block_mut(0).copy_from_slice(p.block(0));
            q.block_mut(2).copy_from_slice(p.block(2));
            let lhs = pushforward(&t, &dfiber_combine(&p, a, &q, c).unwrap()).unwrap();
            let (pp, pq) = (pushforward(&t, &p).unwrap(), pushforward(&t, &q).unwrap());
            let rhs = dfiber_combine(&pp, a, &pq, c).unwrap();
            prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12);
        }
    }
}

#[test]
fn complete_lift_is_natural() {
    let mut g = rng(5);
    for t in shear_transitions() {
        for f in fields() {
            let ft = pulled(f.clone(), t.clone());
            for _ in 0..30 {
                let p = slashed(&mut g, 2, 2, 0.5);
                let lhs = clift_fn(&ft, &pushforward(&t, &p).unwrap()).unwrap();
                let rhs = clift_fn(&f, &p).unwrap();
                assert!((lhs - rhs).abs() <= 1e-9, "{lhs} vs {rhs}");
            }
        }
    }
}
