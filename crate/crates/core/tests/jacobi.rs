mod common;

use std::f64::consts::{FRAC_PI_2, PI};

use common::{builtin, max_abs_diff, rng, sphere_init, vector};
use spraylift::geodesic::residual;
use spraylift::jacobi::{
    lift_conjugate_check, new_from_old_suite, trajectory_distance, variation_init,
    variation_oracle, NewFromOldParams,
};
use spraylift::jetspace::{dfiber_combine, fiber_combine};
use spraylift::spray::iterated_lift;
use spraylift::{
    complete_lift, conjugate_search, decompose_scc, integrate, jacobi_from_initial, make_flat,
    make_sphere, Error, JetPoint,
};

fn equator() -> JetPoint {
    JetPoint::new(1, 2, vec![FRAC_PI_2, 0., 0., 1.]).unwrap()
}

/// `J(0) = 0`, `J'(0) = e_θ` along the equator.
fn normal_init() -> JetPoint {
    JetPoint::new(2, 2, vec![FRAC_PI_2, 0., 0., 0., 0., 1., 1., 0.]).unwrap()
}

#[test]
fn flat_fields_are_affine() {
    let j = jacobi_from_initial(
        &make_flat(1),
        &JetPoint::new(2, 1, vec![0., 0., 1., 1.]).unwrap(),
        (0.0, 2.0),
        1e-2,
    )
    .unwrap();
    for (k, &t) in j.field.times().iter().enumerate() {
        assert!(max_abs_diff(&j.field.positions()[k], &[t, t]) < 1e-13);
    }
    assert!(j.projection_defect() < 1e-10);
}

#[test]
fn sphere_normal_field_has_norm_sin() {
    let j = jacobi_from_initial(&make_sphere(), &normal_init(), (0.0, 2.0 * PI), 1e-3).unwrap();
    for k in 0..j.field.len() {
        let t = j.field.times()[k];
        let p = &j.field.positions()[k];
        let g = (p[2] * p[2] + p[0].sin().powi(2) * p[3] * p[3]).sqrt();
        assert!((g - t.sin().abs()).abs() < 1e-6);
    }
    assert!(j.projection_defect() < 1e-10);
    assert!(residual(&complete_lift(&make_sphere()), &j.field) < j.field.tolerance());
}

/// `γ''(0)` as initial data gives `J = γ'`.
#[test]
fn tangent_lift_is_a_jacobi_field() {
    let mut g = rng(21);
    for (name, s) in builtin() {
        let c0 = sphere_init(&mut g);
        let acc: Vec<f64> = s.coeffs(&c0).unwrap().iter().map(|v| -2.0 * v).collect();
        let init =
            JetPoint::new(2, 2, [c0.block(0), c0.block(1), c0.block(1), &acc].concat()).unwrap();
        let j = jacobi_from_initial(&s, &init, (0.0, 1.0), 1e-3).unwrap();
        let base = integrate(&s, &c0, (0.0, 1.0), 1e-3).unwrap();
        for k in 0..base.len() {
            let want = [&base.positions()[k][..], &base.velocities()[k]].concat();
            assert!(
                max_abs_diff(&j.field.positions()[k], &want) < 1e-9,
                "{name}"
            );
        }
    }
}

#[test]
fn lifted_geodesics_match_variations() {
    let mut g = rng(22);
    for (name, s) in builtin() {
        for _ in 0..20 {
            let c0 = sphere_init(&mut g);
            let w = vector(&mut g, 4, 1.0);
            let lifted =
                jacobi_from_initial(&s, &variation_init(&c0, &w).unwrap(), (0.0, 1.0), 1e-3)
                    .unwrap();
            let oracle = variation_oracle(&s, &c0, &w, 1e-4, (0.0, 1.0), 1e-3).unwrap();
            let d = lifted.distance(&oracle);
            assert!(d <= 1e-5, "{name}: {d:e}");
            assert!(trajectory_distance(&lifted.base, &oracle.base) < 1e-12);
        }
    }
}

#[test]
fn central_difference_error_is_quadratic() {
    // exact field for w = e_θ along the equator: J = (sin t, 0), J' = (cos t, 0)
    let s = make_sphere();
    let w = [0.0, 0.0, 1.0, 0.0];
    let errors: Vec<f64> = [4e-4, 2e-4, 1e-4]
        .iter()
        .map(|&eps| {
            let o = variation_oracle(&s, &equator(), &w, eps, (0.0, 1.0), 1e-3).unwrap();
            (0..o.field.len())
                .map(|k| {
                    let t = o.field.times()[k];
                    let p = &o.field.positions()[k][2..];
                    let v = &o.field.velocities()[k][2..];
                    max_abs_diff(p, &[t.sin(), 0.0]).max(max_abs_diff(v, &[t.cos(), 0.0]))
                })
                .fold(0.0, f64::max)
        })
        .collect();
    for pair in errors.windows(2) {
        let ratio = pair[0] / pair[1];
        assert!((1.0..=16.0).contains(&ratio), "{errors:?}");
    }
}

#[test]
fn jacobi_fields_are_linear_in_initial_data() {
    let mut g = rng(23);
    for (name, s) in builtin() {
        let c0 = sphere_init(&mut g);
        let (w1, w2) = (vector(&mut g, 4, 1.0), vector(&mut g, 4, 1.0));
        let (i1, i2) = (
            variation_init(&c0, &w1).unwrap(),
            variation_init(&c0, &w2).unwrap(),
        );
        let (a, b) = (0.7, -1.9);
        let i3 = dfiber_combine(&i1, a, &i2, b).unwrap();
        let run = |p: &JetPoint| jacobi_from_initial(&s, p, (0.0, 1.0), 1e-3).unwrap();
        let (j1, j2, j3) = (run(&i1), run(&i2), run(&i3));
        for k in 0..j1.field.len() {
            let pos = |j: &spraylift::JacobiField| {
                JetPoint::new(1, 2, j.field.positions()[k].clone()).unwrap()
            };
            let vel = |j: &spraylift::JacobiField| {
                JetPoint::new(1, 2, j.field.velocities()[k].clone()).unwrap()
            };
            let p = fiber_combine(&pos(&j1), a, &pos(&j2), b).unwrap();
            let v = fiber_combine(&vel(&j1), a, &vel(&j2), b).unwrap();
            assert!(p.max_abs_diff(&pos(&j3)) < 1e-9, "{name}");
            assert!(v.max_abs_diff(&vel(&j3)) < 1e-9, "{name}");
        }
    }
}

#[test]
fn conjugate_times() {
    let flat = make_flat(2);
    let p = JetPoint::new(1, 2, vec![0.3, -0.2, 1.0, 0.5]).unwrap();
    assert!(conjugate_search(&flat, &p, 10.0, 1e-2)
        .unwrap()
        .conjugate
        .is_empty());

    let s = make_sphere();
    let scan = conjugate_search(&s, &equator(), 3.5, 1e-3).unwrap();
    assert_eq!(scan.times().len(), 1);
    assert!((scan.times()[0] - PI).abs() < 1e-3);

    let scan = conjugate_search(&s, &equator(), 2.0 * PI + 0.5, 1e-3).unwrap();
    let t = scan.times();
    assert_eq!(t.len(), 2, "{t:?}");
    assert!((t[0] - PI).abs() < 1e-3 && (t[1] - 2.0 * PI).abs() < 1e-3);
    assert!(scan.det_csv().starts_with("t,det\n"));

    // independent of the starting point on the equator
    for phi in [0.7, -2.1, 3.0] {
        let q = JetPoint::new(1, 2, vec![FRAC_PI_2, phi, 0., 1.]).unwrap();
        let other = conjugate_search(&s, &q, 3.5, 1e-3).unwrap();
        assert!((other.times()[0] - scan.times()[0]).abs() < 1e-6);
    }
}

#[test]
fn lifted_flat_spray_has_no_conjugate_points() {
    let sc = complete_lift(&make_flat(1));
    let p = JetPoint::new(2, 1, vec![0.0, 0.3, 1.0, -0.4]).unwrap();
    let scan = conjugate_search(&sc, &p, 10.0, 1e-2).unwrap();
    assert!(scan.conjugate.is_empty());
}

#[test]
fn lifts_of_a_conjugate_pair() {
    let s = make_sphere();
    let j = jacobi_from_initial(&s, &normal_init(), (0.0, PI), 1e-3).unwrap();
    let report = lift_conjugate_check(&s, &j, 1e-6, 1e-5).unwrap();
    for c in [report.liouville, report.tangent] {
        assert!(c.fiber_start < 1e-5 && c.fiber_end < 1e-5, "{c:?}");
        assert!(c.interior_max >= 0.5, "{c:?}");
        assert!(c.deviation < 1e-6, "{c:?}");
    }
    assert!(report.tangent_fd_deviation < 1e-6, "{report:?}");
    assert!(report.passes(1e-5, 0.5, 1e-6));

    let zero = JetPoint::new(2, 1, vec![0.0, 0.0, 1.0, 0.0]).unwrap();
    let jz = jacobi_from_initial(&make_flat(1), &zero, (0.0, 1.0), 1e-2).unwrap();
    assert!(matches!(
        lift_conjugate_check(&make_flat(1), &jz, 1e-6, 1e-5),
        Err(Error::Domain(_))
    ));
}

#[test]
fn scc_geodesics_carry_two_jacobi_fields() {
    let flat = make_flat(1);
    let scc = iterated_lift(&flat, 2);
    let p = JetPoint::new(3, 1, vec![0., 0., 0., 0., 1., 1., 1., 1.]).unwrap();
    let tr = integrate(&scc, &p, (0.0, 1.0), 1e-2).unwrap();
    let d = decompose_scc(&flat, &tr).unwrap();
    for (k, &t) in tr.times().iter().enumerate() {
        assert!((d.c.positions()[k][0] - t).abs() < 1e-13);
        assert!(max_abs_diff(&d.j1.positions()[k], &[t, t]) < 1e-13);
        assert!(max_abs_diff(&d.j2.positions()[k], &[t, t]) < 1e-13);
    }
    assert!(d.y_block_chart_dependent);

    let s = make_sphere();
    let scc = iterated_lift(&s, 2);
    let mut g = rng(24);
    let c0 = sphere_init(&mut g);
    let (w1, w2) = (vector(&mut g, 4, 1.0), vector(&mut g, 4, 1.0));
    let y = [w1[0], w1[1]];
    let x_dot = [w2[0], w2[1]];
    let init = [
        c0.block(0),
        &y,
        &x_dot,
        &vector(&mut g, 2, 1.0),
        c0.block(1),
        &w1[2..],
        &w2[2..],
        &vector(&mut g, 2, 1.0),
    ]
    .concat();
    let tr = integrate(&scc, &JetPoint::new(3, 2, init).unwrap(), (0.0, 1.0), 1e-3).unwrap();
    let d = decompose_scc(&s, &tr).unwrap();
    let o1 = variation_oracle(&s, &c0, &w1, 1e-4, (0.0, 1.0), 1e-3).unwrap();
    let o2 = variation_oracle(&s, &c0, &w2, 1e-4, (0.0, 1.0), 1e-3).unwrap();
    assert!(trajectory_distance(&d.j1, &o1.field) < 1e-5);
    assert!(trajectory_distance(&d.j2, &o2.field) < 1e-5);

    // J2 ≡ 0: (x, Y) is a Jacobi field
    let init = [
        c0.block(0),
        &y,
        &[0.0, 0.0],
        &[0.3, -0.2],
        c0.block(1),
        &w1[2..],
        &[0.0, 0.0],
        &[0.1, 0.4],
    ]
    .concat();
    let tr = integrate(&scc, &JetPoint::new(3, 2, init).unwrap(), (0.0, 1.0), 1e-3).unwrap();
    let d = decompose_scc(&s, &tr).unwrap();
    assert!(d.j2_fiber_sup() < 1e-12);
    let xy = d.xy_curve(&s, &tr).unwrap();
    assert!(residual(&complete_lift(&s), &xy) < xy.tolerance());

    // a trajectory of the wrong spray is rejected
    let wrong = integrate(
        &iterated_lift(&flat, 2),
        &JetPoint::new(3, 1, vec![0., 0., 0., 0., 1., 1., 1., 1.]).unwrap(),
        (0.0, 1.0),
        1e-2,
    )
    .unwrap();
    assert!(decompose_scc(&make_flat(1), &wrong.perturbed(50, 1e-2)).is_err());
}

#[test]
fn new_jacobi_fields_from_old() {
    let flat = make_flat(1);
    let line = integrate(
        &flat,
        &JetPoint::new(1, 1, vec![0., 1.]).unwrap(),
        (0.0, 1.0),
        1e-2,
    )
    .unwrap();
    let res = new_from_old_suite(&flat, &line, NewFromOldParams::default()).unwrap();
    let vi = res.iter().find(|r| r.item == "vi").unwrap();
    assert_eq!(vi.deviation, Some(0.0));
    assert!(res
        .iter()
        .find(|r| r.item == "v")
        .unwrap()
        .skipped
        .is_some());

    let s = make_sphere();
    let eq = integrate(&s, &equator(), (0.0, 1.0), 1e-3).unwrap();
    let res = new_from_old_suite(&s, &eq, NewFromOldParams::default()).unwrap();
    let vii = res.iter().find(|r| r.item == "vii").unwrap();
    assert!(vii.deviation.unwrap() < 1e-6, "{vii:?}");

    let lifted = iterated_lift(&flat, 2);
    let p = JetPoint::new(3, 1, vec![0., 0.5, -1., 0.2, 1., 0.3, 0.7, -0.4]).unwrap();
    let j = integrate(&lifted, &p, (0.0, 1.0), 1e-2).unwrap();
    let res = new_from_old_suite(&flat, &j, NewFromOldParams::default()).unwrap();
    assert_eq!(res.len(), 8);
    for r in &res {
        assert!(r.deviation.unwrap() < 1e-12, "{r:?}");
    }
}
