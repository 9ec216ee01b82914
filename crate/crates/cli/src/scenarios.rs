//! The five suites. Each returns its checks and the CSV files to write.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spraylift::geodesic::{flow_tangent_fd, residual};
use spraylift::jacobi::{
    new_from_old_suite, trajectory_distance, variation_init, variation_oracle, NewFromOldParams,
};
use spraylift::jetspace::{tangent_kappa, tangent_map};
use spraylift::subspray::{
    dimension_probe, membership_along, p_constructions, p_no_conjugate_check, p_project,
    p_uniqueness_check, PFamily, MEMBERSHIP_TOL,
};
use spraylift::{
    complete_lift, config_point, conjugate_search, delta_membership, dproject, flow,
    homogeneity_check, integrate, jacobi_from_initial, kappa, make_finsler_example, make_flat,
    make_sphere, p_geodesic, project, project_spray, CheckResult, DeltaPoint, JetPoint,
    ParallelJacobi, Result, Spray, RESIDUAL_TOL,
};

use crate::config::{Manifold, Scenario, ScenarioConfig};

/// Checks plus `(file name, contents)` pairs.
#[derive(Debug, Default)]
pub struct Output {
    pub checks: Vec<CheckResult>,
    pub files: Vec<(String, String)>,
}

impl Output {
    fn push(
        &mut self,
        check: &str,
        spray: &Spray,
        f: impl FnOnce(CheckResult) -> Result<CheckResult>,
    ) {
        let base = CheckResult::new(check, spray.tag());
        let r =
            f(base.clone()).unwrap_or_else(|e| base.param("error", e.to_string()).require(false));
        self.checks.push(r);
    }
}

pub fn spray_for(cfg: &ScenarioConfig) -> Spray {
    match cfg.manifold {
        Manifold::Flat => make_flat(cfg.dim),
        Manifold::Sphere => make_sphere(),
        Manifold::Finsler => make_finsler_example(&cfg.finsler_c),
    }
}

/// `c'(0)`: along the equator for the sphere, along `e_0` from the origin otherwise.
pub fn canonical_init(cfg: &ScenarioConfig) -> JetPoint {
    match cfg.manifold {
        Manifold::Sphere => JetPoint::new(1, 2, vec![FRAC_PI_2, 0.0, 0.0, 1.0]).unwrap(),
        _ => {
            let mut c = vec![0.0; 2 * cfg.dim];
            c[cfg.dim] = 1.0;
            JetPoint::new(1, cfg.dim, c).unwrap()
        }
    }
}

fn vector(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// Random unit-speed `c'(0)`. Sphere geodesics start on the equator at an
/// inclination below 0.9, so they stay clear of the poles.
fn random_init(cfg: &ScenarioConfig, rng: &mut ChaCha8Rng) -> JetPoint {
    match cfg.manifold {
        Manifold::Sphere => {
            let incl: f64 = rng.random_range(-0.9..0.9);
            let phi = rng.random_range(-PI..PI);
            JetPoint::new(1, 2, vec![FRAC_PI_2, phi, -incl.sin(), incl.cos()]).unwrap()
        }
        _ => loop {
            let x = vector(rng, cfg.dim);
            let v = vector(rng, cfg.dim);
            let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            if norm > 0.1 {
                let v: Vec<f64> = v.iter().map(|a| a / norm).collect();
                break JetPoint::new(1, cfg.dim, [x, v].concat()).unwrap();
            }
        },
    }
}

/// Random slashed point of `T^level`, inside the sphere chart when needed.
fn random_slashed(cfg: &ScenarioConfig, rng: &mut ChaCha8Rng, level: usize) -> JetPoint {
    loop {
        let mut p = JetPoint::new(level, cfg.dim, vector(rng, cfg.dim << level)).unwrap();
        if cfg.manifold == Manifold::Sphere {
            p.block_mut(0)[0] = rng.random_range(0.6..PI - 0.6);
        }
        let b = p.block(1 << (level - 1));
        if b.iter().map(|v| v * v).sum::<f64>().sqrt() > 0.1 {
            return p;
        }
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn run_scenario(cfg: &ScenarioConfig) -> Output {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let s = spray_for(cfg);
    let mut out = Output::default();
    match cfg.scenario {
        Scenario::ConjugateScan => conjugate_scan(cfg, &s, &mut out),
        Scenario::LiftVerify => lift_verify(cfg, &s, &mut rng, &mut out),
        Scenario::FlowCheck => flow_check(cfg, &s, &mut rng, &mut out),
        Scenario::SubsprayDemo => subspray_demo(cfg, &s, &mut out),
        Scenario::InvariantSuite => invariant_suite(cfg, &s, &mut rng, &mut out),
    }
    out
}

fn conjugate_scan(cfg: &ScenarioConfig, s: &Spray, out: &mut Output) {
    let init = canonical_init(cfg);
    let mut files = Vec::new();
    out.push("conjugate_scan", s, |r| {
        let scan = conjugate_search(s, &init, cfg.t_max, cfg.h)?;
        let times = scan.times();
        files.push(("det.csv".to_string(), scan.det_csv()));
        let geo = integrate(s, &init, (0.0, cfg.t_max), cfg.h)?;
        files.push(("geodesic.csv".to_string(), geo.to_csv()));
        let mut r = r
            .param("init", init.coords())
            .param("t_max", cfg.t_max)
            .param("conjugate_times", &times)
            .param("det_samples_csv_path", "det.csv")
            .param("exit", scan.exit);
        // closed forms: kπ on the sphere, none in flat space
        let expected: Option<Vec<f64>> = match cfg.manifold {
            Manifold::Sphere => Some(
                (1..)
                    .map(|k| k as f64 * PI)
                    .take_while(|&t| t < cfg.t_max)
                    .collect(),
            ),
            Manifold::Flat => Some(vec![]),
            Manifold::Finsler => None,
        };
        if let Some(want) = expected {
            r = r.require(want.len() == times.len());
            let err = times
                .iter()
                .zip(&want)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            r = r
                .param("expected_times", &want)
                .bound("max_time_error", err, cfg.h.max(1e-3));
        }
        Ok(r)
    });
    out.files.extend(files);
}

fn lift_verify(cfg: &ScenarioConfig, s: &Spray, rng: &mut ChaCha8Rng, out: &mut Output) {
    let tower = [
        s.clone(),
        complete_lift(s),
        complete_lift(&complete_lift(s)),
    ];
    for (k, sk) in tower.iter().enumerate() {
        out.push("homogeneity", sk, |r| {
            let mut worst = 0.0f64;
            for _ in 0..cfg.samples {
                let p = random_slashed(cfg, rng, k + 1);
                let lambda = rng.random_range(0.05..20.0);
                worst = worst.max(homogeneity_check(sk, &p, lambda)?);
            }
            Ok(r.param("samples", cfg.samples)
                .bound("max_residual", worst, 1e-9))
        });
    }
    out.push("recovery", s, |r| {
        let back = project_spray(&complete_lift(s))?;
        let mut worst = 0.0f64;
        for _ in 0..cfg.samples {
            let p = random_slashed(cfg, rng, 1);
            worst = worst.max(max_abs_diff(&back.coeffs(&p)?, &s.coeffs(&p)?));
        }
        Ok(r.param("samples", cfg.samples)
            .bound("max_error", worst, 1e-12))
    });
    out.push("double_lift_kappa", s, |r| {
        let n = cfg.dim;
        let scc = &tower[2];
        let (mut vv, mut vc, mut cc) = (0.0f64, 0.0f64, 0.0f64);
        for _ in 0..cfg.samples {
            let p = random_slashed(cfg, rng, 3);
            let q = tangent_kappa(&p)?;
            let (a, b) = (scc.coeffs(&p)?, scc.coeffs(&q)?);
            vv = vv.max(max_abs_diff(&a[..n], &b[..n]));
            vc = vc.max(max_abs_diff(&a[2 * n..3 * n], &b[n..2 * n]));
            cc = cc.max(max_abs_diff(&a[3 * n..], &b[3 * n..]));
        }
        Ok(r.bound("vv", vv, 1e-12)
            .bound("vc_cv", vc, 1e-12)
            .bound("cc", cc, 1e-12))
    });
}

fn flow_check(cfg: &ScenarioConfig, s: &Spray, rng: &mut ChaCha8Rng, out: &mut Output) {
    let init = random_init(cfg, rng);
    let w = vector(rng, 2 * cfg.dim);
    let mut files = Vec::new();
    out.push("geodesic_residual", s, |r| {
        let tr = integrate(s, &init, (0.0, cfg.t_max), cfg.h)?;
        files.push(("geodesic.csv".to_string(), tr.to_csv()));
        let res = residual(s, &tr);
        Ok(r.param("init", init.coords())
            .param("exit", tr.exit())
            .bound("residual", res, RESIDUAL_TOL))
    });
    let p = JetPoint::new(
        2,
        cfg.dim,
        [init.block(0), &w[..cfg.dim], init.block(1), &w[cfg.dim..]].concat(),
    )
    .unwrap();
    out.push("lifted_flow", s, |mut r| {
        let sc = complete_lift(s);
        for t in [0.1, 0.5, 1.0].into_iter().filter(|&t| t <= cfg.t_max) {
            let a = flow(&sc, &p, t, cfg.h)?;
            let b = flow_tangent_fd(s, &p, t, cfg.eps_fd, cfg.h)?;
            let scale = 1.0 + a.coords().iter().fold(0.0f64, |m, v| m.max(v.abs()));
            r = r.bound(
                &format!("relative_error_t{t}"),
                a.max_abs_diff(&b) / scale,
                1e-6,
            );
        }
        Ok(r.param("eps_fd", cfg.eps_fd))
    });
    out.push("jacobi_equivalence", s, |r| {
        let lifted = jacobi_from_initial(s, &variation_init(&init, &w)?, (0.0, cfg.t_max), cfg.h)?;
        let oracle = variation_oracle(s, &init, &w, cfg.eps_var, (0.0, cfg.t_max), cfg.h)?;
        files.push(("jacobi.csv".to_string(), lifted.field.to_csv()));
        Ok(r.param("w", &w).param("eps_var", cfg.eps_var).bound(
            "sup_deviation",
            lifted.distance(&oracle),
            1e-5,
        ))
    });
    out.files.extend(files);
}

fn subspray_demo(cfg: &ScenarioConfig, s: &Spray, out: &mut Output) {
    let c0 = canonical_init(cfg);
    let (a, b) = (cfg.alpha, cfg.beta);
    out.push("delta_point", s, |r| {
        let xi = DeltaPoint::from_params(s, &c0, a, b)?;
        let m = delta_membership(s, &xi.coords, MEMBERSHIP_TOL)?;
        let rec = m.accepted().map(|d| (d.alpha, d.beta));
        let err = rec.map_or(f64::INFINITY, |(ra, rb)| (ra - a).abs().max((rb - b).abs()));
        Ok(r.param("init", c0.coords())
            .param("delta_point", xi.coords.coords())
            .param("recovered", rec)
            .bound("membership", m.residual(), MEMBERSHIP_TOL)
            .bound("recovery_error", err, 1e-9))
    });
    let mut files = Vec::new();
    out.push("p_geodesic", s, |r| {
        let g = p_geodesic(s, &c0, a, b, (0.0, cfg.t_max), cfg.h)?;
        files.push(("p_geodesic.csv".to_string(), g.trajectory.to_csv()));
        let along = membership_along(s, &g.trajectory, 1e-6)?
            .into_iter()
            .fold(0.0, f64::max);
        let c = p_project(s, &g.trajectory)?;
        Ok(r.bound("membership_along", along, 1e-6)
            .bound("reintegration_deviation", g.reintegration_deviation, 1e-6)
            .bound(
                "projection_deviation",
                trajectory_distance(&c, &g.base),
                1e-8,
            ))
    });
    out.push("p_constructions", s, |r| {
        let c = p_constructions(s, &c0, a, b, (0.0, cfg.t_max), cfg.h)?;
        Ok(r.bound("formula_vs_kappa", c.formula_vs_kappa, 1e-6)
            .bound("formula_vs_direct", c.formula_vs_direct, 1e-6)
            .bound("kappa_vs_direct", c.kappa_vs_direct, 1e-6))
    });
    out.push("p_uniqueness", s, |r| {
        let g0 = config_point(s, &c0, a, b)?;
        let u = p_uniqueness_check(s, &g0, (0.0, cfg.t_max), cfg.h, 1e-8)?;
        Ok(r.param("config_point", g0.coords())
            .param("sequential", u.sequential)
            .param("joint", u.joint)
            .bound("recoveries_agree", u.recoveries_agree, 1e-8)
            .bound("direct_deviation", u.direct_deviation, 1e-6))
    });
    out.files.extend(files);
}

/// First of the κ / projection identities violated at `p`, if any.
fn structural_violation(p: &JetPoint) -> Result<Option<&'static str>> {
    if kappa(&kappa(p)?)? != *p {
        return Ok(Some("kappa^2 = id"));
    }
    if p.level() >= 2 {
        if dproject(p)? != project(&kappa(p)?)? {
            return Ok(Some("Dpi = pi kappa"));
        }
        if project(&dproject(p)?)? != project(&project(p)?)? {
            return Ok(Some("pi Dpi = pi pi"));
        }
        if tangent_kappa(p)? != tangent_map(p, kappa)? {
            return Ok(Some("tangent_kappa = Dkappa"));
        }
    }
    Ok(None)
}

fn invariant_suite(cfg: &ScenarioConfig, s: &Spray, rng: &mut ChaCha8Rng, out: &mut Output) {
    out.push("structural_identities", s, |r| {
        let mut violations = Vec::new();
        for level in 1..=3 {
            for _ in 0..cfg.samples {
                let p = JetPoint::new(level, cfg.dim, vector(rng, cfg.dim << level))?;
                if let Some(id) = structural_violation(&p)? {
                    violations.push(format!("{id} at level {level}"));
                }
            }
        }
        Ok(r.param("samples", 3 * cfg.samples)
            .require(violations.is_empty())
            .param("violations", violations))
    });
    let c0 = canonical_init(cfg);
    out.push("new_from_old", s, |mut r| {
        let j = p_geodesic(s, &c0, cfg.alpha, cfg.beta, (0.0, cfg.t_max), cfg.h)?.trajectory;
        for item in new_from_old_suite(s, &j, NewFromOldParams::default())? {
            match item.deviation {
                Some(d) => r = r.bound(item.item, d, 1e-6),
                None => r = r.param(item.item, item.skipped),
            }
        }
        Ok(r)
    });
    out.push("dimension_probe", s, |r| {
        let samples: Vec<_> = (0..cfg.samples.min(20))
            .map(|_| {
                (
                    random_init(cfg, rng),
                    rng.random_range(-2.0..2.0),
                    rng.random_range(-2.0..2.0),
                )
            })
            .collect();
        let d = dimension_probe(s, &samples, false)?;
        let n = cfg.dim;
        Ok(r.param("expected", (2 * n + 2, 2 * n + 2, 2 * n))
            .param("ranks", d.ranks())
            .require(d.passes()))
    });
    out.push("p_no_conjugate", s, |r| {
        let families: Vec<PFamily> = (0..5)
            .map(|_| PFamily {
                base: ParallelJacobi {
                    c0: random_init(cfg, rng),
                    alpha: rng.random_range(-1.0..1.0),
                    beta: rng.random_range(-1.0..1.0),
                    domain: (0.0, cfg.t_max),
                },
                dc0: vector(rng, 2 * cfg.dim),
                dalpha: rng.random_range(-1.0..1.0),
                dbeta: rng.random_range(-1.0..1.0),
            })
            .collect();
        let steps = (cfg.t_max / 0.05).ceil().max(1.0) as usize;
        let checks: Vec<f64> = (0..=steps)
            .map(|k| cfg.t_max * k as f64 / steps as f64)
            .collect();
        let rep = p_no_conjugate_check(s, &families, &checks, cfg.h, 1e-5)?;
        let counter = rep.families.iter().filter(|f| f.counterexample).count();
        Ok(r.param("families", families.len())
            .param("counterexamples", counter)
            .param(
                "min_relative_singular_value",
                rep.min_relative_singular_value,
            )
            .require(rep.passes()))
    });
}
