//! The sub-spray `P = (S^cc, TTM, Δ)` whose geodesics are the parallel
//! Jacobi fields `J(t) = (α + βt) c'(t)`.
//!
//! A `P`-geodesic is `γ(t) = (α + βt) c''(t) + β E_1(c'(t))`, i.e. in
//! coordinates `(x, ẋ, (α+βt)ẋ, (α+βt)ẍ + βẋ)`, and `Δ` is the set of its
//! tangent vectors. Since `Dπ_1(Δ)` is the image of `S`, `γ(0)` alone fixes
//! the whole geodesic.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{need_level, Error, Result};
use crate::geodesic::{integrate, ExitReason, Trajectory};
use crate::jacobi::{trajectory_distance, JacobiField, JacobiTag, RANK_RTOL};
use crate::jet::Jet;
use crate::jetspace::{euclid, is_slashed, kappa, max_abs_diff, JetPoint};
use crate::spray::{complete_lift, Spray};

/// Default absolute tolerance for membership in `Δ`.
pub const MEMBERSHIP_TOL: f64 = 1e-8;

/// Data of a parallel Jacobi field: `c'(0)`, `α`, `β` and a time window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParallelJacobi {
    pub c0: JetPoint,
    pub alpha: f64,
    pub beta: f64,
    pub domain: (f64, f64),
}

impl ParallelJacobi {
    /// `J = (α+βt) c'` sampled on the base geodesic, as a Jacobi field.
    pub fn jacobi_field(&self, s: &Spray, h: f64) -> Result<JacobiField> {
        check_c0(s, &self.c0)?;
        let base = integrate(s, &self.c0, self.domain, h)?;
        let mut pos = Vec::with_capacity(base.len());
        let mut vel = Vec::with_capacity(base.len());
        for k in 0..base.len() {
            let a = self.alpha + self.beta * base.times()[k];
            let (x, xd, xdd) = (
                &base.positions()[k],
                &base.velocities()[k],
                &base.accelerations()[k],
            );
            pos.push([x.clone(), lin(a, xd, 0.0, xd)].concat());
            vel.push([xd.clone(), lin(a, xdd, self.beta, xd)].concat());
        }
        let field = Trajectory::from_samples(
            &complete_lift(s),
            base.times().to_vec(),
            pos,
            vel,
            base.exit(),
        )?;
        Ok(JacobiField {
            tag: JacobiTag::Parallel,
            base,
            field,
        })
    }
}

/// A point of `Δ ⊂ TTTM` with the parameters it was recovered from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaPoint {
    pub coords: JetPoint,
    pub x: Vec<f64>,
    pub xdot: Vec<f64>,
    pub xddot: Vec<f64>,
    pub xdddot: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Membership {
    Accepted(DeltaPoint),
    Rejected {
        constraint: &'static str,
        residual: f64,
    },
}

impl Membership {
    pub fn accepted(&self) -> Option<&DeltaPoint> {
        match self {
            Membership::Accepted(d) => Some(d),
            Membership::Rejected { .. } => None,
        }
    }

    /// Membership residual; for rejections, that of the violated constraint.
    pub fn residual(&self) -> f64 {
        match self {
            Membership::Accepted(d) => d.residual,
            Membership::Rejected { residual, .. } => *residual,
        }
    }
}

fn check_base(s: &Spray) -> Result<()> {
    if s.level() != 0 {
        return Err(need_level("sub-spray", "0 (spray on M)", s.level()));
    }
    Ok(())
}

/// `ẍ = -2G(x, ẋ)` and its derivative along the geodesic, exact via one dual layer.
fn geodesic_jet(s: &Spray, x: &[f64], xd: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let xdd: Vec<f64> = s.coeffs_raw(x, xd).iter().map(|g| -2.0 * g).collect();
    let xj: Vec<Jet> = x
        .iter()
        .zip(xd)
        .map(|(a, b)| Jet::from_coeffs(&[*a, *b]))
        .collect();
    let yj: Vec<Jet> = xd
        .iter()
        .zip(&xdd)
        .map(|(a, b)| Jet::from_coeffs(&[*a, *b]))
        .collect();
    let xddd = s
        .coeffs_jet(&xj, &yj)
        .iter()
        .map(|g| -2.0 * g.coeff(1))
        .collect();
    (xdd, xddd)
}

fn lin(a: f64, u: &[f64], b: f64, v: &[f64]) -> Vec<f64> {
    u.iter().zip(v).map(|(x, y)| a * x + b * y).collect()
}

fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

fn check_c0(s: &Spray, c0: &JetPoint) -> Result<()> {
    check_base(s)?;
    if c0.level() != 1 || c0.dim() != s.dim() {
        return Err(need_level("sub-spray initial velocity", "1", c0.level()));
    }
    if !is_slashed(c0) {
        return Err(Error::Domain("initial velocity is zero".into()));
    }
    Ok(())
}

impl DeltaPoint {
    /// The point of `Δ` over `c'(0) = c0` with parameters `(α, β)`.
    pub fn from_params(s: &Spray, c0: &JetPoint, alpha: f64, beta: f64) -> Result<DeltaPoint> {
        check_c0(s, c0)?;
        let (x, xd) = (c0.block(0), c0.block(1));
        let (xdd, xddd) = geodesic_jet(s, x, xd);
        let big_y = lin(alpha, &xdd, beta, xd);
        let big_v = lin(alpha, &xddd, 2.0 * beta, &xdd);
        let blocks = [
            x.to_vec(),
            xd.to_vec(),
            xd.iter().map(|v| alpha * v).collect(),
            big_y.clone(),
            xd.to_vec(),
            xdd.clone(),
            big_y,
            big_v,
        ];
        Ok(DeltaPoint {
            coords: JetPoint::from_blocks(&blocks)?,
            x: x.to_vec(),
            xdot: xd.to_vec(),
            xddot: xdd,
            xdddot: xddd,
            alpha,
            beta,
            residual: 0.0,
        })
    }

    /// `c'(0)` as a point of `TM`.
    pub fn base_velocity(&self) -> JetPoint {
        JetPoint::from_blocks(&[&self.x[..], &self.xdot]).expect("stored shape")
    }
}

/// Tests `ξ ∈ Δ` and recovers `(c'(0), α, β)`. `α` is fitted first from
/// `X = αẋ`, then `β` from `Y = αẍ + βẋ`.
pub fn delta_membership(s: &Spray, xi: &JetPoint, tol: f64) -> Result<Membership> {
    check_base(s)?;
    if xi.level() != 3 {
        return Err(need_level("delta_membership", "3", xi.level()));
    }
    if !xi.is_finite() {
        return Err(Error::Domain(
            "delta_membership: non-finite coordinates".into(),
        ));
    }
    let reject = |constraint, residual| {
        Ok(Membership::Rejected {
            constraint,
            residual,
        })
    };
    if !is_slashed(xi) {
        return reject("slashed", euclid(xi.block(4)));
    }
    let x = xi.block(0);
    let y = xi.block(1);
    let mut worst: f64 = 0.0;
    let r = max_abs_diff(xi.block(4), y);
    if r > tol {
        return reject("u = y", r);
    }
    worst = worst.max(r);
    if !s.in_domain(x) {
        return Err(Error::Domain(format!(
            "delta_membership: {x:?} outside chart"
        )));
    }
    let (xdd, xddd) = geodesic_jet(s, x, y);
    let r = max_abs_diff(xi.block(5), &xdd);
    if r > tol {
        return reject("v = -2G(x, y)", r);
    }
    worst = worst.max(r);
    let yy = dot(y, y);
    let alpha = dot(xi.block(2), y) / yy;
    let r = max_abs_diff(xi.block(2), &lin(alpha, y, 0.0, y));
    if r > tol {
        return reject("X parallel to y", r);
    }
    worst = worst.max(r);
    let rest = lin(1.0, xi.block(3), -alpha, &xdd);
    let beta = dot(&rest, y) / yy;
    let big_y = lin(alpha, &xdd, beta, y);
    let r = max_abs_diff(xi.block(3), &big_y);
    if r > tol {
        return reject("Y = alpha v + beta y", r);
    }
    worst = worst.max(r);
    let r = max_abs_diff(xi.block(6), &big_y);
    if r > tol {
        return reject("U = Y", r);
    }
    worst = worst.max(r);
    let r = max_abs_diff(xi.block(7), &lin(alpha, &xddd, 2.0 * beta, &xdd));
    if r > tol {
        return reject("V = alpha x''' + 2 beta x''", r);
    }
    worst = worst.max(r);
    Ok(Membership::Accepted(DeltaPoint {
        coords: xi.clone(),
        x: x.to_vec(),
        xdot: y.to_vec(),
        xddot: xdd,
        xdddot: xddd,
        alpha,
        beta,
        residual: worst,
    }))
}

/// `α S(y) + β E_1(y) = (x, y, αy, -2αG + βy)`.
pub fn config_point(s: &Spray, y: &JetPoint, alpha: f64, beta: f64) -> Result<JetPoint> {
    check_c0(s, y)?;
    let g = s.coeffs(y)?;
    let yv = y.block(1);
    let tail: Vec<f64> = g
        .iter()
        .zip(yv)
        .map(|(gi, yi)| -2.0 * alpha * gi + beta * yi)
        .collect();
    JetPoint::from_blocks(&[
        y.block(0).to_vec(),
        yv.to_vec(),
        lin(alpha, yv, 0.0, yv),
        tail,
    ])
}

/// A geodesic in `P` with its base geodesic and self-checks.
#[derive(Debug, Clone)]
pub struct PGeodesic {
    /// `γ`, as a trajectory of `S^cc`.
    pub trajectory: Trajectory,
    /// `c`, as a trajectory of `S`.
    pub base: Trajectory,
    pub alpha: f64,
    pub beta: f64,
    /// Distance of `γ` from an `S^cc` integration started at `γ'(t_0)`.
    pub reintegration_deviation: f64,
    /// Largest `Δ`-membership residual of `γ'(t)` over the nodes.
    pub membership_residual: f64,
}

/// Assembles `γ(t) = (α+βt) c''(t) + β E_1(c'(t))` along a base trajectory.
pub fn assemble_p_curve(s: &Spray, base: &Trajectory, alpha: f64, beta: f64) -> Result<Trajectory> {
    let mut pos = Vec::with_capacity(base.len());
    let mut vel = Vec::with_capacity(base.len());
    for k in 0..base.len() {
        let t = base.times()[k];
        let a = alpha + beta * t;
        let (x, xd) = (&base.positions()[k], &base.velocities()[k]);
        let (xdd, xddd) = geodesic_jet(s, x, xd);
        let big_y = lin(a, &xdd, beta, xd);
        pos.push([x.clone(), xd.clone(), lin(a, xd, 0.0, xd), big_y.clone()].concat());
        vel.push(
            [
                xd.clone(),
                xdd.clone(),
                big_y,
                lin(a, &xddd, 2.0 * beta, &xdd),
            ]
            .concat(),
        );
    }
    let scc = complete_lift(&complete_lift(s));
    Trajectory::from_samples(&scc, base.times().to_vec(), pos, vel, base.exit())
}

/// Membership residuals of every tangent `γ'(t_k)`; `INFINITY` for rejected nodes.
pub fn membership_along(s: &Spray, tr: &Trajectory, tol: f64) -> Result<Vec<f64>> {
    (0..tr.len())
        .map(|k| {
            Ok(match delta_membership(s, &tr.state(k), tol)? {
                Membership::Accepted(d) => d.residual,
                Membership::Rejected { .. } => f64::INFINITY,
            })
        })
        .collect()
}

/// Builds the `P`-geodesic with data `(c0, α, β)` and verifies it.
pub fn p_geodesic(
    s: &Spray,
    c0: &JetPoint,
    alpha: f64,
    beta: f64,
    t_span: (f64, f64),
    h: f64,
) -> Result<PGeodesic> {
    check_c0(s, c0)?;
    let base = integrate(s, c0, t_span, h)?;
    let tr = assemble_p_curve(s, &base, alpha, beta)?;
    let residuals = membership_along(s, &tr, 1e-6)?;
    let membership_residual = residuals.iter().cloned().fold(0.0, f64::max);
    if !(membership_residual <= 1e-6) {
        return Err(Error::Construction(format!(
            "P-geodesic leaves Δ: membership residual {membership_residual:e}"
        )));
    }
    let scc = complete_lift(&complete_lift(s));
    let direct = integrate(&scc, &tr.state(0), (tr.start_time(), tr.end_time()), h)?;
    Ok(PGeodesic {
        reintegration_deviation: trajectory_distance(&tr, &direct),
        trajectory: tr,
        base,
        alpha,
        beta,
        membership_residual,
    })
}

/// `π_{TTM→M}` applied samplewise; the result must be a geodesic of `S`.
pub fn p_project(s: &Spray, gamma: &Trajectory) -> Result<Trajectory> {
    check_base(s)?;
    if gamma.level() != 2 {
        return Err(need_level("p_project", "2", gamma.level()));
    }
    let n = s.dim();
    let tr = Trajectory::from_samples(
        s,
        gamma.times().to_vec(),
        gamma.positions().iter().map(|x| x[..n].to_vec()).collect(),
        gamma.velocities().iter().map(|v| v[..n].to_vec()).collect(),
        gamma.exit(),
    )?;
    let res = crate::geodesic::residual(s, &tr);
    if !(res < tr.tolerance()) {
        return Err(Error::Inconsistent(format!(
            "projected curve is not a geodesic: residual {res:e}"
        )));
    }
    Ok(tr)
}

/// Sup-norm agreement of the three descriptions of one `P`-geodesic.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PConstructions {
    /// explicit formula vs `κ_2 ∘ J'`
    pub formula_vs_kappa: f64,
    /// explicit formula vs `S^cc` from `γ'(0)`
    pub formula_vs_direct: f64,
    /// `κ_2 ∘ J'` vs `S^cc` from `γ'(0)`
    pub kappa_vs_direct: f64,
}

impl PConstructions {
    pub fn max(&self) -> f64 {
        self.formula_vs_kappa
            .max(self.formula_vs_direct)
            .max(self.kappa_vs_direct)
    }
}

/// Compares the explicit formula, `κ_2 ∘ J'` for `J = (α+βt) c'`, and a
/// direct `S^cc` integration.
pub fn p_constructions(
    s: &Spray,
    c0: &JetPoint,
    alpha: f64,
    beta: f64,
    t_span: (f64, f64),
    h: f64,
) -> Result<PConstructions> {
    check_c0(s, c0)?;
    let base = integrate(s, c0, t_span, h)?;
    let formula = assemble_p_curve(s, &base, alpha, beta)?;

    let sc = complete_lift(s);
    let scc = complete_lift(&sc);
    let t0 = t_span.0;
    let a0 = alpha + beta * t0;
    let (x, v) = (c0.block(0), c0.block(1));
    let acc: Vec<f64> = s.coeffs(c0)?.iter().map(|g| -2.0 * g).collect();
    let init = [
        x.to_vec(),
        lin(a0, v, 0.0, v),
        v.to_vec(),
        lin(a0, &acc, beta, v),
    ]
    .concat();
    let jt = integrate(&sc, &JetPoint::new(2, s.dim(), init)?, t_span, h)?;
    let mut pos = Vec::with_capacity(jt.len());
    let mut vel = Vec::with_capacity(jt.len());
    for k in 0..jt.len() {
        let state = jt.state(k);
        let dstate = JetPoint::new(
            2,
            s.dim(),
            [jt.velocities()[k].clone(), jt.accelerations()[k].clone()].concat(),
        )?;
        pos.push(kappa(&state)?.into_coords());
        vel.push(kappa(&dstate)?.into_coords());
    }
    let via_kappa = Trajectory::from_samples(&scc, jt.times().to_vec(), pos, vel, jt.exit())?;
    let direct = integrate(&scc, &formula.state(0), t_span, h)?;
    Ok(PConstructions {
        formula_vs_kappa: trajectory_distance(&formula, &via_kappa),
        formula_vs_direct: trajectory_distance(&formula, &direct),
        kappa_vs_direct: trajectory_distance(&via_kappa, &direct),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct UniquenessReport {
    /// `α, β` from `X = αy` first, then `Y + 2αG = βy`.
    pub sequential: (f64, f64),
    /// `α, β` from one least-squares solve of both block equations.
    pub joint: (f64, f64),
    /// Least-squares residual: distance of `γ(0)` from `π_2(Δ)`.
    pub distance_to_config: f64,
    /// Sup-norm distance between the `P`-geodesics built from the two recoveries.
    pub recoveries_agree: f64,
    /// Distance of the recovered geodesic from `S^cc` integrated at its tangent.
    pub direct_deviation: f64,
}

/// Recovers `(α, β)` from `γ0 ∈ π_2(Δ)` in two orders and checks that the
/// resulting `P`-geodesics coincide.
pub fn p_uniqueness_check(
    s: &Spray,
    gamma0: &JetPoint,
    t_span: (f64, f64),
    h: f64,
    tol: f64,
) -> Result<UniquenessReport> {
    check_base(s)?;
    if gamma0.level() != 2 {
        return Err(need_level("p_uniqueness_check", "2", gamma0.level()));
    }
    let y = gamma0.lower()?;
    check_c0(s, &y)?;
    let yv = y.block(1);
    let g2: Vec<f64> = s.coeffs(&y)?.iter().map(|g| -2.0 * g).collect();
    let (bx, by) = (gamma0.block(2), gamma0.block(3));

    let yy = dot(yv, yv);
    let a1 = dot(bx, yv) / yy;
    let b1 = dot(&lin(1.0, by, -a1, &g2), yv) / yy;

    let n = s.dim();
    let a = DMatrix::from_fn(2 * n, 2, |i, j| match (i < n, j) {
        (true, 0) => yv[i],
        (true, _) => 0.0,
        (false, 0) => g2[i - n],
        (false, _) => yv[i - n],
    });
    let b = DVector::from_iterator(2 * n, bx.iter().chain(by).cloned());
    let sol = a
        .clone()
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::Domain(format!("least squares failed: {e}")))?;
    let (a2, b2) = (sol[0], sol[1]);
    let distance = (a * &sol - b).amax();
    if distance > tol {
        return Err(Error::Domain(format!(
            "point is not in the configuration space: distance {distance:e}"
        )));
    }
    let g1 = p_geodesic(s, &y, a1, b1, t_span, h)?;
    let g2 = p_geodesic(s, &y, a2, b2, t_span, h)?;
    Ok(UniquenessReport {
        sequential: (a1, b1),
        joint: (a2, b2),
        distance_to_config: distance,
        recoveries_agree: trajectory_distance(&g1.trajectory, &g2.trajectory),
        direct_deviation: g1.reintegration_deviation,
    })
}

/// A one-parameter family of `P`-geodesic data through `base`.
#[derive(Debug, Clone)]
pub struct PFamily {
    pub base: ParallelJacobi,
    /// Direction in `c'(0)`.
    pub dc0: Vec<f64>,
    pub dalpha: f64,
    pub dbeta: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FamilyResult {
    /// Sample times where the field's norm is below the zero threshold.
    pub zero_times: Vec<f64>,
    pub sup_norm: f64,
    pub min_norm: f64,
    /// A field vanishing twice without being trivial.
    pub counterexample: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct NoConjugateReport {
    pub families: Vec<FamilyResult>,
    /// Smallest singular value over `t` of `∂γ(t)/∂(c'(0), α, β)`,
    /// relative to the largest.
    pub min_relative_singular_value: f64,
}

impl NoConjugateReport {
    pub fn passes(&self) -> bool {
        self.families.iter().all(|f| !f.counterexample)
    }
}

/// `γ(t_k)` at the given times, from the explicit formula.
fn p_positions(
    s: &Spray,
    c0: &JetPoint,
    alpha: f64,
    beta: f64,
    span: (f64, f64),
    h: f64,
    times: &[f64],
) -> Result<Vec<Vec<f64>>> {
    let base = integrate(s, c0, span, h)?;
    if base.exit() != ExitReason::Completed {
        return Err(Error::Domain(format!(
            "base geodesic stopped: {:?}",
            base.exit()
        )));
    }
    let tr = assemble_p_curve(s, &base, alpha, beta)?;
    times
        .iter()
        .map(|&t| tr.at(t).map(|p| p.coords()[..4 * s.dim()].to_vec()))
        .collect()
}

/// Jacobi fields of `P` by central differences of families, and the
/// no-two-zeros check.
pub fn p_no_conjugate_check(
    s: &Spray,
    families: &[PFamily],
    t_checks: &[f64],
    h: f64,
    eps: f64,
) -> Result<NoConjugateReport> {
    check_base(s)?;
    const ZERO: f64 = 1e-8;
    const TRIVIAL: f64 = 1e-6;
    let results: Vec<Result<(FamilyResult, f64)>> = families
        .par_iter()
        .map(|f| {
            let b = &f.base;
            check_c0(s, &b.c0)?;
            let member = |sign: f64| -> Result<Vec<Vec<f64>>> {
                let c: Vec<f64> =
                    b.c0.coords()
                        .iter()
                        .zip(&f.dc0)
                        .map(|(x, d)| x + sign * eps * d)
                        .collect();
                let c0 = JetPoint::new(1, s.dim(), c)?;
                p_positions(
                    s,
                    &c0,
                    b.alpha + sign * eps * f.dalpha,
                    b.beta + sign * eps * f.dbeta,
                    b.domain,
                    h,
                    t_checks,
                )
            };
            let (plus, minus) = (member(1.0)?, member(-1.0)?);
            let norms: Vec<f64> = plus
                .iter()
                .zip(&minus)
                .map(|(p, m)| euclid(&lin(0.5 / eps, p, -0.5 / eps, m)))
                .collect();
            let zero_times: Vec<f64> = t_checks
                .iter()
                .zip(&norms)
                .filter(|(_, &v)| v < ZERO)
                .map(|(&t, _)| t)
                .collect();
            let sup_norm = norms.iter().cloned().fold(0.0, f64::max);
            let min_norm = norms.iter().cloned().fold(f64::INFINITY, f64::min);
            let counterexample = zero_times.len() >= 2 && sup_norm >= TRIVIAL;

            // injectivity of (c'(0), α, β) ↦ γ(t) at each check time
            let n = s.dim();
            let params = 2 * n + 2;
            let mut cols = Vec::with_capacity(params);
            let delta = 1e-6;
            for p in 0..params {
                let shifted = |sign: f64| -> Result<Vec<Vec<f64>>> {
                    let mut c = b.c0.coords().to_vec();
                    let (mut a, mut be) = (b.alpha, b.beta);
                    match p {
                        p if p < 2 * n => c[p] += sign * delta,
                        p if p == 2 * n => a += sign * delta,
                        _ => be += sign * delta,
                    }
                    p_positions(s, &JetPoint::new(1, n, c)?, a, be, b.domain, h, t_checks)
                };
                cols.push((shifted(1.0)?, shifted(-1.0)?));
            }
            let mut min_rel = f64::INFINITY;
            for k in 0..t_checks.len() {
                let jac = DMatrix::from_fn(4 * n, params, |i, p| {
                    (cols[p].0[k][i] - cols[p].1[k][i]) / (2.0 * delta)
                });
                let sv = jac.singular_values();
                min_rel = min_rel.min(sv.min() / sv.max());
            }
            Ok((
                FamilyResult {
                    zero_times,
                    sup_norm,
                    min_norm,
                    counterexample,
                },
                min_rel,
            ))
        })
        .collect();
    let mut fams = Vec::new();
    let mut min_rel = f64::INFINITY;
    for r in results {
        let (f, m) = r?;
        fams.push(f);
        min_rel = min_rel.min(m);
    }
    Ok(NoConjugateReport {
        families: fams,
        min_relative_singular_value: min_rel,
    })
}

/// One window of the completeness probe.
#[derive(Debug, Clone)]
pub struct CompletenessCase {
    pub label: String,
    pub spray: Spray,
    pub c0: JetPoint,
    pub alpha: f64,
    pub beta: f64,
    pub t_span: (f64, f64),
    pub h: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompletenessResult {
    pub label: String,
    /// Last valid time of the base geodesic, `None` if it covers the window.
    pub base_exit: Option<f64>,
    /// Same for the `P`-geodesic integrated directly with `S^cc`.
    pub p_exit: Option<f64>,
    pub agree: bool,
}

fn exit_time(e: ExitReason) -> Option<f64> {
    match e {
        ExitReason::Completed => None,
        ExitReason::LeftChart { t } | ExitReason::LeftSlashed { t } => Some(t),
    }
}

/// Base geodesic and `P`-geodesic stop at the same time (within one step)
/// or both cover the window.
pub fn p_completeness_probe(cases: &[CompletenessCase]) -> Result<Vec<CompletenessResult>> {
    cases
        .par_iter()
        .map(|c| {
            let base = integrate(&c.spray, &c.c0, c.t_span, c.h)?;
            let xi = DeltaPoint::from_params(&c.spray, &c.c0, c.alpha, c.beta)?;
            let scc = complete_lift(&complete_lift(&c.spray));
            let p = integrate(&scc, &xi.coords, c.t_span, c.h)?;
            let (be, pe) = (exit_time(base.exit()), exit_time(p.exit()));
            let agree = match (be, pe) {
                (None, None) => true,
                (Some(a), Some(b)) => (a - b).abs() <= c.h * (1.0 + 1e-9),
                _ => false,
            };
            Ok(CompletenessResult {
                label: c.label.clone(),
                base_exit: be,
                p_exit: pe,
                agree,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct RankResult {
    pub rank: usize,
    pub expected: usize,
    pub singular_values: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DimensionReport {
    /// `(y, α, β) ↦ Δ`.
    pub phase: Vec<RankResult>,
    /// `(y, α, β) ↦ π_2(Δ)`.
    pub config: Vec<RankResult>,
    /// `y ↦ S(y) ∈ Dπ_1(Δ)`.
    pub projected: Vec<RankResult>,
}

impl DimensionReport {
    pub fn passes(&self) -> bool {
        self.phase
            .iter()
            .chain(&self.config)
            .chain(&self.projected)
            .all(|r| r.rank == r.expected)
    }

    pub fn ranks(&self) -> Vec<(usize, usize, usize)> {
        (0..self.phase.len())
            .map(|k| {
                (
                    self.phase[k].rank,
                    self.config[k].rank,
                    self.projected[k].rank,
                )
            })
            .collect()
    }
}

fn numeric_rank(
    f: &dyn Fn(&[f64]) -> Result<Vec<f64>>,
    at: &[f64],
    expected: usize,
) -> Result<RankResult> {
    let delta = 1e-6;
    let mut cols = Vec::with_capacity(at.len());
    for j in 0..at.len() {
        let mut p = at.to_vec();
        p[j] += delta;
        let fp = f(&p)?;
        p[j] -= 2.0 * delta;
        let fm = f(&p)?;
        cols.push(lin(0.5 / delta, &fp, -0.5 / delta, &fm));
    }
    let m = cols[0].len();
    let jac = DMatrix::from_fn(m, at.len(), |i, j| cols[j][i]);
    let sv = jac.singular_values();
    let smax = sv.max();
    let mut svs: Vec<f64> = sv.iter().cloned().collect();
    svs.sort_by(|a, b| b.total_cmp(a));
    Ok(RankResult {
        rank: svs.iter().filter(|&&v| v > RANK_RTOL * smax).count(),
        expected,
        singular_values: svs,
    })
}

/// Numerical ranks of the parametrizations of `Δ`, `π_2(Δ)` and `Dπ_1(Δ)`
/// at the given `(c'(0), α, β)` samples. With `drop_beta` the `β` column is
/// left out, which must lose one rank in the first two maps.
pub fn dimension_probe(
    s: &Spray,
    samples: &[(JetPoint, f64, f64)],
    drop_beta: bool,
) -> Result<DimensionReport> {
    check_base(s)?;
    let n = s.dim();
    let params = if drop_beta { 2 * n + 1 } else { 2 * n + 2 };
    let unpack = |p: &[f64], beta0: f64| -> Result<(JetPoint, f64, f64)> {
        let beta = if drop_beta { beta0 } else { p[2 * n + 1] };
        Ok((JetPoint::new(1, n, p[..2 * n].to_vec())?, p[2 * n], beta))
    };
    let mut report = DimensionReport {
        phase: Vec::new(),
        config: Vec::new(),
        projected: Vec::new(),
    };
    for (y, a, b) in samples {
        let mut at = y.coords().to_vec();
        at.push(*a);
        if !drop_beta {
            at.push(*b);
        }
        let b0 = *b;
        let phase = |p: &[f64]| -> Result<Vec<f64>> {
            let (y, a, b) = unpack(p, b0)?;
            Ok(DeltaPoint::from_params(s, &y, a, b)?.coords.into_coords())
        };
        let config = |p: &[f64]| -> Result<Vec<f64>> {
            let (y, a, b) = unpack(p, b0)?;
            Ok(config_point(s, &y, a, b)?.into_coords())
        };
        let projected = |p: &[f64]| -> Result<Vec<f64>> {
            let y = JetPoint::new(1, n, p.to_vec())?;
            Ok(crate::spray::spray_value(s, &y)?.into_coords())
        };
        report.phase.push(numeric_rank(&phase, &at, params)?);
        report.config.push(numeric_rank(&config, &at, params)?);
        report
            .projected
            .push(numeric_rank(&projected, y.coords(), 2 * n)?);
    }
    Ok(report)
}

/// `J(Ct + t0)` for `J = (α+βt) c'`, written against the reparametrized
/// geodesic `c̃(t) = c(Ct + t0)`: parameters `((α + βt0)/C, β)`.
pub fn reparametrize_parallel(alpha: f64, beta: f64, c: f64, t0: f64) -> (f64, f64) {
    ((alpha + beta * t0) / c, beta)
}

/// Same field written against the unscaled velocity `c'(Ct + t0)`:
/// parameters `(α + βt0, Cβ)`.
pub fn reparametrize_parallel_unscaled(alpha: f64, beta: f64, c: f64, t0: f64) -> (f64, f64) {
    (alpha + beta * t0, c * beta)
}
