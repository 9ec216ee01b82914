//! Jacobi fields as geodesics of the complete lift.
//!
//! A Jacobi field along a geodesic `γ` of `S` is a geodesic `J` of `S^c`
//! with `π ∘ J = γ`. Everything here is built on that: integration of `S^c`,
//! a finite-difference variation oracle, the decomposition of `S^cc`
//! geodesics, conjugate-point search and the constructions that produce new
//! Jacobi fields from old ones.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{need_level, Error, Result};
use crate::geodesic::{integrate, residual, ExitReason, Trajectory};
use crate::jetspace::{dproject_coords, euclid, is_slashed, kappa, max_abs_diff, JetPoint};
use crate::spray::{complete_lift, iterated_lift, Spray};

/// Bracket width at which conjugate-time bisection stops.
pub const CONJUGATE_BRACKET: f64 = 1e-6;
/// Relative singular-value threshold for rank deficiency.
pub const RANK_RTOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum JacobiTag {
    LiftedGeodesic,
    VariationOracle,
    Parallel,
    Constructed,
}

/// A Jacobi field `J` together with its base geodesic `γ = π ∘ J`.
#[derive(Debug, Clone)]
pub struct JacobiField {
    pub tag: JacobiTag,
    pub base: Trajectory,
    /// `J'` as a trajectory of the complete lift.
    pub field: Trajectory,
}

fn lower<T: Clone>(v: &[T]) -> Vec<T> {
    v[..v.len() / 2].to_vec()
}

fn upper<T: Clone>(v: &[T]) -> Vec<T> {
    v[v.len() / 2..].to_vec()
}

/// Applies a linear coordinate map to every stored position and velocity.
fn map_samples(
    tr: &Trajectory,
    f: impl Fn(&[f64]) -> Vec<f64>,
) -> (Vec<f64>, Vec<Vec<f64>>, Vec<Vec<f64>>) {
    (
        tr.times().to_vec(),
        tr.positions().iter().map(|x| f(x)).collect(),
        tr.velocities().iter().map(|v| f(v)).collect(),
    )
}

impl JacobiField {
    /// The field's fiber part at node `k`.
    pub fn fiber(&self, k: usize) -> Vec<f64> {
        upper(&self.field.positions()[k])
    }

    pub fn fiber_norm(&self, k: usize) -> f64 {
        euclid(&self.fiber(k))
    }

    pub fn sup_fiber_norm(&self) -> f64 {
        (0..self.field.len())
            .map(|k| self.fiber_norm(k))
            .fold(0.0, f64::max)
    }

    /// `J(t)` by dense output.
    pub fn at(&self, t: f64) -> Result<JetPoint> {
        self.field.at(t)?.lower()
    }

    /// `max_t |π(J(t)) − γ(t)|` over the stored nodes.
    pub fn projection_defect(&self) -> f64 {
        self.field
            .positions()
            .iter()
            .zip(self.base.positions())
            .map(|(j, g)| max_abs_diff(&lower(j), g))
            .fold(0.0, f64::max)
    }

    /// Sup-norm distance between the two fields' positions and velocities
    /// over the common nodes.
    pub fn distance(&self, other: &JacobiField) -> f64 {
        trajectory_distance(&self.field, &other.field)
    }
}

/// Sup-norm difference of positions and velocities, node by node.
pub fn trajectory_distance(a: &Trajectory, b: &Trajectory) -> f64 {
    let m = a.len().min(b.len());
    (0..m)
        .map(|k| {
            max_abs_diff(&a.positions()[k], &b.positions()[k])
                .max(max_abs_diff(&a.velocities()[k], &b.velocities()[k]))
        })
        .fold(0.0, f64::max)
}

fn project_trajectory(s: &Spray, tr: &Trajectory) -> Result<Trajectory> {
    let (t, p, v) = map_samples(tr, lower);
    Trajectory::from_samples(s, t, p, v, tr.exit())
}

/// Integrates `S^c` from `init ∈ T^{r+2}M∖0`.
pub fn jacobi_from_initial(
    s: &Spray,
    init: &JetPoint,
    t_span: (f64, f64),
    h: f64,
) -> Result<JacobiField> {
    let sc = complete_lift(s);
    let field = integrate(&sc, init, t_span, h)?;
    let base = project_trajectory(s, &field)?;
    Ok(JacobiField {
        tag: JacobiTag::LiftedGeodesic,
        base,
        field,
    })
}

/// Initial condition of `S^c` for the variation of `γ'(0) = c0` in the
/// direction `w ∈ T_{c0}(T^{r+1}M)`, i.e. `κ(c0, w)`.
pub fn variation_init(c0: &JetPoint, w: &[f64]) -> Result<JetPoint> {
    kappa(&JetPoint::join(
        c0,
        &JetPoint::new(c0.level(), c0.dim(), w.to_vec())?,
    )?)
}

/// Central difference `∂_s γ_s` of the geodesics with `γ_s'(0) = c0 + s w`.
pub fn variation_oracle(
    s: &Spray,
    c0: &JetPoint,
    w: &[f64],
    eps: f64,
    t_span: (f64, f64),
    h: f64,
) -> Result<JacobiField> {
    if w.len() != c0.coords().len() {
        return Err(Error::DimensionMismatch {
            expected: c0.coords().len(),
            got: w.len(),
        });
    }
    let shifted = |sign: f64| -> Result<JetPoint> {
        let c: Vec<f64> = c0
            .coords()
            .iter()
            .zip(w)
            .map(|(a, b)| a + sign * eps * b)
            .collect();
        let p = JetPoint::new(c0.level(), c0.dim(), c)?;
        if !is_slashed(&p) {
            return Err(Error::Domain(
                "perturbed initial condition is not slashed".into(),
            ));
        }
        Ok(p)
    };
    let (pp, pm) = (shifted(1.0)?, shifted(-1.0)?);
    let trs: Vec<Result<Trajectory>> = [c0.clone(), pp, pm]
        .par_iter()
        .map(|p| integrate(s, p, t_span, h))
        .collect();
    let mut trs = trs.into_iter();
    let (base, plus, minus) = (
        trs.next().unwrap()?,
        trs.next().unwrap()?,
        trs.next().unwrap()?,
    );
    let m = base.len().min(plus.len()).min(minus.len());
    let diff = |a: &[f64], b: &[f64]| -> Vec<f64> {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y) / (2.0 * eps))
            .collect()
    };
    let mut pos = Vec::with_capacity(m);
    let mut vel = Vec::with_capacity(m);
    for k in 0..m {
        let mut p = base.positions()[k].clone();
        p.extend(diff(&plus.positions()[k], &minus.positions()[k]));
        let mut v = base.velocities()[k].clone();
        v.extend(diff(&plus.velocities()[k], &minus.velocities()[k]));
        pos.push(p);
        vel.push(v);
    }
    let exit = if m == base.len() {
        base.exit()
    } else {
        plus.exit().min_time(minus.exit())
    };
    let field = Trajectory::from_samples(
        &complete_lift(s),
        base.times()[..m].to_vec(),
        pos,
        vel,
        exit,
    )?;
    Ok(JacobiField {
        tag: JacobiTag::VariationOracle,
        base,
        field,
    })
}

trait ExitMin {
    fn min_time(self, other: ExitReason) -> ExitReason;
}

impl ExitMin for ExitReason {
    fn min_time(self, other: ExitReason) -> ExitReason {
        let t = |e: ExitReason| match e {
            ExitReason::Completed => f64::INFINITY,
            ExitReason::LeftSlashed { t } | ExitReason::LeftChart { t } => t,
        };
        if t(other) < t(self) {
            other
        } else {
            self
        }
    }
}

/// The three curves carried by a geodesic `J = (x, y, X, Y)` of `S^cc`.
#[derive(Debug, Clone)]
pub struct SccDecomposition {
    /// `c = (x)`, a geodesic of `S`.
    pub c: Trajectory,
    /// `J1 = (x, y)`, a Jacobi field along `c`.
    pub j1: Trajectory,
    /// `J2 = (x, X)`, a Jacobi field along `c`.
    pub j2: Trajectory,
    /// The `Y` block. Its values depend on the chart.
    pub y_block: Vec<Vec<f64>>,
    pub y_block_chart_dependent: bool,
    pub residuals: [f64; 3],
}

/// Splits an `S^cc` trajectory into `(c, J1, J2, Y)` and re-checks each
/// piece against its own geodesic equation.
pub fn decompose_scc(s: &Spray, tr: &Trajectory) -> Result<SccDecomposition> {
    let r = s.level();
    if tr.level() != r + 2 || tr.dim() != s.dim() {
        return Err(need_level(
            "decompose_scc",
            &format!("{}", r + 2),
            tr.level(),
        ));
    }
    let sc = complete_lift(s);
    let n = s.dim();
    let quarter = |v: &[f64]| v[..v.len() / 4].to_vec();
    let (t, p, v) = map_samples(tr, quarter);
    let c = Trajectory::from_samples(s, t, p, v, tr.exit())?;
    let (t, p, v) = map_samples(tr, lower);
    let j1 = Trajectory::from_samples(&sc, t, p, v, tr.exit())?;
    let (t, p, v) = map_samples(tr, |x| dproject_coords(r + 2, n, x));
    let j2 = Trajectory::from_samples(&sc, t, p, v, tr.exit())?;
    let y_block = tr
        .positions()
        .iter()
        .map(|x| x[3 * x.len() / 4..].to_vec())
        .collect();
    let residuals = [residual(s, &c), residual(&sc, &j1), residual(&sc, &j2)];
    let tol = tr.tolerance();
    if let Some(i) = residuals.iter().position(|&res| !(res < tol)) {
        return Err(Error::Inconsistent(format!(
            "{} fails its geodesic equation: residual {:e}",
            ["c", "J1", "J2"][i],
            residuals[i]
        )));
    }
    Ok(SccDecomposition {
        c,
        j1,
        j2,
        y_block,
        y_block_chart_dependent: true,
        residuals,
    })
}

impl SccDecomposition {
    /// Sup norm of the fiber part of `J2` over the stored nodes.
    pub fn j2_fiber_sup(&self) -> f64 {
        self.j2
            .positions()
            .iter()
            .chain(self.j2.velocities())
            .map(|x| euclid(&upper(x)))
            .fold(0.0, f64::max)
    }

    /// The curve `(x, Y)`, a Jacobi field along `c` when `J2 ≡ 0`.
    pub fn xy_curve(&self, s: &Spray, tr: &Trajectory) -> Result<Trajectory> {
        let pick = |v: &[f64]| {
            let q = v.len() / 4;
            let mut out = v[..q].to_vec();
            out.extend_from_slice(&v[3 * q..]);
            out
        };
        let (t, p, v) = map_samples(tr, pick);
        Trajectory::from_samples(&complete_lift(s), t, p, v, tr.exit())
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConjugatePoint {
    pub t: f64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConjugateScan {
    pub conjugate: Vec<ConjugatePoint>,
    /// `(t, det)` at every node.
    pub det_samples: Vec<(f64, f64)>,
    pub exit: ExitReason,
}

impl ConjugateScan {
    pub fn times(&self) -> Vec<f64> {
        self.conjugate.iter().map(|c| c.t).collect()
    }

    pub fn det_csv(&self) -> String {
        let mut out = String::from("t,det\n");
        for (t, d) in &self.det_samples {
            out.push_str(&format!("{t},{d}\n"));
        }
        out
    }
}

fn fiber_matrix(states: &[Vec<f64>], w: usize) -> DMatrix<f64> {
    // column k: fiber part of J_k's position; states hold J' = (x, y, X, Y)
    DMatrix::from_fn(w, states.len(), |i, k| states[k][w + i])
}

/// Times in `(0, t_max]` where the fundamental Jacobi matrix with
/// `J(0) = 0, J'(0) = e_k` becomes singular.
///
/// Roots are detected as sign changes of the determinant, so roots of even
/// multiplicity in the determinant are not reported.
pub fn conjugate_search(s: &Spray, init: &JetPoint, t_max: f64, h: f64) -> Result<ConjugateScan> {
    if init.level() != s.level() + 1 {
        return Err(need_level(
            "conjugate_search",
            &format!("{}", s.level() + 1),
            init.level(),
        ));
    }
    if !is_slashed(init) {
        return Err(Error::Domain(
            "conjugate_search: initial point is not slashed".into(),
        ));
    }
    let w = s.width();
    let (x0, v0) = init.coords().split_at(w);
    let sc = complete_lift(s);
    let fields: Vec<Result<Trajectory>> = (0..w)
        .into_par_iter()
        .map(|k| {
            let mut c = x0.to_vec();
            c.extend(std::iter::repeat_n(0.0, w));
            c.extend_from_slice(v0);
            c.extend((0..w).map(|i| if i == k { 1.0 } else { 0.0 }));
            integrate(
                &sc,
                &JetPoint::new(s.level() + 2, s.dim(), c)?,
                (0.0, t_max),
                h,
            )
        })
        .collect();
    let fields: Vec<Trajectory> = fields.into_iter().collect::<Result<_>>()?;
    let m = fields.iter().map(Trajectory::len).min().unwrap_or(0);
    let exit = fields
        .iter()
        .fold(ExitReason::Completed, |e, f| e.min_time(f.exit()));
    let det_at = |k: usize| -> f64 {
        let states: Vec<Vec<f64>> = fields.iter().map(|f| f.positions()[k].clone()).collect();
        fiber_matrix(&states, w).determinant()
    };
    let det_dense = |t: f64| -> Result<DMatrix<f64>> {
        let states = fields
            .iter()
            .map(|f| f.at(t).map(|p| p.coords()[..2 * w].to_vec()))
            .collect::<Result<Vec<_>>>()?;
        Ok(fiber_matrix(&states, w))
    };
    let times = fields[0].times();
    let det_samples: Vec<(f64, f64)> = (0..m).map(|k| (times[k], det_at(k))).collect();
    let mut conjugate = Vec::new();
    for k in 1..m.saturating_sub(1) {
        let (ta, da) = det_samples[k];
        let (tb, db) = det_samples[k + 1];
        if da == 0.0 || da.signum() == db.signum() {
            continue;
        }
        let (mut lo, mut hi, mut dlo) = (ta, tb, da);
        while hi - lo > CONJUGATE_BRACKET {
            let mid = 0.5 * (lo + hi);
            let dm = det_dense(mid)?.determinant();
            if dm == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if dm.signum() == dlo.signum() {
                lo = mid;
                dlo = dm;
            } else {
                hi = mid;
            }
        }
        let t = 0.5 * (lo + hi);
        let sv = det_dense(t)?.singular_values();
        let smax = sv.max();
        let multiplicity = sv.iter().filter(|&&v| v < RANK_RTOL * smax).count().max(1);
        conjugate.push(ConjugatePoint { t, multiplicity });
    }
    Ok(ConjugateScan {
        conjugate,
        det_samples,
        exit,
    })
}

/// Residuals of one lifted construction in the conjugate-point check.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LiftedVanishing {
    /// Deviation between the construction and an `S^cc` re-integration.
    pub deviation: f64,
    pub fiber_start: f64,
    pub fiber_end: f64,
    pub interior_max: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LiftConjugateReport {
    /// `E ∘ J`.
    pub liouville: LiftedVanishing,
    /// `j = ∂_s (γ' + sJ)`.
    pub tangent: LiftedVanishing,
    /// Distance of `j` from a central difference of the geodesics `γ' + sJ` of `S^c`.
    pub tangent_fd_deviation: f64,
}

impl LiftConjugateReport {
    pub fn passes(&self, vanish_tol: f64, interior_min: f64, dev_tol: f64) -> bool {
        [self.liouville, self.tangent].iter().all(|c| {
            c.fiber_start <= vanish_tol
                && c.fiber_end <= vanish_tol
                && c.interior_max >= interior_min
                && c.deviation <= dev_tol
        }) && self.tangent_fd_deviation <= dev_tol
    }
}

fn liouville_coords(x: &[f64]) -> Vec<f64> {
    let mut out = x.to_vec();
    let half = x.len() / 2;
    out.extend(std::iter::repeat_n(0.0, half));
    out.extend_from_slice(&x[half..]);
    out
}

fn vanishing_of(
    scc: &Spray,
    times: &[f64],
    pos: Vec<Vec<f64>>,
    vel: Vec<Vec<f64>>,
    h: f64,
) -> Result<LiftedVanishing> {
    let level = scc.level() + 1;
    let mut init = pos[0].clone();
    init.extend_from_slice(&vel[0]);
    let init = JetPoint::new(level, scc.dim(), init)?;
    let re = integrate(scc, &init, (times[0], *times.last().unwrap()), h)?;
    let mut deviation: f64 = 0.0;
    for (k, &t) in times.iter().enumerate() {
        let q = re.at(t)?;
        let (qp, qv) = q.coords().split_at(pos[k].len());
        deviation = deviation
            .max(max_abs_diff(qp, &pos[k]))
            .max(max_abs_diff(qv, &vel[k]));
    }
    let fiber = |x: &[f64]| euclid(&upper(x));
    let last = re.len() - 1;
    let interior_max = re.positions()[1..last]
        .iter()
        .map(|x| fiber(x))
        .fold(0.0, f64::max);
    Ok(LiftedVanishing {
        deviation,
        fiber_start: fiber(&re.positions()[0]),
        fiber_end: fiber(&re.positions()[last]),
        interior_max,
    })
}

/// Lifts a Jacobi field vanishing at both ends of its window in the two ways
/// that produce conjugate points of `S^c`, and checks both.
pub fn lift_conjugate_check(
    s: &Spray,
    j: &JacobiField,
    vanish_tol: f64,
    eps: f64,
) -> Result<LiftConjugateReport> {
    let m = j.field.len();
    if m < 3 {
        return Err(Error::Domain(
            "Jacobi field needs at least three samples".into(),
        ));
    }
    let (f0, f1) = (j.fiber_norm(0), j.fiber_norm(m - 1));
    if f0 > vanish_tol || f1 > vanish_tol {
        return Err(Error::Domain(format!(
            "Jacobi field does not vanish at both ends: |J(a)| = {f0:e}, |J(b)| = {f1:e}"
        )));
    }
    if !(j.sup_fiber_norm() > 1e-8) {
        return Err(Error::Domain("Jacobi field is identically zero".into()));
    }
    let h = j.field.step();
    let sc = complete_lift(s);
    let scc = complete_lift(&sc);
    let times = j.field.times();

    let ep: Vec<Vec<f64>> = j
        .field
        .positions()
        .iter()
        .map(|x| liouville_coords(x))
        .collect();
    let ev: Vec<Vec<f64>> = j
        .field
        .velocities()
        .iter()
        .map(|x| liouville_coords(x))
        .collect();
    let liouville = vanishing_of(&scc, times, ep, ev, h)?;

    // j = (x, ẋ, 0, y) with j' = (ẋ, ẍ, 0, ẏ)
    let b = &j.base;
    let mut tp = Vec::with_capacity(m);
    let mut tv = Vec::with_capacity(m);
    for k in 0..m {
        let w = b.positions()[k].len();
        let zero = vec![0.0; w];
        let y = &j.field.positions()[k][w..];
        let ydot = &j.field.velocities()[k][w..];
        tp.push([&b.positions()[k][..], &b.velocities()[k], &zero, y].concat());
        tv.push([&b.velocities()[k][..], &b.accelerations()[k], &zero, ydot].concat());
    }
    let tangent = vanishing_of(&scc, times, tp.clone(), tv.clone(), h)?;

    let w = b.positions()[0].len();
    let varied = |sign: f64| -> Result<Trajectory> {
        let y0 = &j.field.positions()[0][w..];
        let yd0 = &j.field.velocities()[0][w..];
        let mut c = b.positions()[0].clone();
        c.extend(
            b.velocities()[0]
                .iter()
                .zip(y0)
                .map(|(v, y)| v + sign * eps * y),
        );
        c.extend_from_slice(&b.velocities()[0]);
        c.extend(
            b.accelerations()[0]
                .iter()
                .zip(yd0)
                .map(|(a, y)| a + sign * eps * y),
        );
        integrate(
            &sc,
            &JetPoint::new(sc.level() + 1, s.dim(), c)?,
            (times[0], times[m - 1]),
            h,
        )
    };
    let (plus, minus) = (varied(1.0)?, varied(-1.0)?);
    let mut fd_dev: f64 = 0.0;
    for (k, &t) in times.iter().enumerate() {
        let (p, q) = (plus.at(t)?, minus.at(t)?);
        let (pp, pv) = p.coords().split_at(2 * w);
        let (qp, qv) = q.coords().split_at(2 * w);
        let half = |a: &[f64], b: &[f64]| -> Vec<f64> {
            a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect()
        };
        let d = |a: &[f64], b: &[f64]| -> Vec<f64> {
            a.iter()
                .zip(b)
                .map(|(x, y)| (x - y) / (2.0 * eps))
                .collect()
        };
        let fp = [half(pp, qp), d(pp, qp)].concat();
        let fv = [half(pv, qv), d(pv, qv)].concat();
        fd_dev = fd_dev
            .max(max_abs_diff(&fp, &tp[k]))
            .max(max_abs_diff(&fv, &tv[k]));
    }
    Ok(LiftConjugateReport {
        liouville,
        tangent,
        tangent_fd_deviation: fd_dev,
    })
}

/// Outcome of one construction in [`new_from_old_suite`].
#[derive(Debug, Clone, Serialize)]
pub struct PropertyResult {
    pub item: &'static str,
    pub construction: &'static str,
    /// `None` when the construction does not apply at this level.
    pub deviation: Option<f64>,
    pub skipped: Option<String>,
}

impl PropertyResult {
    fn checked(item: &'static str, construction: &'static str, d: f64) -> Self {
        PropertyResult {
            item,
            construction,
            deviation: Some(d),
            skipped: None,
        }
    }

    fn skip(item: &'static str, construction: &'static str, why: String) -> Self {
        PropertyResult {
            item,
            construction,
            deviation: None,
            skipped: Some(why),
        }
    }
}

/// Re-integrates `target` from the first sample and returns the sup-norm
/// deviation from the samples.
fn reintegrate(
    target: &Spray,
    times: &[f64],
    pos: &[Vec<f64>],
    vel: &[Vec<f64>],
    h: f64,
) -> Result<f64> {
    let mut init = pos[0].clone();
    init.extend_from_slice(&vel[0]);
    let init = JetPoint::new(target.level() + 1, target.dim(), init)?;
    let re = integrate(target, &init, (times[0], *times.last().unwrap()), h)?;
    if re.exit() != ExitReason::Completed {
        return Err(Error::Domain(format!(
            "re-integration stopped: {:?}",
            re.exit()
        )));
    }
    let mut dev: f64 = 0.0;
    for (k, &t) in times.iter().enumerate() {
        let q = re.at(t)?;
        let (qp, qv) = q.coords().split_at(pos[k].len());
        dev = dev
            .max(max_abs_diff(qp, &pos[k]))
            .max(max_abs_diff(qv, &vel[k]));
    }
    Ok(dev)
}

/// Parameters of the constructions in [`new_from_old_suite`].
#[derive(Debug, Clone, Copy)]
pub struct NewFromOldParams {
    pub c: f64,
    pub t0: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Fiber offsets of the second geodesic `k` in the linear combination.
    pub k_offset: (f64, f64),
}

impl Default for NewFromOldParams {
    fn default() -> Self {
        NewFromOldParams {
            c: 1.5,
            t0: 0.2,
            alpha: 0.7,
            beta: -1.3,
            k_offset: (0.3, -0.2),
        }
    }
}

/// Builds the eight new geodesics of the lift tower from a geodesic `j` of
/// `S^r = (base lifted r times)` and re-integrates each one.
pub fn new_from_old_suite(
    base: &Spray,
    j: &Trajectory,
    params: NewFromOldParams,
) -> Result<Vec<PropertyResult>> {
    if base.level() != 0 {
        return Err(need_level(
            "new_from_old_suite",
            "0 (base spray)",
            base.level(),
        ));
    }
    let r = j.level();
    let n = base.dim();
    let h = j.step();
    let tower: Vec<Spray> = (0..=r + 1).map(|k| iterated_lift(base, k)).collect();
    let sr = &tower[r];
    let times = j.times();
    let mut out = Vec::new();

    // (i) j(Ct + t0)
    {
        let c = params.c;
        let t_end = (j.end_time() - params.t0) / c;
        let count = 50usize;
        let mut ts = Vec::new();
        let mut ps = Vec::new();
        let mut vs = Vec::new();
        for k in 0..=count {
            let tau = t_end * k as f64 / count as f64;
            let q = j.at(c * tau + params.t0)?;
            let (qp, qv) = q.coords().split_at(sr.width());
            ts.push(tau);
            ps.push(qp.to_vec());
            vs.push(qv.iter().map(|v| c * v).collect());
        }
        out.push(PropertyResult::checked(
            "i",
            "j(Ct + t0)",
            reintegrate(sr, &ts, &ps, &vs, h)?,
        ));
    }

    // (ii) αj + βk
    if r >= 1 {
        let w = sr.width();
        let (d1, d2) = params.k_offset;
        let mut init = j.state(0).into_coords();
        init[w / 2..w].iter_mut().for_each(|v| *v += d1);
        init[w + w / 2..].iter_mut().for_each(|v| *v += d2);
        let k = integrate(
            sr,
            &JetPoint::new(r + 1, n, init)?,
            (j.start_time(), j.end_time()),
            h,
        )?;
        let m = j.len().min(k.len());
        let comb = |a: &[f64], b: &[f64]| -> Vec<f64> {
            let half = a.len() / 2;
            a[..half]
                .iter()
                .cloned()
                .chain((half..a.len()).map(|i| params.alpha * a[i] + params.beta * b[i]))
                .collect()
        };
        let ps: Vec<Vec<f64>> = (0..m)
            .map(|i| comb(&j.positions()[i], &k.positions()[i]))
            .collect();
        let vs: Vec<Vec<f64>> = (0..m)
            .map(|i| comb(&j.velocities()[i], &k.velocities()[i]))
            .collect();
        out.push(PropertyResult::checked(
            "ii",
            "alpha j + beta k",
            reintegrate(sr, &times[..m], &ps, &vs, h)?,
        ));
    } else {
        out.push(PropertyResult::skip(
            "ii",
            "alpha j + beta k",
            "needs r >= 1".into(),
        ));
    }

    let linear = |item: &'static str,
                  name: &'static str,
                  target: &Spray,
                  f: &dyn Fn(&[f64]) -> Vec<f64>|
     -> Result<PropertyResult> {
        let (t, p, v) = map_samples(j, f);
        Ok(PropertyResult::checked(
            item,
            name,
            reintegrate(target, &t, &p, &v, h)?,
        ))
    };

    // (iii) κ_r ∘ j
    if r >= 1 {
        out.push(linear("iii", "kappa j", sr, &|x| {
            kappa(&JetPoint::new(r, n, x.to_vec()).unwrap())
                .unwrap()
                .into_coords()
        })?);
    } else {
        out.push(PropertyResult::skip(
            "iii",
            "kappa j",
            "needs r >= 1".into(),
        ));
    }

    // (iv) π_{r-1} ∘ j
    if r >= 1 {
        out.push(linear("iv", "pi j", &tower[r - 1], &lower)?);
    } else {
        out.push(PropertyResult::skip("iv", "pi j", "needs r >= 1".into()));
    }

    // (v) Dπ_{r-2}(j)
    if r >= 2 {
        out.push(linear("v", "D pi j", &tower[r - 1], &|x| {
            dproject_coords(r, n, x)
        })?);
    } else {
        out.push(PropertyResult::skip("v", "D pi j", "needs r >= 2".into()));
    }

    // (vi) j'
    {
        let ps: Vec<Vec<f64>> = (0..j.len())
            .map(|k| [&j.positions()[k][..], &j.velocities()[k]].concat())
            .collect();
        let vs: Vec<Vec<f64>> = (0..j.len())
            .map(|k| [&j.velocities()[k][..], &j.accelerations()[k]].concat())
            .collect();
        out.push(PropertyResult::checked(
            "vi",
            "j'",
            reintegrate(&tower[r + 1], times, &ps, &vs, h)?,
        ));
    }

    // (vii) t j'(t)
    {
        let ps: Vec<Vec<f64>> = (0..j.len())
            .map(|k| {
                let t = times[k];
                let tv: Vec<f64> = j.velocities()[k].iter().map(|v| t * v).collect();
                [&j.positions()[k][..], &tv].concat()
            })
            .collect();
        let vs: Vec<Vec<f64>> = (0..j.len())
            .map(|k| {
                let t = times[k];
                let d: Vec<f64> = j.velocities()[k]
                    .iter()
                    .zip(&j.accelerations()[k])
                    .map(|(v, a)| v + t * a)
                    .collect();
                [&j.velocities()[k][..], &d].concat()
            })
            .collect();
        out.push(PropertyResult::checked(
            "vii",
            "t j'(t)",
            reintegrate(&tower[r + 1], times, &ps, &vs, h)?,
        ));
    }

    // (viii) E_r ∘ j
    if r >= 1 {
        out.push(linear("viii", "E j", &tower[r + 1], &liouville_coords)?);
    } else {
        out.push(PropertyResult::skip("viii", "E j", "needs r >= 1".into()));
    }
    Ok(out)
}
