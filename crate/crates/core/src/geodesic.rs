//! Fixed-step RK4 integration of `ẍ = -2G(x, ẋ)` with Hermite dense output.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{need_level, Error, Result};
use crate::jetspace::{euclid, kappa, JetPoint, EPS_SLASH};
use crate::spray::Spray;

/// Default bound on [`residual`] declared for every integrated trajectory.
pub const RESIDUAL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ExitReason {
    Completed,
    /// The base velocity fell to the zero section.
    LeftSlashed {
        t: f64,
    },
    /// The base point left the chart domain.
    LeftChart {
        t: f64,
    },
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    level: usize,
    dim: usize,
    tag: String,
    step: f64,
    tolerance: f64,
    times: Vec<f64>,
    pos: Vec<Vec<f64>>,
    vel: Vec<Vec<f64>>,
    acc: Vec<Vec<f64>>,
    exit: ExitReason,
}

fn accel(s: &Spray, x: &[f64], v: &[f64]) -> Vec<f64> {
    s.coeffs_raw(x, v).into_iter().map(|g| -2.0 * g).collect()
}

fn axpy(a: f64, x: &[f64], y: &[f64]) -> Vec<f64> {
    y.iter().zip(x).map(|(yi, xi)| yi + a * xi).collect()
}

/// RK4 increments `(Δx, Δv)` for one step.
fn rk4_increment(s: &Spray, x: &[f64], v: &[f64], h: f64) -> (Vec<f64>, Vec<f64>) {
    let k1v = accel(s, x, v);
    let x2 = axpy(0.5 * h, v, x);
    let v2 = axpy(0.5 * h, &k1v, v);
    let k2v = accel(s, &x2, &v2);
    let x3 = axpy(0.5 * h, &v2, x);
    let v3 = axpy(0.5 * h, &k2v, v);
    let k3v = accel(s, &x3, &v3);
    let x4 = axpy(h, &v3, x);
    let v4 = axpy(h, &k3v, v);
    let k4v = accel(s, &x4, &v4);
    let dx = (0..x.len())
        .map(|i| h * ((v[i] + 2.0 * v2[i] + 2.0 * v3[i] + v4[i]) / 6.0))
        .collect();
    let dv = (0..v.len())
        .map(|i| h * ((k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i]) / 6.0))
        .collect();
    (dx, dv)
}

/// Kahan-compensated `y += d`, so long runs of small steps do not drift.
fn accumulate(y: &[f64], d: &[f64], comp: &mut [f64]) -> Vec<f64> {
    (0..y.len())
        .map(|i| {
            let dd = d[i] - comp[i];
            let t = y[i] + dd;
            comp[i] = (t - y[i]) - dd;
            t
        })
        .collect()
}

fn check_init(s: &Spray, init: &JetPoint) -> Result<()> {
    if init.level() != s.level() + 1 {
        return Err(need_level(
            "integrate",
            &format!("{}", s.level() + 1),
            init.level(),
        ));
    }
    if init.dim() != s.dim() {
        return Err(Error::DimensionMismatch {
            expected: s.dim(),
            got: init.dim(),
        });
    }
    if !init.is_finite() {
        return Err(Error::Domain("initial condition is not finite".into()));
    }
    if !crate::jetspace::is_slashed(init) {
        return Err(Error::Domain(
            "initial condition is not in the slashed bundle".into(),
        ));
    }
    if !s.in_domain(init.block(0)) {
        return Err(Error::Domain(format!(
            "initial base point {:?} is outside the chart domain",
            init.block(0)
        )));
    }
    Ok(())
}

/// Integrates the geodesic with `γ'(t_span.0) = init` to `t_span.1`.
///
/// `t_span.1 < t_span.0` integrates backwards; the stored times still increase.
/// Leaving the slashed bundle or the chart truncates the trajectory at the
/// last valid node.
pub fn integrate(s: &Spray, init: &JetPoint, t_span: (f64, f64), h: f64) -> Result<Trajectory> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::Domain(format!("step must be positive, got {h}")));
    }
    let (t0, t1) = t_span;
    if !t0.is_finite() || !t1.is_finite() {
        return Err(Error::Domain("time span must be finite".into()));
    }
    check_init(s, init)?;
    let n = s.dim();
    let w = s.width();
    let span = t1 - t0;
    let steps = ((span.abs() / h).ceil() as usize).max(if span == 0.0 { 0 } else { 1 });
    let he = if steps == 0 { 0.0 } else { span / steps as f64 };

    let (x0, v0) = init.coords().split_at(w);
    let mut times = vec![t0];
    let mut pos = vec![x0.to_vec()];
    let mut vel = vec![v0.to_vec()];
    let mut exit = ExitReason::Completed;
    let mut cx = vec![0.0; w];
    let mut cv = vec![0.0; w];
    for k in 0..steps {
        let (xk, vk) = (pos.last().unwrap(), vel.last().unwrap());
        let (dx, dv) = rk4_increment(s, xk, vk, he);
        let x = accumulate(xk, &dx, &mut cx);
        let v = accumulate(vk, &dv, &mut cv);
        let t = if k + 1 == steps {
            t1
        } else {
            t0 + he * (k + 1) as f64
        };
        if !x.iter().chain(&v).all(|c| c.is_finite()) {
            return Err(Error::Blowup { t });
        }
        let t_last = *times.last().unwrap();
        if !s.in_domain(&x[..n]) {
            exit = ExitReason::LeftChart { t: t_last };
            break;
        }
        if euclid(&v[..n]) <= EPS_SLASH {
            exit = ExitReason::LeftSlashed { t: t_last };
            break;
        }
        times.push(t);
        pos.push(x);
        vel.push(v);
    }
    if span < 0.0 {
        times.reverse();
        pos.reverse();
        vel.reverse();
    }
    let acc = pos.iter().zip(&vel).map(|(x, v)| accel(s, x, v)).collect();
    Ok(Trajectory {
        level: s.level(),
        dim: n,
        tag: s.tag(),
        step: he.abs(),
        tolerance: RESIDUAL_TOL,
        times,
        pos,
        vel,
        acc,
        exit,
    })
}

/// `γ'(t)` for the geodesic with `γ'(0) = p`; fails if the flow does not reach `t`.
pub fn flow(s: &Spray, p: &JetPoint, t: f64, h: f64) -> Result<JetPoint> {
    if t == 0.0 {
        check_init(s, p)?;
        return Ok(p.clone());
    }
    let tr = integrate(s, p, (0.0, t), h)?;
    if tr.exit != ExitReason::Completed {
        return Err(Error::Domain(format!(
            "flow stopped before t = {t}: {:?}",
            tr.exit
        )));
    }
    Ok(if t > 0.0 {
        tr.last_state()
    } else {
        tr.state(0)
    })
}

/// `κ ∘ Dφ_t ∘ κ (p)` with `Dφ_t` by central differences; an independent
/// check on the flow of the complete lift.
pub fn flow_tangent_fd(s: &Spray, p: &JetPoint, t: f64, eps: f64, h: f64) -> Result<JetPoint> {
    if p.level() != s.level() + 2 {
        return Err(need_level(
            "flow_tangent_fd",
            &format!("{}", s.level() + 2),
            p.level(),
        ));
    }
    if !crate::jetspace::is_slashed(p) {
        return Err(Error::Domain(
            "flow_tangent_fd: point is not in the slashed bundle".into(),
        ));
    }
    if t == 0.0 {
        return Ok(p.clone());
    }
    let q = kappa(p)?;
    let (base, dir) = (q.lower()?, q.upper()?);
    let shifted = |sign: f64| -> Result<JetPoint> {
        let c: Vec<f64> = base
            .coords()
            .iter()
            .zip(dir.coords())
            .map(|(b, d)| b + sign * eps * d)
            .collect();
        flow(s, &JetPoint::new(base.level(), base.dim(), c)?, t, h)
    };
    let (plus, minus) = (shifted(1.0)?, shifted(-1.0)?);
    let diff: Vec<f64> = plus
        .coords()
        .iter()
        .zip(minus.coords())
        .map(|(a, b)| (a - b) / (2.0 * eps))
        .collect();
    let moved = flow(s, &base, t, h)?;
    kappa(&JetPoint::join(
        &moved,
        &JetPoint::new(base.level(), base.dim(), diff)?,
    )?)
}

/// A posteriori defect of a trajectory against its geodesic equation.
///
/// At each interior node the Simpson rule must reproduce both `x` from `ẋ`
/// and `ẋ` from `-2G(x, ẋ)` (re-evaluated, not the stored values) over the
/// two adjacent steps. The defect is the worse of the two, divided by the
/// width `2h`; it is `O(h⁴)` on a genuine RK4 solution and of order
/// `δ/h` when a node is off by `δ`.
pub fn residual(s: &Spray, tr: &Trajectory) -> f64 {
    let m = tr.times.len();
    if m < 3 {
        return 0.0;
    }
    let acc: Vec<Vec<f64>> = tr
        .pos
        .iter()
        .zip(&tr.vel)
        .map(|(x, v)| accel(s, x, v))
        .collect();
    let mut worst: f64 = 0.0;
    for k in 1..m - 1 {
        let (ta, tb) = (tr.times[k - 1], tr.times[k + 1]);
        let h = 0.5 * (tb - ta);
        let defect = |f: &[Vec<f64>], df: &[Vec<f64>]| -> f64 {
            let d: Vec<f64> = (0..f[k].len())
                .map(|i| {
                    f[k + 1][i]
                        - f[k - 1][i]
                        - h / 3.0 * (df[k - 1][i] + 4.0 * df[k][i] + df[k + 1][i])
                })
                .collect();
            euclid(&d) / (2.0 * h)
        };
        worst = worst
            .max(defect(&tr.pos, &tr.vel))
            .max(defect(&tr.vel, &acc));
    }
    worst
}

fn hermite(p0: &[f64], m0: &[f64], p1: &[f64], m1: &[f64], h: f64, s: f64) -> Vec<f64> {
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    (0..p0.len())
        .map(|i| h00 * p0[i] + h10 * h * m0[i] + h01 * p1[i] + h11 * h * m1[i])
        .collect()
}

impl Trajectory {
    /// Builds a trajectory from sampled positions and velocities, with
    /// accelerations re-evaluated from `s`.
    pub fn from_samples(
        s: &Spray,
        times: Vec<f64>,
        pos: Vec<Vec<f64>>,
        vel: Vec<Vec<f64>>,
        exit: ExitReason,
    ) -> Result<Trajectory> {
        let w = s.width();
        if times.is_empty() || times.len() != pos.len() || times.len() != vel.len() {
            return Err(Error::Inconsistent("sample arrays differ in length".into()));
        }
        if times.windows(2).any(|p| !(p[1] > p[0])) {
            return Err(Error::Inconsistent("sample times must increase".into()));
        }
        if let Some(bad) = pos.iter().chain(&vel).find(|v| v.len() != w) {
            return Err(Error::DimensionMismatch {
                expected: w,
                got: bad.len(),
            });
        }
        let step = if times.len() > 1 {
            (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64
        } else {
            0.0
        };
        let acc = pos.iter().zip(&vel).map(|(x, v)| accel(s, x, v)).collect();
        Ok(Trajectory {
            level: s.level(),
            dim: s.dim(),
            tag: s.tag(),
            step,
            tolerance: RESIDUAL_TOL,
            times,
            pos,
            vel,
            acc,
            exit,
        })
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn exit(&self) -> ExitReason {
        self.exit
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn start_time(&self) -> f64 {
        self.times[0]
    }

    pub fn end_time(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn positions(&self) -> &[Vec<f64>] {
        &self.pos
    }

    pub fn velocities(&self) -> &[Vec<f64>] {
        &self.vel
    }

    pub fn accelerations(&self) -> &[Vec<f64>] {
        &self.acc
    }

    /// Position at node `k` as a point of `T^rM`.
    pub fn position(&self, k: usize) -> JetPoint {
        JetPoint::new(self.level, self.dim, self.pos[k].clone()).expect("stored shape")
    }

    /// `γ'(t_k)` as a point of `T^{r+1}M`.
    pub fn state(&self, k: usize) -> JetPoint {
        let mut c = self.pos[k].clone();
        c.extend_from_slice(&self.vel[k]);
        JetPoint::new(self.level + 1, self.dim, c).expect("stored shape")
    }

    pub fn last_state(&self) -> JetPoint {
        self.state(self.len() - 1)
    }

    fn locate(&self, t: f64) -> Result<(usize, f64)> {
        let (a, b) = (self.start_time(), self.end_time());
        let slack = 1e-12 * (1.0 + a.abs().max(b.abs()));
        if t < a - slack || t > b + slack || self.len() < 2 {
            if self.len() == 1 && (t - a).abs() <= slack {
                return Ok((0, 0.0));
            }
            return Err(Error::Domain(format!("t = {t} outside [{a}, {b}]")));
        }
        let k = match self.times.binary_search_by(|v| v.total_cmp(&t)) {
            Ok(k) => k.min(self.len() - 2),
            Err(k) => k.clamp(1, self.len() - 1) - 1,
        };
        let h = self.times[k + 1] - self.times[k];
        Ok((k, ((t - self.times[k]) / h).clamp(0.0, 1.0)))
    }

    /// Dense output: cubic Hermite on `(x, ẋ)` and on `(ẋ, ẍ)`.
    pub fn at(&self, t: f64) -> Result<JetPoint> {
        let (k, s) = self.locate(t)?;
        if self.len() == 1 {
            return Ok(self.state(0));
        }
        let h = self.times[k + 1] - self.times[k];
        let mut c = hermite(
            &self.pos[k],
            &self.vel[k],
            &self.pos[k + 1],
            &self.vel[k + 1],
            h,
            s,
        );
        c.extend(hermite(
            &self.vel[k],
            &self.acc[k],
            &self.vel[k + 1],
            &self.acc[k + 1],
            h,
            s,
        ));
        JetPoint::new(self.level + 1, self.dim, c)
    }

    /// A copy with node `k` position shifted by `delta` in every coordinate.
    pub fn perturbed(&self, k: usize, delta: f64) -> Trajectory {
        let mut out = self.clone();
        out.pos[k].iter_mut().for_each(|v| *v += delta);
        out
    }

    /// CSV with a `#` metadata line, a header row and one row per node.
    pub fn to_csv(&self) -> String {
        let w = self.dim << self.level;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# level={},dim={},spray={}",
            self.level, self.dim, self.tag
        );
        out.push('t');
        for i in 0..w {
            let _ = write!(out, ",x_{i}");
        }
        for i in 0..w {
            let _ = write!(out, ",v_{i}");
        }
        out.push('\n');
        for k in 0..self.len() {
            let _ = write!(out, "{}", self.times[k]);
            for v in self.pos[k].iter().chain(&self.vel[k]) {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> io::Result<()> {
        std::fs::write(path, self.to_csv())
    }
}
