//! Sprays on iterated tangent bundles.
//!
//! A spray on `T^rM` is stored through its coefficients `G`, a function on
//! `T^{r+1}M∖0` with values in `R^{2^r n}`, such that `S(x,y) = (x, y, y, -2G)`.
//! Every evaluator accepts jet-valued coordinates, which is all the complete
//! lift needs: `(G^v, G^c)` is `G` evaluated one infinitesimal deeper.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{need_level, Error, Result};
use crate::jet::{Jet, Scalar};
use crate::jetspace::{euclid, is_slashed, ChartTransition, JetPoint};

/// Christoffel symbols of a torsion-free connection in one chart.
///
/// Index layout is `i*n*n + j*n + k` for `Γ^i_{jk}`.
pub trait ChristoffelField: Send + Sync {
    fn name(&self) -> String;
    fn dim(&self) -> usize;
    fn gamma(&self, x: &[f64]) -> Vec<f64>;
    fn gamma_jet(&self, x: &[Jet]) -> Vec<Jet>;
    fn in_domain(&self, _x: &[f64]) -> bool {
        true
    }
}

/// Round unit sphere in `(θ, φ)` coordinates, metric `dθ² + sin²θ dφ²`.
///
/// The chart stays `margin` away from the poles.
#[derive(Debug, Clone, Copy)]
pub struct SphereChristoffel {
    pub margin: f64,
}

impl Default for SphereChristoffel {
    fn default() -> Self {
        SphereChristoffel { margin: 1e-2 }
    }
}

fn sphere_gamma<T: Scalar>(x: &[T]) -> Vec<T> {
    let (s, c) = (x[0].sin(), x[0].cos());
    let zero = T::cst(0.0);
    let cot = c.clone() / s.clone();
    vec![
        zero.clone(),
        zero.clone(),
        zero.clone(),
        -(s * c),
        zero.clone(),
        cot.clone(),
        cot,
        zero,
    ]
}

impl ChristoffelField for SphereChristoffel {
    fn name(&self) -> String {
        "sphere".into()
    }
    fn dim(&self) -> usize {
        2
    }
    fn gamma(&self, x: &[f64]) -> Vec<f64> {
        sphere_gamma(x)
    }
    fn gamma_jet(&self, x: &[Jet]) -> Vec<Jet> {
        sphere_gamma(x)
    }
    fn in_domain(&self, x: &[f64]) -> bool {
        x[0] > self.margin && x[0] < PI - self.margin
    }
}

/// User-supplied spray coefficients. Must be positively 2-homogeneous in `y`.
pub trait SprayCoefficients: Send + Sync {
    fn name(&self) -> String;
    fn level(&self) -> usize;
    fn dim(&self) -> usize;
    fn eval(&self, x: &[Jet], y: &[Jet]) -> Vec<Jet>;
    fn in_domain(&self, _x: &[f64]) -> bool {
        true
    }
}

/// Subset of a chart on `M` where a spray is defined.
#[derive(Clone)]
pub enum ChartDomain {
    Whole,
    /// `|x - center| > radius`.
    OutsideBall {
        center: Vec<f64>,
        radius: f64,
    },
    /// `lo_i < x_i < hi_i`.
    Box {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
}

impl ChartDomain {
    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            ChartDomain::Whole => true,
            ChartDomain::OutsideBall { center, radius } => {
                let d: Vec<f64> = x.iter().zip(center).map(|(a, b)| a - b).collect();
                euclid(&d) > *radius
            }
            ChartDomain::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(v, (l, h))| v > l && v < h),
        }
    }
}

#[derive(Clone)]
pub enum SprayKind {
    Flat,
    Riemannian(Arc<dyn ChristoffelField>),
    Finsler(Vec<f64>),
    Lifted(Arc<Spray>),
    Projected(Arc<Spray>),
    InChart {
        parent: Arc<Spray>,
        transition: ChartTransition,
    },
    Custom(Arc<dyn SprayCoefficients>),
}

#[derive(Clone)]
pub struct Spray {
    level: usize,
    dim: usize,
    kind: SprayKind,
    domain: ChartDomain,
}

impl fmt::Debug for Spray {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Spray[{} on T^{}M, n={}]",
            self.tag(),
            self.level,
            self.dim
        )
    }
}

/// `G ≡ 0` on `TR^n`.
pub fn make_flat(n: usize) -> Spray {
    Spray {
        level: 0,
        dim: n,
        kind: SprayKind::Flat,
        domain: ChartDomain::Whole,
    }
}

/// `G^i = ½ Γ^i_{jk}(x) y^j y^k`.
pub fn make_riemannian(gamma: impl ChristoffelField + 'static) -> Spray {
    Spray {
        level: 0,
        dim: gamma.dim(),
        kind: SprayKind::Riemannian(Arc::new(gamma)),
        domain: ChartDomain::Whole,
    }
}

/// The geodesic spray of the round unit sphere, poles excluded.
pub fn make_sphere() -> Spray {
    make_riemannian(SphereChristoffel::default())
}

/// `G^i = c_i |y| y^i`: 2-homogeneous, smooth off the zero section, not quadratic.
pub fn make_finsler_example(c: &[f64]) -> Spray {
    Spray {
        level: 0,
        dim: c.len(),
        kind: SprayKind::Finsler(c.to_vec()),
        domain: ChartDomain::Whole,
    }
}

/// The spray `S^c` on `T^{r+1}M`.
pub fn complete_lift(s: &Spray) -> Spray {
    Spray {
        level: s.level + 1,
        dim: s.dim,
        kind: SprayKind::Lifted(Arc::new(s.clone())),
        domain: ChartDomain::Whole,
    }
}

/// `S` lifted `times` times.
pub fn iterated_lift(s: &Spray, times: usize) -> Spray {
    (0..times).fold(s.clone(), |acc, _| complete_lift(&acc))
}

/// The induced spray `S*` on `T^{r-1}M`, with `G*(x,y) = G(x,0,y,y)`.
pub fn project_spray(s: &Spray) -> Result<Spray> {
    if s.level == 0 {
        return Err(need_level("project_spray", ">= 1", 0));
    }
    Ok(Spray {
        level: s.level - 1,
        dim: s.dim,
        kind: SprayKind::Projected(Arc::new(s.clone())),
        domain: ChartDomain::Whole,
    })
}

/// The same spray written in the chart `x̃ = t(x)`.
pub fn in_chart(s: &Spray, t: &ChartTransition) -> Result<Spray> {
    if t.map().dim() != s.dim {
        return Err(Error::DimensionMismatch {
            expected: s.dim,
            got: t.map().dim(),
        });
    }
    Ok(Spray {
        level: s.level,
        dim: s.dim,
        kind: SprayKind::InChart {
            parent: Arc::new(s.clone()),
            transition: t.clone(),
        },
        domain: ChartDomain::Whole,
    })
}

fn riemannian_g<T: Scalar>(gamma: &[T], y: &[T], n: usize) -> Vec<T> {
    (0..n)
        .map(|i| {
            let mut acc = T::cst(0.0);
            for j in 0..n {
                for k in 0..n {
                    acc = acc + gamma[(i * n + j) * n + k].clone() * y[j].clone() * y[k].clone();
                }
            }
            acc * 0.5
        })
        .collect()
}

fn finsler_g<T: Scalar>(c: &[f64], y: &[T]) -> Vec<T> {
    let r = crate::jet::norm(y);
    c.iter()
        .zip(y)
        .map(|(&ci, yi)| r.clone() * yi.clone() * ci)
        .collect()
}

fn max_depth(v: &[Jet]) -> usize {
    v.iter().map(Jet::depth).max().unwrap_or(0)
}

/// Packs `2^level · n` depth-`k` jets into `n` jets of depth `k + level`:
/// block bit `j` becomes infinitesimal `k + j`.
fn pack(coords: &[Jet], level: usize, n: usize, k: usize) -> Vec<Jet> {
    let inner = 1usize << k;
    (0..n)
        .map(|i| {
            let mut c = vec![0.0; inner << level];
            for b in 0..(1usize << level) {
                let jet = &coords[b * n + i];
                for m in 0..inner {
                    c[(b << k) | m] = jet.coeff(m);
                }
            }
            Jet::from_coeffs(&c)
        })
        .collect()
}

fn unpack(jets: &[Jet], level: usize, n: usize, k: usize) -> Vec<Jet> {
    let inner = 1usize << k;
    let mut out = Vec::with_capacity(n << level);
    for b in 0..(1usize << level) {
        for jet in jets.iter().take(n) {
            let c: Vec<f64> = (0..inner).map(|m| jet.coeff((b << k) | m)).collect();
            out.push(Jet::from_coeffs(&c));
        }
    }
    out
}

impl Spray {
    /// Wraps user coefficients without checking homogeneity.
    pub fn custom(coeffs: impl SprayCoefficients + 'static) -> Spray {
        Spray {
            level: coeffs.level(),
            dim: coeffs.dim(),
            kind: SprayKind::Custom(Arc::new(coeffs)),
            domain: ChartDomain::Whole,
        }
    }

    /// Wraps user coefficients after a homogeneity spot check at `samples`.
    pub fn custom_validated(
        coeffs: impl SprayCoefficients + 'static,
        samples: &[JetPoint],
        tol: f64,
    ) -> Result<Spray> {
        let s = Spray::custom(coeffs);
        for p in samples {
            for lambda in [0.5, 2.0, 3.7] {
                let r = homogeneity_check(&s, p, lambda)?;
                if r > tol {
                    return Err(Error::Construction(format!(
                        "coefficients are not 2-homogeneous: residual {r:e} at λ = {lambda}"
                    )));
                }
            }
        }
        Ok(s)
    }

    pub fn with_domain(mut self, domain: ChartDomain) -> Spray {
        self.domain = domain;
        self
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of position (and of velocity) coordinates: `2^r · n`.
    pub fn width(&self) -> usize {
        self.dim << self.level
    }

    pub fn kind(&self) -> &SprayKind {
        &self.kind
    }

    /// Provenance tag, e.g. `lifted(lifted(riemannian(sphere)))`.
    pub fn tag(&self) -> String {
        match &self.kind {
            SprayKind::Flat => "flat".into(),
            SprayKind::Riemannian(g) => format!("riemannian({})", g.name()),
            SprayKind::Finsler(_) => "finsler-example".into(),
            SprayKind::Lifted(p) => format!("lifted({})", p.tag()),
            SprayKind::Projected(p) => format!("projected({})", p.tag()),
            SprayKind::InChart { parent, transition } => {
                format!("chart({}, {})", parent.tag(), transition.map().name())
            }
            SprayKind::Custom(c) => format!("custom({})", c.name()),
        }
    }

    /// Whether a base point of `M` (block 0 of any position) lies in the chart domain.
    pub fn in_domain(&self, x0: &[f64]) -> bool {
        if !self.domain.contains(x0) {
            return false;
        }
        match &self.kind {
            SprayKind::Flat | SprayKind::Finsler(_) => true,
            SprayKind::Riemannian(g) => g.in_domain(x0),
            SprayKind::Custom(c) => c.in_domain(x0),
            SprayKind::Lifted(p) | SprayKind::Projected(p) => p.in_domain(x0),
            SprayKind::InChart { parent, transition } => {
                transition.map().in_range(x0) && parent.in_domain(&transition.inverse_point(x0))
            }
        }
    }

    /// Coefficients at jet-valued `(x, y)`, each of length `2^r · n`.
    pub fn coeffs_jet(&self, x: &[Jet], y: &[Jet]) -> Vec<Jet> {
        let n = self.dim;
        match &self.kind {
            SprayKind::Flat => vec![Jet::constant(0.0); n],
            SprayKind::Riemannian(g) => riemannian_g(&g.gamma_jet(x), y, n),
            SprayKind::Finsler(c) => finsler_g(c, y),
            SprayKind::Custom(c) => c.eval(x, y),
            SprayKind::Lifted(parent) => {
                let half = x.len() / 2;
                let k = max_depth(x).max(max_depth(y));
                let px: Vec<Jet> = (0..half)
                    .map(|i| Jet::extend(&x[i], &x[half + i], k))
                    .collect();
                let py: Vec<Jet> = (0..half)
                    .map(|i| Jet::extend(&y[i], &y[half + i], k))
                    .collect();
                let g = parent.coeffs_jet(&px, &py);
                let (lo, hi): (Vec<Jet>, Vec<Jet>) = g.iter().map(|gi| gi.split(k)).unzip();
                lo.into_iter().chain(hi).collect()
            }
            SprayKind::Projected(parent) => {
                let zero = vec![Jet::constant(0.0); x.len()];
                let px: Vec<Jet> = x.iter().cloned().chain(zero).collect();
                let py: Vec<Jet> = y.iter().cloned().chain(y.iter().cloned()).collect();
                let mut g = parent.coeffs_jet(&px, &py);
                g.truncate(x.len());
                g
            }
            SprayKind::InChart { parent, transition } => {
                let r = self.level;
                let k = max_depth(x).max(max_depth(y));
                let p: Vec<Jet> = x.iter().chain(y).cloned().collect();
                let back = unpack(
                    &transition.map().inverse(&pack(&p, r + 1, n, k)),
                    r + 1,
                    n,
                    k,
                );
                let w = back.len() / 2;
                let (bx, by) = back.split_at(w);
                let g = parent.coeffs_jet(bx, by);
                let value: Vec<Jet> = bx
                    .iter()
                    .chain(by)
                    .chain(by)
                    .cloned()
                    .chain(g.into_iter().map(|gi| gi * -2.0))
                    .collect();
                let fwd = unpack(
                    &transition.map().forward(&pack(&value, r + 2, n, k)),
                    r + 2,
                    n,
                    k,
                );
                fwd[3 * w..].iter().map(|v| v.clone() * -0.5).collect()
            }
        }
    }

    /// Coefficients at a real point, without domain checks.
    pub fn coeffs_raw(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        match &self.kind {
            SprayKind::Flat => vec![0.0; self.dim],
            SprayKind::Riemannian(g) => riemannian_g(&g.gamma(x), y, self.dim),
            SprayKind::Finsler(c) => finsler_g(c, y),
            _ => {
                let xj: Vec<Jet> = x.iter().map(|&v| Jet::constant(v)).collect();
                let yj: Vec<Jet> = y.iter().map(|&v| Jet::constant(v)).collect();
                self.coeffs_jet(&xj, &yj)
                    .iter()
                    .map(|g| g.coeff(0))
                    .collect()
            }
        }
    }

    fn check_input(&self, op: &'static str, p: &JetPoint) -> Result<()> {
        if p.level() != self.level + 1 {
            return Err(need_level(op, &format!("{}", self.level + 1), p.level()));
        }
        if p.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: p.dim(),
            });
        }
        if !is_slashed(p) {
            return Err(Error::Domain(format!(
                "{op}: point is not in the slashed bundle"
            )));
        }
        if !self.in_domain(p.block(0)) {
            return Err(Error::Domain(format!(
                "{op}: base point {:?} is outside the chart domain",
                p.block(0)
            )));
        }
        Ok(())
    }

    /// The coefficients `G(p)` for a slashed `p` in `T^{r+1}M`.
    pub fn coeffs(&self, p: &JetPoint) -> Result<Vec<f64>> {
        self.check_input("coeffs", p)?;
        let (x, y) = p.coords().split_at(self.width());
        Ok(self.coeffs_raw(x, y))
    }
}

/// `S(p) = (x, y, y, -2G(x,y))` as a point of `T^{r+2}M`.
pub fn spray_value(s: &Spray, p: &JetPoint) -> Result<JetPoint> {
    let g = s.coeffs(p)?;
    let (_, y) = p.coords().split_at(s.width());
    let mut c = p.coords().to_vec();
    c.extend_from_slice(y);
    c.extend(g.iter().map(|v| -2.0 * v));
    JetPoint::new(s.level + 2, s.dim, c)
}

/// `‖G(x,λy) − λ²G(x,y)‖ / (1 + ‖λ²G(x,y)‖)`.
pub fn homogeneity_check(s: &Spray, p: &JetPoint, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!(
            "homogeneity needs λ > 0, got {lambda}"
        )));
    }
    let g = s.coeffs(p)?;
    let w = s.width();
    let mut scaled = p.coords().to_vec();
    scaled[w..].iter_mut().for_each(|v| *v *= lambda);
    let gl = s.coeffs(&JetPoint::new(p.level(), p.dim(), scaled)?)?;
    let l2 = lambda * lambda;
    let diff: Vec<f64> = gl.iter().zip(&g).map(|(a, b)| a - l2 * b).collect();
    let reference: Vec<f64> = g.iter().map(|b| l2 * b).collect();
    Ok(euclid(&diff) / (1.0 + euclid(&reference)))
}
