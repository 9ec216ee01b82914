use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{need_level, Error, Result};
use crate::jet::Jet;

/// Threshold below which a block counts as zero in slashed-bundle checks.
pub const EPS_SLASH: f64 = 1e-10;

/// A point of the iterated tangent bundle `T^rM` in canonical coordinates.
///
/// Coordinates are grouped into `2^r` blocks of `n` reals. Block `b` holds the
/// group obtained by differentiating at the tangent levels whose bits are set
/// in `b`; bit `r-1` is the outermost level. For `TTM` the blocks
/// `00, 01, 10, 11` are `x, y, X, Y`.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct JetPoint {
    level: usize,
    dim: usize,
    coords: Vec<f64>,
}

impl fmt::Debug for JetPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "T^{}[n={}]", self.level, self.dim)?;
        let blocks: Vec<&[f64]> = (0..self.block_count()).map(|b| self.block(b)).collect();
        write!(f, "{:?}", blocks)
    }
}

impl JetPoint {
    pub fn new(level: usize, dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain("base dimension must be at least 1".into()));
        }
        let expected = dim << level;
        if coords.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: coords.len(),
            });
        }
        Ok(JetPoint { level, dim, coords })
    }

    pub fn zeros(level: usize, dim: usize) -> Self {
        JetPoint {
            level,
            dim,
            coords: vec![0.0; dim << level],
        }
    }

    /// Builds a point from its blocks in mask order.
    pub fn from_blocks<B: AsRef<[f64]>>(blocks: &[B]) -> Result<Self> {
        let count = blocks.len();
        if count == 0 || !count.is_power_of_two() {
            return Err(Error::Domain(format!(
                "block count must be a power of two, got {count}"
            )));
        }
        let dim = blocks[0].as_ref().len();
        let mut coords = Vec::with_capacity(count * dim);
        for b in blocks {
            let b = b.as_ref();
            if b.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: b.len(),
                });
            }
            coords.extend_from_slice(b);
        }
        JetPoint::new(count.trailing_zeros() as usize, dim, coords)
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn block_count(&self) -> usize {
        1 << self.level
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    pub fn block(&self, b: usize) -> &[f64] {
        &self.coords[b * self.dim..(b + 1) * self.dim]
    }

    pub fn block_mut(&mut self, b: usize) -> &mut [f64] {
        let n = self.dim;
        &mut self.coords[b * n..(b + 1) * n]
    }

    /// Blocks with the top bit clear: the base point in `T^{r-1}M`.
    pub fn lower(&self) -> Result<JetPoint> {
        project(self)
    }

    /// Blocks with the top bit set: the fiber over the base point.
    pub fn upper(&self) -> Result<JetPoint> {
        if self.level == 0 {
            return Err(need_level("upper", ">= 1", 0));
        }
        let half = self.coords.len() / 2;
        Ok(JetPoint {
            level: self.level - 1,
            dim: self.dim,
            coords: self.coords[half..].to_vec(),
        })
    }

    /// `(base, fiber)` as one point one level up.
    pub fn join(base: &JetPoint, fiber: &JetPoint) -> Result<JetPoint> {
        if base.level != fiber.level {
            return Err(need_level("join", &format!("{}", base.level), fiber.level));
        }
        if base.dim != fiber.dim {
            return Err(Error::DimensionMismatch {
                expected: base.dim,
                got: fiber.dim,
            });
        }
        let mut coords = base.coords.clone();
        coords.extend_from_slice(&fiber.coords);
        Ok(JetPoint {
            level: base.level + 1,
            dim: base.dim,
            coords,
        })
    }

    /// One jet per base coordinate; block `b` becomes the coefficient of `ε^b`.
    pub fn to_jets(&self) -> Vec<Jet> {
        let blocks = self.block_count();
        (0..self.dim)
            .map(|i| {
                let c: Vec<f64> = (0..blocks).map(|b| self.coords[b * self.dim + i]).collect();
                Jet::from_coeffs(&c)
            })
            .collect()
    }

    /// Inverse of [`JetPoint::to_jets`]; coefficients past `level` are dropped.
    pub fn from_jets(level: usize, jets: &[Jet]) -> Result<JetPoint> {
        let dim = jets.len();
        let blocks = 1usize << level;
        let mut coords = vec![0.0; dim * blocks];
        for (i, j) in jets.iter().enumerate() {
            for b in 0..blocks {
                coords[b * dim + i] = j.coeff(b);
            }
        }
        JetPoint::new(level, dim, coords)
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(|v| v.is_finite())
    }

    /// Sup-norm distance; `INFINITY` if the shapes differ.
    pub fn max_abs_diff(&self, other: &JetPoint) -> f64 {
        if self.level != other.level || self.dim != other.dim {
            return f64::INFINITY;
        }
        max_abs_diff(&self.coords, &other.coords)
    }
}

pub(crate) fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub(crate) fn euclid(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn swap_mask_bits(m: usize, i: usize, j: usize) -> usize {
    let bi = (m >> i) & 1;
    let bj = (m >> j) & 1;
    if bi == bj {
        m
    } else {
        m ^ ((1 << i) | (1 << j))
    }
}

/// Reorders blocks: output block `b` is input block `source(b)`.
pub(crate) fn gather_blocks<T: Clone>(
    coords: &[T],
    dim: usize,
    out_blocks: usize,
    source: impl Fn(usize) -> usize,
) -> Vec<T> {
    let mut out = Vec::with_capacity(out_blocks * dim);
    for b in 0..out_blocks {
        let s = source(b);
        out.extend_from_slice(&coords[s * dim..(s + 1) * dim]);
    }
    out
}

pub(crate) fn kappa_coords<T: Clone>(level: usize, dim: usize, coords: &[T]) -> Vec<T> {
    if level < 2 {
        return coords.to_vec();
    }
    gather_blocks(coords, dim, 1 << level, |b| {
        swap_mask_bits(b, level - 1, level - 2)
    })
}

/// Keeps the blocks whose bit `level-2` is clear and closes the gap.
pub(crate) fn dproject_coords<T: Clone>(level: usize, dim: usize, coords: &[T]) -> Vec<T> {
    let k = level - 2;
    let low = (1usize << k) - 1;
    gather_blocks(coords, dim, 1 << (level - 1), |m| {
        (m & low) | ((m >> k) << (k + 1))
    })
}

/// Exchanges bits `i` and `j` of every block mask.
pub fn swap_bits(p: &JetPoint, i: usize, j: usize) -> Result<JetPoint> {
    if i >= p.level || j >= p.level {
        return Err(need_level("swap_bits", &format!("> {}", i.max(j)), p.level));
    }
    let n = p.block_count();
    Ok(JetPoint {
        level: p.level,
        dim: p.dim,
        coords: gather_blocks(&p.coords, p.dim, n, |b| swap_mask_bits(b, i, j)),
    })
}

/// Canonical involution `κ_r`: swaps the two outermost tangent levels.
/// `κ_1` is the identity.
pub fn kappa(p: &JetPoint) -> Result<JetPoint> {
    if p.level == 0 {
        return Err(need_level("kappa", ">= 1", 0));
    }
    Ok(JetPoint {
        level: p.level,
        dim: p.dim,
        coords: kappa_coords(p.level, p.dim, &p.coords),
    })
}

/// Canonical projection `π_{r-1}: T^rM → T^{r-1}M`.
pub fn project(p: &JetPoint) -> Result<JetPoint> {
    if p.level == 0 {
        return Err(need_level("project", ">= 1", 0));
    }
    let half = p.coords.len() / 2;
    Ok(JetPoint {
        level: p.level - 1,
        dim: p.dim,
        coords: p.coords[..half].to_vec(),
    })
}

/// The second projection `Dπ_{r-2}: T^rM → T^{r-1}M`; `(x,y,X,Y) ↦ (x,X)`.
pub fn dproject(p: &JetPoint) -> Result<JetPoint> {
    if p.level < 2 {
        return Err(need_level("dproject", ">= 2", p.level));
    }
    Ok(JetPoint {
        level: p.level - 1,
        dim: p.dim,
        coords: dproject_coords(p.level, p.dim, &p.coords),
    })
}

/// Liouville field `E_r(x,y) = (x,y,0,y)`.
pub fn liouville(p: &JetPoint) -> Result<JetPoint> {
    if p.level == 0 {
        return Err(need_level("liouville", ">= 1", 0));
    }
    let fiber = p.upper()?;
    let mut lifted = JetPoint::zeros(p.level, p.dim);
    let half = lifted.coords.len() / 2;
    lifted.coords[half..].copy_from_slice(&fiber.coords);
    JetPoint::join(p, &lifted)
}

/// Whether `p` lies in the slashed bundle `T^rM∖0`: the image of `p` in `TM`
/// under the iterated second projection has nonzero fiber. That fiber is the
/// block with only the top bit set. Every point of `M` counts as slashed.
pub fn is_slashed(p: &JetPoint) -> bool {
    if p.level == 0 {
        return true;
    }
    euclid(p.block(1 << (p.level - 1))) > EPS_SLASH
}

/// Tangent map of a linear block operation: applies `op` to base and fiber.
pub fn tangent_map(p: &JetPoint, op: impl Fn(&JetPoint) -> Result<JetPoint>) -> Result<JetPoint> {
    JetPoint::join(&op(&p.lower()?)?, &op(&p.upper()?)?)
}

/// `Dκ_r` on `T^{r+1}M`, as a pure block permutation (swaps bits `r-2`, `r-1`).
pub fn tangent_kappa(p: &JetPoint) -> Result<JetPoint> {
    if p.level < 2 {
        return Err(need_level("tangent_kappa", ">= 2", p.level));
    }
    if p.level == 2 {
        return Ok(p.clone());
    }
    swap_bits(p, p.level - 2, p.level - 3)
}

fn same_base(
    op: &'static str,
    p: &JetPoint,
    q: &JetPoint,
    fixed: impl Fn(usize) -> bool,
) -> Result<()> {
    if p.level != q.level || p.dim != q.dim {
        return Err(Error::Domain(format!("{op}: points have different shapes")));
    }
    for b in 0..p.block_count() {
        if fixed(b) && max_abs_diff(p.block(b), q.block(b)) > 0.0 {
            return Err(Error::Domain(format!(
                "{op}: points lie in different fibers (block {b:b} differs)"
            )));
        }
    }
    Ok(())
}

fn combine(p: &JetPoint, q: &JetPoint, a: f64, c: f64, active: impl Fn(usize) -> bool) -> JetPoint {
    let mut out = p.clone();
    for b in 0..p.block_count() {
        if active(b) {
            let (pb, qb) = (p.block(b), q.block(b));
            let ob: Vec<f64> = pb.iter().zip(qb).map(|(x, y)| a * x + c * y).collect();
            out.block_mut(b).copy_from_slice(&ob);
        }
    }
    out
}

/// Fiber combination `a·p + c·q` for the bundle `π_{r-1}`: `(x, a y + c ỹ)`.
pub fn fiber_combine(p: &JetPoint, a: f64, q: &JetPoint, c: f64) -> Result<JetPoint> {
    if p.level == 0 {
        return Err(need_level("fiber_combine", ">= 1", 0));
    }
    let top = 1 << (p.level - 1);
    same_base("fiber_combine", p, q, |b| b & top == 0)?;
    Ok(combine(p, q, a, c, |b| b & top != 0))
}

/// Scalar action `λ·(x,y) = (x, λy)`.
pub fn fiber_scale(p: &JetPoint, lambda: f64) -> Result<JetPoint> {
    fiber_combine(p, lambda, p, 0.0)
}

/// Fiber combination for the second bundle structure `Dπ_{r-2}`:
/// `(x, a y + c ỹ, X, a Y + c Ỹ)`.
pub fn dfiber_combine(p: &JetPoint, a: f64, q: &JetPoint, c: f64) -> Result<JetPoint> {
    if p.level < 2 {
        return Err(need_level("dfiber_combine", ">= 2", p.level));
    }
    let bit = 1 << (p.level - 2);
    same_base("dfiber_combine", p, q, |b| b & bit == 0)?;
    Ok(combine(p, q, a, c, |b| b & bit != 0))
}

/// Scalar action `λ·(x,y,X,Y) = (x, λy, X, λY)`.
pub fn dfiber_scale(p: &JetPoint, lambda: f64) -> Result<JetPoint> {
    dfiber_combine(p, lambda, p, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(c: &[f64]) -> JetPoint {
        JetPoint::new(c.len().trailing_zeros() as usize, 1, c.to_vec()).unwrap()
    }

    #[test]
    fn kappa_examples() {
        assert_eq!(
            kappa(&pt(&[1., 2., 3., 4.])).unwrap(),
            pt(&[1., 3., 2., 4.])
        );
        assert_eq!(
            kappa(&pt(&[1., 2., 3., 4., 5., 6., 7., 8.])).unwrap(),
            pt(&[1., 2., 5., 6., 3., 4., 7., 8.])
        );
        let p = pt(&[1., 2.]);
        assert_eq!(kappa(&p).unwrap(), p);
        assert!(matches!(kappa(&pt(&[1.])), Err(Error::InvalidLevel { .. })));
    }

    #[test]
    fn projection_examples() {
        assert_eq!(project(&pt(&[1., 2., 3., 4.])).unwrap(), pt(&[1., 2.]));
        let p = JetPoint::new(1, 2, vec![1., 2., 3., 4.]).unwrap();
        assert_eq!(
            project(&p).unwrap(),
            JetPoint::new(0, 2, vec![1., 2.]).unwrap()
        );
        let p8 = pt(&[1., 2., 3., 4., 5., 6., 7., 8.]);
        assert_eq!(project(&p8).unwrap(), pt(&[1., 2., 3., 4.]));
        assert!(project(&pt(&[1.])).is_err());
    }

    #[test]
    fn dproject_examples() {
        assert_eq!(dproject(&pt(&[1., 2., 3., 4.])).unwrap(), pt(&[1., 3.]));
        let p8 = pt(&[1., 2., 3., 4., 5., 6., 7., 8.]);
        assert_eq!(dproject(&p8).unwrap(), pt(&[1., 2., 5., 6.]));
        assert_eq!(
            dproject(&p8).unwrap(),
            project(&kappa(&p8).unwrap()).unwrap()
        );
        assert!(dproject(&pt(&[1., 2.])).is_err());
    }

    #[test]
    fn liouville_examples() {
        assert_eq!(liouville(&pt(&[1., 2.])).unwrap(), pt(&[1., 2., 0., 2.]));
        assert_eq!(
            liouville(&pt(&[1., 2., 3., 4.])).unwrap(),
            pt(&[1., 2., 3., 4., 0., 0., 3., 4.])
        );
        assert_eq!(liouville(&pt(&[1., 0.])).unwrap(), pt(&[1., 0., 0., 0.]));
    }

    #[test]
    fn slashed_examples() {
        assert!(is_slashed(&pt(&[1., 2.])));
        assert!(!is_slashed(&pt(&[1., 0.])));
        assert!(!is_slashed(&pt(&[1., 2., 0., 4.])));
        assert!(!is_slashed(&pt(&[1., 2., 3., 4., 0., 6., 7., 8.])));
        assert!(is_slashed(&pt(&[1., 2., 3., 4., 5., 6., 7., 8.])));
    }

    #[test]
    fn jets_round_trip_blocks() {
        let p = JetPoint::new(2, 2, (0..8).map(f64::from).collect()).unwrap();
        let jets = p.to_jets();
        assert_eq!(jets[0].coeffs(), &[0., 2., 4., 6.]);
        assert_eq!(JetPoint::from_jets(2, &jets).unwrap(), p);
    }

    #[test]
    fn fiber_structures() {
        let p = pt(&[1., 2., 3., 4.]);
        let q = pt(&[1., 5., 3., 7.]);
        assert!(fiber_combine(&p, 1.0, &q, 1.0).is_err());
        assert_eq!(
            dfiber_combine(&p, 1.0, &q, 1.0).unwrap(),
            pt(&[1., 7., 3., 11.])
        );
        assert_eq!(dfiber_scale(&p, 2.0).unwrap(), pt(&[1., 4., 3., 8.]));
        assert_eq!(fiber_scale(&p, 2.0).unwrap(), pt(&[1., 2., 6., 8.]));
    }

    #[test]
    fn tangent_kappa_matches_tangent_map() {
        let p = JetPoint::new(4, 1, (0..16).map(f64::from).collect()).unwrap();
        assert_eq!(tangent_kappa(&p).unwrap(), tangent_map(&p, kappa).unwrap());
        let p3 = pt(&[1., 2., 3., 4., 5., 6., 7., 8.]);
        assert_eq!(
            tangent_kappa(&p3).unwrap(),
            tangent_map(&p3, kappa).unwrap()
        );
    }
}
