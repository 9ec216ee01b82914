//! Vertical and complete lifts of scalar fields.
//!
//! A field on `T^rM` is evaluated on jet-valued coordinates, so a lift is just
//! another field one level up: the vertical lift reads the base of the second
//! vector structure, the complete lift adds one infinitesimal and keeps the
//! linear part. Lifts nest without limit.

use std::sync::Arc;

use crate::error::{need_level, Error, Result};
use crate::jet::Jet;

use super::point::{dproject_coords, is_slashed, kappa_coords, JetPoint};

/// A smooth scalar function on (an open subset of) `T^rM` in one chart.
pub trait ScalarField: Send + Sync {
    fn level(&self) -> usize;
    fn dim(&self) -> usize;
    /// `coords` holds the `2^level · dim` chart coordinates in block order.
    fn eval(&self, coords: &[Jet]) -> Jet;
}

type JetFn = dyn Fn(&[Jet]) -> Jet + Send + Sync;

/// A field given by a closure over jet coordinates.
#[derive(Clone)]
pub struct FnField {
    level: usize,
    dim: usize,
    f: Arc<JetFn>,
}

impl FnField {
    pub fn new(
        level: usize,
        dim: usize,
        f: impl Fn(&[Jet]) -> Jet + Send + Sync + 'static,
    ) -> Self {
        FnField {
            level,
            dim,
            f: Arc::new(f),
        }
    }
}

impl ScalarField for FnField {
    fn level(&self) -> usize {
        self.level
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, coords: &[Jet]) -> Jet {
        (self.f)(coords)
    }
}

fn max_depth(coords: &[Jet]) -> usize {
    coords.iter().map(Jet::depth).max().unwrap_or(0)
}

/// The lift `f^v` as a field on `T^{r+1}M`.
#[derive(Clone)]
pub struct VerticalLift<F>(pub F);

impl<F: ScalarField> ScalarField for VerticalLift<F> {
    fn level(&self) -> usize {
        self.0.level() + 1
    }
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn eval(&self, coords: &[Jet]) -> Jet {
        let r = self.0.level();
        let n = self.0.dim();
        if r == 0 {
            self.0.eval(&coords[..n])
        } else {
            self.0.eval(&dproject_coords(r + 1, n, coords))
        }
    }
}

/// The lift `f^c` as a field on `T^{r+1}M`.
#[derive(Clone)]
pub struct CompleteLift<F>(pub F);

impl<F: ScalarField> ScalarField for CompleteLift<F> {
    fn level(&self) -> usize {
        self.0.level() + 1
    }
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn eval(&self, coords: &[Jet]) -> Jet {
        let r = self.0.level();
        let n = self.0.dim();
        let twisted = kappa_coords(r + 1, n, coords);
        let half = twisted.len() / 2;
        let k = max_depth(coords);
        let probe: Vec<Jet> = (0..half)
            .map(|i| Jet::extend(&twisted[i], &twisted[half + i], k))
            .collect();
        self.0.eval(&probe).split(k).1
    }
}

fn check_lift_input(op: &'static str, f: &dyn ScalarField, p: &JetPoint) -> Result<()> {
    if p.level() != f.level() + 1 {
        return Err(need_level(op, &format!("{}", f.level() + 1), p.level()));
    }
    if p.dim() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: p.dim(),
        });
    }
    if !is_slashed(p) {
        return Err(Error::Domain(format!(
            "{op}: point is not in the slashed bundle"
        )));
    }
    Ok(())
}

fn real_coords(p: &JetPoint) -> Vec<Jet> {
    p.coords().iter().map(|&v| Jet::constant(v)).collect()
}

/// `f^v(p)` for `f` on `T^rM` and `p` in `T^{r+1}M∖0`.
pub fn vlift_fn<F: ScalarField + Clone>(f: &F, p: &JetPoint) -> Result<f64> {
    check_lift_input("vlift_fn", f, p)?;
    Ok(VerticalLift(f.clone()).eval(&real_coords(p)).coeff(0))
}

/// `f^c(p)` for `f` on `T^rM` and `p` in `T^{r+1}M∖0`.
pub fn clift_fn<F: ScalarField + Clone>(f: &F, p: &JetPoint) -> Result<f64> {
    check_lift_input("clift_fn", f, p)?;
    Ok(CompleteLift(f.clone()).eval(&real_coords(p)).coeff(0))
}

/// Evaluates any field at a real point.
pub fn eval_field(f: &dyn ScalarField, p: &JetPoint) -> Result<f64> {
    if p.level() != f.level() || p.dim() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim() << f.level(),
            got: p.coords().len(),
        });
    }
    Ok(f.eval(&real_coords(p)).coeff(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::Scalar;

    fn xy() -> FnField {
        FnField::new(1, 1, |c| c[0].clone() * c[1].clone())
    }

    fn sq() -> FnField {
        FnField::new(0, 1, |c| c[0].clone() * c[0].clone())
    }

    #[test]
    fn vertical_examples() {
        let p = JetPoint::new(2, 1, vec![1., 2., 3., 4.]).unwrap();
        assert_eq!(vlift_fn(&xy(), &p).unwrap(), 3.0);
        let q = JetPoint::new(1, 1, vec![1., 5.]).unwrap();
        assert_eq!(vlift_fn(&sq(), &q).unwrap(), 1.0);
        let c = FnField::new(1, 1, |_| Jet::constant(7.0));
        assert_eq!(vlift_fn(&c, &p).unwrap(), 7.0);
    }

    #[test]
    fn complete_examples() {
        let p = JetPoint::new(2, 1, vec![1., 2., 3., 4.]).unwrap();
        assert_eq!(clift_fn(&xy(), &p).unwrap(), 10.0);
        let q = JetPoint::new(1, 1, vec![3., 2.]).unwrap();
        assert_eq!(clift_fn(&sq(), &q).unwrap(), 12.0);
    }

    #[test]
    fn rejects_zero_section() {
        let p = JetPoint::new(2, 1, vec![1., 2., 0., 4.]).unwrap();
        assert!(matches!(clift_fn(&xy(), &p), Err(Error::Domain(_))));
        assert!(matches!(vlift_fn(&xy(), &p), Err(Error::Domain(_))));
    }

    #[test]
    fn complete_lift_is_differential_on_base() {
        // f^c = df for functions on M
        let f = FnField::new(0, 2, |c| c[0].sin() * c[1].exp());
        let p = JetPoint::new(1, 2, vec![0.3, -0.4, 1.5, 2.0]).unwrap();
        let (x, y) = (0.3f64, -0.4f64);
        let expected = x.cos() * y.exp() * 1.5 + x.sin() * y.exp() * 2.0;
        assert!((clift_fn(&f, &p).unwrap() - expected).abs() < 1e-14);
    }
}
