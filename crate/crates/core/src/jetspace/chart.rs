use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::jet::Jet;

use super::point::JetPoint;

/// A smooth change of coordinates `x ↦ x̃` on `R^n` with its inverse.
///
/// `forward` and `inverse` act on jets so that tangent maps of any order come
/// for free. `jacobian` and `hessian` are analytic and are used only as an
/// independent check on the jet computation.
pub trait ChartMap: Send + Sync {
    fn name(&self) -> String;
    fn dim(&self) -> usize;
    fn forward(&self, x: &[Jet]) -> Vec<Jet>;
    fn inverse(&self, x: &[Jet]) -> Vec<Jet>;
    /// Row-major `∂x̃^i/∂x^a`, index `i*n + a`.
    fn jacobian(&self, x: &[f64]) -> Vec<f64>;
    /// `∂²x̃^i/∂x^a∂x^b`, index `(i*n + a)*n + b`.
    fn hessian(&self, x: &[f64]) -> Vec<f64>;
    fn in_domain(&self, _x: &[f64]) -> bool {
        true
    }
    /// Whether `x̃` lies in the image of the forward map.
    fn in_range(&self, _x: &[f64]) -> bool {
        true
    }
}

#[derive(Clone)]
pub struct ChartTransition(pub Arc<dyn ChartMap>);

impl fmt::Debug for ChartTransition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ChartTransition({})", self.0.name())
    }
}

impl ChartTransition {
    pub fn new(map: impl ChartMap + 'static) -> Self {
        ChartTransition(Arc::new(map))
    }

    pub fn identity(n: usize) -> Self {
        Self::new(IdentityChart(n))
    }

    /// `(x⁰ + k (x¹)², x¹)` on `R²`.
    pub fn quadratic_shear(k: f64) -> Self {
        Self::new(QuadraticShear(k))
    }

    pub fn map(&self) -> &dyn ChartMap {
        &*self.0
    }

    /// The forward map on a plain chart point.
    pub fn forward_point(&self, x: &[f64]) -> Vec<f64> {
        let jets: Vec<Jet> = x.iter().map(|&v| Jet::constant(v)).collect();
        self.0.forward(&jets).iter().map(|j| j.coeff(0)).collect()
    }

    pub fn inverse_point(&self, x: &[f64]) -> Vec<f64> {
        let jets: Vec<Jet> = x.iter().map(|&v| Jet::constant(v)).collect();
        self.0.inverse(&jets).iter().map(|j| j.coeff(0)).collect()
    }

    /// Same transition with forward and inverse exchanged.
    pub fn inverted(&self) -> ChartTransition {
        ChartTransition::new(Inverted(self.clone()))
    }
}

fn check(t: &ChartTransition, p: &JetPoint) -> Result<()> {
    if p.dim() != t.0.dim() {
        return Err(Error::DimensionMismatch {
            expected: t.0.dim(),
            got: p.dim(),
        });
    }
    Ok(())
}

/// The `r`-fold tangent map `T^r t` applied to a point of `T^rM`.
pub fn pushforward(t: &ChartTransition, p: &JetPoint) -> Result<JetPoint> {
    check(t, p)?;
    if !t.0.in_domain(p.block(0)) {
        return Err(Error::Domain(format!(
            "base point {:?} outside the domain of {}",
            p.block(0),
            t.0.name()
        )));
    }
    JetPoint::from_jets(p.level(), &t.0.forward(&p.to_jets()))
}

/// The `r`-fold tangent map of the inverse transition.
pub fn pullback(t: &ChartTransition, p: &JetPoint) -> Result<JetPoint> {
    check(t, p)?;
    if !t.0.in_range(p.block(0)) {
        return Err(Error::Domain(format!(
            "base point {:?} outside the range of {}",
            p.block(0),
            t.0.name()
        )));
    }
    JetPoint::from_jets(p.level(), &t.0.inverse(&p.to_jets()))
}

#[derive(Debug, Clone, Copy)]
pub struct IdentityChart(pub usize);

impl ChartMap for IdentityChart {
    fn name(&self) -> String {
        "identity".into()
    }
    fn dim(&self) -> usize {
        self.0
    }
    fn forward(&self, x: &[Jet]) -> Vec<Jet> {
        x.to_vec()
    }
    fn inverse(&self, x: &[Jet]) -> Vec<Jet> {
        x.to_vec()
    }
    fn jacobian(&self, _x: &[f64]) -> Vec<f64> {
        let n = self.0;
        (0..n * n)
            .map(|k| if k / n == k % n { 1.0 } else { 0.0 })
            .collect()
    }
    fn hessian(&self, _x: &[f64]) -> Vec<f64> {
        vec![0.0; self.0.pow(3)]
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadraticShear(pub f64);

impl ChartMap for QuadraticShear {
    fn name(&self) -> String {
        format!("quadratic-shear({})", self.0)
    }
    fn dim(&self) -> usize {
        2
    }
    fn forward(&self, x: &[Jet]) -> Vec<Jet> {
        vec![
            x[0].clone() + x[1].clone() * x[1].clone() * self.0,
            x[1].clone(),
        ]
    }
    fn inverse(&self, x: &[Jet]) -> Vec<Jet> {
        vec![
            x[0].clone() - x[1].clone() * x[1].clone() * self.0,
            x[1].clone(),
        ]
    }
    fn jacobian(&self, x: &[f64]) -> Vec<f64> {
        vec![1.0, 2.0 * self.0 * x[1], 0.0, 1.0]
    }
    fn hessian(&self, _x: &[f64]) -> Vec<f64> {
        let mut h = vec![0.0; 8];
        h[3] = 2.0 * self.0; // i=0, a=1, b=1
        h
    }
}

struct Inverted(ChartTransition);

impl ChartMap for Inverted {
    fn name(&self) -> String {
        format!("inverse({})", self.0 .0.name())
    }
    fn dim(&self) -> usize {
        self.0 .0.dim()
    }
    fn forward(&self, x: &[Jet]) -> Vec<Jet> {
        self.0 .0.inverse(x)
    }
    fn inverse(&self, x: &[Jet]) -> Vec<Jet> {
        self.0 .0.forward(x)
    }
    fn jacobian(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let xf = self.0.inverse_point(x);
        let j = nalgebra::DMatrix::from_row_slice(n, n, &self.0 .0.jacobian(&xf));
        let inv = j
            .try_inverse()
            .unwrap_or_else(|| nalgebra::DMatrix::from_element(n, n, f64::NAN));
        inv.transpose().as_slice().to_vec()
    }
    fn hessian(&self, x: &[f64]) -> Vec<f64> {
        // second derivatives of the inverse, read off a depth-2 jet
        let n = self.dim();
        let mut h = vec![0.0; n * n * n];
        for a in 0..n {
            for b in 0..n {
                let jets: Vec<Jet> = (0..n)
                    .map(|k| {
                        let mut c = [x[k], 0.0, 0.0, 0.0];
                        if k == a {
                            c[1] = 1.0;
                        }
                        if k == b {
                            c[2] = 1.0;
                        }
                        Jet::from_coeffs(&c)
                    })
                    .collect();
                for (i, out) in self.forward(&jets).iter().enumerate() {
                    h[(i * n + a) * n + b] = out.coeff(3);
                }
            }
        }
        h
    }
    fn in_domain(&self, x: &[f64]) -> bool {
        self.0 .0.in_range(x)
    }
    fn in_range(&self, x: &[f64]) -> bool {
        self.0 .0.in_domain(x)
    }
}
