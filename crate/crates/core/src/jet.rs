//! Truncated Taylor jets in several nilpotent infinitesimals.
//!
//! A [`Jet`] of depth `k` is an element of `R[ε₀, …, ε_{k-1}] / (ε_i²)`,
//! stored as `2^k` coefficients indexed by bitmask: coefficient `m` multiplies
//! the monomial `∏_{i ∈ m} ε_i`. A coordinate of a point in `T^kM` is exactly
//! such a jet, which is what lets tangent maps of arbitrary order be computed
//! by evaluating a map on jets.
//!
//! Jets of different depth can be mixed freely; a shallower jet is treated as
//! independent of the missing infinitesimals (its coefficients there are zero).

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use smallvec::SmallVec;

type Coeffs = SmallVec<[f64; 8]>;

/// Real scalar arithmetic shared by `f64` and [`Jet`].
///
/// Built-in coefficient functions are written once against this trait and
/// evaluated either on plain reals or on jets.
pub trait Scalar:
    Clone
    + fmt::Debug
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
{
    fn cst(v: f64) -> Self;
    /// The real part (value at zero infinitesimals).
    fn re(&self) -> f64;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn abs(&self) -> Self;
    fn recip(&self) -> Self;
    fn powi(&self, n: i32) -> Self;
}

impl Scalar for f64 {
    fn cst(v: f64) -> Self {
        v
    }
    fn re(&self) -> f64 {
        *self
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn ln(&self) -> Self {
        f64::ln(*self)
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn recip(&self) -> Self {
        f64::recip(*self)
    }
    fn powi(&self, n: i32) -> Self {
        f64::powi(*self, n)
    }
}

/// Euclidean norm of a vector of scalars.
pub fn norm<T: Scalar>(v: &[T]) -> T {
    let mut acc = T::cst(0.0);
    for x in v {
        acc = acc + x.clone() * x.clone();
    }
    acc.sqrt()
}

#[derive(Clone, PartialEq)]
pub struct Jet {
    c: Coeffs,
}

impl Jet {
    pub fn constant(v: f64) -> Self {
        let mut c = Coeffs::new();
        c.push(v);
        Jet { c }
    }

    /// Builds a jet from its `2^k` coefficients.
    ///
    /// # Panics
    /// If the length is not a power of two.
    pub fn from_coeffs(coeffs: &[f64]) -> Self {
        assert!(
            coeffs.len().is_power_of_two(),
            "jet coefficient count must be a power of two, got {}",
            coeffs.len()
        );
        Jet {
            c: Coeffs::from_slice(coeffs),
        }
    }

    /// `v + ε_i`, the seed for differentiating in direction `i`.
    pub fn variable(v: f64, i: usize) -> Self {
        let mut c = Coeffs::from_elem(0.0, 1 << (i + 1));
        c[0] = v;
        c[1 << i] = 1.0;
        Jet { c }
    }

    pub fn depth(&self) -> usize {
        self.c.len().trailing_zeros() as usize
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    /// Coefficient of the monomial `m`; zero past the stored depth.
    pub fn coeff(&self, m: usize) -> f64 {
        self.c.get(m).copied().unwrap_or(0.0)
    }

    /// Zero-extends (or keeps) the jet to exactly `depth` infinitesimals.
    ///
    /// Coefficients above `depth` are dropped.
    pub fn with_depth(&self, depth: usize) -> Jet {
        let len = 1usize << depth;
        let mut c = Coeffs::from_elem(0.0, len);
        for (m, slot) in c.iter_mut().enumerate() {
            *slot = self.coeff(m);
        }
        Jet { c }
    }

    /// `lo + ε_k · hi`, where `k` is the new highest infinitesimal.
    pub fn extend(lo: &Jet, hi: &Jet, k: usize) -> Jet {
        let half = 1usize << k;
        let mut c = Coeffs::from_elem(0.0, half << 1);
        for m in 0..half {
            c[m] = lo.coeff(m);
            c[half + m] = hi.coeff(m);
        }
        Jet { c }
    }

    /// Inverse of [`Jet::extend`]: the parts free of and linear in `ε_k`.
    pub fn split(&self, k: usize) -> (Jet, Jet) {
        let half = 1usize << k;
        let mut lo = Coeffs::from_elem(0.0, half);
        let mut hi = Coeffs::from_elem(0.0, half);
        for m in 0..half {
            lo[m] = self.coeff(m);
            hi[m] = self.coeff(half + m);
        }
        (Jet { c: lo }, Jet { c: hi })
    }

    pub fn is_finite(&self) -> bool {
        self.c.iter().all(|v| v.is_finite())
    }

    fn zip_with(&self, rhs: &Jet, f: impl Fn(f64, f64) -> f64) -> Jet {
        let len = self.c.len().max(rhs.c.len());
        let c = (0..len).map(|m| f(self.coeff(m), rhs.coeff(m))).collect();
        Jet { c }
    }

    fn scale(&self, k: f64) -> Jet {
        Jet {
            c: self.c.iter().map(|v| v * k).collect(),
        }
    }

    fn mul_jet(&self, rhs: &Jet) -> Jet {
        if rhs.c.len() == 1 {
            return self.scale(rhs.c[0]);
        }
        if self.c.len() == 1 {
            return rhs.scale(self.c[0]);
        }
        let len = self.c.len().max(rhs.c.len());
        let mut c = Coeffs::from_elem(0.0, len);
        for (m, slot) in c.iter_mut().enumerate() {
            // subset convolution: sum over s ⊆ m of a[s]·b[m∖s]
            let mut s = m;
            let mut acc = 0.0;
            loop {
                acc += self.coeff(s) * rhs.coeff(m ^ s);
                if s == 0 {
                    break;
                }
                s = (s - 1) & m;
            }
            *slot = acc;
        }
        Jet { c }
    }

    /// Applies a smooth function given by its derivatives at the real part:
    /// `f(a + n) = Σ_j f⁽ʲ⁾(a)/j! · nʲ`, exact because `n^(depth+1) = 0`.
    fn compose(&self, derivs: impl Fn(usize) -> f64) -> Jet {
        let depth = self.depth();
        let mut out = Jet::constant(derivs(0));
        if depth == 0 {
            return out;
        }
        let mut nil = self.clone();
        nil.c[0] = 0.0;
        let mut power = Jet::constant(1.0);
        let mut factorial = 1.0;
        for j in 1..=depth {
            power = power.mul_jet(&nil);
            factorial *= j as f64;
            out = out.zip_with(&power.scale(derivs(j) / factorial), |a, b| a + b);
        }
        out
    }
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Jet{:?}", self.c.as_slice())
    }
}

impl From<f64> for Jet {
    fn from(v: f64) -> Self {
        Jet::constant(v)
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        self.zip_with(&rhs, |a, b| a + b)
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        self.zip_with(&rhs, |a, b| a - b)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        self.mul_jet(&rhs)
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, rhs: Jet) -> Jet {
        if rhs.c.len() == 1 {
            return self.scale(1.0 / rhs.c[0]);
        }
        self.mul_jet(&rhs.recip())
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: f64) -> Jet {
        self.c[0] += rhs;
        self
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: f64) -> Jet {
        self.c[0] -= rhs;
        self
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Scalar for Jet {
    fn cst(v: f64) -> Self {
        Jet::constant(v)
    }

    fn re(&self) -> f64 {
        self.c[0]
    }

    fn sin(&self) -> Self {
        let (s, c) = self.c[0].sin_cos();
        self.compose(|j| match j % 4 {
            0 => s,
            1 => c,
            2 => -s,
            _ => -c,
        })
    }

    fn cos(&self) -> Self {
        let (s, c) = self.c[0].sin_cos();
        self.compose(|j| match j % 4 {
            0 => c,
            1 => -s,
            2 => -c,
            _ => s,
        })
    }

    fn exp(&self) -> Self {
        let e = self.c[0].exp();
        self.compose(|_| e)
    }

    fn ln(&self) -> Self {
        let a = self.c[0];
        self.compose(|j| {
            if j == 0 {
                a.ln()
            } else {
                // (-1)^(j-1) (j-1)! / a^j
                let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
                sign * factorial(j - 1) / a.powi(j as i32)
            }
        })
    }

    fn sqrt(&self) -> Self {
        let a = self.c[0];
        self.compose(|j| falling(0.5, j) * a.powf(0.5 - j as f64))
    }

    fn abs(&self) -> Self {
        if self.c[0] < 0.0 {
            -self.clone()
        } else {
            self.clone()
        }
    }

    fn recip(&self) -> Self {
        let a = self.c[0];
        self.compose(|j| {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            sign * factorial(j) / a.powi(j as i32 + 1)
        })
    }

    fn powi(&self, n: i32) -> Self {
        if n < 0 {
            return self.recip().powi(-n);
        }
        let mut base = self.clone();
        let mut acc = Jet::constant(1.0);
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_jet(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_jet(&base);
            }
        }
        acc
    }
}

fn factorial(j: usize) -> f64 {
    (1..=j).map(|k| k as f64).product()
}

/// `p (p-1) ⋯ (p-j+1)`
fn falling(p: f64, j: usize) -> f64 {
    (0..j).map(|k| p - k as f64).product()
}
