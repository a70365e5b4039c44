use serde::{Deserialize, Serialize};

use super::{HoloError, Holomorphic, Polynomial};
use crate::C64;

/// Relative tolerance for cancelling common roots of numerator and denominator.
pub const CANCEL_TOL: f64 = 1e-10;
/// Roots of numerator or denominator closer than this (times `max(1, |p|)`) count as the same point.
const POINT_TOL: f64 = 1e-6;

/// Quotient of complex polynomials in normal form: no common roots within
/// [`CANCEL_TOL`] and a monic denominator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawRational", into = "RawRational")]
pub struct RationalMap {
    num: Polynomial,
    den: Polynomial,
}

#[derive(Serialize, Deserialize)]
struct RawRational {
    num: Polynomial,
    den: Polynomial,
}

impl TryFrom<RawRational> for RationalMap {
    type Error = HoloError;
    fn try_from(r: RawRational) -> Result<Self, HoloError> {
        RationalMap::new(r.num, r.den)
    }
}

impl From<RationalMap> for RawRational {
    fn from(r: RationalMap) -> Self {
        RawRational {
            num: r.num,
            den: r.den,
        }
    }
}

impl RationalMap {
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self, HoloError> {
        if den.is_zero() {
            return Err(HoloError::ZeroDenominator);
        }
        Ok(Self::normalized(num, den))
    }

    fn normalized(num: Polynomial, den: Polynomial) -> Self {
        if num.is_zero() {
            return Self {
                num,
                den: Polynomial::one(),
            };
        }
        let g = Polynomial::gcd(&num, &den, CANCEL_TOL);
        let (num, den) = if g.degree().unwrap_or(0) > 0 {
            (num.div_rem(&g).0, den.div_rem(&g).0)
        } else {
            (num, den)
        };
        let lead = den.leading();
        let inv = C64::new(1.0, 0.0) / lead;
        Self {
            num: num.scale(inv),
            den: den.scale(inv),
        }
    }

    pub fn from_polynomial(p: Polynomial) -> Self {
        Self::normalized(p, Polynomial::one())
    }

    pub fn constant(c: C64) -> Self {
        Self::from_polynomial(Polynomial::constant(c))
    }

    pub fn zero() -> Self {
        Self::from_polynomial(Polynomial::zero())
    }

    pub fn one() -> Self {
        Self::constant(C64::new(1.0, 0.0))
    }

    /// The identity map `z`.
    pub fn z() -> Self {
        Self::from_polynomial(Polynomial::z())
    }

    /// `1 / (z - a)`.
    pub fn cauchy(a: C64) -> Self {
        Self::normalized(Polynomial::one(), Polynomial::linear_root(a))
    }

    pub fn num(&self) -> &Polynomial {
        &self.num
    }

    pub fn den(&self) -> &Polynomial {
        &self.den
    }

    /// Re-normalizes; a no-op on values already in normal form.
    pub fn normalize(&self) -> Self {
        Self::normalized(self.num.clone(), self.den.clone())
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// The value if the map is constant.
    pub fn as_constant(&self) -> Option<C64> {
        match (self.num.degree(), self.den.degree()) {
            (None, _) => Some(C64::new(0.0, 0.0)),
            (Some(0), Some(0)) => Some(self.num.coeffs()[0] / self.den.coeffs()[0]),
            _ => None,
        }
    }

    pub fn eval(&self, z: C64) -> Result<C64, HoloError> {
        let d = self.den.eval(z);
        if d.norm() < 1e-14 * self.den.eval_scale(z) || d.norm() == 0.0 {
            return Err(HoloError::NearPole { z });
        }
        Ok(self.num.eval(z) / d)
    }

    pub fn eval_with_derivative(&self, z: C64) -> Result<(C64, C64), HoloError> {
        let (n, dn) = self.num.eval_with_derivative(z);
        let (d, dd) = self.den.eval_with_derivative(z);
        if d.norm() < 1e-14 * self.den.eval_scale(z) || d.norm() == 0.0 {
            return Err(HoloError::NearPole { z });
        }
        let v = n / d;
        Ok((v, (dn - v * dd) / d))
    }

    /// Quotient-rule derivative, normalized.
    pub fn derivative(&self) -> Self {
        let top = &(&self.num.derivative() * &self.den) - &(&self.num * &self.den.derivative());
        Self::normalized(top, &self.den * &self.den)
    }

    pub fn add(&self, o: &Self) -> Self {
        if self.den == o.den {
            return Self::normalized(&self.num + &o.num, self.den.clone());
        }
        Self::normalized(
            super::poly::poly_sum(&[&self.num * &o.den, &o.num * &self.den]),
            &self.den * &o.den,
        )
    }

    pub fn neg(&self) -> Self {
        Self {
            num: -&self.num,
            den: self.den.clone(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self::normalized(&self.num * &o.num, &self.den * &o.den)
    }

    pub fn div(&self, o: &Self) -> Result<Self, HoloError> {
        if o.is_zero() {
            return Err(HoloError::ZeroDenominator);
        }
        Ok(Self::normalized(&self.num * &o.den, &self.den * &o.num))
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::normalized(self.num.scale(s), self.den.clone())
    }

    /// Integer power; negative exponents invert.
    pub fn powi(&self, k: i32) -> Result<Self, HoloError> {
        let base = if k < 0 {
            Self::one().div(self)?
        } else {
            self.clone()
        };
        let p = k.unsigned_abs();
        Ok(Self::normalized(base.num.powi(p), base.den.powi(p)))
    }

    /// Zeros with multiplicity.
    pub fn zeros(&self) -> Vec<(C64, usize)> {
        self.num.roots_clustered()
    }

    /// Poles with multiplicity.
    pub fn poles(&self) -> Vec<(C64, usize)> {
        self.den.roots_clustered()
    }

    /// Order at `p`: positive for a zero, negative for a pole, 0 otherwise.
    /// The zero map has order `i64::MAX` everywhere.
    pub fn order_at(&self, p: C64) -> i64 {
        if self.is_zero() {
            return i64::MAX;
        }
        let tol = POINT_TOL * p.norm().max(1.0);
        let count = |roots: Vec<(C64, usize)>| -> i64 {
            roots
                .iter()
                .filter(|(r, _)| (r - p).norm() < tol)
                .map(|(_, m)| *m as i64)
                .sum()
        };
        count(self.zeros()) - count(self.poles())
    }

    /// `(pole, multiplicity, residue)` for every pole.
    pub fn residues(&self) -> Vec<(C64, usize, C64)> {
        self.poles()
            .into_iter()
            .map(|(p, m)| {
                let mut q = self.den.clone();
                for _ in 0..m {
                    q = q.deflate(p).0;
                }
                let nt = self.num.taylor_shift(p);
                let qt = q.taylor_shift(p);
                let get = |v: &[C64], k: usize| v.get(k).copied().unwrap_or_default();
                let mut r: Vec<C64> = Vec::with_capacity(m);
                for k in 0..m {
                    let mut acc = get(&nt, k);
                    for i in 1..=k {
                        acc -= get(&qt, i) * r[k - i];
                    }
                    r.push(acc / qt[0]);
                }
                (p, m, r[m - 1])
            })
            .collect()
    }

    /// `2πi` times the sum of residues at poles strictly inside the circle.
    pub fn residue_integral(&self, center: C64, radius: f64) -> C64 {
        let s: C64 = self
            .residues()
            .into_iter()
            .filter(|(p, _, _)| (p - center).norm() < radius)
            .map(|(_, _, r)| r)
            .sum();
        C64::new(0.0, std::f64::consts::TAU) * s
    }

    /// Coefficientwise comparison of normal forms.
    pub fn approx_eq(&self, o: &Self, tol: f64) -> bool {
        let close = |a: &Polynomial, b: &Polynomial| {
            let n = a.coeffs().len().max(b.coeffs().len());
            (0..n).all(|k| {
                let x = a.coeffs().get(k).copied().unwrap_or_default();
                let y = b.coeffs().get(k).copied().unwrap_or_default();
                (x - y).norm() <= tol * (1.0 + x.norm().max(y.norm()))
            })
        };
        close(&self.num, &o.num) && close(&self.den, &o.den)
    }
}

impl Holomorphic for RationalMap {
    fn eval(&self, z: C64) -> Result<C64, HoloError> {
        RationalMap::eval(self, z)
    }

    fn eval_with_derivative(&self, z: C64) -> Result<(C64, C64), HoloError> {
        RationalMap::eval_with_derivative(self, z)
    }
}
