use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::C64;

const EPS: f64 = f64::EPSILON;
/// Coefficients below this multiple of their rounding bound are treated as exact cancellation.
const CANCEL: f64 = 32.0 * EPS;

/// Dense complex polynomial, coefficients in ascending order.
///
/// The leading coefficient is nonzero unless the polynomial is zero, which is
/// stored as an empty coefficient list. Arithmetic zeroes out coefficients
/// that are pure rounding noise of an exact cancellation.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "Vec<C64>", into = "Vec<C64>")]
pub struct Polynomial {
    coeffs: Vec<C64>,
}

impl From<Vec<C64>> for Polynomial {
    fn from(v: Vec<C64>) -> Self {
        Self::new(v)
    }
}

impl From<Polynomial> for Vec<C64> {
    fn from(p: Polynomial) -> Self {
        p.coeffs
    }
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<C64>) -> Self {
        while coeffs.last().is_some_and(|c| *c == C64::new(0.0, 0.0)) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: C64) -> Self {
        Self::new(vec![c])
    }

    pub fn one() -> Self {
        Self::constant(C64::new(1.0, 0.0))
    }

    /// The identity polynomial `z`.
    pub fn z() -> Self {
        Self::new(vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)])
    }

    /// `z - a`.
    pub fn linear_root(a: C64) -> Self {
        Self::new(vec![-a, C64::new(1.0, 0.0)])
    }

    /// `∏ (z - r)` over the given roots.
    pub fn from_roots(roots: &[C64]) -> Self {
        roots
            .iter()
            .fold(Self::one(), |acc, r| &acc * &Self::linear_root(*r))
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> C64 {
        self.coeffs.last().copied().unwrap_or_default()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.coeffs
            .iter()
            .rev()
            .fold(C64::new(0.0, 0.0), |acc, c| acc * z + c)
    }

    /// `(p(z), p'(z))` by a single Horner sweep.
    pub fn eval_with_derivative(&self, z: C64) -> (C64, C64) {
        let mut p = C64::new(0.0, 0.0);
        let mut dp = C64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    /// `Σ |c_k| |z|^k`, the natural rounding scale of [`Polynomial::eval`].
    pub fn eval_scale(&self, z: C64) -> f64 {
        let r = z.norm();
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * r + c.norm())
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * k as f64)
                .collect(),
        )
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn powi(&self, k: u32) -> Self {
        (0..k).fold(Self::one(), |acc, _| &acc * self)
    }

    /// Monic multiple; the zero polynomial is returned unchanged.
    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(C64::new(1.0, 0.0) / self.leading())
    }

    /// Drops leading coefficients below `tol * max_abs`.
    pub fn trim_relative(&self, tol: f64) -> Self {
        let cut = tol * self.max_abs();
        let mut c = self.coeffs.clone();
        while c.last().is_some_and(|x| x.norm() <= cut) {
            c.pop();
        }
        Self::new(c)
    }

    /// Euclidean division `self = q * d + r` with `deg r < deg d`.
    pub fn div_rem(&self, d: &Polynomial) -> (Polynomial, Polynomial) {
        assert!(!d.is_zero(), "division by the zero polynomial");
        let dd = d.coeffs.len() - 1;
        if self.coeffs.len() <= dd {
            return (Self::zero(), self.clone());
        }
        let mut rem = self.coeffs.clone();
        let lead = d.leading();
        let mut q = vec![C64::new(0.0, 0.0); rem.len() - dd];
        for k in (0..q.len()).rev() {
            let c = rem[k + dd] / lead;
            q[k] = c;
            for (j, dj) in d.coeffs.iter().enumerate() {
                rem[k + j] -= c * dj;
            }
            rem[k + dd] = C64::new(0.0, 0.0);
        }
        rem.truncate(dd);
        (Self::new(q), Self::new(rem))
    }

    /// Divides out `(z - a)` once by synthetic division, returning quotient and remainder.
    pub fn deflate(&self, a: C64) -> (Polynomial, C64) {
        if self.is_zero() {
            return (Self::zero(), C64::new(0.0, 0.0));
        }
        let n = self.coeffs.len();
        let mut q = vec![C64::new(0.0, 0.0); n - 1];
        let mut carry = C64::new(0.0, 0.0);
        for k in (0..n).rev() {
            let v = self.coeffs[k] + carry * a;
            if k == 0 {
                return (Self::new(q), v);
            }
            q[k - 1] = v;
            carry = v;
        }
        unreachable!()
    }

    /// Taylor coefficients at `a`: `p(a + w) = Σ t_k w^k`.
    pub fn taylor_shift(&self, a: C64) -> Vec<C64> {
        let mut c = self.coeffs.clone();
        let n = c.len();
        for i in 0..n {
            for k in (i..n - 1).rev() {
                let v = c[k + 1] * a;
                c[k] += v;
            }
        }
        c
    }

    /// Multiplicity of `a` as a root: how often `(z - a)` divides out with a
    /// remainder below `tol` relative to the evaluation scale.
    pub fn root_multiplicity(&self, a: C64, tol: f64) -> usize {
        let mut p = self.clone();
        let mut m = 0;
        while !p.is_zero() {
            let scale = p.eval_scale(a).max(p.max_abs() * 1e-300);
            let (q, r) = p.deflate(a);
            if r.norm() > tol * scale {
                break;
            }
            m += 1;
            p = q;
        }
        m
    }

    /// Greatest common divisor up to a relative tolerance, made monic.
    ///
    /// Remainders whose coefficients all fall below `tol` times the size of the
    /// dividend are treated as zero.
    pub fn gcd(a: &Polynomial, b: &Polynomial, tol: f64) -> Polynomial {
        if a.is_zero() {
            return b.monic();
        }
        if b.is_zero() {
            return a.monic();
        }
        let norm = |p: &Polynomial| p.scale(C64::new(1.0 / p.max_abs(), 0.0));
        let (mut r0, mut r1) = if a.coeffs.len() >= b.coeffs.len() {
            (norm(a), norm(b))
        } else {
            (norm(b), norm(a))
        };
        loop {
            if r1.degree() == Some(0) {
                return Self::one();
            }
            let (_, r) = r0.div_rem(&r1);
            let r = r.trim_relative(0.0);
            let cut = tol * r0.max_abs().max(r1.max_abs());
            let r = {
                let mut c = r.coeffs.clone();
                while c.last().is_some_and(|x| x.norm() <= cut) {
                    c.pop();
                }
                Self::new(c)
            };
            if r.is_zero() {
                return r1.monic();
            }
            r0 = r1;
            r1 = norm(&r);
        }
    }

    /// All roots with multiplicity, clustered: `(root, multiplicity)`.
    pub fn roots_clustered(&self) -> Vec<(C64, usize)> {
        let mut out = Vec::new();
        let Some(_) = self.degree() else { return out };
        // exact zero roots first
        let zeros = self
            .coeffs
            .iter()
            .take_while(|c| **c == C64::new(0.0, 0.0))
            .count();
        if zeros > 0 {
            out.push((C64::new(0.0, 0.0), zeros));
        }
        let rest = Self::new(self.coeffs[zeros..].to_vec());
        let roots = super::roots::aberth(&rest);
        let mut used = vec![false; roots.len()];
        for i in 0..roots.len() {
            if used[i] {
                continue;
            }
            let tol = 1e-5 * roots[i].norm().max(1.0);
            let mut members = vec![roots[i]];
            used[i] = true;
            for j in i + 1..roots.len() {
                if !used[j] && (roots[j] - roots[i]).norm() < tol {
                    used[j] = true;
                    members.push(roots[j]);
                }
            }
            let mean = members.iter().sum::<C64>() / members.len() as f64;
            out.push((mean, members.len()));
        }
        out
    }

    /// Coefficientwise absolute values, used for rounding bounds.
    fn abs(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.norm()).collect()
    }
}

fn clean(values: Vec<C64>, bounds: &[f64]) -> Polynomial {
    let v = values
        .into_iter()
        .zip(bounds)
        .map(|(c, b)| {
            if c.norm() <= CANCEL * b {
                C64::new(0.0, 0.0)
            } else {
                c
            }
        })
        .collect();
    Polynomial::new(v)
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut v = vec![C64::new(0.0, 0.0); n];
        let mut b = vec![0.0; n];
        for (k, c) in self.coeffs.iter().enumerate() {
            v[k] += c;
            b[k] += c.norm();
        }
        for (k, c) in rhs.coeffs.iter().enumerate() {
            v[k] += c;
            b[k] += c.norm();
        }
        clean(v, &b)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self + &(-rhs)
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let n = self.coeffs.len() + rhs.coeffs.len() - 1;
        let mut v = vec![C64::new(0.0, 0.0); n];
        let mut b = vec![0.0; n];
        let (aa, ba) = (self.abs(), rhs.abs());
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, c) in rhs.coeffs.iter().enumerate() {
                v[i + j] += a * c;
                b[i + j] += aa[i] * ba[j];
            }
        }
        clean(v, &b)
    }
}

/// Sum of several polynomials with a joint cancellation bound.
pub fn poly_sum(terms: &[Polynomial]) -> Polynomial {
    let n = terms.iter().map(|t| t.coeffs.len()).max().unwrap_or(0);
    let mut v = vec![C64::new(0.0, 0.0); n];
    let mut b = vec![0.0; n];
    for t in terms {
        for (k, c) in t.coeffs.iter().enumerate() {
            v[k] += c;
            b[k] += c.norm();
        }
    }
    clean(v, &b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn horner_and_derivative() {
        let p = Polynomial::new(vec![c(1.0, 0.0), c(0.0, 2.0), c(3.0, 0.0)]);
        let z = c(0.5, -0.25);
        let (v, d) = p.eval_with_derivative(z);
        assert!((v - (c(1.0, 0.0) + c(0.0, 2.0) * z + 3.0 * z * z)).norm() < 1e-15);
        assert!((d - (c(0.0, 2.0) + 6.0 * z)).norm() < 1e-15);
        assert_eq!(p.derivative().eval(z), d);
    }

    #[test]
    fn exact_cancellation_is_zero() {
        let p = Polynomial::new(vec![c(0.1, 0.3), c(0.7, -0.2)]);
        let q = &(&p * &p) - &(&p * &p);
        assert!(q.is_zero());
    }

    #[test]
    fn div_rem_reconstructs() {
        let a = Polynomial::from_roots(&[c(1.0, 0.0), c(-2.0, 0.5), c(0.3, 0.3)]);
        let d = Polynomial::from_roots(&[c(1.0, 0.0)]);
        let (q, r) = a.div_rem(&d);
        assert!(r.max_abs() < 1e-14);
        assert_eq!(q.degree(), Some(2));
    }

    #[test]
    fn gcd_finds_common_root() {
        let a = Polynomial::from_roots(&[c(1.0, 0.0), c(-1.0, 0.0)]);
        let b = Polynomial::from_roots(&[c(1.0, 0.0), c(0.5, 0.5)]);
        let g = Polynomial::gcd(&a, &b, 1e-10);
        assert_eq!(g.degree(), Some(1));
        assert!(g.eval(c(1.0, 0.0)).norm() < 1e-12);
        let h = Polynomial::gcd(&a, &Polynomial::from_roots(&[c(2.0, 0.0)]), 1e-10);
        assert_eq!(h.degree(), Some(0));
    }

    #[test]
    fn clustered_roots_report_multiplicity() {
        let p = Polynomial::from_roots(&[c(0.5, 0.0), c(0.5, 0.0), c(-0.2, 0.7), c(0.0, 0.0)]);
        let mut r = p.roots_clustered();
        r.sort_by_key(|x| std::cmp::Reverse(x.1));
        assert_eq!(r[0].1, 2);
        assert!((r[0].0 - c(0.5, 0.0)).norm() < 1e-7);
        assert_eq!(r.len(), 3);
    }

    #[test]
    fn taylor_shift_matches_derivatives() {
        let p = Polynomial::new(vec![c(1.0, 1.0), c(-2.0, 0.0), c(0.0, 3.0), c(1.0, 0.0)]);
        let a = c(0.3, -0.4);
        let t = p.taylor_shift(a);
        assert!((t[0] - p.eval(a)).norm() < 1e-14);
        assert!((t[1] - p.derivative().eval(a)).norm() < 1e-14);
        assert!((t[2] - p.derivative().derivative().eval(a) / 2.0).norm() < 1e-14);
    }
}
