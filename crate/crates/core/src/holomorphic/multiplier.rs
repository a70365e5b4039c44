use serde::{Deserialize, Serialize};

use super::{HoloError, Holomorphic, RationalMap};
use crate::geometry::CircularDomain;
use crate::C64;

/// Principal part around one hole: `Σ_{k=1..d} b_k (scale / (z - center))^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrincipalPart {
    pub center: C64,
    pub scale: f64,
    pub coeffs: Vec<C64>,
}

/// Truncated Laurent-type expansion on a circular domain.
///
/// `u(z) = Σ_{k=0..d} a_k z^k + Σ_j Σ_{k=1..d} b_{jk} (ρ_j / (z - c_j))^k`
/// where `c_j` is the center of hole `j` and `ρ_j` its homology loop radius.
/// All singular points lie inside holes, so `u` is analytic on the closed domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaurentExpansion {
    degree: usize,
    outer: Vec<C64>,
    centers: Vec<PrincipalPart>,
}

impl LaurentExpansion {
    /// The zero expansion with `degree` coefficients per center.
    pub fn zero(domain: &CircularDomain, degree: usize) -> Self {
        let centers = domain
            .loops()
            .iter()
            .map(|lp| PrincipalPart {
                center: lp.center,
                scale: lp.radius,
                coeffs: vec![C64::new(0.0, 0.0); degree],
            })
            .collect();
        Self {
            degree,
            outer: vec![C64::new(0.0, 0.0); degree + 1],
            centers,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn outer(&self) -> &[C64] {
        &self.outer
    }

    pub fn centers(&self) -> &[PrincipalPart] {
        &self.centers
    }

    /// Total number of complex coefficients.
    pub fn len(&self) -> usize {
        self.outer.len() + self.centers.iter().map(|c| c.coeffs.len()).sum::<usize>()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flattened coefficients: outer part first, then each principal part in hole order.
    pub fn coefficients(&self) -> Vec<C64> {
        let mut v = self.outer.clone();
        for c in &self.centers {
            v.extend_from_slice(&c.coeffs);
        }
        v
    }

    pub fn set_coefficients(&mut self, v: &[C64]) {
        assert_eq!(v.len(), self.len(), "coefficient count mismatch");
        let n0 = self.outer.len();
        self.outer.copy_from_slice(&v[..n0]);
        let mut at = n0;
        for c in &mut self.centers {
            let m = c.coeffs.len();
            c.coeffs.copy_from_slice(&v[at..at + m]);
            at += m;
        }
    }

    /// Same function with room for more coefficients.
    pub fn with_degree(&self, degree: usize) -> Self {
        let mut out = self.clone();
        out.degree = degree;
        out.outer.resize(degree + 1, C64::new(0.0, 0.0));
        for c in &mut out.centers {
            c.coeffs.resize(degree, C64::new(0.0, 0.0));
        }
        out
    }

    /// Adds `delta` to the constant term.
    pub fn shift_constant(&mut self, delta: C64) {
        self.outer[0] += delta;
    }

    /// Values of the basis functions at `z`, in [`LaurentExpansion::coefficients`] order.
    pub fn basis_values(&self, z: C64, out: &mut [C64]) {
        let mut p = C64::new(1.0, 0.0);
        for slot in out.iter_mut().take(self.outer.len()) {
            *slot = p;
            p *= z;
        }
        let mut at = self.outer.len();
        for c in &self.centers {
            let w = c.scale / (z - c.center);
            let mut p = w;
            for slot in out[at..at + c.coeffs.len()].iter_mut() {
                *slot = p;
                p *= w;
            }
            at += c.coeffs.len();
        }
    }

    /// `(u(z), u'(z))`.
    pub fn eval_with_derivative(&self, z: C64) -> (C64, C64) {
        let mut v = C64::new(0.0, 0.0);
        let mut d = C64::new(0.0, 0.0);
        for a in self.outer.iter().rev() {
            d = d * z + v;
            v = v * z + a;
        }
        for c in &self.centers {
            let w = c.scale / (z - c.center);
            // Horner in w for Σ b_k w^k and Σ k b_k w^(k-1)
            let mut s = C64::new(0.0, 0.0);
            let mut ds = C64::new(0.0, 0.0);
            for (k, b) in c.coeffs.iter().enumerate().rev() {
                ds = ds * w + b * (k + 1) as f64;
                s = s * w + b;
            }
            v += s * w;
            d += ds * (-w * w / c.scale);
        }
        (v, d)
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.eval_with_derivative(z).0
    }

    /// Euclidean norm of the coefficients other than the constant term.
    pub fn nonconstant_norm(&self) -> f64 {
        self.coefficients()[1..]
            .iter()
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// Nowhere-vanishing multiplier `h = exp(u)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpMultiplier {
    pub u: LaurentExpansion,
}

impl ExpMultiplier {
    pub fn new(u: LaurentExpansion) -> Self {
        Self { u }
    }

    /// `h ≡ 1` with room for `degree` coefficients per center.
    pub fn identity(domain: &CircularDomain, degree: usize) -> Self {
        Self::new(LaurentExpansion::zero(domain, degree))
    }

    /// `e^{is} h`.
    pub fn rotated(&self, s: f64) -> Self {
        let mut u = self.u.clone();
        u.shift_constant(C64::new(0.0, s));
        Self { u }
    }

    /// `h^k`.
    pub fn pow(&self, k: f64) -> Self {
        let mut u = self.u.clone();
        let c: Vec<C64> = u.coefficients().iter().map(|a| a * k).collect();
        u.set_coefficients(&c);
        Self { u }
    }
}

impl Holomorphic for ExpMultiplier {
    fn eval(&self, z: C64) -> Result<C64, HoloError> {
        Ok(self.u.eval(z).exp())
    }

    fn eval_with_derivative(&self, z: C64) -> Result<(C64, C64), HoloError> {
        let (u, du) = self.u.eval_with_derivative(z);
        let h = u.exp();
        Ok((h, du * h))
    }

    fn log_derivative(&self, z: C64) -> Result<C64, HoloError> {
        Ok(self.u.eval_with_derivative(z).1)
    }
}

/// `Ξ(ζ, z) = ∏ (1 + ζ_i g_i(z))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SprayMultiplier {
    pub basis: Vec<RationalMap>,
    pub zeta: Vec<C64>,
}

impl SprayMultiplier {
    /// Spray at `ζ = 0`.
    pub fn new(basis: Vec<RationalMap>) -> Self {
        let zeta = vec![C64::new(0.0, 0.0); basis.len()];
        Self { basis, zeta }
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn at(&self, zeta: Vec<C64>) -> Self {
        assert_eq!(zeta.len(), self.basis.len());
        Self {
            basis: self.basis.clone(),
            zeta,
        }
    }

    fn factors(&self, z: C64) -> Result<Vec<(C64, C64)>, HoloError> {
        self.basis
            .iter()
            .zip(&self.zeta)
            .map(|(g, zeta)| {
                let (v, d) = g.eval_with_derivative(z)?;
                let f = C64::new(1.0, 0.0) + zeta * v;
                if f.norm() < 1e-12 {
                    return Err(HoloError::SprayVanishes { z });
                }
                Ok((f, zeta * d))
            })
            .collect()
    }
}

impl Holomorphic for SprayMultiplier {
    fn eval(&self, z: C64) -> Result<C64, HoloError> {
        Ok(self.factors(z)?.iter().map(|(f, _)| f).product())
    }

    fn eval_with_derivative(&self, z: C64) -> Result<(C64, C64), HoloError> {
        let f = self.factors(z)?;
        let h: C64 = f.iter().map(|(v, _)| v).product();
        let log: C64 = f.iter().map(|(v, d)| d / v).sum();
        Ok((h, h * log))
    }

    fn log_derivative(&self, z: C64) -> Result<C64, HoloError> {
        Ok(self.factors(z)?.iter().map(|(v, d)| d / v).sum())
    }
}
