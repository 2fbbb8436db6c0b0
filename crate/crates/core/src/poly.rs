//! Real polynomials in ascending coefficient order (`c[0] + c[1] z + ...`).

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Real polynomial, coefficients in ascending powers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RealPoly(pub Vec<f64>);

impl RealPoly {
    pub fn new(coeffs: Vec<f64>) -> Self {
        let mut p = Self(coeffs);
        p.trim();
        p
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    /// `z^k`.
    pub fn monomial(k: usize) -> Self {
        let mut c = vec![0.0; k + 1];
        c[k] = 1.0;
        Self(c)
    }

    /// `(1 + z^2)^k`.
    pub fn one_plus_z2_pow(k: usize) -> Self {
        let base = Self(vec![1.0, 0.0, 1.0]);
        (0..k).fold(Self::constant(1.0), |acc, _| acc.mul(&base))
    }

    fn trim(&mut self) {
        while self.0.len() > 1 && *self.0.last().unwrap() == 0.0 {
            self.0.pop();
        }
        if self.0.is_empty() {
            self.0.push(0.0);
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.0
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        let mut d = self.0.len().saturating_sub(1);
        while d > 0 && self.0[d] == 0.0 {
            d -= 1;
        }
        d
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0.0)
    }

    pub fn leading(&self) -> f64 {
        self.0[self.degree()]
    }

    /// Order of the zero at the origin (number of vanishing low coefficients).
    pub fn zero_order_at_origin(&self) -> usize {
        self.0.iter().take_while(|&&c| c == 0.0).count()
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.0
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    pub fn eval_real(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = vec![0.0; self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn add(&self, other: &Self) -> Self {
        let len = self.0.len().max(other.0.len());
        let out = (0..len)
            .map(|i| self.0.get(i).unwrap_or(&0.0) + other.0.get(i).unwrap_or(&0.0))
            .collect();
        Self::new(out)
    }

    pub fn scale(&self, k: f64) -> Self {
        Self::new(self.0.iter().map(|c| c * k).collect())
    }

    /// Divides out `z^k`; the caller guarantees the low coefficients vanish.
    pub fn shift_down(&self, k: usize) -> Self {
        Self::new(self.0[k.min(self.0.len() - 1)..].to_vec())
    }

    pub fn pow(&self, k: usize) -> Self {
        (0..k).fold(Self::constant(1.0), |acc, _| acc.mul(self))
    }

    /// Complex roots via the eigenvalues of the companion matrix.
    pub fn roots(&self) -> Vec<Complex64> {
        let deg = self.degree();
        if deg == 0 {
            return Vec::new();
        }
        let lead = self.0[deg];
        let mut c = DMatrix::zeros(deg, deg);
        for i in 1..deg {
            c[(i, i - 1)] = 1.0;
        }
        for i in 0..deg {
            c[(i, deg - 1)] = -self.0[i] / lead;
        }
        crate::linalg::eigenvalues(&c).unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic() {
        let p = RealPoly::new(vec![1.0, 0.0, 1.0]);
        assert_eq!(p.degree(), 2);
        assert_eq!(p.mul(&p), RealPoly::one_plus_z2_pow(2));
        assert_eq!(RealPoly::new(vec![0.0, 0.0, 3.0]).zero_order_at_origin(), 2);
        assert_eq!(p.eval(Complex64::new(0.0, 1.0)), Complex64::new(0.0, 0.0));
        assert_eq!(RealPoly::new(vec![1.0, 2.0, 0.0]).degree(), 1);
    }

    #[test]
    fn roots_of_quadratic() {
        let mut r = RealPoly::new(vec![4.0, 0.0, 1.0]).roots();
        r.sort_by(|a, b| a.im.partial_cmp(&b.im).unwrap());
        assert!((r[0] - Complex64::new(0.0, -2.0)).norm() < 1e-12);
        assert!((r[1] - Complex64::new(0.0, 2.0)).norm() < 1e-12);
    }
}
