//! Arithmetic in the real Clifford algebra with `n` anticommuting imaginary units.
//!
//! Basis blades are indexed by bitmask: bit `i - 1` is set when `e_i` occurs in the
//! blade, so index 0 is the scalar part and coefficient vectors run in ascending
//! bitmask order.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::sync::OnceLock;

use nalgebra::DMatrix;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest supported generator count.
pub const MAX_GENERATORS: usize = 5;
/// Number of coefficients at `MAX_GENERATORS`.
pub const MAX_BLADES: usize = 1 << MAX_GENERATORS;

/// Sign of `e_a * e_b` for blades given as bitmasks, by counting transpositions.
///
/// Moving every generator of `b` left past the larger generators of `a` costs one
/// transposition each; each generator common to both then squares to `-1`.
pub fn blade_sign(a: usize, b: usize) -> f64 {
    let mut swaps = 0u32;
    let mut shifted = a >> 1;
    while shifted != 0 {
        swaps += (shifted & b).count_ones();
        shifted >>= 1;
    }
    swaps += (a & b).count_ones();
    if swaps.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Sign of the conjugation on a blade of grade `k`: `(-1)^{k(k+1)/2}`.
pub fn conjugation_sign(grade: u32) -> f64 {
    match grade % 4 {
        0 | 3 => 1.0,
        _ => -1.0,
    }
}

// Sign tables for n >= 4; the product of blades a, b lands at a ^ b.
fn sign_table(n: usize) -> &'static [f64] {
    static TABLES: [OnceLock<Vec<f64>>; 2] = [OnceLock::new(), OnceLock::new()];
    let slot = &TABLES[n - 4];
    slot.get_or_init(|| {
        let dim = 1 << n;
        let mut t = vec![0.0; dim * dim];
        for a in 0..dim {
            for b in 0..dim {
                t[a * dim + b] = blade_sign(a, b);
            }
        }
        t
    })
}

/// Element of the Clifford algebra with `n` generators.
#[derive(Clone, Copy, PartialEq)]
pub struct CliffordNumber {
    n: u8,
    c: [f64; MAX_BLADES],
}

impl CliffordNumber {
    fn check_n(n: usize) -> Result<()> {
        if (1..=MAX_GENERATORS).contains(&n) {
            Ok(())
        } else {
            Err(Error::UnsupportedGenerators(n))
        }
    }

    /// Zero element. Panics if `n` is outside `1..=5`.
    pub fn zero(n: usize) -> Self {
        Self::check_n(n).expect("generator count");
        Self {
            n: n as u8,
            c: [0.0; MAX_BLADES],
        }
    }

    pub fn one(n: usize) -> Self {
        Self::scalar(n, 1.0)
    }

    pub fn scalar(n: usize, x: f64) -> Self {
        let mut z = Self::zero(n);
        z.c[0] = x;
        z
    }

    /// Basis blade `e_A` for the bitmask `mask`.
    pub fn blade(n: usize, mask: usize) -> Self {
        let mut z = Self::zero(n);
        assert!(mask < (1 << n), "blade mask out of range");
        z.c[mask] = 1.0;
        z
    }

    /// Generator `e_i`, `1 <= i <= n`.
    pub fn generator(n: usize, i: usize) -> Self {
        assert!(i >= 1 && i <= n, "generator index out of range");
        Self::blade(n, 1 << (i - 1))
    }

    pub fn from_coeffs(n: usize, coeffs: &[f64]) -> Result<Self> {
        Self::check_n(n)?;
        if coeffs.len() != 1 << n {
            return Err(Error::DimensionMismatch(format!(
                "expected {} coefficients for n = {n}, got {}",
                1 << n,
                coeffs.len()
            )));
        }
        let mut z = Self::zero(n);
        z.c[..coeffs.len()].copy_from_slice(coeffs);
        Ok(z)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n as usize
    }

    /// Number of coefficients, `2^n`.
    #[inline]
    pub fn dim(&self) -> usize {
        1 << self.n
    }

    #[inline]
    pub fn coeffs(&self) -> &[f64] {
        &self.c[..self.dim()]
    }

    #[inline]
    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        let d = self.dim();
        &mut self.c[..d]
    }

    #[inline]
    pub fn get(&self, mask: usize) -> f64 {
        self.c[mask]
    }

    #[inline]
    pub fn set(&mut self, mask: usize, value: f64) {
        self.c[mask] = value;
    }

    pub fn scalar_part(&self) -> f64 {
        self.c[0]
    }

    /// Product `self * rhs`.
    pub fn try_mul(&self, rhs: &Self) -> Result<Self> {
        if self.n != rhs.n {
            return Err(Error::DimensionMismatch(format!(
                "Clifford product of n = {} and n = {}",
                self.n, rhs.n
            )));
        }
        Ok(self.mul_unchecked(rhs))
    }

    fn mul_unchecked(&self, rhs: &Self) -> Self {
        let n = self.n();
        let dim = self.dim();
        let mut out = Self::zero(n);
        if n >= 4 {
            let table = sign_table(n);
            for a in 0..dim {
                let x = self.c[a];
                if x == 0.0 {
                    continue;
                }
                let row = &table[a * dim..(a + 1) * dim];
                for (b, (&sign, &y)) in row.iter().zip(&rhs.c[..dim]).enumerate() {
                    out.c[a ^ b] += sign * x * y;
                }
            }
        } else {
            for a in 0..dim {
                let x = self.c[a];
                if x == 0.0 {
                    continue;
                }
                for b in 0..dim {
                    out.c[a ^ b] += blade_sign(a, b) * x * rhs.c[b];
                }
            }
        }
        out
    }

    /// Conjugate: each `s_A` picks up `(-1)^{|A|(|A|+1)/2}`.
    pub fn conj(&self) -> Self {
        let mut out = *self;
        for (mask, v) in out.coeffs_mut().iter_mut().enumerate() {
            *v *= conjugation_sign(mask.count_ones());
        }
        out
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs().iter().map(|v| v * v).sum()
    }

    /// Euclidean absolute value of the coefficient vector.
    pub fn abs(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, k: f64) -> Self {
        let mut out = *self;
        out.coeffs_mut().iter_mut().for_each(|v| *v *= k);
        out
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs().iter().all(|v| v.is_finite())
    }

    /// True when only grade 0 and grade 1 coefficients exceed `tol` in magnitude.
    pub fn is_paravector(&self, tol: f64) -> bool {
        self.coeffs()
            .iter()
            .enumerate()
            .all(|(m, v)| m.count_ones() <= 1 || v.abs() <= tol)
    }

    /// Left-multiplication matrix: column `B` holds the coefficients of `self * e_B`.
    pub fn real_representation(&self) -> DMatrix<f64> {
        let dim = self.dim();
        let mut m = DMatrix::zeros(dim, dim);
        self.write_left_rep(&mut m, 0, 0);
        m
    }

    /// Writes the left-multiplication block into `m` at offset `(r0, c0)`.
    pub(crate) fn write_left_rep(&self, m: &mut DMatrix<f64>, r0: usize, c0: usize) {
        let dim = self.dim();
        for a in 0..dim {
            let x = self.c[a];
            if x == 0.0 {
                continue;
            }
            for b in 0..dim {
                m[(r0 + (a ^ b), c0 + b)] += blade_sign(a, b) * x;
            }
        }
    }

    /// Right-multiplication matrix: column `B` holds the coefficients of `e_B * self`.
    pub fn right_representation(&self) -> DMatrix<f64> {
        let dim = self.dim();
        let mut m = DMatrix::zeros(dim, dim);
        for b in 0..dim {
            let x = self.c[b];
            if x == 0.0 {
                continue;
            }
            for a in 0..dim {
                m[(a ^ b, a)] += blade_sign(a, b) * x;
            }
        }
        m
    }

    /// Inverse through the real representation. Fails for zero divisors.
    pub fn inverse(&self) -> Result<Self> {
        let rep = self.real_representation();
        let sv = crate::linalg::singular_values(&rep);
        let smax = sv[0];
        let smin = sv[sv.len() - 1];
        if !(smin > 1e-13 * smax) {
            return Err(Error::SingularOperator {
                smallest: smin,
                largest: smax,
            });
        }
        let mut e0 = nalgebra::DVector::zeros(self.dim());
        e0[0] = 1.0;
        let x = rep
            .lu()
            .solve(&e0)
            .ok_or(Error::SingularOperator {
                smallest: smin,
                largest: smax,
            })?;
        Self::from_coeffs(self.n(), x.as_slice())
    }

    /// Largest absolute coefficient difference.
    pub fn max_diff(&self, other: &Self) -> f64 {
        self.coeffs()
            .iter()
            .zip(other.coeffs())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl fmt::Debug for CliffordNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CliffordNumber(n={}, {:?})", self.n, self.coeffs())
    }
}

impl fmt::Display for CliffordNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (mask, &v) in self.coeffs().iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if mask == 0 {
                write!(f, "{v}")?;
            } else {
                write!(f, "{v}e")?;
                for i in 0..self.n() {
                    if mask & (1 << i) != 0 {
                        write!(f, "{}", i + 1)?;
                    }
                }
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl Add for CliffordNumber {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        self += rhs;
        self
    }
}

impl AddAssign for CliffordNumber {
    fn add_assign(&mut self, rhs: Self) {
        assert_eq!(self.n, rhs.n, "Clifford dimension mismatch");
        for (a, b) in self.coeffs_mut().iter_mut().zip(rhs.coeffs()) {
            *a += b;
        }
    }
}

impl Sub for CliffordNumber {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        self -= rhs;
        self
    }
}

impl SubAssign for CliffordNumber {
    fn sub_assign(&mut self, rhs: Self) {
        assert_eq!(self.n, rhs.n, "Clifford dimension mismatch");
        for (a, b) in self.coeffs_mut().iter_mut().zip(rhs.coeffs()) {
            *a -= b;
        }
    }
}

impl Neg for CliffordNumber {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl Mul for CliffordNumber {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        assert_eq!(self.n, rhs.n, "Clifford dimension mismatch");
        self.mul_unchecked(&rhs)
    }
}

impl Mul<f64> for CliffordNumber {
    type Output = Self;
    fn mul(self, k: f64) -> Self {
        self.scale(k)
    }
}

#[derive(Serialize, Deserialize)]
struct CliffordRepr {
    n: usize,
    coeffs: Vec<f64>,
}

impl Serialize for CliffordNumber {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CliffordRepr {
            n: self.n(),
            coeffs: self.coeffs().to_vec(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CliffordNumber {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = CliffordRepr::deserialize(d)?;
        CliffordNumber::from_coeffs(r.n, &r.coeffs).map_err(serde::de::Error::custom)
    }
}

/// Paravector `s0 + s1 e1 + ... + sn en`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Paravector {
    n: u8,
    pub s0: f64,
    v: [f64; MAX_GENERATORS],
}

impl Paravector {
    pub fn new(s0: f64, v: &[f64]) -> Result<Self> {
        CliffordNumber::check_n(v.len())?;
        let mut arr = [0.0; MAX_GENERATORS];
        arr[..v.len()].copy_from_slice(v);
        Ok(Self {
            n: v.len() as u8,
            s0,
            v: arr,
        })
    }

    pub fn real(n: usize, x: f64) -> Self {
        CliffordNumber::check_n(n).expect("generator count");
        Self {
            n: n as u8,
            s0: x,
            v: [0.0; MAX_GENERATORS],
        }
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    /// Imaginary part coefficients `(s1, ..., sn)`.
    pub fn im(&self) -> &[f64] {
        &self.v[..self.n()]
    }

    pub fn im_abs(&self) -> f64 {
        self.im().iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn abs_sqr(&self) -> f64 {
        self.s0 * self.s0 + self.im().iter().map(|x| x * x).sum::<f64>()
    }

    pub fn abs(&self) -> f64 {
        self.abs_sqr().sqrt()
    }

    pub fn conj(&self) -> Self {
        let mut out = *self;
        out.v.iter_mut().for_each(|x| *x = -*x);
        out
    }

    pub fn to_clifford(&self) -> CliffordNumber {
        let mut z = CliffordNumber::scalar(self.n(), self.s0);
        for (i, &x) in self.im().iter().enumerate() {
            z.c[1 << i] = x;
        }
        z
    }

    /// Reads grade <= 1 coefficients; fails when higher grades exceed `tol`.
    pub fn from_clifford(z: &CliffordNumber, tol: f64) -> Result<Self> {
        if !z.is_paravector(tol) {
            return Err(Error::InvalidInput("not a paravector".into()));
        }
        let v: Vec<f64> = (0..z.n()).map(|i| z.c[1 << i]).collect();
        Self::new(z.c[0], &v)
    }

    /// Coordinates `(x, y, J)` with `self = x + J y`, `y >= 0`.
    /// `J` is `None` on the real axis (`y <= eps`).
    pub fn plane_coords(&self, eps: f64) -> (f64, f64, Option<ImaginaryUnit>) {
        let y = self.im_abs();
        if y <= eps {
            (self.s0, y, None)
        } else {
            let j: Vec<f64> = self.im().iter().map(|x| x / y).collect();
            (self.s0, y, Some(ImaginaryUnit::from_unit_unchecked(&j)))
        }
    }

    /// Argument of `self` viewed as a complex number in its own plane, in `[0, pi]`.
    pub fn arg(&self) -> f64 {
        self.im_abs().atan2(self.s0)
    }

    pub fn sphere(&self) -> EigenSphere {
        EigenSphere {
            x: self.s0,
            y: self.im_abs(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.s0.is_finite() && self.im().iter().all(|x| x.is_finite())
    }
}

/// Unit purely imaginary paravector `J`, so `J^2 = -1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ImaginaryUnit {
    n: u8,
    j: [f64; MAX_GENERATORS],
}

impl ImaginaryUnit {
    /// Accepts `j` only if `|j| = 1` within `1e-12`.
    pub fn new(j: &[f64]) -> Result<Self> {
        CliffordNumber::check_n(j.len())?;
        let norm = j.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "imaginary unit must have modulus 1, got {norm}"
            )));
        }
        Ok(Self::from_unit_unchecked(j))
    }

    /// Normalizes a nonzero direction.
    pub fn from_direction(j: &[f64]) -> Result<Self> {
        CliffordNumber::check_n(j.len())?;
        let norm = j.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidInput("zero imaginary direction".into()));
        }
        let v: Vec<f64> = j.iter().map(|x| x / norm).collect();
        Ok(Self::from_unit_unchecked(&v))
    }

    fn from_unit_unchecked(j: &[f64]) -> Self {
        let mut arr = [0.0; MAX_GENERATORS];
        arr[..j.len()].copy_from_slice(j);
        Self {
            n: j.len() as u8,
            j: arr,
        }
    }

    /// `e_i` as an imaginary unit.
    pub fn generator(n: usize, i: usize) -> Self {
        let mut v = vec![0.0; n];
        v[i - 1] = 1.0;
        Self::from_unit_unchecked(&v)
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn components(&self) -> &[f64] {
        &self.j[..self.n()]
    }

    pub fn to_clifford(&self) -> CliffordNumber {
        self.to_paravector().to_clifford()
    }

    pub fn to_paravector(&self) -> Paravector {
        Paravector::new(0.0, self.components()).expect("validated")
    }

    pub fn neg(&self) -> Self {
        let v: Vec<f64> = self.components().iter().map(|x| -x).collect();
        Self::from_unit_unchecked(&v)
    }
}

/// Point `x + J y` of the plane spanned by `1` and `J`.
///
/// Negative `y` is allowed and equals `x + (-J)(-y)`.
pub fn paravector_on_plane(x: f64, y: f64, j: &ImaginaryUnit) -> Paravector {
    let v: Vec<f64> = j.components().iter().map(|c| c * y).collect();
    Paravector::new(x, &v).expect("validated unit")
}

/// Clifford number `x + J y`.
pub fn plane_number(x: f64, y: f64, j: &ImaginaryUnit) -> CliffordNumber {
    paravector_on_plane(x, y, j).to_clifford()
}

/// Axially symmetric sphere `[x + S y]`; `y = 0` is a single real point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenSphere {
    pub x: f64,
    pub y: f64,
}

impl EigenSphere {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y: y.abs() }
    }

    /// Distance between spheres measured in the upper half plane.
    pub fn distance(&self, other: &EigenSphere) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Angle to the real axis, `atan2(y, |x|)`; `0` for the origin.
    pub fn sector_angle(&self) -> f64 {
        if self.x == 0.0 && self.y == 0.0 {
            0.0
        } else {
            self.y.atan2(self.x.abs())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_relations() {
        let e1 = CliffordNumber::generator(3, 1);
        let e2 = CliffordNumber::generator(3, 2);
        assert_eq!(e1 * e1, CliffordNumber::scalar(3, -1.0));
        assert_eq!(e1 * e2, CliffordNumber::blade(3, 0b11));
        assert_eq!(e2 * e1, -CliffordNumber::blade(3, 0b11));
    }

    #[test]
    fn mismatched_dimensions_error() {
        let a = CliffordNumber::one(2);
        let b = CliffordNumber::one(3);
        assert!(matches!(a.try_mul(&b), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn conjugation_examples() {
        let n = 3;
        let e1 = CliffordNumber::generator(n, 1);
        assert_eq!(e1.conj(), -e1);
        let e123 = CliffordNumber::blade(n, 0b111);
        assert_eq!(e123.conj(), e123);
        let s = CliffordNumber::scalar(n, 2.0) + e1;
        assert_eq!(s.conj(), CliffordNumber::scalar(n, 2.0) - e1);
    }

    #[test]
    fn abs_examples() {
        let n = 2;
        let x = CliffordNumber::one(n) + CliffordNumber::generator(n, 1) + CliffordNumber::blade(n, 0b11);
        assert!((x.abs() - 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(CliffordNumber::zero(n).abs(), 0.0);
    }

    #[test]
    fn real_rep_examples() {
        let e1 = CliffordNumber::generator(1, 1);
        let r = e1.real_representation();
        assert_eq!(r, DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]));
        assert_eq!(&r * &r, -DMatrix::<f64>::identity(2, 2));
        assert_eq!(CliffordNumber::one(3).real_representation(), DMatrix::identity(8, 8));
    }

    #[test]
    fn large_n_table_matches_counting() {
        let a = CliffordNumber::blade(5, 0b10110);
        let b = CliffordNumber::blade(5, 0b01101);
        let p = a * b;
        assert_eq!(p.get(0b10110 ^ 0b01101), blade_sign(0b10110, 0b01101));
    }

    #[test]
    fn plane_points() {
        let j = ImaginaryUnit::generator(2, 1);
        assert_eq!(paravector_on_plane(0.0, 1.0, &j).to_clifford(), CliffordNumber::generator(2, 1));
        let r = paravector_on_plane(2.0, 0.0, &j);
        assert_eq!(r.to_clifford(), CliffordNumber::scalar(2, 2.0));
        let neg = paravector_on_plane(1.0, -2.0, &j);
        assert_eq!(neg, paravector_on_plane(1.0, 2.0, &j.neg()));
    }

    #[test]
    fn arg_recovered() {
        let j = ImaginaryUnit::from_direction(&[1.0, 2.0, -1.0]).unwrap();
        for &phi in &[0.3, 1.2, 2.9, -0.7, -2.5] {
            let t = 1.7;
            let s = paravector_on_plane(t * f64::cos(phi), t * f64::sin(phi), &j);
            let (x, y) = (s.s0, s.im().iter().zip(j.components()).map(|(a, b)| a * b).sum::<f64>());
            assert!((y.atan2(x) - phi).abs() < 1e-14);
        }
    }

    #[test]
    fn paravector_inverse() {
        let s = Paravector::new(2.0, &[1.0]).unwrap().to_clifford();
        let inv = s.inverse().unwrap();
        let expected = s.conj().scale(1.0 / 5.0);
        assert!(inv.max_diff(&expected) < 1e-15);
    }

    #[test]
    fn json_round_trip_and_validation() {
        let x = CliffordNumber::from_coeffs(2, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        let s = serde_json::to_string(&x).unwrap();
        assert_eq!(s, r#"{"n":2,"coeffs":[1.0,2.0,3.0,4.0]}"#);
        let y: CliffordNumber = serde_json::from_str(&s).unwrap();
        assert_eq!(x, y);
        assert!(serde_json::from_str::<CliffordNumber>(r#"{"n":2,"coeffs":[1.0]}"#).is_err());
    }
}
