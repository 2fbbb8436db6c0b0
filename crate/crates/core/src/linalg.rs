//! Clifford matrices acting as right-linear operators on `V = R^d (x) R_n`.
//!
//! Entry `T_ij` acts by left Clifford multiplication on component `j`, so
//! `(T v)_i = sum_j T_ij v_j` and `T (v a) = (T v) a` for every Clifford `a`.
//! All heavy lifting goes through the real representation, a
//! `(d 2^n) x (d 2^n)` real matrix built from the left-multiplication blocks.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use num_complex::Complex64;

use crate::clifford::CliffordNumber;
use crate::error::{Error, Result};

/// Relative singular-value threshold below which inversion is refused.
pub const CONDITION_GUARD: f64 = 1e-13;

/// Element of the Clifford module: `d` Clifford components.
#[derive(Clone, Debug, PartialEq)]
pub struct ModuleVector {
    n: usize,
    entries: Vec<CliffordNumber>,
}

impl ModuleVector {
    pub fn new(entries: Vec<CliffordNumber>) -> Result<Self> {
        let n = entries
            .first()
            .map(|e| e.n())
            .ok_or_else(|| Error::InvalidInput("empty module vector".into()))?;
        if entries.iter().any(|e| e.n() != n) {
            return Err(Error::DimensionMismatch("mixed generator counts".into()));
        }
        Ok(Self { n, entries })
    }

    pub fn zeros(n: usize, d: usize) -> Self {
        Self {
            n,
            entries: vec![CliffordNumber::zero(n); d],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[CliffordNumber] {
        &self.entries
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|e| e.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `v a`: every component multiplied by `a` on the right.
    pub fn mul_right(&self, a: &CliffordNumber) -> Self {
        Self {
            n: self.n,
            entries: self.entries.iter().map(|e| *e * *a).collect(),
        }
    }

    /// `a v`: every component multiplied by `a` on the left.
    pub fn mul_left(&self, a: &CliffordNumber) -> Self {
        Self {
            n: self.n,
            entries: self.entries.iter().map(|e| *a * *e).collect(),
        }
    }

    /// Real coefficient vector, component-major.
    pub fn to_real(&self) -> DVector<f64> {
        let dim = 1 << self.n;
        let mut out = DVector::zeros(self.d() * dim);
        for (i, e) in self.entries.iter().enumerate() {
            out.rows_mut(i * dim, dim).copy_from_slice(e.coeffs());
        }
        out
    }

    pub fn from_real(n: usize, x: &DVector<f64>) -> Result<Self> {
        let dim = 1 << n;
        if !x.len().is_multiple_of(dim) || x.is_empty() {
            return Err(Error::DimensionMismatch(format!(
                "real vector of length {} is not a multiple of {dim}",
                x.len()
            )));
        }
        let entries = (0..x.len() / dim)
            .map(|i| CliffordNumber::from_coeffs(n, x.rows(i * dim, dim).as_slice()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { n, entries })
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            n: self.n,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| *a - *b)
                .collect(),
        }
    }
}

/// Minimal operator interface for the spectral layer.
///
/// Only the dense backend exists; `to_dense` is the escape hatch the
/// quadrature and spectrum code use.
pub trait RightLinearOperator {
    fn generators(&self) -> usize;
    fn module_dim(&self) -> usize;
    fn apply(&self, v: &ModuleVector) -> Result<ModuleVector>;
    fn to_dense(&self) -> CliffordMatrix;
}

/// `d x d` matrix of Clifford numbers, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CliffordMatrix {
    n: usize,
    d: usize,
    entries: Vec<CliffordNumber>,
}

impl CliffordMatrix {
    pub fn zeros(n: usize, d: usize) -> Self {
        Self {
            n,
            d,
            entries: vec![CliffordNumber::zero(n); d * d],
        }
    }

    pub fn identity(n: usize, d: usize) -> Self {
        Self::scalar(n, d, CliffordNumber::one(n))
    }

    /// `a I`.
    pub fn scalar(n: usize, d: usize, a: CliffordNumber) -> Self {
        let mut m = Self::zeros(n, d);
        for i in 0..d {
            m.entries[i * d + i] = a;
        }
        m
    }

    pub fn diag(entries: &[CliffordNumber]) -> Result<Self> {
        let d = entries.len();
        let n = entries
            .first()
            .map(|e| e.n())
            .ok_or_else(|| Error::InvalidInput("empty diagonal".into()))?;
        let mut m = Self::zeros(n, d);
        for (i, e) in entries.iter().enumerate() {
            if e.n() != n {
                return Err(Error::DimensionMismatch("mixed generator counts".into()));
            }
            m.entries[i * d + i] = *e;
        }
        Ok(m)
    }

    /// Diagonal matrix with real entries.
    pub fn real_diag(n: usize, values: &[f64]) -> Self {
        let entries: Vec<_> = values.iter().map(|&x| CliffordNumber::scalar(n, x)).collect();
        Self::diag(&entries).expect("nonempty")
    }

    /// Matrix with real entries, given row-major.
    pub fn from_real_entries(n: usize, d: usize, values: &[f64]) -> Result<Self> {
        if values.len() != d * d {
            return Err(Error::DimensionMismatch(format!(
                "expected {} real entries, got {}",
                d * d,
                values.len()
            )));
        }
        Ok(Self {
            n,
            d,
            entries: values.iter().map(|&x| CliffordNumber::scalar(n, x)).collect(),
        })
    }

    pub fn from_entries(n: usize, d: usize, entries: Vec<CliffordNumber>) -> Result<Self> {
        if entries.len() != d * d || d == 0 {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries, got {}",
                d * d,
                entries.len()
            )));
        }
        if entries.iter().any(|e| e.n() != n) {
            return Err(Error::DimensionMismatch("mixed generator counts".into()));
        }
        Ok(Self { n, d, entries })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.d
    }

    /// Size of the real representation, `d 2^n`.
    pub fn real_dim(&self) -> usize {
        self.d << self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &CliffordNumber {
        &self.entries[i * self.d + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: CliffordNumber) {
        self.entries[i * self.d + j] = value;
    }

    pub fn entries(&self) -> &[CliffordNumber] {
        &self.entries
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.n != other.n || self.d != other.d {
            return Err(Error::DimensionMismatch(format!(
                "operator shapes (n={}, d={}) and (n={}, d={})",
                self.n, self.d, other.n, other.d
            )));
        }
        Ok(())
    }

    pub fn apply(&self, v: &ModuleVector) -> Result<ModuleVector> {
        if v.n() != self.n || v.d() != self.d {
            return Err(Error::DimensionMismatch(format!(
                "operator (n={}, d={}) applied to vector (n={}, d={})",
                self.n,
                self.d,
                v.n(),
                v.d()
            )));
        }
        let entries = (0..self.d)
            .map(|i| {
                let mut acc = CliffordNumber::zero(self.n);
                for j in 0..self.d {
                    acc += *self.get(i, j) * v.entries()[j];
                }
                acc
            })
            .collect();
        Ok(ModuleVector { n: self.n, entries })
    }

    pub fn try_matmul(&self, rhs: &Self) -> Result<Self> {
        self.check_same_shape(rhs)?;
        let d = self.d;
        let mut out = Self::zeros(self.n, d);
        for i in 0..d {
            for k in 0..d {
                let a = self.get(i, k);
                if a.coeffs().iter().all(|&x| x == 0.0) {
                    continue;
                }
                for j in 0..d {
                    out.entries[i * d + j] += *a * *rhs.get(k, j);
                }
            }
        }
        Ok(out)
    }

    /// `T a`: entries multiplied by `a` on the right.
    pub fn mul_right(&self, a: &CliffordNumber) -> Self {
        Self {
            n: self.n,
            d: self.d,
            entries: self.entries.iter().map(|e| *e * *a).collect(),
        }
    }

    /// `a T`: entries multiplied by `a` on the left.
    pub fn mul_left(&self, a: &CliffordNumber) -> Self {
        Self {
            n: self.n,
            d: self.d,
            entries: self.entries.iter().map(|e| *a * *e).collect(),
        }
    }

    pub fn scale(&self, k: f64) -> Self {
        Self {
            n: self.n,
            d: self.d,
            entries: self.entries.iter().map(|e| e.scale(k)).collect(),
        }
    }

    /// `self += k * other` for a real `k`.
    pub fn axpy(&mut self, k: f64, other: &Self) {
        for (a, b) in self.entries.iter_mut().zip(&other.entries) {
            for (x, y) in a.coeffs_mut().iter_mut().zip(b.coeffs()) {
                *x += k * y;
            }
        }
    }

    pub fn powi(&self, k: usize) -> Self {
        let mut out = Self::identity(self.n, self.d);
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    pub fn transpose_entries(&self) -> Self {
        let d = self.d;
        let mut out = Self::zeros(self.n, d);
        for i in 0..d {
            for j in 0..d {
                out.entries[j * d + i] = self.entries[i * d + j];
            }
        }
        out
    }

    /// Block real representation; block `(i, j)` is the left-multiplication
    /// matrix of `T_ij`.
    pub fn real_rep(&self) -> DMatrix<f64> {
        let dim = 1 << self.n;
        let mut m = DMatrix::zeros(self.real_dim(), self.real_dim());
        for i in 0..self.d {
            for j in 0..self.d {
                self.get(i, j).write_left_rep(&mut m, i * dim, j * dim);
            }
        }
        m
    }

    /// Reads Clifford entries back from a real matrix that commutes with right
    /// multiplication: entry `(i, j)` is the image of `e_j (x) 1`, block `i`.
    pub fn from_real_rep(n: usize, m: &DMatrix<f64>) -> Result<Self> {
        let dim = 1 << n;
        if m.nrows() != m.ncols() || !m.nrows().is_multiple_of(dim) || m.nrows() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "real matrix {}x{} is not a Clifford block matrix for n = {n}",
                m.nrows(),
                m.ncols()
            )));
        }
        let d = m.nrows() / dim;
        let mut out = Self::zeros(n, d);
        for i in 0..d {
            for j in 0..d {
                let mut e = CliffordNumber::zero(n);
                for (b, v) in e.coeffs_mut().iter_mut().enumerate() {
                    *v = m[(i * dim + b, j * dim)];
                }
                out.entries[i * d + j] = e;
            }
        }
        Ok(out)
    }

    /// Builds the operator from its action on the columns `e_j (x) 1`, given as
    /// the `d` real column vectors of a `(d 2^n) x d` matrix.
    pub(crate) fn from_unit_columns(n: usize, cols: &DMatrix<f64>) -> Self {
        let dim = 1 << n;
        let d = cols.ncols();
        let mut out = Self::zeros(n, d);
        for j in 0..d {
            for i in 0..d {
                let mut e = CliffordNumber::zero(n);
                for (b, v) in e.coeffs_mut().iter_mut().enumerate() {
                    *v = cols[(i * dim + b, j)];
                }
                out.entries[i * d + j] = e;
            }
        }
        out
    }

    /// Frobenius norm of the real representation, `2^{n/2} (sum |T_ij|^2)^{1/2}`.
    pub fn frobenius(&self) -> f64 {
        let s: f64 = self.entries.iter().map(|e| e.norm_sqr()).sum();
        (s * (1u64 << self.n) as f64).sqrt()
    }

    /// Largest singular value of the real representation.
    pub fn operator_norm(&self) -> f64 {
        singular_values(&self.real_rep()).first().copied().unwrap_or(0.0)
    }

    /// Smallest and largest singular values of the real representation.
    pub fn singular_value_range(&self) -> (f64, f64) {
        let sv = singular_values(&self.real_rep());
        (sv.last().copied().unwrap_or(0.0), sv.first().copied().unwrap_or(0.0))
    }

    /// Inverse through the real representation, refusing when the smallest
    /// singular value falls below `CONDITION_GUARD` times the largest.
    pub fn invert(&self) -> Result<Self> {
        let rep = self.real_rep();
        let sv = singular_values(&rep);
        let smax = sv.first().copied().unwrap_or(0.0);
        let smin = sv.last().copied().unwrap_or(0.0);
        if !(smin > CONDITION_GUARD * smax) {
            return Err(Error::SingularOperator {
                smallest: smin,
                largest: smax,
            });
        }
        let dim = 1 << self.n;
        let mut rhs = DMatrix::zeros(self.real_dim(), self.d);
        for j in 0..self.d {
            rhs[(j * dim, j)] = 1.0;
        }
        let cols = rep.lu().solve(&rhs).ok_or(Error::SingularOperator {
            smallest: smin,
            largest: smax,
        })?;
        Ok(Self::from_unit_columns(self.n, &cols))
    }

    /// Orthonormal real basis of the null space (singular values below `tol`),
    /// reshaped into module vectors.
    pub fn kernel_basis(&self, tol: f64) -> Vec<ModuleVector> {
        let rep = to_faer(&self.real_rep());
        let Ok(svd) = rep.svd() else {
            return Vec::new();
        };
        let (s, v) = (svd.S().column_vector(), svd.V());
        (0..s.nrows())
            .filter(|&k| s[k] < tol)
            .map(|k| {
                let col = DVector::from_fn(v.nrows(), |i, _| v[(i, k)]);
                ModuleVector::from_real(self.n, &col).expect("shape")
            })
            .collect()
    }

    pub fn rank(&self, tol: f64) -> usize {
        singular_values(&self.real_rep())
            .iter()
            .filter(|&&s| s >= tol)
            .count()
    }

    /// `||self - other||_F / max(||other||_F, floor)`.
    pub fn rel_diff(&self, other: &Self, floor: f64) -> f64 {
        (self - other).frobenius() / other.frobenius().max(floor)
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|e| e.is_finite())
    }
}

pub(crate) fn to_faer(m: &DMatrix<f64>) -> faer::Mat<f64> {
    faer::Mat::<f64>::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Singular values in nonincreasing order.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    to_faer(m)
        .singular_values()
        .unwrap_or_else(|_| vec![f64::NAN; m.nrows().min(m.ncols())])
}

/// Eigenvalues of a real square matrix.
pub fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    let n = m.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let f = to_faer(m);
    let ev = f
        .eigenvalues()
        .map_err(|e| Error::InvalidInput(format!("eigenvalue solver failed: {e:?}")))?;
    Ok(ev.iter().map(|z| Complex64::new(z.re, z.im)).collect())
}

impl RightLinearOperator for CliffordMatrix {
    fn generators(&self) -> usize {
        self.n
    }
    fn module_dim(&self) -> usize {
        self.d
    }
    fn apply(&self, v: &ModuleVector) -> Result<ModuleVector> {
        CliffordMatrix::apply(self, v)
    }
    fn to_dense(&self) -> CliffordMatrix {
        self.clone()
    }
}

impl<'a> Add<&'a CliffordMatrix> for &'a CliffordMatrix {
    type Output = CliffordMatrix;
    fn add(self, rhs: &CliffordMatrix) -> CliffordMatrix {
        self.check_same_shape(rhs).expect("operator shapes");
        let mut out = self.clone();
        out.axpy(1.0, rhs);
        out
    }
}

impl<'a> Sub<&'a CliffordMatrix> for &'a CliffordMatrix {
    type Output = CliffordMatrix;
    fn sub(self, rhs: &CliffordMatrix) -> CliffordMatrix {
        self.check_same_shape(rhs).expect("operator shapes");
        let mut out = self.clone();
        out.axpy(-1.0, rhs);
        out
    }
}

impl<'a> Mul<&'a CliffordMatrix> for &'a CliffordMatrix {
    type Output = CliffordMatrix;
    fn mul(self, rhs: &CliffordMatrix) -> CliffordMatrix {
        self.try_matmul(rhs).expect("operator shapes")
    }
}

impl Neg for &CliffordMatrix {
    type Output = CliffordMatrix;
    fn neg(self) -> CliffordMatrix {
        self.scale(-1.0)
    }
}

#[derive(Serialize, Deserialize)]
struct OperatorRepr {
    n: usize,
    d: usize,
    entries: Vec<Vec<Vec<f64>>>,
}

impl Serialize for CliffordMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let entries = (0..self.d)
            .map(|i| (0..self.d).map(|j| self.get(i, j).coeffs().to_vec()).collect())
            .collect();
        OperatorRepr {
            n: self.n,
            d: self.d,
            entries,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CliffordMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = OperatorRepr::deserialize(d)?;
        if r.entries.len() != r.d {
            return Err(D::Error::custom(format!(
                "entries: expected {} rows, got {}",
                r.d,
                r.entries.len()
            )));
        }
        let mut flat = Vec::with_capacity(r.d * r.d);
        for (i, row) in r.entries.iter().enumerate() {
            if row.len() != r.d {
                return Err(D::Error::custom(format!(
                    "entries[{i}]: expected {} columns, got {}",
                    r.d,
                    row.len()
                )));
            }
            for (j, c) in row.iter().enumerate() {
                flat.push(
                    CliffordNumber::from_coeffs(r.n, c)
                        .map_err(|e| D::Error::custom(format!("entries[{i}][{j}]: {e}")))?,
                );
            }
        }
        CliffordMatrix::from_entries(r.n, r.d, flat).map_err(D::Error::custom)
    }
}
