//! Slice hyperholomorphic functions built from intrinsic stem functions.
//!
//! A stem is a complex function `F(z) = alpha(x, y) + i beta(x, y)` with
//! `F(conj z) = conj F(z)`. A left slice function is a finite sum
//! `f(x + J y) = sum_k (alpha_k(x, y) + J beta_k(x, y)) a_k` with Clifford
//! coefficients `a_k` on the right.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::clifford::{paravector_on_plane, CliffordNumber, ImaginaryUnit, Paravector};
use crate::error::{Error, Result};
use crate::poly::RealPoly;

/// Below this imaginary modulus a point is evaluated on the real axis.
pub const EPS_AXIS: f64 = 1e-14;

/// Complex evaluation map of a stem.
pub type StemMap = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

/// Class verdict of a function on a double sector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FunctionClass {
    /// Bounded and `int |f(t e^{J phi})| dt / t` finite on every ray.
    Sh0,
    /// Bounded with finite limits at zero and infinity.
    Bnd,
    /// Polynomial growth at zero and/or infinity.
    #[serde(rename = "REG-only")]
    RegOnly,
    Unknown,
}

impl fmt::Display for FunctionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FunctionClass::Sh0 => "SH0",
            FunctionClass::Bnd => "BND",
            FunctionClass::RegOnly => "REG-only",
            FunctionClass::Unknown => "UNKNOWN",
        };
        f.write_str(s)
    }
}

/// Polynomial growth orders: `|f(s)| <= C (|s|^-at_zero + |s|^at_infinity)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Growth {
    pub at_zero: usize,
    pub at_infinity: usize,
}

#[derive(Clone)]
enum StemKind {
    Rational { p: RealPoly, q: RealPoly },
    Custom(StemMap),
}

/// Intrinsic stem function with its declared sector and singularities.
#[derive(Clone)]
pub struct StemFunction {
    name: String,
    kind: StemKind,
    theta: f64,
    intrinsic: bool,
    singularities: Vec<Complex64>,
    declared_class: Option<FunctionClass>,
    declared_growth: Option<Growth>,
}

impl fmt::Debug for StemFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StemFunction")
            .field("name", &self.name)
            .field("theta", &self.theta)
            .field("rational", &self.as_rational())
            .finish()
    }
}

/// Angle of a point to the real axis, `atan2(|y|, |x|)`.
fn angle_to_real_axis(z: Complex64) -> f64 {
    z.im.abs().atan2(z.re.abs())
}

impl StemFunction {
    /// Rational stem `p / q`. Common powers of `z` are cancelled; the declared
    /// sector is the widest one free of poles, less `0.05`, capped below `pi/2`.
    pub fn rational(name: impl Into<String>, p: RealPoly, q: RealPoly) -> Result<Self> {
        if q.is_zero() {
            return Err(Error::InvalidInput("rational stem with zero denominator".into()));
        }
        let m = p.zero_order_at_origin().min(q.zero_order_at_origin());
        let (p, q) = if m > 0 && !p.is_zero() {
            (p.shift_down(m), q.shift_down(m))
        } else {
            (p, q)
        };
        let singularities = q.roots();
        let theta = singularities
            .iter()
            .map(|z| {
                if z.norm() < 1e-14 {
                    FRAC_PI_2
                } else {
                    angle_to_real_axis(*z)
                }
            })
            .fold(FRAC_PI_2, f64::min)
            - 0.05;
        Ok(Self {
            name: name.into(),
            kind: StemKind::Rational { p, q },
            theta: theta.max(0.0),
            intrinsic: true,
            singularities,
            declared_class: None,
            declared_growth: None,
        })
    }

    /// Black-box stem. `theta` and `singularities` are user-declared.
    pub fn custom<F>(name: impl Into<String>, theta: f64, singularities: Vec<Complex64>, f: F) -> Self
    where
        F: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            kind: StemKind::Custom(Arc::new(f)),
            theta,
            intrinsic: true,
            singularities,
            declared_class: None,
            declared_growth: None,
        }
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }

    pub fn with_intrinsic(mut self, intrinsic: bool) -> Self {
        self.intrinsic = intrinsic;
        self
    }

    pub fn with_declared_class(mut self, class: FunctionClass) -> Self {
        self.declared_class = Some(class);
        self
    }

    pub fn with_growth(mut self, growth: Growth) -> Self {
        self.declared_growth = Some(growth);
        self
    }

    pub fn constant(c: f64) -> Self {
        Self::rational(format!("{c}"), RealPoly::constant(c), RealPoly::constant(1.0))
            .expect("nonzero denominator")
    }

    /// `(1 + s^2)^-1`.
    pub fn inv_one_plus_s2() -> Self {
        Self::rational("inv_one_plus_s2", RealPoly::constant(1.0), RealPoly::one_plus_z2_pow(1))
            .expect("valid")
    }

    /// `s / (1 + s^2)^k`.
    pub fn s_over_one_plus_s2_pow(k: usize) -> Self {
        Self::rational(
            format!("s_over_one_plus_s2_pow({k})"),
            RealPoly::monomial(1),
            RealPoly::one_plus_z2_pow(k),
        )
        .expect("valid")
    }

    /// `(1 + s^2)^-(k+1)`.
    pub fn regularizer_even(k: usize) -> Self {
        Self::rational(
            format!("regularizer_even({k})"),
            RealPoly::constant(1.0),
            RealPoly::one_plus_z2_pow(k + 1),
        )
        .expect("valid")
    }

    /// `s^(k+1) (1 + s^2)^-(k+1)`.
    pub fn regularizer_odd(k: usize) -> Self {
        Self::rational(
            format!("regularizer_odd({k})"),
            RealPoly::monomial(k + 1),
            RealPoly::one_plus_z2_pow(k + 1),
        )
        .expect("valid")
    }

    /// `s^k`.
    pub fn monomial(k: usize) -> Self {
        Self::rational(format!("monomial({k})"), RealPoly::monomial(k), RealPoly::constant(1.0))
            .expect("valid")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn is_intrinsic(&self) -> bool {
        self.intrinsic
    }

    pub fn singularities(&self) -> &[Complex64] {
        &self.singularities
    }

    /// `(p, q)` for rational stems.
    pub fn as_rational(&self) -> Option<(&RealPoly, &RealPoly)> {
        match &self.kind {
            StemKind::Rational { p, q } => Some((p, q)),
            StemKind::Custom(_) => None,
        }
    }

    #[inline]
    pub fn eval(&self, z: Complex64) -> Complex64 {
        match &self.kind {
            StemKind::Rational { p, q } => p.eval(z) / q.eval(z),
            StemKind::Custom(f) => f(z),
        }
    }

    /// Pointwise product of two stems.
    pub fn product(&self, other: &Self) -> Self {
        let theta = self.theta.min(other.theta);
        let name = format!("({})*({})", self.name, other.name);
        match (&self.kind, &other.kind) {
            (StemKind::Rational { p: p1, q: q1 }, StemKind::Rational { p: p2, q: q2 }) => {
                let mut s = Self::rational(name, p1.mul(p2), q1.mul(q2)).expect("nonzero denominators");
                s.theta = s.theta.min(theta);
                s
            }
            _ => {
                let (a, b) = (self.clone(), other.clone());
                let mut sing = self.singularities.clone();
                sing.extend_from_slice(&other.singularities);
                let mut s = Self::custom(name, theta, sing, move |z| a.eval(z) * b.eval(z));
                s.intrinsic = self.intrinsic && other.intrinsic;
                s
            }
        }
    }

    fn rational_limits(p: &RealPoly, q: &RealPoly) -> (Option<f64>, Option<f64>) {
        let at_zero = if q.coeffs()[0] != 0.0 {
            Some(p.coeffs()[0] / q.coeffs()[0])
        } else if p.is_zero() {
            Some(0.0)
        } else {
            None
        };
        let at_inf = if p.is_zero() || p.degree() < q.degree() {
            Some(0.0)
        } else if p.degree() == q.degree() {
            Some(p.leading() / q.leading())
        } else {
            None
        };
        (at_zero, at_inf)
    }

    fn rational_growth(p: &RealPoly, q: &RealPoly) -> Growth {
        let at_zero = if p.is_zero() { 0 } else { q.zero_order_at_origin() };
        let at_infinity = if p.is_zero() {
            0
        } else {
            p.degree().saturating_sub(q.degree())
        };
        Growth { at_zero, at_infinity }
    }

    fn pole_in_sector(&self, theta: f64) -> bool {
        self.singularities
            .iter()
            .any(|z| z.norm() > 1e-14 && angle_to_real_axis(*z) <= theta)
    }
}

/// Left slice function `sum_k F_k(s) a_k`.
#[derive(Clone, Debug)]
pub struct LeftSliceFunction {
    n: usize,
    theta: f64,
    terms: Vec<(StemFunction, CliffordNumber)>,
}

/// Real coefficient part check for a Clifford number.
fn is_real(a: &CliffordNumber) -> bool {
    a.coeffs()[1..].iter().all(|&x| x == 0.0)
}

impl LeftSliceFunction {
    /// Zero function with sector angle `theta`.
    pub fn zero(n: usize, theta: f64) -> Self {
        Self {
            n,
            theta,
            terms: Vec::new(),
        }
    }

    /// Single stem with coefficient `1`.
    pub fn from_stem(n: usize, stem: StemFunction) -> Self {
        let theta = stem.theta;
        Self {
            n,
            theta,
            terms: vec![(stem, CliffordNumber::one(n))],
        }
    }

    pub fn rational(n: usize, p: RealPoly, q: RealPoly) -> Result<Self> {
        Ok(Self::from_stem(n, StemFunction::rational("rational", p, q)?))
    }

    /// Constant function `c`.
    pub fn constant(c: CliffordNumber) -> Self {
        let n = c.n();
        Self {
            n,
            theta: FRAC_PI_2,
            terms: vec![(StemFunction::constant(1.0), c)],
        }
    }

    /// Appends `stem * coeff`; the sector shrinks to the stem's if narrower.
    pub fn with_term(mut self, stem: StemFunction, coeff: CliffordNumber) -> Self {
        assert_eq!(coeff.n(), self.n, "coefficient generator count");
        self.theta = self.theta.min(stem.theta);
        self.terms.push((stem, coeff));
        self
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn terms(&self) -> &[(StemFunction, CliffordNumber)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|(_, a)| a.abs() == 0.0)
    }

    pub fn is_intrinsic(&self) -> bool {
        self.terms.iter().all(|(s, a)| s.intrinsic && is_real(a))
    }

    pub fn all_rational(&self) -> bool {
        self.terms.iter().all(|(s, _)| s.as_rational().is_some())
    }

    /// `f + g`.
    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.theta = self.theta.min(other.theta);
        out.terms.extend(other.terms.iter().cloned());
        out
    }

    /// `f a`: every coefficient multiplied by `a` on the right.
    pub fn mul_right(&self, a: &CliffordNumber) -> Self {
        let mut out = self.clone();
        for (_, c) in out.terms.iter_mut() {
            *c = *c * *a;
        }
        out
    }

    pub fn scale(&self, k: f64) -> Self {
        self.mul_right(&CliffordNumber::scalar(self.n, k))
    }

    /// Pointwise product `g f` where `self = g` is intrinsic.
    pub fn intrinsic_mul(&self, f: &Self) -> Result<Self> {
        if !self.is_intrinsic() {
            return Err(Error::CalcClass(
                "left factor of a product must be intrinsic".into(),
            ));
        }
        let mut out = Self::zero(self.n, self.theta.min(f.theta));
        for (g_stem, b) in &self.terms {
            for (f_stem, a) in &f.terms {
                let coeff = a.scale(b.scalar_part());
                out.terms.push((g_stem.product(f_stem), coeff));
            }
        }
        Ok(out)
    }

    /// Collapses an intrinsic sum of rational stems into a single rational stem.
    pub fn collapse_rational(&self) -> Option<Self> {
        if !self.is_intrinsic() || !self.all_rational() {
            return None;
        }
        let mut num = RealPoly::constant(0.0);
        let mut den = RealPoly::constant(1.0);
        for (stem, b) in &self.terms {
            let (p, q) = stem.as_rational().expect("rational");
            num = num.mul(q).add(&den.mul(p).scale(b.scalar_part()));
            den = den.mul(q);
        }
        let stem = StemFunction::rational("collapsed", num, den).ok()?;
        let theta = self.theta.min(stem.theta);
        Some(Self::from_stem(self.n, stem).with_theta(theta))
    }

    /// For all-rational functions: one rational stem per basis blade,
    /// `sum_A (sum_k F_k a_{k,A}) e_A`.
    pub fn collapse_by_blade(&self) -> Option<Self> {
        if !self.all_rational() {
            return None;
        }
        let dim = 1usize << self.n;
        let mut out = Self::zero(self.n, self.theta);
        for blade in 0..dim {
            let part = Self {
                n: self.n,
                theta: self.theta,
                terms: self
                    .terms
                    .iter()
                    .filter(|(_, a)| a.get(blade) != 0.0)
                    .map(|(s, a)| (s.clone(), CliffordNumber::scalar(self.n, a.get(blade))))
                    .collect(),
            };
            if part.terms.is_empty() {
                continue;
            }
            let c = part.collapse_rational()?;
            let (stem, _) = c.terms.into_iter().next()?;
            out.terms.push((stem, CliffordNumber::blade(self.n, blade)));
        }
        Some(out.simplify())
    }

    /// `p(g(s)) = sum_m g(s)^m p_m` for intrinsic `g = self`.
    pub fn compose_poly(&self, p: &[CliffordNumber]) -> Result<Self> {
        if !self.is_intrinsic() {
            return Err(Error::CalcClass("inner function must be intrinsic".into()));
        }
        let g = self.collapse_rational().unwrap_or_else(|| self.clone());
        let mut out = Self::zero(self.n, g.theta);
        let mut power = Self::constant(CliffordNumber::one(self.n));
        for (m, pm) in p.iter().enumerate() {
            if m > 0 {
                power = g.intrinsic_mul(&power)?;
                if let Some(c) = power.collapse_rational() {
                    power = c;
                }
            }
            out = out.add(&power.mul_right(pm));
        }
        out.theta = g.theta;
        Ok(out)
    }

    fn check_singularity(&self, z: Complex64) -> Result<()> {
        for (stem, _) in &self.terms {
            for w in &stem.singularities {
                let dist = (w.re - z.re).hypot(w.im.abs() - z.im.abs());
                if dist <= 1e-12 * (1.0 + w.norm()) {
                    return Err(Error::Domain(format!(
                        "evaluation at the singular sphere of {} ({w})",
                        stem.name
                    )));
                }
            }
        }
        Ok(())
    }

    /// Sums `alpha_k a_k` and `beta_k a_k` at the complex point `z`.
    fn components(&self, z: Complex64) -> (CliffordNumber, CliffordNumber) {
        let mut alpha = CliffordNumber::zero(self.n);
        let mut beta = CliffordNumber::zero(self.n);
        for (stem, a) in &self.terms {
            let v = stem.eval(z);
            alpha += a.scale(v.re);
            beta += a.scale(v.im);
        }
        (alpha, beta)
    }

    /// Evaluates at `x + J y`, normalizing to `y >= 0` first.
    pub fn eval_plane(&self, x: f64, y: f64, j: &ImaginaryUnit) -> CliffordNumber {
        let (y, j) = if y < 0.0 { (-y, j.neg()) } else { (y, *j) };
        if y <= EPS_AXIS {
            let (alpha, _) = self.components(Complex64::new(x, 0.0));
            return alpha;
        }
        let (alpha, beta) = self.components(Complex64::new(x, y));
        alpha + j.to_clifford() * beta
    }

    /// `f(s)` for a paravector `s`.
    pub fn eval(&self, s: &Paravector) -> Result<CliffordNumber> {
        if s.n() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "function over n = {} evaluated at n = {}",
                self.n,
                s.n()
            )));
        }
        let (x, y, j) = s.plane_coords(EPS_AXIS);
        self.check_singularity(Complex64::new(x, y))?;
        let out = match j {
            None => self.components(Complex64::new(x, 0.0)).0,
            Some(j) => self.eval_plane(x, y, &j),
        };
        if !out.is_finite() {
            return Err(Error::Domain(format!("non-finite value at {x} + J{y}")));
        }
        Ok(out)
    }

    /// Complex value of an intrinsic function.
    pub fn eval_complex(&self, z: Complex64) -> Result<Complex64> {
        if !self.is_intrinsic() {
            return Err(Error::CalcClass("complex evaluation needs an intrinsic function".into()));
        }
        Ok(self
            .terms
            .iter()
            .map(|(s, a)| s.eval(z) * a.scalar_part())
            .sum())
    }

    /// True when some declared singularity lies in the closed double sector.
    pub fn has_singularity_in_sector(&self, theta: f64) -> bool {
        self.terms.iter().any(|(s, _)| s.pole_in_sector(theta))
    }

    /// `(f0, f_inf)` from algebra for rational stems, otherwise from sampling.
    pub fn limits(&self) -> Result<(CliffordNumber, CliffordNumber)> {
        let mut f0 = CliffordNumber::zero(self.n);
        let mut finf = CliffordNumber::zero(self.n);
        for (stem, a) in &self.terms {
            let (l0, linf) = match stem.as_rational() {
                Some((p, q)) => StemFunction::rational_limits(p, q),
                None => (
                    sampled_limit(stem, self.theta, true),
                    sampled_limit(stem, self.theta, false),
                ),
            };
            match (l0, linf) {
                (Some(l0), Some(linf)) => {
                    f0 += a.scale(l0);
                    finf += a.scale(linf);
                }
                _ => {
                    return Err(Error::NotBnd(format!(
                        "stem {} has no finite limit at zero or infinity",
                        stem.name
                    )))
                }
            }
        }
        Ok((f0, finf))
    }

    /// `f_inf` alone; the function may be singular at the origin.
    pub fn limit_at_infinity(&self) -> Result<CliffordNumber> {
        let mut finf = CliffordNumber::zero(self.n);
        for (stem, a) in &self.terms {
            let l = match stem.as_rational() {
                Some((p, q)) => StemFunction::rational_limits(p, q).1,
                None => sampled_limit(stem, self.theta, false),
            };
            match l {
                Some(l) => finf += a.scale(l),
                None => {
                    return Err(Error::NotBnd(format!(
                        "stem {} has no finite limit at infinity",
                        stem.name
                    )))
                }
            }
        }
        Ok(finf)
    }

    /// Merges rational terms with equal `(p, q)` and drops zero coefficients.
    pub fn simplify(&self) -> Self {
        let mut out: Vec<(StemFunction, CliffordNumber)> = Vec::new();
        for (stem, a) in &self.terms {
            let slot = stem.as_rational().and_then(|pq| {
                out.iter_mut()
                    .find(|(s, _)| s.as_rational() == Some(pq))
            });
            match slot {
                Some((_, c)) => *c += *a,
                None => out.push((stem.clone(), *a)),
            }
        }
        out.retain(|(s, a)| a.abs() != 0.0 && !s.as_rational().is_some_and(|(p, _)| p.is_zero()));
        Self {
            n: self.n,
            theta: self.theta,
            terms: out,
        }
    }

    /// Growth orders from degrees (rational) or declared metadata.
    pub fn growth(&self) -> Option<Growth> {
        let mut g = Growth {
            at_zero: 0,
            at_infinity: 0,
        };
        for (stem, _) in &self.terms {
            let sg = match (stem.as_rational(), stem.declared_growth) {
                (Some((p, q)), _) => StemFunction::rational_growth(p, q),
                (None, Some(d)) => d,
                (None, None) => return None,
            };
            g.at_zero = g.at_zero.max(sg.at_zero);
            g.at_infinity = g.at_infinity.max(sg.at_infinity);
        }
        Some(g)
    }

    /// Class on `D_theta` decided from algebra when every stem is rational.
    pub fn algebraic_class(&self) -> Option<FunctionClass> {
        if !self.all_rational() {
            return None;
        }
        if self.has_singularity_in_sector(self.theta) {
            return Some(FunctionClass::Unknown);
        }
        let growth = self.growth()?;
        if growth.at_zero > 0 || growth.at_infinity > 0 {
            return Some(FunctionClass::RegOnly);
        }
        let (f0, finf) = self.limits().ok()?;
        let scale = 1.0 + self.terms.iter().map(|(_, a)| a.abs()).sum::<f64>();
        if f0.abs() <= 1e-12 * scale && finf.abs() <= 1e-12 * scale {
            Some(FunctionClass::Sh0)
        } else {
            Some(FunctionClass::Bnd)
        }
    }

    /// Class verdict: algebraic when possible, then declared, then sampled.
    pub fn class(&self) -> FunctionClass {
        if let Some(c) = self.algebraic_class() {
            return c;
        }
        if self.terms.len() == 1 {
            if let Some(c) = self.terms[0].0.declared_class {
                return c;
            }
        }
        decay_report(self, &DecayGrid::default_for(self)).verdict
    }
}

// Richardson-style limit sampling at three decades with a consistency check.
fn sampled_limit(stem: &StemFunction, theta: f64, at_zero: bool) -> Option<f64> {
    let decades: [f64; 3] = if at_zero { [1e-6, 1e-7, 1e-8] } else { [1e6, 1e7, 1e8] };
    let angles = [0.0, 0.5 * theta, 0.9 * theta, PI - 0.5 * theta, PI];
    let mut samples = Vec::new();
    for &t in &decades {
        for &phi in &angles {
            let v = stem.eval(Complex64::from_polar(t, phi));
            if !v.re.is_finite() || !v.im.is_finite() {
                return None;
            }
            samples.push(v);
        }
    }
    let mean: Complex64 = samples.iter().sum::<Complex64>() / samples.len() as f64;
    let spread = samples.iter().map(|v| (v - mean).norm()).fold(0.0, f64::max);
    if spread <= 1e-8 * (1.0 + mean.norm()) && mean.im.abs() <= 1e-8 * (1.0 + mean.norm()) {
        Some(mean.re)
    } else {
        None
    }
}

/// Left Cauchy kernel `S_L^-1(s, p) = Q_s(p)^-1 (conj(s) - p)`.
pub fn cauchy_kernel_left(s: &Paravector, p: &Paravector) -> Result<CliffordNumber> {
    let (qinv, diff) = kernel_parts(s, p)?;
    Ok(qinv * diff)
}

/// Right Cauchy kernel `S_R^-1(s, p) = (conj(s) - p) Q_s(p)^-1`.
pub fn cauchy_kernel_right(s: &Paravector, p: &Paravector) -> Result<CliffordNumber> {
    let (qinv, diff) = kernel_parts(s, p)?;
    Ok(diff * qinv)
}

fn kernel_parts(s: &Paravector, p: &Paravector) -> Result<(CliffordNumber, CliffordNumber)> {
    if s.n() != p.n() {
        return Err(Error::DimensionMismatch("kernel arguments".into()));
    }
    let pc = p.to_clifford();
    let q = pc * pc - pc.scale(2.0 * s.s0) + CliffordNumber::scalar(s.n(), s.abs_sqr());
    let qq = Paravector::from_clifford(&q, 1e-12 * (1.0 + q.abs()))?;
    let scale = p.abs_sqr() + s.abs_sqr();
    if qq.abs() <= 1e-14 * scale.max(1e-300) {
        return Err(Error::SingularKernel);
    }
    let qinv = qq.conj().to_clifford().scale(1.0 / qq.abs_sqr());
    Ok((qinv, s.conj().to_clifford() - pc))
}

/// Maximum Cauchy-Riemann residual `|a_x - b_y| + |a_y + b_x|` by central
/// differences with step `h`.
pub fn check_cauchy_riemann<F>(stem: F, pts: &[Complex64], h: f64) -> f64
where
    F: Fn(Complex64) -> Complex64,
{
    pts.iter()
        .map(|&z| {
            let dx = (stem(z + h) - stem(z - h)) / (2.0 * h);
            let dy = (stem(z + Complex64::new(0.0, h)) - stem(z - Complex64::new(0.0, h))) / (2.0 * h);
            (dx.re - dy.im).abs() + (dy.re + dx.im).abs()
        })
        .fold(0.0, f64::max)
}

/// Maximum violation of `F(conj z) = conj F(z)` on the sample points.
pub fn check_compatibility(stem: &StemFunction, pts: &[Complex64]) -> f64 {
    pts.iter()
        .map(|&z| (stem.eval(z.conj()) - stem.eval(z).conj()).norm())
        .fold(0.0, f64::max)
}

/// `f = f_inf + (1 + s^2)^-1 (f0 - f_inf) + ftilde`.
#[derive(Clone, Debug)]
pub struct BndDecomposition {
    pub f0: CliffordNumber,
    pub finf: CliffordNumber,
    pub ftilde: LeftSliceFunction,
    pub ftilde_class: FunctionClass,
}

/// Splits a bounded function into its limits and a decaying remainder.
pub fn decompose_bnd(f: &LeftSliceFunction) -> Result<BndDecomposition> {
    let (f0, finf) = f.limits()?;
    if !f0.is_finite() || !finf.is_finite() {
        return Err(Error::NotBnd("non-finite limit samples".into()));
    }
    if let Some(g) = f.growth() {
        if g.at_zero > 0 || g.at_infinity > 0 {
            return Err(Error::NotBnd("function is unbounded".into()));
        }
    }
    let n = f.n();
    let ftilde = f
        .clone()
        .with_term(StemFunction::constant(1.0), -finf)
        .with_term(StemFunction::inv_one_plus_s2(), -(f0 - finf))
        .with_theta(f.theta());
    let ftilde = ftilde.collapse_by_blade().unwrap_or(ftilde).simplify();
    let ftilde_class = match ftilde.algebraic_class() {
        Some(c) => c,
        None => decay_report(&ftilde, &DecayGrid::default_for(&ftilde)).verdict,
    };
    debug_assert_eq!(ftilde.n(), n);
    Ok(BndDecomposition {
        f0,
        finf,
        ftilde,
        ftilde_class,
    })
}

/// Sampling grid for `decay_report`.
#[derive(Clone, Debug)]
pub struct DecayGrid {
    /// Ray angles `phi`, points `t e^{J phi}`.
    pub rays: Vec<f64>,
    pub units: Vec<ImaginaryUnit>,
    pub t_min: f64,
    pub t_max: f64,
    pub points_per_decade: usize,
}

impl DecayGrid {
    /// Rays at `0, +-theta/2, +-0.95 theta` on both halves, two units.
    pub fn default_for(f: &LeftSliceFunction) -> Self {
        let th = f.theta();
        let half = [0.0, 0.5 * th, -0.5 * th, 0.95 * th, -0.95 * th];
        let mut rays: Vec<f64> = half.to_vec();
        rays.extend(half.iter().map(|a| PI + a));
        let n = f.n();
        let ones = vec![1.0; n];
        Self {
            rays,
            units: vec![
                ImaginaryUnit::generator(n, 1),
                ImaginaryUnit::from_direction(&ones).expect("nonzero"),
            ],
            t_min: 1e-8,
            t_max: 1e8,
            points_per_decade: 20,
        }
    }
}

/// Per-ray decay measurements.
#[derive(Clone, Debug, Serialize)]
pub struct RayDecay {
    pub angle: f64,
    pub unit: Vec<f64>,
    /// `int |f(t e^{J phi})| dt / t` over the truncated grid.
    pub integral: f64,
    /// Contributions of the two innermost and two outermost decades.
    pub head_decades: [f64; 2],
    pub tail_decades: [f64; 2],
    pub sup_near_zero: f64,
    pub sup_near_infinity: f64,
    pub sup_interior: f64,
    pub sup: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayReport {
    pub rays: Vec<RayDecay>,
    pub verdict: FunctionClass,
}

fn simpson(values: &[f64], h: f64) -> f64 {
    // values.len() odd
    let n = values.len() - 1;
    let mut s = values[0] + values[n];
    for (i, v) in values.iter().enumerate().take(n).skip(1) {
        s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    s * h / 3.0
}

/// Log-grid sampling of `|f|` along rays, with a class verdict.
///
/// A ray integral counts as convergent at an end when the outermost decade
/// contributes at most `1e-12`, or at most half of its inner neighbour.
pub fn decay_report(f: &LeftSliceFunction, grid: &DecayGrid) -> DecayReport {
    let ppd = grid.points_per_decade.max(2) & !1;
    let lo = grid.t_min.log10();
    let hi = grid.t_max.log10();
    let decades = (hi - lo).round().max(4.0) as usize;
    let h = std::f64::consts::LN_10 / ppd as f64;
    let mut rays = Vec::new();
    let mut finite = true;
    for j in &grid.units {
        for &phi in &grid.rays {
            let mut per_decade = Vec::with_capacity(decades);
            let mut sups = Vec::with_capacity(decades);
            for k in 0..decades {
                let vals: Vec<f64> = (0..=ppd)
                    .map(|i| {
                        let t = 10f64.powf(lo + k as f64 + i as f64 / ppd as f64);
                        let s = paravector_on_plane(t * phi.cos(), t * phi.sin(), j);
                        f.eval(&s).map(|v| v.abs()).unwrap_or(f64::INFINITY)
                    })
                    .collect();
                if vals.iter().any(|v| !v.is_finite()) {
                    finite = false;
                }
                per_decade.push(simpson(&vals, h));
                sups.push(vals.iter().cloned().fold(0.0, f64::max));
            }
            let mid = decades / 2;
            let sup_interior = sups[mid.saturating_sub(2)..(mid + 2).min(decades)]
                .iter()
                .cloned()
                .fold(0.0, f64::max);
            rays.push(RayDecay {
                angle: phi,
                unit: j.components().to_vec(),
                integral: per_decade.iter().sum(),
                head_decades: [per_decade[0], per_decade[1]],
                tail_decades: [per_decade[decades - 1], per_decade[decades - 2]],
                sup_near_zero: sups[0],
                sup_near_infinity: sups[decades - 1],
                sup_interior,
                sup: sups.iter().cloned().fold(0.0, f64::max),
            });
        }
    }
    let verdict = if !finite {
        FunctionClass::Unknown
    } else {
        classify(&rays)
    };
    DecayReport { rays, verdict }
}

fn classify(rays: &[RayDecay]) -> FunctionClass {
    let unbounded = rays.iter().any(|r| {
        let reference = 1.0 + r.sup_interior;
        r.sup_near_zero > 1e4 * reference || r.sup_near_infinity > 1e4 * reference
    });
    if unbounded {
        // polynomial growth keeps a steady slope; anything faster is unknown
        let steady = rays.iter().all(|r| {
            let slope_hi = (r.tail_decades[0] / r.tail_decades[1].max(1e-300)).log10();
            let slope_lo = (r.head_decades[0] / r.head_decades[1].max(1e-300)).log10();
            slope_hi < 20.0 && slope_lo < 20.0
        });
        return if steady {
            FunctionClass::RegOnly
        } else {
            FunctionClass::Unknown
        };
    }
    let converges = |outer: f64, inner: f64| outer <= 1e-12 || outer <= 0.5 * inner;
    let sh0 = rays.iter().all(|r| {
        converges(r.head_decades[0], r.head_decades[1]) && converges(r.tail_decades[0], r.tail_decades[1])
    });
    if sh0 {
        FunctionClass::Sh0
    } else {
        FunctionClass::Bnd
    }
}

/// JSON description of a stem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum StemSpec {
    Rational {
        p: Vec<f64>,
        q: Vec<f64>,
    },
    Builtin {
        name: String,
        #[serde(default)]
        params: BuiltinParams,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BuiltinParams {
    #[serde(default)]
    pub k: Option<usize>,
}

/// One term of a sum: stem times a Clifford coefficient.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermSpec {
    pub stem: StemSpec,
    pub coeff: CliffordNumber,
}

/// JSON description of a left slice function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum FunctionSpec {
    Rational {
        p: Vec<f64>,
        q: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        theta: Option<f64>,
    },
    Builtin {
        name: String,
        #[serde(default)]
        params: BuiltinParams,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        theta: Option<f64>,
    },
    Sum {
        terms: Vec<TermSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        theta: Option<f64>,
    },
}

impl StemSpec {
    pub fn build(&self) -> Result<StemFunction> {
        match self {
            StemSpec::Rational { p, q } => {
                StemFunction::rational("rational", RealPoly::new(p.clone()), RealPoly::new(q.clone()))
            }
            StemSpec::Builtin { name, params } => {
                let k = params.k;
                let need_k = |default: Option<usize>| {
                    k.or(default).ok_or_else(|| {
                        Error::InvalidInput(format!("builtin {name} requires params.k"))
                    })
                };
                match name.as_str() {
                    "inv_one_plus_s2" => Ok(StemFunction::inv_one_plus_s2()),
                    "s_over_one_plus_s2_pow" => Ok(StemFunction::s_over_one_plus_s2_pow(need_k(None)?)),
                    "regularizer_even" => Ok(StemFunction::regularizer_even(need_k(None)?)),
                    "regularizer_odd" => Ok(StemFunction::regularizer_odd(need_k(None)?)),
                    "monomial" => Ok(StemFunction::monomial(need_k(None)?)),
                    other => Err(Error::InvalidInput(format!("unknown builtin {other:?}"))),
                }
            }
        }
    }
}

impl FunctionSpec {
    /// Builds the function over `n` generators.
    pub fn build(&self, n: usize) -> Result<LeftSliceFunction> {
        let (f, theta) = match self {
            FunctionSpec::Rational { p, q, theta } => (
                LeftSliceFunction::from_stem(
                    n,
                    StemSpec::Rational {
                        p: p.clone(),
                        q: q.clone(),
                    }
                    .build()?,
                ),
                theta,
            ),
            FunctionSpec::Builtin { name, params, theta } => (
                LeftSliceFunction::from_stem(
                    n,
                    StemSpec::Builtin {
                        name: name.clone(),
                        params: params.clone(),
                    }
                    .build()?,
                ),
                theta,
            ),
            FunctionSpec::Sum { terms, theta } => {
                let mut f = LeftSliceFunction::zero(n, FRAC_PI_2);
                for (i, t) in terms.iter().enumerate() {
                    if t.coeff.n() != n {
                        return Err(Error::DimensionMismatch(format!(
                            "terms[{i}].coeff has n = {}, operator has n = {n}",
                            t.coeff.n()
                        )));
                    }
                    f = f.with_term(t.stem.build()?, t.coeff);
                }
                (f, theta)
            }
        };
        Ok(match theta {
            Some(t) => f.with_theta(*t),
            None => f,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(n: usize, i: usize) -> CliffordNumber {
        CliffordNumber::generator(n, i)
    }

    #[test]
    fn eval_examples() {
        let n = 2;
        let sq = LeftSliceFunction::from_stem(n, StemFunction::monomial(2));
        let s = Paravector::new(0.0, &[1.0, 0.0]).unwrap();
        assert_eq!(sq.eval(&s).unwrap(), CliffordNumber::scalar(n, -1.0));

        let inv = LeftSliceFunction::from_stem(n, StemFunction::inv_one_plus_s2());
        assert_eq!(inv.eval(&Paravector::real(n, 0.0)).unwrap(), CliffordNumber::one(n));

        let id = LeftSliceFunction::from_stem(n, StemFunction::monomial(1));
        let s = Paravector::new(2.0, &[1.0, 0.0]).unwrap();
        assert!(id.eval(&s).unwrap().max_diff(&s.to_clifford()) < 1e-15);
    }

    #[test]
    fn eval_at_singular_sphere_is_domain_error() {
        let f = LeftSliceFunction::from_stem(2, StemFunction::inv_one_plus_s2());
        let s = Paravector::new(0.0, &[0.6, 0.8]).unwrap();
        assert!(matches!(f.eval(&s), Err(Error::Domain(_))));
    }

    #[test]
    fn sign_convention_is_bit_identical() {
        let n = 3;
        let f = LeftSliceFunction::from_stem(n, StemFunction::s_over_one_plus_s2_pow(2))
            .with_term(StemFunction::monomial(1), CliffordNumber::blade(n, 0b110));
        let j = ImaginaryUnit::from_direction(&[0.3, -1.0, 0.2]).unwrap();
        let a = f.eval_plane(0.7, -1.3, &j);
        let b = f.eval_plane(0.7, 1.3, &j.neg());
        assert_eq!(a, b);
    }

    #[test]
    fn kernel_examples() {
        let n = 2;
        let s = Paravector::real(n, 2.0);
        let zero = Paravector::real(n, 0.0);
        assert!(cauchy_kernel_left(&s, &zero).unwrap().max_diff(&CliffordNumber::scalar(n, 0.5)) < 1e-15);
        let p = Paravector::real(n, 1.0);
        assert!(cauchy_kernel_left(&s, &p).unwrap().max_diff(&CliffordNumber::one(n)) < 1e-15);
        let s = Paravector::new(1.0, &[0.0, 2.0]).unwrap();
        let p = Paravector::new(1.0, &[2.0, 0.0]).unwrap();
        assert_eq!(cauchy_kernel_left(&s, &p), Err(Error::SingularKernel));
    }

    #[test]
    fn cauchy_riemann_examples() {
        let pts: Vec<Complex64> = (0..10)
            .map(|k| Complex64::from_polar(0.5 + 0.3 * k as f64, 0.2 * k as f64 - 0.9))
            .collect();
        let sq = |z: Complex64| z * z;
        assert!(check_cauchy_riemann(sq, &pts, 1e-5) <= 1e-8);
        let anti = |z: Complex64| z.conj();
        assert!((check_cauchy_riemann(anti, &pts, 1e-5) - 2.0).abs() < 1e-9);
    }

    #[test]
    fn decompose_examples() {
        let n = 1;
        let f = LeftSliceFunction::from_stem(n, StemFunction::inv_one_plus_s2());
        let d = decompose_bnd(&f).unwrap();
        assert_eq!(d.f0, CliffordNumber::one(n));
        assert_eq!(d.finf, CliffordNumber::zero(n));
        assert_eq!(d.ftilde_class, FunctionClass::Sh0);
        assert!(d.ftilde.is_zero());

        let g = LeftSliceFunction::rational(n, RealPoly::monomial(2), RealPoly::one_plus_z2_pow(1)).unwrap();
        let d = decompose_bnd(&g).unwrap();
        assert_eq!(d.f0, CliffordNumber::zero(n));
        assert_eq!(d.finf, CliffordNumber::one(n));
        assert!(d.ftilde.is_zero());

        let h = LeftSliceFunction::rational(n, RealPoly::new(vec![1.0, 1.0]), RealPoly::new(vec![4.0, 0.0, 1.0]))
            .unwrap();
        let d = decompose_bnd(&h).unwrap();
        assert!((d.f0.scalar_part() - 0.25).abs() < 1e-15);
        assert_eq!(d.finf, CliffordNumber::zero(n));
        assert_eq!(d.ftilde_class, FunctionClass::Sh0);
        for k in 0..20 {
            let s = Paravector::new(0.3 * k as f64 - 2.0, &[0.1 + 0.2 * k as f64]).unwrap();
            let oracle = h.eval(&s).unwrap()
                - LeftSliceFunction::from_stem(n, StemFunction::inv_one_plus_s2()).eval(&s).unwrap().scale(0.25);
            assert!(d.ftilde.eval(&s).unwrap().max_diff(&oracle) <= 1e-10);
        }

        let unbounded = LeftSliceFunction::from_stem(n, StemFunction::monomial(1));
        assert!(matches!(decompose_bnd(&unbounded), Err(Error::NotBnd(_))));
    }

    #[test]
    fn classes_from_algebra() {
        let n = 2;
        let sh0 = LeftSliceFunction::from_stem(n, StemFunction::s_over_one_plus_s2_pow(2));
        assert_eq!(sh0.class(), FunctionClass::Sh0);
        let bnd = LeftSliceFunction::from_stem(n, StemFunction::inv_one_plus_s2());
        assert_eq!(bnd.class(), FunctionClass::Bnd);
        let reg = LeftSliceFunction::from_stem(n, StemFunction::monomial(1));
        assert_eq!(reg.class(), FunctionClass::RegOnly);
        let pole = LeftSliceFunction::rational(n, RealPoly::constant(1.0), RealPoly::new(vec![-1.0, 1.0]))
            .unwrap()
            .with_theta(0.5);
        assert_eq!(pole.class(), FunctionClass::Unknown);
    }

    #[test]
    fn product_and_composition_structure() {
        let n = 2;
        let g = LeftSliceFunction::from_stem(n, StemFunction::inv_one_plus_s2());
        let f = LeftSliceFunction::from_stem(n, StemFunction::monomial(1)).mul_right(&e(n, 1));
        let gf = g.intrinsic_mul(&f).unwrap();
        let s = Paravector::new(0.3, &[0.2, 0.5]).unwrap();
        let direct = g.eval(&s).unwrap() * f.eval(&s).unwrap();
        assert!(gf.eval(&s).unwrap().max_diff(&direct) < 1e-15);
        assert!(f.intrinsic_mul(&g).is_err());

        let p = [CliffordNumber::one(n), e(n, 2), CliffordNumber::blade(n, 3)];
        let pg = g.compose_poly(&p).unwrap();
        let gv = g.eval(&s).unwrap();
        let expected = p[0] + gv * p[1] + gv * gv * p[2];
        assert!(pg.eval(&s).unwrap().max_diff(&expected) < 1e-14);
    }

    #[test]
    fn json_specs() {
        let spec: FunctionSpec = serde_json::from_str(
            r#"{"type":"sum","terms":[{"stem":{"type":"builtin","name":"s_over_one_plus_s2_pow","params":{"k":2}},"coeff":{"n":1,"coeffs":[0,1]}}]}"#,
        )
        .unwrap();
        let f = spec.build(1).unwrap();
        assert_eq!(f.terms().len(), 1);
        assert!(!f.is_intrinsic());
        let bad: FunctionSpec = serde_json::from_str(r#"{"type":"builtin","name":"monomial"}"#).unwrap();
        assert!(bad.build(1).is_err());
        let r: FunctionSpec = serde_json::from_str(r#"{"type":"rational","p":[0,1],"q":[1,0,1]}"#).unwrap();
        assert_eq!(r.build(2).unwrap().class(), FunctionClass::Sh0);
    }
}
