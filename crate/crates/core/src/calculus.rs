//! The omega, extended and H-infinity calculi, polynomial and rational
//! calculi, the spectral projection at the origin and related checks.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::clifford::{CliffordNumber, EigenSphere, ImaginaryUnit, Paravector};
use crate::contour::{integrate_operator_contour, ContourPath, Node, QuadratureConfig, QuadratureSummary};
use crate::error::{Error, Result};
use crate::linalg::{CliffordMatrix, ModuleVector};
use crate::poly::RealPoly;
use crate::slice::{decompose_bnd, FunctionClass, Growth, LeftSliceFunction, StemFunction};
use crate::spectrum::{s_spectrum, ResolventEvaluator, SSpectrumReport};

/// Relative singular value threshold used for rank and kernel decisions.
pub const RANK_TOL: f64 = 1e-9;

/// Calculus mode selectable from requests.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum CalcMode {
    Omega,
    OmegaPunctured { rho: f64 },
    Extended,
    ExtendedInvertible { rho: f64 },
    Hinfty,
}

/// Result matrix with the quadrature diagnostics of every contour integral
/// that contributed to it.
#[derive(Clone, Debug)]
pub struct CalcOutput {
    pub value: CliffordMatrix,
    pub quadrature: Vec<QuadratureSummary>,
}

impl CalcOutput {
    fn exact(value: CliffordMatrix) -> Self {
        Self {
            value,
            quadrature: Vec::new(),
        }
    }
}

fn check_dims(t: &CliffordMatrix, f: &LeftSliceFunction, j: &ImaginaryUnit) -> Result<()> {
    if f.n() != t.n() || j.n() != t.n() {
        return Err(Error::DimensionMismatch(format!(
            "operator n = {}, function n = {}, unit n = {}",
            t.n(),
            f.n(),
            j.n()
        )));
    }
    Ok(())
}

fn rank_tol(t: &CliffordMatrix) -> f64 {
    RANK_TOL * t.operator_norm().max(1.0)
}

/// Finite-dimensional bisectoriality at angle `phi`: spectrum inside
/// `D_omega` with `omega < phi` and a semisimple zero eigenvalue.
pub fn check_bisectorial(t: &CliffordMatrix, phi: f64) -> Result<SSpectrumReport> {
    let spec = s_spectrum(t)?;
    let omega = spec.omega();
    if omega >= FRAC_PI_2 - 1e-9 {
        return Err(Error::NotBisectorial(format!(
            "spectrum reaches the imaginary axis (angle {omega:.6})"
        )));
    }
    if spec.contains_zero(1e-8) {
        let tol = rank_tol(t);
        let t2 = t.try_matmul(t)?;
        if t.rank(tol) != t2.rank(tol * t.operator_norm().max(1.0)) {
            return Err(Error::NotBisectorial("zero eigenvalue is not semisimple".into()));
        }
    }
    if omega >= phi {
        return Err(Error::Precondition(format!(
            "spectral angle {omega:.6} is not below the contour angle {phi:.6}"
        )));
    }
    Ok(spec)
}

fn check_theta(f: &LeftSliceFunction, phi: f64) -> Result<()> {
    if !(phi > 0.0 && phi < FRAC_PI_2) {
        return Err(Error::InvalidInput(format!("contour angle {phi} outside (0, pi/2)")));
    }
    if phi >= f.theta() {
        return Err(Error::Precondition(format!(
            "contour angle {phi:.6} not below the function sector {:.6}",
            f.theta()
        )));
    }
    Ok(())
}

/// `(1/2pi) int S_L^-1(s, T) ds_J f(s)` along `path`.
fn left_integral(
    t: &CliffordMatrix,
    f: &LeftSliceFunction,
    path: &ContourPath,
    cfg: &QuadratureConfig,
) -> Result<CalcOutput> {
    let j = *path.unit();
    let ev = ResolventEvaluator::new(t, &j)?;
    let integrand = |node: &Node| -> Result<CliffordMatrix> {
        let sl = ev.left(node.z.re, node.z.im)?;
        let c = node.ds * f.eval_plane(node.z.re, node.z.im, &j);
        Ok(sl.mul_right(&c.scale(1.0 / (2.0 * PI))))
    };
    let out = integrate_operator_contour(&integrand, path, cfg)?;
    Ok(CalcOutput {
        value: out.value,
        quadrature: vec![out.summary],
    })
}

/// omega-calculus for `f` in the decaying class on the sector boundary.
pub fn omega_calc(
    t: &CliffordMatrix,
    f: &LeftSliceFunction,
    phi: f64,
    j: &ImaginaryUnit,
    cfg: &QuadratureConfig,
) -> Result<CalcOutput> {
    check_dims(t, f, j)?;
    let class = f.class();
    if class != FunctionClass::Sh0 {
        return Err(Error::CalcClass(format!(
            "omega calculus needs a function in SH0, got {class}"
        )));
    }
    check_theta(f, phi)?;
    check_bisectorial(t, phi)?;
    if f.is_zero() {
        return Ok(CalcOutput::exact(CliffordMatrix::zeros(t.n(), t.d())));
    }
    left_integral(t, f, &ContourPath::sector_boundary(phi, *j)?, cfg)
}

/// `(1/2pi) int g(s) ds_J S_R^-1(s, T)` for intrinsic `g`.
pub fn omega_calc_right_intrinsic(
    t: &CliffordMatrix,
    g: &LeftSliceFunction,
    phi: f64,
    j: &ImaginaryUnit,
    cfg: &QuadratureConfig,
) -> Result<CalcOutput> {
    check_dims(t, g, j)?;
    if !g.is_intrinsic() {
        return Err(Error::CalcClass("right representation needs an intrinsic function".into()));
    }
    let class = g.class();
    if class != FunctionClass::Sh0 {
        return Err(Error::CalcClass(format!(
            "omega calculus needs a function in SH0, got {class}"
        )));
    }
    check_theta(g, phi)?;
    check_bisectorial(t, phi)?;
    if g.is_zero() {
        return Ok(CalcOutput::exact(CliffordMatrix::zeros(t.n(), t.d())));
    }
    let ev = ResolventEvaluator::new(t, j)?;
    let path = ContourPath::sector_boundary(phi, *j)?;
    let integrand = |node: &Node| -> Result<CliffordMatrix> {
        let sr = ev.right(node.z.re, node.z.im)?;
        let c = g.eval_plane(node.z.re, node.z.im, j) * node.ds;
        Ok(sr.mul_left(&c.scale(1.0 / (2.0 * PI))))
    };
    let out = integrate_operator_contour(&integrand, &path, cfg)?;
    Ok(CalcOutput {
        value: out.value,
        quadrature: vec![out.summary],
    })
}

fn check_punctured(t: &CliffordMatrix, rho: f64) -> Result<()> {
    let spec = s_spectrum(t)?;
    if spec.contains_zero(1e-8) {
        return Err(Error::Precondition("0 lies in the S-spectrum".into()));
    }
    let gap = spec.distance_to(0.0, 0.0);
    if !(rho > 0.0 && rho < gap) {
        return Err(Error::Precondition(format!(
            "radius {rho} must lie in (0, {gap:.6}), the distance from 0 to the spectrum"
        )));
    }
    Ok(())
}

/// omega-calculus on the boundary of `D_phi` minus the disc of radius `rho`,
/// for invertible `T` and `f` decaying at infinity.
pub fn omega_calc_punctured(
    t: &CliffordMatrix,
    f: &LeftSliceFunction,
    phi: f64,
    rho: f64,
    j: &ImaginaryUnit,
    cfg: &QuadratureConfig,
) -> Result<CalcOutput> {
    check_dims(t, f, j)?;
    check_theta(f, phi)?;
    let finf = f.limit_at_infinity()?;
    if let Some(g) = f.growth() {
        if g.at_infinity > 0 {
            return Err(Error::CalcClass("function grows at infinity".into()));
        }
    }
    if finf.abs() > 1e-12 {
        return Err(Error::CalcClass(format!(
            "punctured omega calculus needs f -> 0 at infinity, limit is {finf}"
        )));
    }
    check_bisectorial(t, phi)?;
    check_punctured(t, rho)?;
    if f.is_zero() {
        return Ok(CalcOutput::exact(CliffordMatrix::zeros(t.n(), t.d())));
    }
    left_integral(t, f, &ContourPath::punctured_sector(phi, rho, *j)?, cfg)
}

/// `(1 + T^2)^-1`.
pub fn inv_one_plus_t2(t: &CliffordMatrix) -> Result<CliffordMatrix> {
    let mut m = t.try_matmul(t)?;
    m.axpy(1.0, &CliffordMatrix::identity(t.n(), t.d()));
    m.invert()
}

/// Extended calculus `f_inf + (1 + T^2)^-1 (f0 - f_inf) + ftilde(T)`.
pub fn extended_calc(
    t: &CliffordMatrix,
    f: &LeftSliceFunction,
    phi: f64,
    j: &ImaginaryUnit,
    cfg: &QuadratureConfig,
) -> Result<CalcOutput> {
    check_dims(t, f, j)?;
    check_theta(f, phi)?;
    let class = f.class();
    if !matches!(class, FunctionClass::Sh0 | FunctionClass::Bnd) {
        return Err(Error::CalcClass(format!(
            "extended calculus needs a bounded function, got {class}"
        )));
    }
    let dec = decompose_bnd(f)?;
    if dec.ftilde_class != FunctionClass::Sh0 {
        return Err(Error::CalcClass(format!(
            "remainder of the decomposition is {} instead of SH0",
            dec.ftilde_class
        )));
    }
    check_bisectorial(t, phi)?;
    let (n, d) = (t.n(), t.d());
    let mut value = CliffordMatrix::scalar(n, d, dec.finf);
    value = &value + &inv_one_plus_t2(t)?.mul_right(&(dec.f0 - dec.finf));
    let mut quadrature = Vec::new();
    if !dec.ftilde.is_zero() {
        let ft = dec.ftilde.clone().with_theta(f.theta());
        let out = left_integral(t, &ft, &ContourPath::sector_boundary(phi, *j)?, cfg)?;
        value = &value + &out.value;
        quadrature = out.quadrature;
    }
    Ok(CalcOutput { value, quadrature })
}

/// Extended calculus for invertible `T`: `f_inf + ` the punctured integral
/// of `f - f_inf`. `f` only needs a finite limit at infinity.
pub fn extended_calc_invertible(
    t: &CliffordMatrix,
    f: &LeftSliceFunction,
    phi: f64,
    rho: f64,
    j: &ImaginaryUnit,
    cfg: &QuadratureConfig,
) -> Result<CalcOutput> {
    check_dims(t, f, j)?;
    check_theta(f, phi)?;
    let finf = f.limit_at_infinity()?;
    check_bisectorial(t, phi)?;
    check_punctured(t, rho)?;
    let rest = f
        .clone()
        .with_term(StemFunction::constant(1.0), -finf)
        .with_theta(f.theta());
    let rest = rest.collapse_by_blade().unwrap_or(rest).simplify();
    let mut value = CliffordMatrix::scalar(t.n(), t.d(), finf);
    let mut quadrature = Vec::new();
    if !rest.is_zero() {
        let out = left_integral(t, &rest, &ContourPath::punctured_sector(phi, rho, *j)?, cfg)?;
        value = &value + &out.value;
        quadrature = out.quadrature;
    }
    Ok(CalcOutput { value, quadrature })
}

/// `p[T] = p_0 + T p_1 + ... + T^m p_m` with coefficients on the right.
pub fn poly_calc(t: &CliffordMatrix, p: &[CliffordNumber]) -> Result<CliffordMatrix> {
    let (n, d) = (t.n(), t.d());
    if let Some(c) = p.iter().find(|c| c.n() != n) {
        return Err(Error::DimensionMismatch(format!("coefficient n = {}, operator n = {n}", c.n())));
    }
    let mut acc = CliffordMatrix::zeros(n, d);
    for c in p.iter().rev() {
        acc = &t.try_matmul(&acc)? + &CliffordMatrix::scalar(n, d, *c);
    }
    Ok(acc)
}

/// `p[T]` for a real polynomial.
pub fn real_poly_calc(t: &CliffordMatrix, p: &RealPoly) -> Result<CliffordMatrix> {
    let coeffs: Vec<CliffordNumber> = p.coeffs().iter().map(|&c| CliffordNumber::scalar(t.n(), c)).collect();
    poly_calc(t, &coeffs)
}

/// Which rational theorem's hypotheses `rational_calc` enforces.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "theorem", rename_all = "snake_case")]
pub enum RationalHypothesis {
    /// Spectral condition only.
    None,
    /// `deg q >= deg p + 1`, `p(0) = 0`, `q` zero-free on the closed sector.
    Omega { omega: f64 },
    /// `deg q >= deg p`, `q` zero-free on the closed sector.
    Extended { omega: f64 },
    /// `q` zero-free on the closed sector.
    Hinfty { omega: f64 },
}

fn root_in_closed_sector(z: Complex64, omega: f64) -> bool {
    z.norm() < 1e-12 || z.im.abs().atan2(z.re.abs()) <= omega + 1e-12
}

/// `p[T] q[T]^-1` under the chosen theorem's hypotheses.
pub fn rational_calc(t: &CliffordMatrix, p: &RealPoly, q: &RealPoly, hyp: RationalHypothesis) -> Result<CliffordMatrix> {
    if q.is_zero() {
        return Err(Error::Precondition("zero denominator".into()));
    }
    let roots = q.roots();
    let spec = s_spectrum(t)?;
    let scale = 1.0 + t.operator_norm();
    for z in &roots {
        if spec.distance_to(z.re, z.im.abs()) <= 1e-8 * scale {
            return Err(Error::Precondition(format!("root {z} of q lies on the S-spectrum")));
        }
    }
    let sector = |omega: f64| -> Result<()> {
        if let Some(z) = roots.iter().find(|z| root_in_closed_sector(**z, omega)) {
            return Err(Error::Precondition(format!("root {z} of q lies in the closed sector")));
        }
        Ok(())
    };
    let (dp, dq) = (if p.is_zero() { 0 } else { p.degree() }, q.degree());
    match hyp {
        RationalHypothesis::None => {}
        RationalHypothesis::Omega { omega } => {
            sector(omega)?;
            if !p.is_zero() && (dq < dp + 1 || p.coeffs()[0] != 0.0) {
                return Err(Error::Precondition("need deg q >= deg p + 1 and p(0) = 0".into()));
            }
        }
        RationalHypothesis::Extended { omega } => {
            sector(omega)?;
            if dq < dp {
                return Err(Error::Precondition("need deg q >= deg p".into()));
            }
        }
        RationalHypothesis::Hinfty { omega } => sector(omega)?,
    }
    let qt = real_poly_calc(t, q)?.invert().map_err(|e| {
        Error::Precondition(format!("q[T] is not invertible: {e}"))
    })?;
    real_poly_calc(t, p)?.try_matmul(&qt)
}

/// Which regularizer family was used.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum RegularizerKind {
    /// `(1 + s^2)^-(k+1)`.
    Even { k: usize },
    /// `s^(k+1) (1 + s^2)^-(k+1)`.
    Odd { k: usize },
    /// Supplied by the caller.
    Custom,
}

#[derive(Clone, Debug)]
pub struct Regularizer {
    pub kind: RegularizerKind,
    pub function: LeftSliceFunction,
}

impl Regularizer {
    pub fn even(n: usize, k: usize) -> Self {
        Self {
            kind: RegularizerKind::Even { k },
            function: LeftSliceFunction::from_stem(n, StemFunction::regularizer_even(k)),
        }
    }

    pub fn odd(n: usize, k: usize) -> Self {
        Self {
            kind: RegularizerKind::Odd { k },
            function: LeftSliceFunction::from_stem(n, StemFunction::regularizer_odd(k)),
        }
    }

    pub fn descriptor(&self) -> String {
        match self.kind {
            RegularizerKind::Even { k } => format!("(1+s^2)^-{}", k + 1),
            RegularizerKind::Odd { k } => format!("s^{0}(1+s^2)^-{0}", k + 1),
            RegularizerKind::Custom => "custom".into(),
        }
    }
}

/// Growth orders from metadata, otherwise from sampled log-slopes at
/// `t = 1e-6 .. 1e-3` and `1e3 .. 1e6`.
pub fn estimate_growth(f: &LeftSliceFunction) -> Result<Growth> {
    if let Some(g) = f.growth() {
        return Ok(g);
    }
    let j = ImaginaryUnit::generator(f.n(), 1);
    let angles = [0.0, 0.5 * f.theta(), PI];
    let sample = |t: f64| -> Result<f64> {
        let mut m = 0.0f64;
        for &a in &angles {
            let v = f
                .eval(&crate::clifford::paravector_on_plane(t * a.cos(), t * a.sin(), &j))?
                .abs();
            m = m.max(v);
        }
        if m.is_finite() {
            Ok(m.max(1e-300))
        } else {
            Err(Error::NotRegularizable("non-finite samples".into()))
        }
    };
    let slope = |a: f64, b: f64| -> Result<f64> { Ok((sample(b)? / sample(a)?).log10() / (b / a).log10()) };
    let inf1 = slope(1e3, 1e4)?;
    let inf2 = slope(1e5, 1e6)?;
    let zero1 = -slope(1e-4, 1e-3)?;
    let zero2 = -slope(1e-6, 1e-5)?;
    if (inf2 - inf1).abs() > 0.25 || (zero2 - zero1).abs() > 0.25 || inf2 > 40.0 || zero2 > 40.0 {
        return Err(Error::NotRegularizable(
            "sampled growth is not polynomial".into(),
        ));
    }
    Ok(Growth {
        at_zero: zero2.max(0.0).round() as usize,
        at_infinity: inf2.max(0.0).round() as usize,
    })
}

/// Regularizer from the even family when `f` is bounded at the origin and
/// from the odd family (injective `T` only) otherwise.
pub fn select_regularizer(f: &LeftSliceFunction, t: &CliffordMatrix) -> Result<Regularizer> {
    let growth = estimate_growth(f)?;
    let n = f.n();
    let injective = t.kernel_basis(rank_tol(t)).is_empty();
    let (base, odd) = if growth.at_zero == 0 {
        (growth.at_infinity, false)
    } else if injective {
        (growth.at_zero.max(growth.at_infinity), true)
    } else {
        return Err(Error::NotRegularizable(
            "function is singular at 0 and T has a kernel".into(),
        ));
    };
    for k in base..base + 4 {
        let reg = if odd { Regularizer::odd(n, k) } else { Regularizer::even(n, k) };
        let ef = reg.function.intrinsic_mul(f)?;
        if matches!(ef.class(), FunctionClass::Bnd | FunctionClass::Sh0) {
            return Ok(reg);
        }
    }
    Err(Error::NotRegularizable(format!("no regularizer up to order {}", base + 3)))
}

/// `f(T) = e(T)^-1 (e f)(T)` and its ingredients.
#[derive(Clone, Debug)]
pub struct HinftyResult {
    pub e_t: CliffordMatrix,
    pub ef_t: CliffordMatrix,
    pub f_t: CliffordMatrix,
    pub regularizer: RegularizerKind,
    pub regularizer_descriptor: String,
    pub injectivity_margin: f64,
    pub quadrature: Vec<QuadratureSummary>,
}

impl HinftyResult {
    /// Residual of solving `e(T) x = (ef)(T) v`; zero residual means `v` is in
    /// the domain of `f(T)`.
    pub fn domain_residual(&self, v: &ModuleVector) -> Result<f64> {
        let rhs = self.ef_t.apply(v)?;
        let x = self.f_t.apply(v)?;
        Ok(self.e_t.apply(&x)?.sub(&rhs).norm())
    }

    /// `|| e(T) f(T) - (ef)(T) ||_F`.
    pub fn consistency_residual(&self) -> f64 {
        let lhs = self.e_t.try_matmul(&self.f_t).expect("shapes");
        (&lhs - &self.ef_t).frobenius()
    }
}

/// H-infinity calculus through a regularizer (selected when `None`).
pub fn hinfty_calc(
    t: &CliffordMatrix,
    f: &LeftSliceFunction,
    regularizer: Option<Regularizer>,
    phi: f64,
    j: &ImaginaryUnit,
    cfg: &QuadratureConfig,
) -> Result<HinftyResult> {
    check_dims(t, f, j)?;
    check_bisectorial(t, phi)?;
    let reg = match regularizer {
        Some(r) => r,
        None => select_regularizer(f, t)?,
    };
    if !reg.function.is_intrinsic() {
        return Err(Error::NotRegularizable("regularizer must be intrinsic".into()));
    }
    let ef = reg.function.intrinsic_mul(f)?;
    let ef = ef.collapse_by_blade().unwrap_or(ef).simplify();
    let ef = ef.with_theta(f.theta().min(reg.function.theta()));
    let e = reg.function.clone().with_theta(f.theta().min(reg.function.theta()));
    let e_out = extended_calc(t, &e, phi, j, cfg)?;
    let ef_out = extended_calc(t, &ef, phi, j, cfg)?;
    let (margin, _) = e_out.value.singular_value_range();
    if !(margin > 1e-10) {
        return Err(Error::InjectivityFailure { margin });
    }
    let inv = e_out
        .value
        .invert()
        .map_err(|_| Error::InjectivityFailure { margin })?;
    let f_t = inv.try_matmul(&ef_out.value)?;
    let mut quadrature = e_out.quadrature;
    quadrature.extend(ef_out.quadrature);
    Ok(HinftyResult {
        e_t: e_out.value,
        ef_t: ef_out.value,
        f_t,
        regularizer: reg.kind,
        regularizer_descriptor: reg.descriptor(),
        injectivity_margin: margin,
        quadrature,
    })
}

/// Dispatch on a calculus mode.
pub fn calc(
    t: &CliffordMatrix,
    f: &LeftSliceFunction,
    mode: CalcMode,
    phi: f64,
    j: &ImaginaryUnit,
    cfg: &QuadratureConfig,
) -> Result<CalcOutput> {
    match mode {
        CalcMode::Omega => omega_calc(t, f, phi, j, cfg),
        CalcMode::OmegaPunctured { rho } => omega_calc_punctured(t, f, phi, rho, j, cfg),
        CalcMode::Extended => extended_calc(t, f, phi, j, cfg),
        CalcMode::ExtendedInvertible { rho } => extended_calc_invertible(t, f, phi, rho, j, cfg),
        CalcMode::Hinfty => {
            let h = hinfty_calc(t, f, None, phi, j, cfg)?;
            Ok(CalcOutput {
                value: h.f_t,
                quadrature: h.quadrature,
            })
        }
    }
}

/// Spectral projection `E_0 = (1/2pi) oint_{|s| = rho} S_L^-1(s, T) ds_J`.
pub fn spectral_projection(
    t: &CliffordMatrix,
    rho: f64,
    j: &ImaginaryUnit,
    cfg: &QuadratureConfig,
) -> Result<CalcOutput> {
    if j.n() != t.n() {
        return Err(Error::DimensionMismatch("operator and imaginary unit".into()));
    }
    let spec = s_spectrum(t)?;
    for s in &spec.spheres {
        let r = s.x.hypot(s.y);
        if r > 1e-8 && r <= rho * (1.0 + 1e-6) {
            return Err(Error::Precondition(format!(
                "spectral sphere ({:.6}, {:.6}) lies inside the circle of radius {rho}",
                s.x, s.y
            )));
        }
        if (r - rho).abs() <= 1e-8 {
            return Err(Error::Precondition("spectrum on the circle".into()));
        }
    }
    let one = LeftSliceFunction::constant(CliffordNumber::one(t.n()));
    left_integral(t, &one, &ContourPath::circle(0.0, rho, *j, true)?, cfg)
}

/// Spectra of `T` and `g(T)` with both one-sided distances.
#[derive(Clone, Debug, Serialize)]
pub struct SpectralMappingReport {
    pub spectrum_t: Vec<EigenSphere>,
    pub spectrum_gt: Vec<EigenSphere>,
    pub mapped: Vec<EigenSphere>,
    pub g_inf: f64,
    /// `sup_{a in g(sigma(T))} dist(a, sigma(g(T)))`.
    pub forward: f64,
    /// `sup_{b in sigma(g(T))} dist(b, g(sigma(T)) u {g_inf})`.
    pub backward: f64,
}

fn set_distance(from: &[EigenSphere], to: &[EigenSphere]) -> f64 {
    from.iter()
        .map(|a| to.iter().map(|b| a.distance(b)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}

/// Compares `sigma_S(g(T))` with the image of `sigma_S(T)` under `g`.
pub fn spectral_mapping_check(
    t: &CliffordMatrix,
    g: &LeftSliceFunction,
    phi: f64,
    j: &ImaginaryUnit,
    cfg: &QuadratureConfig,
) -> Result<SpectralMappingReport> {
    if !g.is_intrinsic() {
        return Err(Error::CalcClass("spectral mapping needs an intrinsic function".into()));
    }
    let gt = extended_calc(t, g, phi, j, cfg)?.value;
    let (g0, ginf) = g.limits()?;
    let spec_t = s_spectrum(t)?;
    let spec_gt = s_spectrum(&gt)?;
    let mapped: Vec<EigenSphere> = spec_t
        .spheres
        .iter()
        .map(|s| {
            if s.x.hypot(s.y) <= 1e-8 {
                Ok(EigenSphere::new(g0.scalar_part(), 0.0))
            } else {
                let v = g.eval_complex(Complex64::new(s.x, s.y))?;
                Ok(EigenSphere::new(v.re, v.im))
            }
        })
        .collect::<Result<_>>()?;
    let spectrum_gt: Vec<EigenSphere> = spec_gt.spheres.iter().map(|s| s.sphere()).collect();
    let mut with_inf = mapped.clone();
    with_inf.push(EigenSphere::new(ginf.scalar_part(), 0.0));
    Ok(SpectralMappingReport {
        spectrum_t: spec_t.spheres.iter().map(|s| s.sphere()).collect(),
        forward: set_distance(&mapped, &spectrum_gt),
        backward: set_distance(&spectrum_gt, &with_inf),
        spectrum_gt,
        mapped,
        g_inf: ginf.scalar_part(),
    })
}

/// Quadrature value, case-split expectation and residual of the kernel lemma.
#[derive(Clone, Debug)]
pub struct ProductIdentityReport {
    pub value: CliffordMatrix,
    pub expected: CliffordMatrix,
    pub inside: bool,
    pub residual: f64,
}

/// `(1/2pi) int g(s) ds_J (conj(s) B - B p) Q_s(p)^-1` against `B g(p)` for
/// `p` inside `D_phi` and `0` outside.
pub fn verify_product_identity(
    g: &LeftSliceFunction,
    b: &CliffordMatrix,
    p: &Paravector,
    phi: f64,
    j: &ImaginaryUnit,
    cfg: &QuadratureConfig,
) -> Result<ProductIdentityReport> {
    if !g.is_intrinsic() {
        return Err(Error::CalcClass("product lemma needs an intrinsic function".into()));
    }
    check_theta(g, phi)?;
    let angle = p.im_abs().atan2(p.s0.abs());
    if p.abs() < 1e-12 || (angle - phi).abs() < 1e-9 {
        return Err(Error::Precondition("p lies on the contour".into()));
    }
    let inside = angle < phi;
    let (n, d) = (b.n(), b.d());
    let expected = if inside {
        b.mul_right(&g.eval(p)?)
    } else {
        CliffordMatrix::zeros(n, d)
    };
    let path = ContourPath::sector_boundary(phi, *j)?;
    let pc = p.to_clifford();
    let bp = b.mul_right(&pc);
    let integrand = |node: &Node| -> Result<CliffordMatrix> {
        let s = node.s;
        let q = pc * pc - pc.scale(2.0 * s.s0) + CliffordNumber::scalar(n, s.abs_sqr());
        let qinv = q.inverse()?;
        let m = &b.mul_left(&s.conj().to_clifford()) - &bp;
        let c = g.eval_plane(node.z.re, node.z.im, j) * node.ds;
        Ok(m.mul_left(&c.scale(1.0 / (2.0 * PI))).mul_right(&qinv))
    };
    let value = integrate_operator_contour(&integrand, &path, cfg)?.value;
    let residual = (&value - &expected).frobenius();
    Ok(ProductIdentityReport {
        value,
        expected,
        inside,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    fn j1(n: usize) -> ImaginaryUnit {
        ImaginaryUnit::generator(n, 1)
    }

    fn sh0(n: usize) -> LeftSliceFunction {
        LeftSliceFunction::from_stem(n, StemFunction::s_over_one_plus_s2_pow(2))
    }

    #[test]
    fn omega_examples() {
        let t = CliffordMatrix::real_diag(1, &[2.0, -3.0]);
        let out = omega_calc(&t, &sh0(1), 0.6, &j1(1), &cfg()).unwrap();
        let expected = CliffordMatrix::real_diag(1, &[2.0 / 25.0, -3.0 / 100.0]);
        assert!(out.value.rel_diff(&expected, 1e-300) < 1e-9, "{:?}", out.value);
        assert!(out.quadrature[0].evaluations > 0);
        let coarse = QuadratureConfig {
            nodes_per_panel: 2,
            max_refinements: 0,
            ..cfg()
        };
        if let Ok(c) = omega_calc(&t, &sh0(1), 0.6, &j1(1), &coarse) {
            assert!(c.value.rel_diff(&expected, 1e-300) > 1e-9);
        }

        let id = CliffordMatrix::identity(2, 2);
        let out = omega_calc(&id, &sh0(2), 0.6, &j1(2), &cfg()).unwrap();
        assert!(out.value.rel_diff(&CliffordMatrix::identity(2, 2).scale(0.25), 1e-300) < 1e-9);
    }

    #[test]
    fn omega_refuses_unbounded() {
        let t = CliffordMatrix::real_diag(1, &[2.0]);
        let f = LeftSliceFunction::from_stem(1, StemFunction::monomial(1));
        assert!(matches!(omega_calc(&t, &f, 0.5, &j1(1), &cfg()), Err(Error::CalcClass(_))));
    }

    #[test]
    fn right_linearity_in_coefficients() {
        let n = 2;
        let t = CliffordMatrix::real_diag(n, &[2.0, -3.0]);
        let a = CliffordNumber::blade(n, 0b11);
        let fa = sh0(n).mul_right(&a);
        let lhs = omega_calc(&t, &fa, 0.6, &j1(n), &cfg()).unwrap().value;
        let rhs = omega_calc(&t, &sh0(n), 0.6, &j1(n), &cfg()).unwrap().value.mul_right(&a);
        assert!(lhs.rel_diff(&rhs, 1e-300) < 1e-12);
    }

    #[test]
    fn extended_examples() {
        let t = CliffordMatrix::real_diag(1, &[1.0]);
        let f = LeftSliceFunction::from_stem(1, StemFunction::inv_one_plus_s2());
        let v = extended_calc(&t, &f, 0.6, &j1(1), &cfg()).unwrap().value;
        assert!((v.get(0, 0).scalar_part() - 0.5).abs() < 1e-14);

        let t = CliffordMatrix::real_diag(1, &[2.0]);
        let g = LeftSliceFunction::rational(1, RealPoly::monomial(2), RealPoly::one_plus_z2_pow(1)).unwrap();
        let v = extended_calc(&t, &g, 0.6, &j1(1), &cfg()).unwrap().value;
        assert!((v.get(0, 0).scalar_part() - 0.8).abs() < 1e-14);

        // f0 = 2 at the zero operator
        let z = CliffordMatrix::zeros(1, 1);
        let h = LeftSliceFunction::rational(1, RealPoly::new(vec![2.0, 1.0]), RealPoly::new(vec![1.0, 1.0, 1.0]))
            .unwrap()
            .with_theta(0.9);
        let v = extended_calc(&z, &h, 0.6, &j1(1), &cfg()).unwrap().value;
        assert!(v.rel_diff(&CliffordMatrix::real_diag(1, &[2.0]), 1.0) < 1e-10, "{v:?}");
    }

    #[test]
    fn punctured_examples() {
        let t = CliffordMatrix::real_diag(1, &[2.0, -3.0]);
        let a = omega_calc(&t, &sh0(1), 0.6, &j1(1), &cfg()).unwrap().value;
        let b = omega_calc_punctured(&t, &sh0(1), 0.6, 1.0, &j1(1), &cfg()).unwrap().value;
        let c = omega_calc_punctured(&t, &sh0(1), 0.6, 0.5, &j1(1), &cfg()).unwrap().value;
        assert!(a.rel_diff(&b, 1e-300) < 1e-9);
        assert!(b.rel_diff(&c, 1e-300) < 1e-9);
        let f = LeftSliceFunction::from_stem(1, StemFunction::inv_one_plus_s2());
        let t2 = CliffordMatrix::real_diag(1, &[2.0]);
        let v = omega_calc_punctured(&t2, &f, 0.6, 1.0, &j1(1), &cfg()).unwrap().value;
        assert!((v.get(0, 0).scalar_part() - 0.2).abs() < 1e-10);
        let sing = CliffordMatrix::real_diag(1, &[0.0, 1.0]);
        assert!(matches!(
            omega_calc_punctured(&sing, &sh0(1), 0.6, 0.5, &j1(1), &cfg()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn right_intrinsic_examples() {
        let t = CliffordMatrix::real_diag(1, &[2.0, -3.0]);
        let l = omega_calc(&t, &sh0(1), 0.6, &j1(1), &cfg()).unwrap().value;
        let r = omega_calc_right_intrinsic(&t, &sh0(1), 0.6, &j1(1), &cfg()).unwrap().value;
        assert!(l.rel_diff(&r, 1e-300) < 1e-9);
        let z = CliffordMatrix::zeros(1, 1);
        let r = omega_calc_right_intrinsic(&z, &sh0(1), 0.6, &j1(1), &cfg()).unwrap().value;
        assert!(r.frobenius() < 1e-12);
        let zero = LeftSliceFunction::zero(1, 1.0);
        let r = omega_calc_right_intrinsic(&t, &zero, 0.6, &j1(1), &cfg()).unwrap().value;
        assert_eq!(r, CliffordMatrix::zeros(1, 2));
    }

    #[test]
    fn poly_examples() {
        let n = 1;
        let e1 = CliffordMatrix::scalar(n, 1, CliffordNumber::generator(n, 1));
        let p = [CliffordNumber::one(n), CliffordNumber::zero(n), CliffordNumber::one(n)];
        assert_eq!(poly_calc(&e1, &p).unwrap(), CliffordMatrix::zeros(n, 1));
        let x = [CliffordNumber::zero(n), CliffordNumber::one(n)];
        assert_eq!(poly_calc(&e1, &x).unwrap(), e1);
    }

    #[test]
    fn rational_examples() {
        let t = CliffordMatrix::real_diag(1, &[2.0]);
        let v = rational_calc(&t, &RealPoly::monomial(1), &RealPoly::one_plus_z2_pow(1), RationalHypothesis::None).unwrap();
        assert!((v.get(0, 0).scalar_part() - 0.4).abs() < 1e-15);
        let t = CliffordMatrix::real_diag(1, &[1.0, -2.0]);
        let v = rational_calc(&t, &RealPoly::constant(1.0), &RealPoly::one_plus_z2_pow(1), RationalHypothesis::None).unwrap();
        assert!(v.rel_diff(&CliffordMatrix::real_diag(1, &[0.5, 0.2]), 1.0) < 1e-15);
        // root on the spectrum
        let bad = rational_calc(&t, &RealPoly::constant(1.0), &RealPoly::new(vec![-1.0, 1.0]), RationalHypothesis::None);
        assert!(matches!(bad, Err(Error::Precondition(_))));
        // omega theorem needs p(0) = 0
        let bad = rational_calc(
            &t,
            &RealPoly::constant(1.0),
            &RealPoly::one_plus_z2_pow(1),
            RationalHypothesis::Omega { omega: 0.1 },
        );
        assert!(matches!(bad, Err(Error::Precondition(_))));
    }

    #[test]
    fn regularizer_selection() {
        let t = CliffordMatrix::real_diag(1, &[2.0, -3.0]);
        let s = LeftSliceFunction::from_stem(1, StemFunction::monomial(1));
        assert_eq!(select_regularizer(&s, &t).unwrap().kind, RegularizerKind::Even { k: 1 });
        let b = LeftSliceFunction::from_stem(1, StemFunction::inv_one_plus_s2());
        assert_eq!(select_regularizer(&b, &t).unwrap().kind, RegularizerKind::Even { k: 0 });
        let inv = LeftSliceFunction::rational(1, RealPoly::constant(1.0), RealPoly::monomial(1)).unwrap();
        assert_eq!(select_regularizer(&inv, &t).unwrap().kind, RegularizerKind::Odd { k: 1 });
        let sing = CliffordMatrix::real_diag(1, &[0.0, 1.0]);
        assert!(matches!(select_regularizer(&inv, &sing), Err(Error::NotRegularizable(_))));
    }

    #[test]
    fn hinfty_examples() {
        let t = CliffordMatrix::real_diag(1, &[2.0, -3.0]);
        let s = LeftSliceFunction::from_stem(1, StemFunction::monomial(1));
        let h = hinfty_calc(&t, &s, None, 0.6, &j1(1), &cfg()).unwrap();
        assert!(h.f_t.rel_diff(&t, 1e-300) < 1e-8);
        assert!(h.consistency_residual() < 1e-9);
        let s2 = LeftSliceFunction::from_stem(1, StemFunction::monomial(2));
        let h = hinfty_calc(&t, &s2, None, 0.6, &j1(1), &cfg()).unwrap();
        assert!(h.f_t.rel_diff(&t.try_matmul(&t).unwrap(), 1e-300) < 1e-8);
        let t = CliffordMatrix::real_diag(1, &[2.0]);
        let inv = LeftSliceFunction::rational(1, RealPoly::constant(1.0), RealPoly::monomial(1)).unwrap();
        let h = hinfty_calc(&t, &inv, Some(Regularizer::odd(1, 1)), 0.6, &j1(1), &cfg()).unwrap();
        assert!((h.f_t.get(0, 0).scalar_part() - 0.5).abs() < 1e-9);
        let v = ModuleVector::new(vec![CliffordNumber::generator(1, 1)]).unwrap();
        assert!(h.domain_residual(&v).unwrap() < 1e-12);
    }

    #[test]
    fn projection_examples() {
        let t = CliffordMatrix::real_diag(1, &[0.0, 2.0]);
        let e0 = spectral_projection(&t, 1.0, &j1(1), &cfg()).unwrap().value;
        assert!(e0.rel_diff(&CliffordMatrix::real_diag(1, &[1.0, 0.0]), 1.0) < 1e-12);
        let inv = CliffordMatrix::real_diag(1, &[1.5, 2.0]);
        let e0 = spectral_projection(&inv, 1.0, &j1(1), &cfg()).unwrap().value;
        assert!(e0.frobenius() < 1e-12);
        assert!(spectral_projection(&t, 3.0, &j1(1), &cfg()).is_err());
    }

    #[test]
    fn mapping_example() {
        let t = CliffordMatrix::real_diag(1, &[1.0, -2.0]);
        let g = LeftSliceFunction::from_stem(1, StemFunction::inv_one_plus_s2());
        let r = spectral_mapping_check(&t, &g, 0.6, &j1(1), &cfg()).unwrap();
        assert!(r.forward < 1e-6 && r.backward < 1e-6, "{r:?}");
        assert_eq!(r.spectrum_gt.len(), 2);
    }

    #[test]
    fn product_identity_examples() {
        let n = 1;
        let b = CliffordMatrix::identity(n, 1);
        let p = Paravector::real(n, 1.0);
        let r = verify_product_identity(&sh0(n), &b, &p, FRAC_PI_4, &j1(n), &cfg()).unwrap();
        assert!(r.inside);
        assert!(r.residual < 1e-8, "{r:?}");
        assert!((r.expected.get(0, 0).scalar_part() - 0.25).abs() < 1e-15);
        let p = Paravector::new(0.0, &[2.0]).unwrap();
        let r = verify_product_identity(&sh0(n), &b, &p, FRAC_PI_4, &j1(n), &cfg()).unwrap();
        assert!(!r.inside && r.residual < 1e-8, "{r:?}");
        let z = CliffordMatrix::zeros(n, 1);
        let r = verify_product_identity(&sh0(n), &z, &Paravector::real(n, 1.0), FRAC_PI_4, &j1(n), &cfg()).unwrap();
        assert_eq!(r.value, z);
    }
}
