//! Theorem-level verification suites over a catalog of slice functions.

use std::collections::HashMap;
use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::calculus::{
    check_bisectorial, extended_calc, hinfty_calc, omega_calc, omega_calc_punctured, omega_calc_right_intrinsic,
    poly_calc, rational_calc, select_regularizer, spectral_mapping_check, spectral_projection, RationalHypothesis,
    Regularizer, RegularizerKind, RANK_TOL,
};
use crate::clifford::{CliffordNumber, ImaginaryUnit};
use crate::contour::QuadratureConfig;
use crate::error::{Error, Result};
use crate::linalg::CliffordMatrix;
use crate::poly::RealPoly;
use crate::random;
use crate::slice::{FunctionClass, LeftSliceFunction, StemFunction};
use crate::spectrum::{right_from_left, s_resolvent_left, s_resolvent_right, s_spectrum, resolvent_identity_residual};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Algebra,
    Independence,
    Product,
    Kernel,
    Projection,
    Mapping,
    Hinfty,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Algebra,
        Suite::Independence,
        Suite::Product,
        Suite::Kernel,
        Suite::Projection,
        Suite::Mapping,
        Suite::Hinfty,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Algebra => "algebra",
            Suite::Independence => "independence",
            Suite::Product => "product",
            Suite::Kernel => "kernel",
            Suite::Projection => "projection",
            Suite::Mapping => "mapping",
            Suite::Hinfty => "hinfty",
        }
    }

    /// Parses a comma-separated list of suite names; `all` expands to every
    /// suite.
    pub fn parse_selection(s: &str) -> Result<Vec<Suite>> {
        let mut out: Vec<Suite> = Vec::new();
        for name in s.split(',').map(str::trim) {
            let add: Vec<Suite> = if name == "all" {
                Suite::ALL.to_vec()
            } else {
                vec![name.parse()?]
            };
            for suite in add {
                if !out.contains(&suite) {
                    out.push(suite);
                }
            }
        }
        Ok(out)
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown suite '{s}'")))
    }
}

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub name: String,
    pub function: LeftSliceFunction,
}

#[derive(Clone, Debug, Default)]
pub struct Catalog {
    pub entries: Vec<CatalogEntry>,
}

impl Catalog {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn push(&mut self, name: impl Into<String>, function: LeftSliceFunction) {
        self.entries.push(CatalogEntry {
            name: name.into(),
            function,
        });
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Monomials, `(1+s^2)^-1`, `s/(1+s^2)^k`, `s^2/(1+s^2)^2`, `(s+1)/(s^2+4)`,
    /// one member of each regularizer family and two functions with
    /// non-real coefficients.
    pub fn standard(n: usize) -> Self {
        let mut c = Self::empty();
        let stem = |s: StemFunction| LeftSliceFunction::from_stem(n, s);
        c.push("s", stem(StemFunction::monomial(1)));
        c.push("s^2", stem(StemFunction::monomial(2)));
        c.push("1/(1+s^2)", stem(StemFunction::inv_one_plus_s2()));
        c.push("s/(1+s^2)", stem(StemFunction::s_over_one_plus_s2_pow(1)));
        c.push("s/(1+s^2)^2", stem(StemFunction::s_over_one_plus_s2_pow(2)));
        let s2 = StemFunction::rational("s^2/(1+s^2)^2", RealPoly::monomial(2), RealPoly::one_plus_z2_pow(2))
            .expect("valid rational");
        c.push("s^2/(1+s^2)^2", stem(s2));
        let shifted = StemFunction::rational(
            "(s+1)/(s^2+4)",
            RealPoly::new(vec![1.0, 1.0]),
            RealPoly::new(vec![4.0, 0.0, 1.0]),
        )
        .expect("valid rational");
        c.push("(s+1)/(s^2+4)", stem(shifted));
        c.push("(1+s^2)^-2", stem(StemFunction::regularizer_even(1)));
        c.push("s^2/(1+s^2)^2 (odd family)", stem(StemFunction::regularizer_odd(1)));
        let a = if n >= 2 {
            CliffordNumber::generator(n, 1) + CliffordNumber::blade(n, 0b11).scale(0.5)
        } else {
            CliffordNumber::generator(n, 1)
        };
        c.push("s/(1+s^2)^2 a", stem(StemFunction::s_over_one_plus_s2_pow(2)).mul_right(&a));
        let b = CliffordNumber::one(n) + CliffordNumber::generator(n, 1).scale(-0.5);
        c.push("1/(1+s^2) b", stem(StemFunction::inv_one_plus_s2()).mul_right(&b));
        c
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub suite: Suite,
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub suites: Vec<Suite>,
    pub omega_spectral: Option<f64>,
    pub phi: Option<f64>,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refusal: Option<String>,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn refused(&self) -> bool {
        self.refusal.is_some()
    }

    pub fn all_passed(&self) -> bool {
        !self.refused() && self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn max_residual(&self, suite: Suite) -> f64 {
        self.checks
            .iter()
            .filter(|c| c.suite == suite)
            .map(|c| if c.residual.is_nan() { f64::INFINITY } else { c.residual })
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Contour angle; chosen from the spectrum when `None`.
    pub phi: Option<f64>,
    /// Random samples for the algebra suite.
    pub algebra_samples: usize,
    pub independence_angles: Vec<f64>,
    pub independence_units: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            phi: None,
            algebra_samples: 200,
            independence_angles: vec![0.35, 0.6, 0.9],
            independence_units: 3,
        }
    }
}

/// `||a - b||_F / max(||b||_F, 1)`.
pub fn rel_residual(a: &CliffordMatrix, b: &CliffordMatrix) -> f64 {
    a.rel_diff(b, 1.0)
}

/// `sum_k p_k[T] q_k[T]^-1 a_k` for an all-rational function.
pub fn rational_oracle(t: &CliffordMatrix, f: &LeftSliceFunction, hyp: RationalHypothesis) -> Result<CliffordMatrix> {
    let mut acc = CliffordMatrix::zeros(t.n(), t.d());
    for (stem, a) in f.terms() {
        let (p, q) = stem
            .as_rational()
            .ok_or_else(|| Error::InvalidInput(format!("stem {} is not rational", stem.name())))?;
        acc = &acc + &rational_calc(t, p, q, hyp)?.mul_right(a);
    }
    Ok(acc)
}

/// Default contour angle for an operator with spectral angle `omega`.
pub fn default_phi(omega: f64, theta: f64) -> f64 {
    if omega < 0.5 && theta > 0.7 {
        0.6
    } else {
        0.5 * (omega + theta.min(FRAC_PI_2))
    }
}

struct Ctx<'a> {
    t: &'a CliffordMatrix,
    catalog: &'a Catalog,
    cfg: &'a QuadratureConfig,
    opts: &'a VerifyOptions,
    omega: f64,
    phi: f64,
    j: ImaginaryUnit,
    classes: Vec<FunctionClass>,
    checks: Vec<CheckResult>,
    extended: HashMap<usize, Result<CliffordMatrix>>,
}

impl Ctx<'_> {
    fn record(&mut self, suite: Suite, name: String, tol: f64, residual: Result<f64>) {
        let (residual, detail) = match residual {
            Ok(r) => (r, None),
            Err(e) => (f64::NAN, Some(e.to_string())),
        };
        self.checks.push(CheckResult {
            suite,
            name,
            residual,
            tolerance: tol,
            passed: residual <= tol,
            detail,
        });
    }

    fn entry(&self, i: usize) -> &CatalogEntry {
        &self.catalog.entries[i]
    }

    fn indices<P: Fn(&CatalogEntry, FunctionClass) -> bool>(&self, pred: P) -> Vec<usize> {
        (0..self.catalog.entries.len())
            .filter(|&i| pred(&self.catalog.entries[i], self.classes[i]) && self.entry(i).function.theta() > self.phi)
            .collect()
    }

    fn bounded(&self, intrinsic_only: bool) -> Vec<usize> {
        self.indices(|e, c| {
            matches!(c, FunctionClass::Sh0 | FunctionClass::Bnd) && (!intrinsic_only || e.function.is_intrinsic())
        })
    }

    fn ext(&mut self, i: usize) -> Result<CliffordMatrix> {
        if !self.extended.contains_key(&i) {
            let v = extended_calc(self.t, &self.catalog.entries[i].function, self.phi, &self.j, self.cfg).map(|o| o.value);
            self.extended.insert(i, v);
        }
        match &self.extended[&i] {
            Ok(m) => Ok(m.clone()),
            Err(e) => Err(e.clone()),
        }
    }
}

/// Runs the selected suites for `T` over `catalog`. Failures become report
/// entries; a non-bisectorial `T` yields a refusal for every suite except
/// `algebra`.
pub fn verify_suite(
    t: &CliffordMatrix,
    catalog: &Catalog,
    suites: &[Suite],
    opts: &VerifyOptions,
    cfg: &QuadratureConfig,
) -> VerifyReport {
    let mut report = VerifyReport {
        suites: suites.to_vec(),
        omega_spectral: None,
        phi: None,
        seed: opts.seed,
        refusal: None,
        checks: Vec::new(),
    };
    if catalog.is_empty() {
        return report;
    }
    let spec = match s_spectrum(t) {
        Ok(s) => s,
        Err(e) => {
            report.refusal = Some(format!("spectrum failed: {e}"));
            return report;
        }
    };
    let omega = spec.omega();
    report.omega_spectral = Some(omega);
    let theta = catalog
        .entries
        .iter()
        .map(|e| e.function.theta())
        .fold(f64::INFINITY, f64::min);
    let phi = opts.phi.unwrap_or_else(|| default_phi(omega, theta));
    report.phi = Some(phi);
    let mut ctx = Ctx {
        t,
        catalog,
        cfg,
        opts,
        omega,
        phi,
        j: ImaginaryUnit::generator(t.n(), 1),
        classes: catalog.entries.iter().map(|e| e.function.class()).collect(),
        checks: Vec::new(),
        extended: HashMap::new(),
    };
    if suites.contains(&Suite::Algebra) {
        algebra(&mut ctx);
    }
    if suites.iter().any(|s| *s != Suite::Algebra) {
        if let Err(e) = check_bisectorial(t, phi) {
            report.refusal = Some(match e {
                Error::NotBisectorial(m) => format!("not bisectorial: {m}"),
                other => other.to_string(),
            });
            report.checks = ctx.checks;
            return report;
        }
    }
    for suite in suites {
        match suite {
            Suite::Algebra => {}
            Suite::Independence => independence(&mut ctx),
            Suite::Product => product(&mut ctx),
            Suite::Kernel => kernel(&mut ctx),
            Suite::Projection => projection(&mut ctx),
            Suite::Mapping => mapping(&mut ctx),
            Suite::Hinfty => hinfty(&mut ctx),
        }
    }
    report.checks = ctx.checks;
    report
}

fn algebra(ctx: &mut Ctx<'_>) {
    let t = ctx.t;
    let n = t.n();
    let samples = ctx.opts.algebra_samples;
    let mut rng = random::rng(ctx.opts.seed);
    let (mut assoc, mut dist, mut anti) = (0.0f64, 0.0f64, 0.0f64);
    let (mut bound, mut para) = (0.0f64, 0.0f64);
    for _ in 0..samples {
        let a = random::clifford(&mut rng, n, 1.0);
        let b = random::clifford(&mut rng, n, 1.0);
        let c = random::clifford(&mut rng, n, 1.0);
        let scale = 1.0 + a.abs() * b.abs() * c.abs();
        assoc = assoc.max(((a * b) * c).max_diff(&(a * (b * c))) / scale);
        dist = dist.max((a * (b + c)).max_diff(&(a * b + a * c)) / scale);
        anti = anti.max((a * b).conj().max_diff(&(b.conj() * a.conj())) / scale);
        let lim = 2f64.powf(n as f64 / 2.0) * a.abs() * b.abs();
        bound = bound.max(((a * b).abs() - lim).max(0.0) / (1.0 + lim));
        let p = random::paravector(&mut rng, n, 1.0).to_clifford();
        para = para.max(((p * b).abs() - p.abs() * b.abs()).abs() / (1.0 + p.abs() * b.abs()));
    }
    ctx.record(Suite::Algebra, "associativity".into(), 1e-12, Ok(assoc));
    ctx.record(Suite::Algebra, "distributivity".into(), 1e-12, Ok(dist));
    ctx.record(Suite::Algebra, "conjugation anti-homomorphism".into(), 1e-12, Ok(anti));
    ctx.record(Suite::Algebra, "norm bound 2^(n/2)".into(), 1e-12, Ok(bound));
    ctx.record(Suite::Algebra, "paravector norm multiplicative".into(), 1e-12, Ok(para));

    let spec = s_spectrum(t);
    let (mut left, mut right, mut count) = (0.0f64, 0.0f64, 0usize);
    let radius = 1.0 + t.operator_norm();
    let mut err = None;
    for _ in 0..samples {
        let s = random::paravector(&mut rng, n, 2.0 * radius);
        if s.im_abs() < 1e-3 {
            continue;
        }
        if let Ok(sp) = &spec {
            if sp.distance_to(s.s0, s.im_abs()) < 0.05 * radius {
                continue;
            }
        }
        let res = (|| -> Result<(f64, f64)> {
            let sl = s_resolvent_left(t, &s)?;
            let norm = 1.0 + sl.frobenius() * (s.abs() + t.operator_norm());
            let l = resolvent_identity_residual(t, &s, &sl)? / norm;
            let (_, _, j) = s.plane_coords(1e-14);
            let j = j.expect("non-real point");
            let sl_bar = s_resolvent_left(t, &s.conj())?;
            let sr = s_resolvent_right(t, &s)?;
            let r = rel_residual(&right_from_left(&sl, &sl_bar, &j), &sr);
            Ok((l, r))
        })();
        match res {
            Ok((l, r)) => {
                left = left.max(l);
                right = right.max(r);
                count += 1;
            }
            Err(e) => err = Some(e),
        }
    }
    let (l, r) = match err {
        Some(e) => (Err(e.clone()), Err(e)),
        None => (Ok(left), Ok(right)),
    };
    ctx.record(Suite::Algebra, format!("left resolvent equation ({count} points)"), 1e-10, l);
    ctx.record(Suite::Algebra, format!("right resolvent decomposition ({count} points)"), 1e-10, r);
}

fn independence(ctx: &mut Ctx<'_>) {
    let (t, cfg) = (ctx.t, ctx.cfg);
    let n = t.n();
    let mut rng = random::rng(ctx.opts.seed.wrapping_add(1));
    let units: Vec<ImaginaryUnit> = (0..ctx.opts.independence_units).map(|_| random::unit(&mut rng, n)).collect();
    let sh0 = ctx.indices(|_, c| c == FunctionClass::Sh0);
    for &i in &sh0 {
        let f = ctx.entry(i).function.clone();
        let name = ctx.entry(i).name.clone();
        let angles: Vec<f64> = ctx
            .opts
            .independence_angles
            .iter()
            .copied()
            .filter(|&a| a > ctx.omega + 1e-3 && a < f.theta())
            .collect();
        let mut values = Vec::new();
        let mut failure = None;
        for &a in &angles {
            for j in &units {
                match omega_calc(t, &f, a, j, cfg) {
                    Ok(o) => values.push(o.value),
                    Err(e) => failure = Some(e),
                }
            }
        }
        let res = match failure {
            Some(e) => Err(e),
            None => {
                let mut worst = 0.0f64;
                for (k, a) in values.iter().enumerate() {
                    for b in &values[k + 1..] {
                        worst = worst.max(rel_residual(a, b));
                    }
                }
                Ok(worst)
            }
        };
        ctx.record(
            Suite::Independence,
            format!("contour invariance {name} ({} angles x {} units)", angles.len(), units.len()),
            2.0 * cfg.rel_tol,
            res,
        );
    }

    let (phi, j, omega) = (ctx.phi, ctx.j, ctx.omega);
    for &i in &sh0 {
        let f = ctx.entry(i).function.clone();
        let name = ctx.entry(i).name.clone();
        if f.all_rational() {
            let res = (|| {
                let oracle = rational_oracle(t, &f, RationalHypothesis::Omega { omega })?;
                Ok(rel_residual(&omega_calc(t, &f, phi, &j, cfg)?.value, &oracle))
            })();
            ctx.record(Suite::Independence, format!("omega vs rational {name}"), 1e-8, res);
        }
        if f.is_intrinsic() {
            let res = (|| {
                let l = omega_calc(t, &f, phi, &j, cfg)?.value;
                let r = omega_calc_right_intrinsic(t, &f, phi, &j, cfg)?.value;
                Ok(rel_residual(&r, &l))
            })();
            ctx.record(Suite::Independence, format!("right resolvent representation {name}"), 1e-8, res);
        }
    }
    for i in ctx.indices(|_, c| c == FunctionClass::Bnd) {
        let f = ctx.entry(i).function.clone();
        let name = ctx.entry(i).name.clone();
        if f.all_rational() {
            let ext = ctx.ext(i);
            let res = (|| Ok(rel_residual(&ext?, &rational_oracle(t, &f, RationalHypothesis::Extended { omega })?)))();
            ctx.record(Suite::Independence, format!("extended vs rational {name}"), 1e-8, res);
        }
    }
    if let Ok(spec) = s_spectrum(t) {
        if !spec.contains_zero(1e-8) {
            let gap = spec.distance_to(0.0, 0.0);
            let (r1, r2) = (0.3 * gap, 0.7 * gap);
            for &i in &sh0 {
                let f = ctx.entry(i).function.clone();
                let name = ctx.entry(i).name.clone();
                let res = (|| {
                    let full = omega_calc(t, &f, phi, &j, cfg)?.value;
                    let a = omega_calc_punctured(t, &f, phi, r1, &j, cfg)?.value;
                    let b = omega_calc_punctured(t, &f, phi, r2, &j, cfg)?.value;
                    Ok(rel_residual(&a, &full).max(rel_residual(&b, &full)))
                })();
                ctx.record(Suite::Independence, format!("punctured path {name}"), 1e-8, res);
            }
        }
    }
}

fn product(ctx: &mut Ctx<'_>) {
    let t = ctx.t;
    let n = t.n();
    let (phi, j, cfg) = (ctx.phi, ctx.j, ctx.cfg);
    let intrinsic = ctx.bounded(true);
    let all = ctx.bounded(false);
    for &gi in &intrinsic {
        for &fi in &all {
            let g = ctx.entry(gi).function.clone();
            let f = ctx.entry(fi).function.clone();
            let name = format!("product rule ({}) ({})", ctx.entry(gi).name, ctx.entry(fi).name);
            let (gt, ft) = (ctx.ext(gi), ctx.ext(fi));
            let res = (|| {
                let gf = g.intrinsic_mul(&f)?;
                let gf = gf.collapse_by_blade().unwrap_or(gf).simplify();
                let lhs = extended_calc(t, &gf, phi, &j, cfg)?.value;
                Ok(rel_residual(&lhs, &gt?.try_matmul(&ft?)?))
            })();
            ctx.record(Suite::Product, name, 1e-8, res);
        }
    }

    let p = if n >= 2 {
        vec![
            CliffordNumber::scalar(n, 0.5),
            CliffordNumber::generator(n, 2),
            CliffordNumber::one(n) + CliffordNumber::blade(n, 0b11),
        ]
    } else {
        vec![
            CliffordNumber::scalar(n, 0.5),
            CliffordNumber::generator(n, 1),
            CliffordNumber::scalar(n, -1.0),
        ]
    };
    for &gi in &intrinsic {
        let g = ctx.entry(gi).function.clone();
        let name = format!("composition p o ({})", ctx.entry(gi).name);
        let gt = ctx.ext(gi);
        let res = (|| {
            let pg = g.compose_poly(&p)?;
            let pg = pg.collapse_by_blade().unwrap_or(pg).simplify();
            let lhs = extended_calc(t, &pg, phi, &j, cfg)?.value;
            Ok(rel_residual(&lhs, &poly_calc(&gt?, &p)?))
        })();
        ctx.record(Suite::Product, name, 1e-8, res);
    }

    for &fi in &all {
        for k in 1..=2usize {
            let f = ctx.entry(fi).function.clone();
            let sk = LeftSliceFunction::from_stem(n, StemFunction::monomial(k));
            let Ok(skf) = sk.intrinsic_mul(&f) else { continue };
            let skf = skf.collapse_by_blade().unwrap_or(skf).simplify();
            if !matches!(skf.class(), FunctionClass::Sh0 | FunctionClass::Bnd) {
                continue;
            }
            let name = format!("monomial product s^{k} ({})", ctx.entry(fi).name);
            let ft = ctx.ext(fi);
            let res = (|| {
                let lhs = extended_calc(t, &skf, phi, &j, cfg)?.value;
                Ok(rel_residual(&lhs, &t.powi(k).try_matmul(&ft?)?))
            })();
            ctx.record(Suite::Product, name, 1e-8, res);
        }
    }

    for (k, &fi) in intrinsic.iter().enumerate() {
        let ft = ctx.ext(fi);
        let name = format!("commutation T ({})", ctx.entry(fi).name);
        let res = ft.clone().and_then(|ft| Ok(rel_residual(&t.try_matmul(&ft)?, &ft.try_matmul(t)?)));
        ctx.record(Suite::Product, name, 1e-9, res);
        for &gi in &intrinsic[k + 1..] {
            let gt = ctx.ext(gi);
            let name = format!("commutation ({}) ({})", ctx.entry(fi).name, ctx.entry(gi).name);
            let res = (|| {
                let (ft, gt) = (ft.clone()?, gt?);
                Ok(rel_residual(&ft.try_matmul(&gt)?, &gt.try_matmul(&ft)?))
            })();
            ctx.record(Suite::Product, name, 1e-9, res);
        }
    }
}

fn kernel(ctx: &mut Ctx<'_>) {
    let t = ctx.t;
    let (phi, j, cfg) = (ctx.phi, ctx.j, ctx.cfg);
    let basis = t.kernel_basis(RANK_TOL * t.operator_norm().max(1.0));
    if basis.is_empty() {
        return;
    }
    for i in ctx.bounded(true) {
        let g = ctx.entry(i).function.clone();
        let name = ctx.entry(i).name.clone();
        let class = ctx.classes[i];
        if class == FunctionClass::Sh0 {
            let res = (|| {
                let gt = omega_calc(t, &g, phi, &j, cfg)?.value;
                basis
                    .iter()
                    .map(|v| Ok(gt.apply(v)?.norm()))
                    .try_fold(0.0f64, |m, r: Result<f64>| Ok(m.max(r?)))
            })();
            ctx.record(Suite::Kernel, format!("omega kernel ({name}) v = 0"), 1e-9, res);
        }
        let gt = ctx.ext(i);
        let res = (|| {
            let gt = gt?;
            let (g0, _) = g.limits()?;
            basis
                .iter()
                .map(|v| Ok(gt.apply(v)?.sub(&v.mul_right(&g0)).norm()))
                .try_fold(0.0f64, |m, r: Result<f64>| Ok(m.max(r?)))
        })();
        ctx.record(Suite::Kernel, format!("extended kernel ({name}) v = g0 v"), 1e-9, res);
    }
}

/// Two admissible radii for the circle around the origin.
pub fn projection_radii(t: &CliffordMatrix) -> Result<(f64, f64)> {
    let spec = s_spectrum(t)?;
    let gap = spec
        .spheres
        .iter()
        .map(|s| s.x.hypot(s.y))
        .filter(|&r| r > 1e-8)
        .fold(f64::INFINITY, f64::min);
    let gap = if gap.is_finite() { gap } else { 3.0 };
    Ok((gap / 3.0, 2.0 * gap / 3.0))
}

fn projection(ctx: &mut Ctx<'_>) {
    let t = ctx.t;
    let (j, cfg) = (ctx.j, ctx.cfg);
    let pair = projection_radii(t).and_then(|(r1, r2)| {
        Ok((
            spectral_projection(t, r1, &j, cfg)?.value,
            spectral_projection(t, r2, &j, cfg)?.value,
        ))
    });
    let (e1, e2) = match pair {
        Ok(p) => p,
        Err(e) => {
            ctx.record(Suite::Projection, "projection".into(), 1e-8, Err(e));
            return;
        }
    };
    let res = e1.try_matmul(&e1).map(|sq| rel_residual(&sq, &e1));
    ctx.record(Suite::Projection, "E0^2 = E0".into(), 1e-8, res);
    let res = t.powi(2).try_matmul(&e1).map(|m| m.frobenius() / e1.frobenius().max(1.0));
    ctx.record(Suite::Projection, "T^2 E0 = 0".into(), 1e-8, res);
    ctx.record(Suite::Projection, "radius independence".into(), 1e-8, Ok(rel_residual(&e2, &e1)));
    // zero is semisimple here, so E0 projects onto ker T exactly
    let tol = RANK_TOL * t.operator_norm().max(1.0);
    let kernel_dim = (t.d() << t.n()) - t.rank(tol);
    let rank_gap = e1.rank(RANK_TOL * e1.operator_norm().max(1.0)) as f64 - kernel_dim as f64;
    ctx.record(Suite::Projection, "rank E0 = dim ker T".into(), 0.0, Ok(rank_gap.abs()));
    for i in ctx.bounded(true) {
        let name = format!("g(T) E0 = g0 E0 ({})", ctx.entry(i).name);
        let g = ctx.entry(i).function.clone();
        let gt = ctx.ext(i);
        let res = (|| {
            let (g0, _) = g.limits()?;
            Ok(rel_residual(&gt?.try_matmul(&e1)?, &e1.mul_right(&g0)))
        })();
        ctx.record(Suite::Projection, name, 1e-8, res);
    }
}

fn mapping(ctx: &mut Ctx<'_>) {
    let t = ctx.t;
    let (phi, j, cfg) = (ctx.phi, ctx.j, ctx.cfg);
    for i in ctx.bounded(true) {
        let g = ctx.entry(i).function.clone();
        let name = ctx.entry(i).name.clone();
        match spectral_mapping_check(t, &g, phi, &j, cfg) {
            Ok(r) => {
                ctx.record(Suite::Mapping, format!("g(sigma) in sigma(g(T)) ({name})"), 1e-6, Ok(r.forward));
                ctx.record(Suite::Mapping, format!("sigma(g(T)) in g(sigma) u g_inf ({name})"), 1e-6, Ok(r.backward));
            }
            Err(e) => ctx.record(Suite::Mapping, format!("spectral mapping ({name})"), 1e-6, Err(e)),
        }
    }
}

fn next_regularizer(n: usize, r: &Regularizer) -> Regularizer {
    match r.kind {
        RegularizerKind::Even { k } => Regularizer::even(n, k + 1),
        RegularizerKind::Odd { k } => Regularizer::odd(n, k + 1),
        RegularizerKind::Custom => Regularizer::even(n, 4),
    }
}

fn hinfty(ctx: &mut Ctx<'_>) {
    let t = ctx.t;
    let n = t.n();
    let (phi, j, cfg) = (ctx.phi, ctx.j, ctx.cfg);
    let mut targets: Vec<(String, LeftSliceFunction)> = ctx
        .indices(|_, c| c == FunctionClass::RegOnly)
        .into_iter()
        .map(|i| (ctx.entry(i).name.clone(), ctx.entry(i).function.clone()))
        .collect();
    let injective = t.kernel_basis(RANK_TOL * t.operator_norm().max(1.0)).is_empty();
    if injective {
        let inv = LeftSliceFunction::rational(n, RealPoly::constant(1.0), RealPoly::monomial(1)).expect("valid");
        targets.push(("1/s".into(), inv));
    }
    for (name, f) in targets {
        let res = (|| {
            let reg = select_regularizer(&f, t)?;
            let next = next_regularizer(n, &reg);
            let a = hinfty_calc(t, &f, Some(reg), phi, &j, cfg)?;
            let b = hinfty_calc(t, &f, Some(next), phi, &j, cfg)?;
            Ok((a, b))
        })();
        let (a, b) = match res {
            Ok(x) => x,
            Err(e) => {
                ctx.record(Suite::Hinfty, format!("H-infinity ({name})"), 1e-8, Err(e));
                continue;
            }
        };
        ctx.record(
            Suite::Hinfty,
            format!("regularizer independence ({name}) {} vs {}", a.regularizer_descriptor, b.regularizer_descriptor),
            1e-8,
            Ok(rel_residual(&b.f_t, &a.f_t)),
        );
        ctx.record(
            Suite::Hinfty,
            format!("e(T) f(T) = (ef)(T) ({name})"),
            1e-9,
            Ok(a.consistency_residual() / a.ef_t.frobenius().max(1.0)),
        );
        if f.all_rational() {
            let res = rational_oracle(t, &f, RationalHypothesis::None).map(|o| rel_residual(&a.f_t, &o));
            ctx.record(Suite::Hinfty, format!("H-infinity vs rational ({name})"), 1e-8, res);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(t: &CliffordMatrix, suites: &[Suite]) -> VerifyReport {
        verify_suite(t, &Catalog::standard(t.n()), suites, &VerifyOptions::default(), &QuadratureConfig::default())
    }

    #[test]
    fn suite_names() {
        assert_eq!(Suite::parse_selection("all").unwrap().len(), 7);
        assert_eq!("kernel".parse::<Suite>().unwrap(), Suite::Kernel);
        assert!("bogus".parse::<Suite>().is_err());
        assert_eq!(
            Suite::parse_selection("kernel, algebra,kernel").unwrap(),
            vec![Suite::Kernel, Suite::Algebra]
        );
        assert_eq!(Suite::parse_selection("hinfty,all").unwrap().len(), 7);
        assert!(Suite::parse_selection("kernel,bogus").is_err());
    }

    #[test]
    fn refuses_non_bisectorial() {
        let e1 = CliffordMatrix::scalar(1, 1, CliffordNumber::generator(1, 1));
        let r = run(&e1, &Suite::ALL);
        assert!(r.refused(), "{r:?}");
        assert!(r.refusal.unwrap().contains("not bisectorial"));
        let nil = CliffordMatrix::from_real_entries(1, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(run(&nil, &[Suite::Product]).refused());
    }

    #[test]
    fn empty_catalog_gives_empty_report() {
        let t = CliffordMatrix::real_diag(1, &[1.0, -2.0]);
        let r = verify_suite(&t, &Catalog::empty(), &Suite::ALL, &VerifyOptions::default(), &QuadratureConfig::default());
        assert!(r.checks.is_empty() && !r.refused());
    }

    #[test]
    fn diagonal_operator_passes_every_suite() {
        let t = CliffordMatrix::real_diag(1, &[1.0, -2.0]);
        let r = run(&t, &Suite::ALL);
        let failures: Vec<_> = r.failures().collect();
        assert!(failures.is_empty(), "{failures:#?}");
        for s in Suite::ALL {
            if s != Suite::Kernel {
                assert!(r.checks.iter().any(|c| c.suite == s), "no checks for {s}");
            }
        }
    }

    #[test]
    fn kernel_suite_runs_with_zero_eigenvalue() {
        let t = CliffordMatrix::real_diag(2, &[0.0, 1.5]);
        let r = run(&t, &[Suite::Kernel, Suite::Projection]);
        assert!(r.checks.iter().any(|c| c.suite == Suite::Kernel));
        let failures: Vec<_> = r.failures().collect();
        assert!(failures.is_empty(), "{failures:#?}");
    }
}
