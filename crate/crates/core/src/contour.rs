//! Contours in a complex plane `C_J` and adaptive quadrature of slice path
//! integrals `int g(gamma) (gamma'/J) f(gamma) dt` with operator values.
//!
//! Rays are integrated in `u = ln t` on decade panels, arcs in the angle.
//! Each panel is integrated by Gauss-Legendre on the whole panel and on its
//! two halves; the difference is the panel error estimate. Panels with a large
//! share of the error are bisected until the total estimate is below
//! `rel_tol` times the result scale.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, LN_10, PI};
use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clifford::{paravector_on_plane, plane_number, CliffordNumber, ImaginaryUnit, Paravector};
use crate::error::{Error, Result};
use crate::linalg::CliffordMatrix;

/// Extra decades a ray may be extended beyond the initial truncation.
const MAX_EXTRA_DECADES: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub tail_tol: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub nodes_per_panel: usize,
    pub max_refinements: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            tail_tol: 1e-13,
            t_min: 1e-8,
            t_max: 1e8,
            nodes_per_panel: 32,
            max_refinements: 12,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_min > 0.0 && self.t_min < self.t_max && self.t_max.is_finite()) {
            return Err(Error::InvalidInput("need 0 < t_min < t_max".into()));
        }
        if !(self.rel_tol > 0.0) || !(self.tail_tol > 0.0) {
            return Err(Error::InvalidInput("tolerances must be positive".into()));
        }
        if self.nodes_per_panel < 2 {
            return Err(Error::InvalidInput("nodes_per_panel must be at least 2".into()));
        }
        Ok(())
    }
}

/// One oriented piece of a contour.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Segment {
    /// `t e^{J angle}` for `t` in `[t_start, inf)`, traversed toward the
    /// origin when `inward`.
    Ray { angle: f64, t_start: f64, inward: bool },
    /// `center + radius e^{J theta}` for `theta` from `start` to `end`.
    Arc {
        center: f64,
        radius: f64,
        start: f64,
        end: f64,
    },
}

impl Segment {
    fn reversed(&self) -> Self {
        match *self {
            Segment::Ray { angle, t_start, inward } => Segment::Ray {
                angle,
                t_start,
                inward: !inward,
            },
            Segment::Arc {
                center,
                radius,
                start,
                end,
            } => Segment::Arc {
                center,
                radius,
                start: end,
                end: start,
            },
        }
    }

    /// Point and `(gamma'/J) dparam` factor, as complex numbers, at parameter
    /// `p` (`u = ln t` for rays, the angle for arcs).
    fn point(&self, p: f64) -> (Complex64, Complex64) {
        match *self {
            Segment::Ray { angle, inward, .. } => {
                let t = p.exp();
                let dir = Complex64::from_polar(1.0, angle);
                let sign = if inward { -1.0 } else { 1.0 };
                // gamma' dt / J = e^{J angle} t du / J
                (dir * t, dir * Complex64::new(0.0, -sign * t))
            }
            Segment::Arc {
                center,
                radius,
                start,
                end,
            } => {
                let e = Complex64::from_polar(radius, p);
                let sign = if end >= start { 1.0 } else { -1.0 };
                (Complex64::new(center, 0.0) + e, e * sign)
            }
        }
    }
}

/// Shape of a contour.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PathKind {
    SectorBoundary { phi: f64 },
    PuncturedSector { phi: f64, rho: f64 },
    Circle { center: f64, rho: f64, positive: bool },
    Ray { phi: f64 },
}

/// Oriented contour in the plane `C_J`.
#[derive(Clone, Debug, PartialEq)]
pub struct ContourPath {
    kind: PathKind,
    j: ImaginaryUnit,
    segments: Vec<Segment>,
}

fn check_phi(phi: f64) -> Result<()> {
    if phi > 0.0 && phi < FRAC_PI_2 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("sector angle {phi} outside (0, pi/2)")))
    }
}

impl ContourPath {
    /// Boundary of `D_phi` with the double sector on the left of travel.
    pub fn sector_boundary(phi: f64, j: ImaginaryUnit) -> Result<Self> {
        check_phi(phi)?;
        let ray = |angle: f64, inward: bool| Segment::Ray {
            angle,
            t_start: 0.0,
            inward,
        };
        Ok(Self {
            kind: PathKind::SectorBoundary { phi },
            j,
            segments: vec![ray(phi, true), ray(-phi, false), ray(PI + phi, true), ray(PI - phi, false)],
        })
    }

    /// Boundary of `D_phi` minus the disc of radius `rho`.
    pub fn punctured_sector(phi: f64, rho: f64, j: ImaginaryUnit) -> Result<Self> {
        check_phi(phi)?;
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::InvalidInput(format!("radius {rho} must be positive")));
        }
        let ray = |angle: f64, inward: bool| Segment::Ray {
            angle,
            t_start: rho,
            inward,
        };
        let arc = |start: f64, end: f64| Segment::Arc {
            center: 0.0,
            radius: rho,
            start,
            end,
        };
        Ok(Self {
            kind: PathKind::PuncturedSector { phi, rho },
            j,
            segments: vec![
                ray(phi, true),
                arc(phi, -phi),
                ray(-phi, false),
                ray(PI + phi, true),
                arc(PI + phi, PI - phi),
                ray(PI - phi, false),
            ],
        })
    }

    /// Circle `center + rho e^{J theta}`, `theta` in `(-pi/2, 3pi/2)` when positive.
    pub fn circle(center: f64, rho: f64, j: ImaginaryUnit, positive: bool) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite() && center.is_finite()) {
            return Err(Error::InvalidInput(format!("invalid circle ({center}, {rho})")));
        }
        let (start, end) = if positive {
            (-FRAC_PI_2, 1.5 * PI)
        } else {
            (1.5 * PI, -FRAC_PI_2)
        };
        Ok(Self {
            kind: PathKind::Circle {
                center,
                rho,
                positive,
            },
            j,
            segments: vec![Segment::Arc {
                center,
                radius: rho,
                start,
                end,
            }],
        })
    }

    /// Single outward ray `t e^{J phi}`, `t > 0`.
    pub fn ray(phi: f64, j: ImaginaryUnit) -> Result<Self> {
        if !phi.is_finite() {
            return Err(Error::InvalidInput("ray angle must be finite".into()));
        }
        Ok(Self {
            kind: PathKind::Ray { phi },
            j,
            segments: vec![Segment::Ray {
                angle: phi,
                t_start: 0.0,
                inward: false,
            }],
        })
    }

    /// Same path traversed backwards.
    pub fn reversed(&self) -> Self {
        Self {
            kind: self.kind,
            j: self.j,
            segments: self.segments.iter().map(Segment::reversed).collect(),
        }
    }

    pub fn kind(&self) -> PathKind {
        self.kind
    }

    pub fn unit(&self) -> &ImaginaryUnit {
        &self.j
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    fn initial_panels(&self, seg: usize, cfg: &QuadratureConfig) -> Vec<(f64, f64)> {
        match self.segments[seg] {
            Segment::Ray { t_start, .. } => {
                let hi = cfg.t_max.log10().ceil() as i64;
                let lo = if t_start > 0.0 {
                    t_start.log10()
                } else {
                    cfg.t_min.log10().floor()
                };
                let mut out = Vec::new();
                let mut a = lo;
                while a < hi as f64 - 1e-12 {
                    let b = (a.floor() + 1.0).min(hi as f64);
                    let b = if b - a < 1e-12 { b + 1.0 } else { b };
                    out.push((a * LN_10, b * LN_10));
                    a = b;
                }
                out
            }
            Segment::Arc { start, end, .. } => {
                let (lo, hi) = (start.min(end), start.max(end));
                let count = ((hi - lo) / FRAC_PI_4).ceil().max(1.0) as usize;
                let h = (hi - lo) / count as f64;
                (0..count).map(|k| (lo + k as f64 * h, lo + (k + 1) as f64 * h)).collect()
            }
        }
    }

    /// Node table of the initial panels as CSV:
    /// `segment,param,re_s,im_s,re_w,im_w` where `w = (gamma'/J) * weight`.
    pub fn nodes_csv(&self, cfg: &QuadratureConfig) -> String {
        let (x, w) = gauss_legendre(cfg.nodes_per_panel);
        let mut out = String::from("segment,param,re_s,im_s,re_w,im_w\n");
        for (k, seg) in self.segments.iter().enumerate() {
            for (a, b) in self.initial_panels(k, cfg) {
                let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
                for (xi, wi) in x.iter().zip(&w) {
                    let p = mid + half * xi;
                    let (z, dz) = seg.point(p);
                    let dw = dz * (wi * half);
                    let _ = writeln!(out, "{k},{p:e},{:e},{:e},{:e},{:e}", z.re, z.im, dw.re, dw.im);
                }
            }
        }
        out
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Quadrature node passed to integrands.
#[derive(Clone, Copy, Debug)]
pub struct Node {
    /// Point `gamma` as a complex number in `C_J` coordinates.
    pub z: Complex64,
    /// `(gamma'/J) * weight` in `C_J` coordinates.
    pub w: Complex64,
    pub s: Paravector,
    pub ds: CliffordNumber,
}

/// Diagnostics of a contour integral.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSummary {
    pub panels: usize,
    pub evaluations: usize,
    /// Frobenius norm of the change from halving every panel.
    pub delta: f64,
    /// Per segment parameter range actually integrated (`ln t` or angle).
    pub truncation: Vec<(f64, f64)>,
    pub refinements: usize,
}

/// Value and diagnostics of a contour integral.
#[derive(Clone, Debug)]
pub struct QuadratureOutcome {
    pub value: CliffordMatrix,
    pub summary: QuadratureSummary,
}

#[derive(Clone)]
struct Panel {
    seg: usize,
    a: f64,
    b: f64,
    coarse: CliffordMatrix,
    left: CliffordMatrix,
    right: CliffordMatrix,
}

impl Panel {
    fn fine(&self) -> CliffordMatrix {
        &self.left + &self.right
    }

    fn error(&self) -> f64 {
        (&self.fine() - &self.coarse).frobenius()
    }
}

struct Rule<'a, F> {
    path: &'a ContourPath,
    x: Vec<f64>,
    w: Vec<f64>,
    f: &'a F,
}

impl<F> Rule<'_, F>
where
    F: Fn(&Node) -> Result<CliffordMatrix> + Sync,
{
    fn gl(&self, seg: usize, a: f64, b: f64) -> Result<CliffordMatrix> {
        let segment = &self.path.segments[seg];
        let j = &self.path.j;
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        let mut acc: Option<CliffordMatrix> = None;
        for (xi, wi) in self.x.iter().zip(&self.w) {
            let (z, dz) = segment.point(mid + half * xi);
            let w = dz * (wi * half);
            let node = Node {
                z,
                w,
                s: paravector_on_plane(z.re, z.im, j),
                ds: plane_number(w.re, w.im, j),
            };
            let v = (self.f)(&node)?;
            if !v.is_finite() {
                return Err(Error::QuadratureDiverged { delta: f64::INFINITY });
            }
            match acc.as_mut() {
                Some(m) => m.axpy(1.0, &v),
                None => acc = Some(v),
            }
        }
        Ok(acc.expect("at least one node"))
    }

    fn panel(&self, seg: usize, a: f64, b: f64, coarse: Option<CliffordMatrix>) -> Result<Panel> {
        let m = 0.5 * (a + b);
        let coarse = match coarse {
            Some(c) => c,
            None => self.gl(seg, a, b)?,
        };
        Ok(Panel {
            seg,
            a,
            b,
            coarse,
            left: self.gl(seg, a, m)?,
            right: self.gl(seg, m, b)?,
        })
    }

    fn evaluate(&self, jobs: Vec<(usize, f64, f64, Option<CliffordMatrix>)>) -> Result<Vec<Panel>> {
        jobs.into_par_iter()
            .map(|(seg, a, b, c)| self.panel(seg, a, b, c))
            .collect()
    }
}

fn total(panels: &[Panel]) -> (CliffordMatrix, f64) {
    let mut sum = panels[0].fine();
    let mut abs = sum.frobenius();
    for p in &panels[1..] {
        let f = p.fine();
        abs += f.frobenius();
        sum.axpy(1.0, &f);
    }
    (sum, abs)
}

fn scale_of(value: &CliffordMatrix, abs_sum: f64) -> f64 {
    value.frobenius().max(1e-3 * abs_sum)
}

/// Adaptive quadrature of `integrand` along `path`.
///
/// The integrand receives each node and must return the full contribution
/// at that node, `g(s) ds_J f(s)` including the weight carried by `ds`.
pub fn integrate_operator_contour<F>(
    integrand: &F,
    path: &ContourPath,
    cfg: &QuadratureConfig,
) -> Result<QuadratureOutcome>
where
    F: Fn(&Node) -> Result<CliffordMatrix> + Sync,
{
    cfg.validate()?;
    let (x, w) = gauss_legendre(cfg.nodes_per_panel);
    let rule = Rule { path, x, w, f: integrand };
    let per_panel = 3 * cfg.nodes_per_panel;

    let jobs: Vec<_> = (0..path.segments.len())
        .flat_map(|k| path.initial_panels(k, cfg).into_iter().map(move |(a, b)| (k, a, b, None)))
        .collect();
    let mut evaluations = jobs.len() * per_panel;
    let mut panels = rule.evaluate(jobs)?;

    // tail extension, decade by decade, at every open ray end
    for seg in 0..path.segments.len() {
        let Segment::Ray { t_start, .. } = path.segments[seg] else {
            continue;
        };
        let ends: &[bool] = if t_start > 0.0 { &[true] } else { &[true, false] };
        for &upper in ends {
            let mut extra = 0;
            loop {
                let (value, abs) = total(&panels);
                let scale = scale_of(&value, abs);
                let outer = panels
                    .iter()
                    .filter(|p| p.seg == seg)
                    .fold(None::<&Panel>, |best, p| match best {
                        None => Some(p),
                        Some(q) if (upper && p.b > q.b) || (!upper && p.a < q.a) => Some(p),
                        keep => keep,
                    })
                    .expect("ray has panels");
                let contribution = outer.fine().frobenius();
                if contribution <= cfg.tail_tol * scale {
                    break;
                }
                if extra == MAX_EXTRA_DECADES {
                    return Err(Error::QuadratureDiverged { delta: contribution });
                }
                extra += 1;
                let (a, b) = if upper {
                    (outer.b, outer.b + LN_10)
                } else {
                    (outer.a - LN_10, outer.a)
                };
                panels.extend(rule.evaluate(vec![(seg, a, b, None)])?);
                evaluations += per_panel;
            }
        }
    }

    let mut refinements = 0;
    loop {
        let (value, abs) = total(&panels);
        let scale = scale_of(&value, abs);
        let errors: Vec<f64> = panels.iter().map(Panel::error).collect();
        let estimate: f64 = errors.iter().sum();
        if estimate <= cfg.rel_tol * scale {
            let coarse = panels.iter().skip(1).fold(panels[0].coarse.clone(), |mut acc, p| {
                acc.axpy(1.0, &p.coarse);
                acc
            });
            let delta = (&value - &coarse).frobenius();
            let mut truncation = vec![(f64::INFINITY, f64::NEG_INFINITY); path.segments.len()];
            for p in &panels {
                let t = &mut truncation[p.seg];
                t.0 = t.0.min(p.a);
                t.1 = t.1.max(p.b);
            }
            return Ok(QuadratureOutcome {
                value,
                summary: QuadratureSummary {
                    panels: panels.len(),
                    evaluations,
                    delta,
                    truncation,
                    refinements,
                },
            });
        }
        if refinements == cfg.max_refinements {
            return Err(Error::QuadratureDiverged { delta: estimate });
        }
        refinements += 1;
        let threshold = cfg.rel_tol * scale / panels.len() as f64;
        let mut keep = Vec::with_capacity(panels.len());
        let mut jobs = Vec::new();
        for (p, e) in panels.into_iter().zip(errors) {
            if e > threshold {
                let m = 0.5 * (p.a + p.b);
                jobs.push((p.seg, p.a, m, Some(p.left)));
                jobs.push((p.seg, m, p.b, Some(p.right)));
            } else {
                keep.push(p);
            }
        }
        evaluations += jobs.len() * 2 * cfg.nodes_per_panel;
        keep.extend(rule.evaluate(jobs)?);
        keep.sort_by(|p, q| (p.seg, p.a).partial_cmp(&(q.seg, q.a)).expect("finite bounds"));
        panels = keep;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn j1() -> ImaginaryUnit {
        ImaginaryUnit::generator(1, 1)
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(32);
        let sum: f64 = w.iter().sum();
        assert!((sum - 2.0).abs() < 1e-14);
        let i: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(62)).sum();
        assert!((i - 2.0 / 63.0).abs() < 1e-14);
        let (x5, _) = gauss_legendre(5);
        assert!(x5[2].abs() < 1e-15);
    }

    #[test]
    fn sector_rays() {
        let p = ContourPath::sector_boundary(FRAC_PI_4, j1()).unwrap();
        let angles: Vec<f64> = p
            .segments()
            .iter()
            .map(|s| match s {
                Segment::Ray { angle, .. } => *angle,
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(angles, vec![FRAC_PI_4, -FRAC_PI_4, 5.0 * FRAC_PI_4, 3.0 * FRAC_PI_4]);
        assert!(ContourPath::sector_boundary(2.0, j1()).is_err());
        let q = ContourPath::punctured_sector(FRAC_PI_4, 1.0, j1()).unwrap();
        assert_eq!(q.segments().len(), 6);
    }

    fn scalar(n: usize, c: CliffordNumber) -> CliffordMatrix {
        CliffordMatrix::scalar(n, 1, c)
    }

    #[test]
    fn zero_integrand() {
        let p = ContourPath::sector_boundary(0.5, j1()).unwrap();
        let out = integrate_operator_contour(
            &|_: &Node| Ok(CliffordMatrix::zeros(1, 2)),
            &p,
            &QuadratureConfig::default(),
        )
        .unwrap();
        assert_eq!(out.value, CliffordMatrix::zeros(1, 2));
    }

    #[test]
    fn residue_of_inverse_on_circle() {
        // (1/2pi) oint s^-1 ds_J = 1
        let p = ContourPath::circle(0.0, 1.0, j1(), true).unwrap();
        let f = |node: &Node| {
            let v = node.w / node.z / (2.0 * PI);
            Ok(scalar(1, plane_number(v.re, v.im, &j1())))
        };
        let out = integrate_operator_contour(&f, &p, &QuadratureConfig::default()).unwrap();
        assert!(out.value.rel_diff(&CliffordMatrix::identity(1, 1), 1.0) < 1e-13);
        let rev = integrate_operator_contour(&f, &p.reversed(), &QuadratureConfig::default()).unwrap();
        assert_eq!(rev.value, -&out.value);
    }

    #[test]
    fn sector_integral_of_scalar_resolvent() {
        // (1/2pi) int (s - a)^-1 ds_J g(s) over the sector boundary equals g(a)
        let a = 1.5;
        let g = |z: Complex64| z / (1.0 + z * z).powi(2);
        let p = ContourPath::sector_boundary(0.6, j1()).unwrap();
        let f = |node: &Node| {
            let v = node.w * g(node.z) / (node.z - a) / (2.0 * PI);
            Ok(scalar(1, plane_number(v.re, v.im, &j1())))
        };
        let out = integrate_operator_contour(&f, &p, &QuadratureConfig::default()).unwrap();
        let expected = g(Complex64::new(a, 0.0)).re;
        let got = out.value.get(0, 0);
        assert!((got.scalar_part() - expected).abs() < 1e-12, "{got} vs {expected}");
        assert!(got.get(1).abs() < 1e-12);
    }

    #[test]
    fn node_csv_has_header_and_rows() {
        let p = ContourPath::circle(0.0, 0.5, j1(), true).unwrap();
        let cfg = QuadratureConfig {
            nodes_per_panel: 4,
            ..Default::default()
        };
        let csv = p.nodes_csv(&cfg);
        assert!(csv.starts_with("segment,param"));
        assert_eq!(csv.lines().count(), 1 + 8 * 4);
    }
}
