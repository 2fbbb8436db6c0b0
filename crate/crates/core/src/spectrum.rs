//! `Q_s[T]`, the S-resolvents, the S-spectrum and bisectoriality sampling.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clifford::{EigenSphere, ImaginaryUnit, Paravector};
use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, singular_values, CliffordMatrix};

/// Absolute tolerance for merging eigenvalue clusters into one sphere.
pub const SPHERE_MERGE_TOL: f64 = 1e-8;

/// `Q_s[T] = T^2 - 2 s0 T + |s|^2`.
pub fn q_pencil(t: &CliffordMatrix, s: &Paravector) -> Result<CliffordMatrix> {
    if t.n() != s.n() {
        return Err(Error::DimensionMismatch("operator and paravector".into()));
    }
    let mut q = t.try_matmul(t)?;
    q.axpy(-2.0 * s.s0, t);
    q.axpy(s.abs_sqr(), &CliffordMatrix::identity(t.n(), t.d()));
    Ok(q)
}

/// `S_L^-1(s, T) = Q_s[T]^-1 conj(s) - T Q_s[T]^-1`.
pub fn s_resolvent_left(t: &CliffordMatrix, s: &Paravector) -> Result<CliffordMatrix> {
    let qinv = q_pencil(t, s)?.invert()?;
    let first = qinv.mul_right(&s.conj().to_clifford());
    Ok(&first - &t.try_matmul(&qinv)?)
}

/// `S_R^-1(s, T) = (conj(s) - T) Q_s[T]^-1`.
pub fn s_resolvent_right(t: &CliffordMatrix, s: &Paravector) -> Result<CliffordMatrix> {
    let qinv = q_pencil(t, s)?.invert()?;
    let sbar = CliffordMatrix::scalar(t.n(), t.d(), s.conj().to_clifford());
    (&sbar - t).try_matmul(&qinv)
}

/// Resolvent evaluator for a fixed operator and imaginary unit.
///
/// With `R_s` right multiplication by `s = x + J y`, the left resolvent
/// acts on `e_j (x) 1` as `(R_s - T)^-1`, so its entries come from a single
/// LU factorization per point. This avoids forming `Q_s[T]`, whose condition
/// number grows like `|s|^-4` near a kernel of `T`.
#[derive(Clone, Debug)]
pub struct ResolventEvaluator {
    t: CliffordMatrix,
    t_real: DMatrix<f64>,
    rj: DMatrix<f64>,
    j: ImaginaryUnit,
}

impl ResolventEvaluator {
    pub fn new(t: &CliffordMatrix, j: &ImaginaryUnit) -> Result<Self> {
        if t.n() != j.n() {
            return Err(Error::DimensionMismatch("operator and imaginary unit".into()));
        }
        let dim = 1usize << t.n();
        let block = j.to_clifford().right_representation();
        let mut rj = DMatrix::zeros(t.real_dim(), t.real_dim());
        for k in 0..t.d() {
            rj.view_mut((k * dim, k * dim), (dim, dim)).copy_from(&block);
        }
        Ok(Self {
            t: t.clone(),
            t_real: t.real_rep(),
            rj,
            j: *j,
        })
    }

    pub fn operator(&self) -> &CliffordMatrix {
        &self.t
    }

    pub fn unit(&self) -> &ImaginaryUnit {
        &self.j
    }

    /// Columns `(R_s - T)^-1 (e_j (x) 1)` for `s = x + J y`.
    fn shifted_solve(&self, x: f64, y: f64) -> Result<DMatrix<f64>> {
        let big = self.t.real_dim();
        let mut m = &self.rj * y - &self.t_real;
        for i in 0..big {
            m[(i, i)] += x;
        }
        let dim = 1usize << self.t.n();
        let d = self.t.d();
        let mut rhs = DMatrix::zeros(big, d);
        for k in 0..d {
            rhs[(k * dim, k)] = 1.0;
        }
        let lu = m.lu();
        let u = lu.u();
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for i in 0..big {
            let p = u[(i, i)].abs();
            lo = lo.min(p);
            hi = hi.max(p);
        }
        // pivots of size |s| are expected near a kernel of T
        if !(lo > 1e-16 * hi.min(x.hypot(y))) {
            return Err(Error::SingularOperator {
                smallest: lo,
                largest: hi,
            });
        }
        lu.solve(&rhs).ok_or(Error::SingularOperator {
            smallest: lo,
            largest: hi,
        })
    }

    /// `S_L^-1(x + J y, T)`.
    pub fn left(&self, x: f64, y: f64) -> Result<CliffordMatrix> {
        let cols = self.shifted_solve(x, y)?;
        Ok(CliffordMatrix::from_unit_columns(self.t.n(), &cols))
    }

    /// `S_R^-1(x + J y, T)` through the partial fractions of `Q_s[T]^-1`:
    /// `Q^-1 = ((T - R_s)^-1 - (T - R_conj(s))^-1) (2 y R_J)^-1`.
    pub fn right(&self, x: f64, y: f64) -> Result<CliffordMatrix> {
        let n = self.t.n();
        let d = self.t.d();
        let sbar = crate::clifford::plane_number(x, -y, &self.j);
        let lead = CliffordMatrix::scalar(n, d, sbar);
        let lead = &lead - &self.t;
        if y.abs() <= 1e-3 * (x.abs() + y.abs()).max(f64::MIN_POSITIVE) {
            let qinv = q_pencil(&self.t, &crate::clifford::paravector_on_plane(x, y, &self.j))?.invert()?;
            return lead.try_matmul(&qinv);
        }
        let a = CliffordMatrix::from_unit_columns(n, &self.shifted_solve(x, y)?);
        let b = CliffordMatrix::from_unit_columns(n, &self.shifted_solve(x, -y)?);
        // (T - R_s)^-1 = -a; the difference is b - a, then right-multiply by (2yJ)^-1 = -J/(2y)
        let jinv = self.j.to_clifford().scale(-1.0 / (2.0 * y));
        let qinv = (&b - &a).mul_right(&jinv);
        lead.try_matmul(&qinv)
    }
}

/// One sphere of the S-spectrum with the number of real-representation
/// eigenvalues it collects.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralSphere {
    pub x: f64,
    pub y: f64,
    pub multiplicity: usize,
}

impl SpectralSphere {
    pub fn sphere(&self) -> EigenSphere {
        EigenSphere::new(self.x, self.y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumMethod {
    Eigen,
    DetScan,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SSpectrumReport {
    pub spheres: Vec<SpectralSphere>,
    pub method: SpectrumMethod,
}

impl SSpectrumReport {
    /// Distance from a point `(x, y)` to the nearest sphere.
    pub fn distance_to(&self, x: f64, y: f64) -> f64 {
        let p = EigenSphere::new(x, y);
        self.spheres
            .iter()
            .map(|s| s.sphere().distance(&p))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains_zero(&self, tol: f64) -> bool {
        self.distance_to(0.0, 0.0) <= tol
    }

    /// Largest sector angle `atan2(y, |x|)` over the spheres away from the
    /// origin; a numerically zero sphere has no meaningful angle.
    pub fn omega(&self) -> f64 {
        self.spheres
            .iter()
            .filter(|s| s.x.hypot(s.y) > SPHERE_MERGE_TOL)
            .map(|s| s.sphere().sector_angle())
            .fold(0.0, f64::max)
    }
}

fn merge_spheres(points: Vec<(f64, f64)>, tol: f64) -> Vec<SpectralSphere> {
    let mut out: Vec<(f64, f64, usize)> = Vec::new();
    for (x, y) in points {
        match out
            .iter_mut()
            .find(|(a, b, _)| (a - x).hypot(b - y) <= tol)
        {
            Some(c) => {
                let m = c.2 as f64;
                c.0 = (c.0 * m + x) / (m + 1.0);
                c.1 = (c.1 * m + y) / (m + 1.0);
                c.2 += 1;
            }
            None => out.push((x, y, 1)),
        }
    }
    out.sort_by(|a, b| (a.0, a.1).partial_cmp(&(b.0, b.1)).expect("finite"));
    out.into_iter()
        .map(|(x, y, multiplicity)| SpectralSphere { x, y, multiplicity })
        .collect()
}

/// S-spectrum from the eigenvalues `a + bi` of the real representation,
/// each giving the sphere `(a, |b|)`.
pub fn s_spectrum(t: &CliffordMatrix) -> Result<SSpectrumReport> {
    let ev = eigenvalues(&t.real_rep())?;
    if ev.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidInput("non-finite eigenvalues".into()));
    }
    let points = ev.iter().map(|z| (z.re, z.im.abs())).collect();
    Ok(SSpectrumReport {
        spheres: merge_spheres(points, SPHERE_MERGE_TOL),
        method: SpectrumMethod::Eigen,
    })
}

/// Grid for the determinant-scan oracle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetScanGrid {
    /// Half-width of the scanned box `[-radius, radius] x [0, radius]`.
    pub radius: f64,
    pub points: usize,
    /// Normalized smallest singular value below which a point is a zero.
    pub threshold: f64,
}

impl DetScanGrid {
    pub fn for_operator(t: &CliffordMatrix) -> Self {
        Self {
            radius: 1.25 * t.operator_norm() + 0.5,
            points: 41,
            threshold: 1e-8,
        }
    }
}

/// Normalized smallest singular value of `real_rep(Q_s[T])` at `s = x + e_1 y`.
pub fn q_pencil_sigma_min(t: &CliffordMatrix, x: f64, y: f64) -> f64 {
    let j = ImaginaryUnit::generator(t.n(), 1);
    let s = crate::clifford::paravector_on_plane(x, y, &j);
    let q = q_pencil(t, &s).expect("matching n");
    let sv = singular_values(&q.real_rep());
    let scale = (1.0 + t.operator_norm()).powi(2) + x * x + y * y;
    sv.last().copied().unwrap_or(0.0) / scale
}

/// Zeros of `sigma_min(Q_s[T])` located by a grid scan refined by pattern
/// search from every grid-local minimum.
pub fn s_spectrum_detscan(t: &CliffordMatrix, grid: &DetScanGrid) -> SSpectrumReport {
    let m = grid.points.max(3);
    let h = 2.0 * grid.radius / (m - 1) as f64;
    let xs: Vec<f64> = (0..m).map(|i| -grid.radius + i as f64 * h).collect();
    let my = m / 2 + 1;
    let ys: Vec<f64> = (0..my).map(|k| k as f64 * h).collect();
    let values: Vec<Vec<f64>> = xs
        .par_iter()
        .map(|&x| ys.iter().map(|&y| q_pencil_sigma_min(t, x, y)).collect())
        .collect();
    let mut starts = Vec::new();
    for i in 0..m {
        for k in 0..my {
            let v = values[i][k];
            let mut is_min = true;
            for di in -1i64..=1 {
                for dk in -1i64..=1 {
                    let (a, b) = (i as i64 + di, k as i64 + dk);
                    if (di, dk) == (0, 0) || a < 0 || b < 0 || a >= m as i64 || b >= my as i64 {
                        continue;
                    }
                    if values[a as usize][b as usize] < v {
                        is_min = false;
                    }
                }
            }
            if is_min {
                starts.push((xs[i], ys[k]));
            }
        }
    }
    let refined: Vec<(f64, f64, f64)> = starts
        .par_iter()
        .map(|&(x0, y0)| pattern_search(t, x0, y0, h))
        .collect();
    let zeros = refined
        .into_iter()
        .filter(|&(_, _, v)| v < grid.threshold)
        .map(|(x, y, _)| (x, y))
        .collect();
    SSpectrumReport {
        spheres: merge_spheres(zeros, 1e-6),
        method: SpectrumMethod::DetScan,
    }
}

fn pattern_search(t: &CliffordMatrix, mut x: f64, mut y: f64, h0: f64) -> (f64, f64, f64) {
    let mut best = q_pencil_sigma_min(t, x, y);
    let mut h = h0;
    let mut iters = 0;
    while h > 1e-13 && iters < 2000 {
        iters += 1;
        let mut moved = false;
        for (dx, dy) in [(h, 0.0), (-h, 0.0), (0.0, h), (0.0, -h)] {
            let (nx, ny) = (x + dx, (y + dy).max(0.0));
            let v = q_pencil_sigma_min(t, nx, ny);
            if v < best {
                best = v;
                x = nx;
                y = ny;
                moved = true;
                break;
            }
        }
        if !moved {
            h *= 0.5;
        }
    }
    (x, y, best)
}

/// Sampling grid for `bisectoriality`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BisectorialityGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub points_per_decade: usize,
    pub units: Vec<Vec<f64>>,
}

impl BisectorialityGrid {
    pub fn default_for(n: usize) -> Self {
        let mut units = vec![ImaginaryUnit::generator(n, 1).components().to_vec()];
        if n > 1 {
            units.push(vec![1.0 / (n as f64).sqrt(); n]);
            units.push(ImaginaryUnit::generator(n, n).components().to_vec());
        }
        Self {
            t_min: 1e-6,
            t_max: 1e6,
            points_per_decade: 6,
            units,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum BisectorialVerdict {
    Bisectorial { omega: f64 },
    NotBisectorial { reason: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CSample {
    pub phi: f64,
    /// Sampled `sup |s| ||S_L^-1(s, T)||` outside `D_phi`.
    pub c_phi: f64,
    /// Per-decade sup, ascending in `t`.
    pub decade_sups: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BisectorialityReport {
    pub omega_spectral: f64,
    pub zero_in_spectrum: bool,
    pub c_phi_samples: Vec<CSample>,
    pub verdict: BisectorialVerdict,
    pub grid: BisectorialityGrid,
}

impl BisectorialityReport {
    pub fn is_bisectorial(&self) -> bool {
        matches!(self.verdict, BisectorialVerdict::Bisectorial { .. })
    }

    /// Sampled constant for the smallest recorded angle `>= phi`.
    pub fn c_phi(&self, phi: f64) -> Option<f64> {
        self.c_phi_samples
            .iter()
            .filter(|c| c.phi <= phi + 1e-12)
            .map(|c| c.c_phi)
            .fold(None, |a: Option<f64>, c| Some(a.map_or(c, |a| a.max(c))))
    }
}

/// Directions outside `D_phi`: the edge, the middle and the imaginary axis of
/// each of the four complementary quarter sectors.
pub fn outside_angles(phi: f64) -> Vec<f64> {
    let base = [phi, 0.5 * (phi + FRAC_PI_2), FRAC_PI_2];
    let mut out = Vec::new();
    for &a in &base {
        out.push(a);
        out.push(PI - a);
        out.push(-a);
        out.push(PI + a);
    }
    out.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    out.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    out
}

/// `t ||S_L^-1(t e^{J psi}, T)||` on a log grid; infinite at spectral points.
pub fn ray_profile(
    t: &CliffordMatrix,
    psi: f64,
    j: &ImaginaryUnit,
    t_min: f64,
    t_max: f64,
    per_decade: usize,
) -> Result<Vec<(f64, f64)>> {
    let ev = ResolventEvaluator::new(t, j)?;
    let decades = (t_max / t_min).log10();
    let count = (decades * per_decade as f64).round() as usize;
    (0..=count)
        .into_par_iter()
        .map(|k| {
            let tt = t_min * 10f64.powf(k as f64 / per_decade as f64);
            match ev.left(tt * psi.cos(), tt * psi.sin()) {
                Ok(r) => Ok((tt, tt * r.operator_norm())),
                Err(Error::SingularOperator { .. }) => Ok((tt, f64::INFINITY)),
                Err(e) => Err(e),
            }
        })
        .collect()
}

/// Spectral angle and sampled resolvent constants.
///
/// Not bisectorial when a sphere sits on the imaginary axis, when the
/// resolvent is singular at a sample, when a sampled constant exceeds `1e6`,
/// or when the constant grows by `1e3` or more over the smallest decades
/// (the `|s|^-2` blow-up of a non-semisimple kernel).
pub fn bisectoriality(
    t: &CliffordMatrix,
    phis: &[f64],
    grid: &BisectorialityGrid,
) -> Result<BisectorialityReport> {
    let spec = s_spectrum(t)?;
    let omega = spec.omega();
    let zero = spec.contains_zero(1e-8);
    let mut report = BisectorialityReport {
        omega_spectral: omega,
        zero_in_spectrum: zero,
        c_phi_samples: Vec::new(),
        verdict: BisectorialVerdict::Bisectorial { omega },
        grid: grid.clone(),
    };
    if omega >= FRAC_PI_2 - 1e-9 {
        report.verdict = BisectorialVerdict::NotBisectorial {
            reason: format!("spectrum reaches the imaginary axis (angle {omega:.6})"),
        };
        return Ok(report);
    }
    let phis: Vec<f64> = if phis.is_empty() {
        (1..=3).map(|k| omega + (FRAC_PI_2 - omega) * k as f64 / 4.0).collect()
    } else {
        phis.iter().copied().filter(|&p| p > omega && p < FRAC_PI_2).collect()
    };
    let units: Vec<ImaginaryUnit> = grid
        .units
        .iter()
        .map(|u| ImaginaryUnit::from_direction(u))
        .collect::<Result<_>>()?;
    let evaluators: Vec<ResolventEvaluator> = units
        .iter()
        .map(|j| ResolventEvaluator::new(t, j))
        .collect::<Result<_>>()?;
    let decades = (grid.t_max / grid.t_min).log10().round() as usize;
    let ppd = grid.points_per_decade.max(1);
    for &phi in &phis {
        let angles = outside_angles(phi);
        let sups: Vec<Result<f64>> = (0..decades)
            .into_par_iter()
            .map(|dec| {
                let mut sup = 0.0f64;
                for k in 0..=ppd {
                    let tt = grid.t_min * 10f64.powf(dec as f64 + k as f64 / ppd as f64);
                    for ev in &evaluators {
                        for &psi in &angles {
                            let r = ev.left(tt * psi.cos(), tt * psi.sin())?;
                            sup = sup.max(tt * r.operator_norm());
                        }
                    }
                }
                Ok(sup)
            })
            .collect();
        let mut decade_sups = Vec::with_capacity(decades);
        for s in sups {
            match s {
                Ok(v) => decade_sups.push(v),
                Err(e) => {
                    report.verdict = BisectorialVerdict::NotBisectorial {
                        reason: format!("resolvent singular outside D_phi for phi = {phi:.6}: {e}"),
                    };
                    return Ok(report);
                }
            }
        }
        let c_phi = decade_sups.iter().cloned().fold(0.0, f64::max);
        report.c_phi_samples.push(CSample {
            phi,
            c_phi,
            decade_sups: decade_sups.clone(),
        });
        let growth = decade_sups[0] / decade_sups[decades.min(4) - 1].max(f64::MIN_POSITIVE);
        if !c_phi.is_finite() || c_phi > 1e6 || growth >= 1e3 {
            report.verdict = BisectorialVerdict::NotBisectorial {
                reason: format!(
                    "|s| ||S_L^-1(s,T)|| unbounded near 0 for phi = {phi:.6} (sup {c_phi:.3e})"
                ),
            };
            return Ok(report);
        }
    }
    Ok(report)
}

/// `S_L^-1(s, T) s - T S_L^-1(s, T) - I`, Frobenius norm.
pub fn resolvent_identity_residual(t: &CliffordMatrix, s: &Paravector, sl: &CliffordMatrix) -> Result<f64> {
    let lhs = sl.mul_right(&s.to_clifford());
    let rhs = &t.try_matmul(sl)? + &CliffordMatrix::identity(t.n(), t.d());
    Ok((&lhs - &rhs).frobenius())
}

/// Right resolvent assembled from left resolvents at `s` and `conj(s)`:
/// `(S_L(s) + S_L(conj s))/2 + J (S_L(s) - S_L(conj s)) (2J)^-1`.
pub fn right_from_left(sl_s: &CliffordMatrix, sl_sbar: &CliffordMatrix, j: &ImaginaryUnit) -> CliffordMatrix {
    let jc = j.to_clifford();
    let sum = (sl_s + sl_sbar).scale(0.5);
    let diff = (sl_s - sl_sbar).mul_left(&jc);
    // (2J)^-1 = -J/2
    let tail = diff.mul_right(&jc.scale(-0.5));
    &sum + &tail
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::CliffordNumber;

    fn real(n: usize, vals: &[f64]) -> CliffordMatrix {
        CliffordMatrix::real_diag(n, vals)
    }

    #[test]
    fn pencil_examples() {
        let t = real(1, &[2.0]);
        let s = Paravector::new(1.0, &[1.0]).unwrap();
        let q = q_pencil(&t, &s).unwrap();
        assert_eq!(q, CliffordMatrix::real_diag(1, &[2.0]));
        let tt = CliffordMatrix::scalar(2, 1, CliffordNumber::blade(2, 0b11));
        let j = ImaginaryUnit::generator(2, 2).to_paravector();
        let q = q_pencil(&tt, &j).unwrap();
        let expected = &tt.try_matmul(&tt).unwrap() + &CliffordMatrix::identity(2, 1);
        assert!(q.rel_diff(&expected, 1.0) < 1e-15);
        let s = Paravector::new(0.3, &[0.4, -1.0]).unwrap();
        assert_eq!(q_pencil(&tt, &s).unwrap(), q_pencil(&tt, &s.conj()).unwrap());
    }

    #[test]
    fn resolvent_examples() {
        let t = real(1, &[1.0]);
        let s = Paravector::real(1, 2.0);
        assert!(s_resolvent_left(&t, &s).unwrap().rel_diff(&CliffordMatrix::identity(1, 1), 1.0) < 1e-15);
        let zero = CliffordMatrix::zeros(2, 2);
        let s = Paravector::new(1.0, &[2.0, -1.0]).unwrap();
        let expected = CliffordMatrix::scalar(2, 2, s.conj().to_clifford().scale(1.0 / s.abs_sqr()));
        assert!(s_resolvent_left(&zero, &s).unwrap().rel_diff(&expected, 1.0) < 1e-15);
    }

    #[test]
    fn split_form_matches_q_formula() {
        let n = 2;
        let mut t = CliffordMatrix::real_diag(n, &[1.0, -2.0]);
        t.set(0, 1, CliffordNumber::blade(n, 0b01).scale(0.3));
        t.set(1, 0, CliffordNumber::blade(n, 0b11).scale(0.2));
        let j = ImaginaryUnit::from_direction(&[0.6, -0.8]).unwrap();
        let ev = ResolventEvaluator::new(&t, &j).unwrap();
        for &(x, y) in &[(0.3, 1.1), (-0.7, -2.0), (3.0, 0.0), (0.0, 0.5)] {
            let s = crate::clifford::paravector_on_plane(x, y, &j);
            let l = ev.left(x, y).unwrap();
            assert!(l.rel_diff(&s_resolvent_left(&t, &s).unwrap(), 1.0) < 1e-12);
            let r = ev.right(x, y).unwrap();
            assert!(r.rel_diff(&s_resolvent_right(&t, &s).unwrap(), 1.0) < 1e-12);
        }
    }

    #[test]
    fn spectrum_examples() {
        let rep = s_spectrum(&real(1, &[1.0, -2.0])).unwrap();
        let pts: Vec<(f64, f64)> = rep.spheres.iter().map(|s| (s.x, s.y)).collect();
        assert_eq!(pts.len(), 2);
        assert!((pts[0].0 + 2.0).abs() < 1e-12 && (pts[1].0 - 1.0).abs() < 1e-12);

        let e1 = CliffordMatrix::scalar(1, 1, CliffordNumber::generator(1, 1));
        let rep = s_spectrum(&e1).unwrap();
        assert_eq!(rep.spheres.len(), 1);
        assert!(rep.spheres[0].x.abs() < 1e-12 && (rep.spheres[0].y - 1.0).abs() < 1e-12);
        let scan = s_spectrum_detscan(&e1, &DetScanGrid::for_operator(&e1));
        assert_eq!(scan.spheres.len(), 1);
        assert!(rep.distance_to(scan.spheres[0].x, scan.spheres[0].y) < 1e-6);

        let nil = CliffordMatrix::from_real_entries(1, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        let rep = s_spectrum(&nil).unwrap();
        assert_eq!(rep.spheres.len(), 1);
        assert!(rep.contains_zero(1e-8));
    }

    #[test]
    fn bisectoriality_examples() {
        let grid = BisectorialityGrid::default_for(1);
        let r = bisectoriality(&real(1, &[1.0, -2.0]), &[], &grid).unwrap();
        assert!(r.is_bisectorial());
        assert_eq!(r.omega_spectral, 0.0);
        assert!(r.c_phi_samples.iter().all(|c| c.c_phi < 10.0));

        let e1 = CliffordMatrix::scalar(1, 1, CliffordNumber::generator(1, 1));
        assert!(!bisectoriality(&e1, &[], &grid).unwrap().is_bisectorial());

        let nil = CliffordMatrix::from_real_entries(1, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        let r = bisectoriality(&nil, &[], &grid).unwrap();
        assert!(!r.is_bisectorial(), "{r:?}");
    }

    #[test]
    fn ray_profile_of_zero_operator_is_one() {
        let z = CliffordMatrix::zeros(1, 1);
        let prof = ray_profile(&z, FRAC_PI_2, &ImaginaryUnit::generator(1, 1), 1e-6, 1e6, 60).unwrap();
        assert_eq!(prof.len(), 12 * 60 + 1);
        assert!(prof.iter().all(|(_, v)| (v - 1.0).abs() < 1e-12));
    }
}
