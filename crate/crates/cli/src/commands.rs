use std::f64::consts::FRAC_PI_2;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use cliffcalc::calculus::{self, CalcMode};
use cliffcalc::contour::{ContourPath, QuadratureSummary};
use cliffcalc::slice::FunctionSpec;
use cliffcalc::spectrum::{self, BisectorialityGrid, BisectorialityReport, SSpectrumReport};
use cliffcalc::verify::{self, Catalog, Suite, VerifyOptions, VerifyReport};
use cliffcalc::{CliffordMatrix, ImaginaryUnit, QuadratureConfig};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use crate::{exit, CliError, Common, Mode};

/// Ray profile range and density.
const PROFILE_T_MIN: f64 = 1e-6;
const PROFILE_T_MAX: f64 = 1e6;
const PROFILE_PER_DECADE: usize = 60;

/// Provenance embedded in every JSON report. Wall-clock time is recorded only
/// on request so that reruns stay byte-identical.
#[derive(Serialize)]
struct RunManifest {
    command: &'static str,
    inputs: Vec<String>,
    config: Value,
    versions: Versions,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_clock_seconds: Option<f64>,
}

#[derive(Serialize)]
struct Versions {
    cliffcalc: &'static str,
}

impl RunManifest {
    fn new(command: &'static str, inputs: &[&Path], config: Value, seed: Option<u64>) -> Self {
        Self {
            command,
            inputs: inputs.iter().map(|p| p.display().to_string()).collect(),
            config,
            versions: Versions {
                cliffcalc: env!("CARGO_PKG_VERSION"),
            },
            seed,
            wall_clock_seconds: None,
        }
    }

    fn stamp(&mut self, common: &Common, start: Instant) {
        if common.timing {
            self.wall_clock_seconds = Some(start.elapsed().as_secs_f64());
        }
    }
}

fn load<T: DeserializeOwned>(path: &Path, what: &str) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| {
        CliError::usage(format!(
            "{} ({what}): line {}, column {}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })
}

fn emit_bytes(common: &Common, bytes: &[u8]) -> Result<(), CliError> {
    match &common.out {
        Some(p) => std::fs::write(p, bytes).map_err(|e| CliError::io(p, e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)
                .and_then(|_| out.flush())
                .map_err(|e| CliError::usage(format!("stdout: {e}")).with_code(exit::FAILURE))
        }
    }
}

fn emit_json(common: &Common, value: &impl Serialize) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::usage(format!("serialize: {e}")))?;
    text.push('\n');
    emit_bytes(common, text.as_bytes())
}

impl CliError {
    fn with_code(mut self, code: u8) -> Self {
        self.code = code;
        self
    }
}

fn unit(j: Option<Vec<f64>>, n: usize) -> Result<ImaginaryUnit, CliError> {
    match j {
        None => Ok(ImaginaryUnit::generator(n, 1)),
        Some(v) if v.len() != n => Err(CliError::usage(format!("--j needs {n} components, got {}", v.len()))),
        Some(v) => Ok(ImaginaryUnit::from_direction(&v)?),
    }
}

fn check_angle(phi: f64) -> Result<(), CliError> {
    if phi > 0.0 && phi < FRAC_PI_2 {
        Ok(())
    } else {
        Err(CliError::usage(format!("--phi must lie in (0, pi/2), got {phi}")))
    }
}

/// Modulus of the smallest nonzero spectral sphere.
fn spectral_gap(spec: &SSpectrumReport) -> f64 {
    spec.spheres
        .iter()
        .map(|s| s.x.hypot(s.y))
        .filter(|&r| r > spectrum::SPHERE_MERGE_TOL)
        .fold(f64::INFINITY, f64::min)
}

#[derive(Serialize)]
struct SpectrumOutput {
    manifest: RunManifest,
    spectrum: SSpectrumReport,
    bisectoriality: BisectorialityReport,
}

pub fn spectrum(op: &Path, phis: &[f64], common: &Common) -> Result<u8, CliError> {
    let start = Instant::now();
    let t: CliffordMatrix = load(op, "operator")?;
    for &p in phis {
        check_angle(p)?;
    }
    let grid = BisectorialityGrid::default_for(t.n());
    let spec = spectrum::s_spectrum(&t)?;
    let bis = spectrum::bisectoriality(&t, phis, &grid)?;
    let mut manifest = RunManifest::new("spectrum", &[op], json!({ "phi": phis, "grid": grid }), None);
    manifest.stamp(common, start);
    emit_json(
        common,
        &SpectrumOutput {
            manifest,
            spectrum: spec,
            bisectoriality: bis,
        },
    )?;
    Ok(exit::OK)
}

pub struct CalcArgs {
    pub mode: Mode,
    pub phi: Option<f64>,
    pub j: Option<Vec<f64>>,
    pub tol: Option<f64>,
    pub rho: Option<f64>,
    pub nodes: Option<PathBuf>,
}

#[derive(Serialize)]
struct HinftyExtras {
    regularizer: String,
    injectivity_margin: f64,
    e_t: CliffordMatrix,
    ef_t: CliffordMatrix,
    consistency_residual: f64,
}

#[derive(Serialize)]
struct CalcResult {
    manifest: RunManifest,
    mode: CalcMode,
    phi: f64,
    result: CliffordMatrix,
    quadrature: Vec<QuadratureSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    hinfty: Option<HinftyExtras>,
}

pub fn calc(op: &Path, func: &Path, args: &CalcArgs, common: &Common) -> Result<u8, CliError> {
    let start = Instant::now();
    let t: CliffordMatrix = load(op, "operator")?;
    let spec: FunctionSpec = load(func, "function")?;
    let f = spec.build(t.n())?;
    let j = unit(args.j.clone(), t.n())?;
    let mut cfg = QuadratureConfig::default();
    if let Some(tol) = args.tol {
        cfg.rel_tol = tol;
    }
    cfg.validate()?;
    let s = spectrum::s_spectrum(&t)?;
    let phi = match args.phi {
        Some(p) => p,
        None => verify::default_phi(s.omega(), f.theta()),
    };
    check_angle(phi)?;
    let rho = || match args.rho {
        Some(r) if r > 0.0 => Ok(r),
        Some(r) => Err(CliError::usage(format!("--rho must be positive, got {r}"))),
        None => {
            let gap = spectral_gap(&s);
            Ok(if gap.is_finite() { 0.5 * gap } else { 1.0 })
        }
    };
    let mode = match args.mode {
        Mode::Omega => CalcMode::Omega,
        Mode::OmegaPunctured => CalcMode::OmegaPunctured { rho: rho()? },
        Mode::Extended => CalcMode::Extended,
        Mode::ExtendedInvertible => CalcMode::ExtendedInvertible { rho: rho()? },
        Mode::Hinfty => CalcMode::Hinfty,
    };
    if let Some(path) = &args.nodes {
        let contour = match mode {
            CalcMode::OmegaPunctured { rho } | CalcMode::ExtendedInvertible { rho } => {
                ContourPath::punctured_sector(phi, rho, j)?
            }
            _ => ContourPath::sector_boundary(phi, j)?,
        };
        std::fs::write(path, contour.nodes_csv(&cfg)).map_err(|e| CliError::io(path, e))?;
    }
    let (result, quadrature, hinfty) = if mode == CalcMode::Hinfty {
        let h = calculus::hinfty_calc(&t, &f, None, phi, &j, &cfg)?;
        let consistency_residual = h.consistency_residual();
        let extras = HinftyExtras {
            regularizer: h.regularizer_descriptor,
            injectivity_margin: h.injectivity_margin,
            e_t: h.e_t,
            ef_t: h.ef_t,
            consistency_residual,
        };
        (h.f_t, h.quadrature, Some(extras))
    } else {
        let out = calculus::calc(&t, &f, mode, phi, &j, &cfg)?;
        (out.value, out.quadrature, None)
    };
    let config = json!({
        "mode": args.mode.name(),
        "phi": phi,
        "j": j.components(),
        "quadrature": cfg,
    });
    let mut manifest = RunManifest::new("calc", &[op, func], config, None);
    manifest.stamp(common, start);
    emit_json(
        common,
        &CalcResult {
            manifest,
            mode,
            phi,
            result,
            quadrature,
            hinfty,
        },
    )?;
    Ok(exit::OK)
}

#[derive(Serialize)]
struct VerifyOutput {
    manifest: RunManifest,
    report: VerifyReport,
}

pub struct VerifyArgs {
    pub suite: String,
    pub seed: u64,
    pub phi: Option<f64>,
    pub tol: Option<f64>,
    pub residuals: Option<PathBuf>,
}

fn csv_error(e: impl std::fmt::Display) -> CliError {
    CliError::usage(format!("csv: {e}")).with_code(exit::FAILURE)
}

fn residual_csv(report: &VerifyReport) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["suite", "name", "residual", "tolerance", "passed"])
        .map_err(csv_error)?;
    for c in &report.checks {
        w.write_record([
            c.suite.name().to_string(),
            c.name.clone(),
            format!("{:e}", c.residual),
            format!("{:e}", c.tolerance),
            c.passed.to_string(),
        ])
        .map_err(csv_error)?;
    }
    w.into_inner().map_err(csv_error)
}

pub fn verify(op: &Path, args: &VerifyArgs, common: &Common) -> Result<u8, CliError> {
    let start = Instant::now();
    let (seed, phi, tol) = (args.seed, args.phi, args.tol);
    let suites = Suite::parse_selection(&args.suite)?;
    let t: CliffordMatrix = load(op, "operator")?;
    if let Some(p) = phi {
        check_angle(p)?;
    }
    let mut cfg = QuadratureConfig::default();
    if let Some(tol) = tol {
        cfg.rel_tol = tol;
    }
    cfg.validate()?;
    let opts = VerifyOptions {
        seed,
        phi,
        ..VerifyOptions::default()
    };
    let catalog = Catalog::standard(t.n());
    let report = verify::verify_suite(&t, &catalog, &suites, &opts, &cfg);
    if let Some(path) = &args.residuals {
        std::fs::write(path, residual_csv(&report)?).map_err(|e| CliError::io(path, e))?;
    }
    let code = if report.refused() {
        exit::NOT_BISECTORIAL
    } else if report.all_passed() {
        exit::OK
    } else {
        exit::FAILURE
    };
    for c in report.failures() {
        eprintln!(
            "FAIL [{}] {}: residual {:.3e} > {:.1e}{}",
            c.suite,
            c.name,
            c.residual,
            c.tolerance,
            c.detail.as_deref().map(|d| format!(" ({d})")).unwrap_or_default()
        );
    }
    if let Some(r) = &report.refusal {
        eprintln!("refused: {r}");
    }
    let config = json!({
        "suites": suites,
        "phi": phi,
        "quadrature": cfg,
        "algebra_samples": opts.algebra_samples,
        "independence_angles": opts.independence_angles,
        "independence_units": opts.independence_units,
        "catalog": catalog.entries.iter().map(|e| e.name.as_str()).collect::<Vec<_>>(),
    });
    let mut manifest = RunManifest::new("verify", &[op], config, Some(seed));
    manifest.stamp(common, start);
    emit_json(common, &VerifyOutput { manifest, report })?;
    Ok(code)
}

pub fn rayprofile(op: &Path, phi: f64, j: Option<Vec<f64>>, common: &Common) -> Result<u8, CliError> {
    let t: CliffordMatrix = load(op, "operator")?;
    check_angle(phi)?;
    let j = unit(j, t.n())?;
    let angles = spectrum::outside_angles(phi);
    let columns: Vec<Vec<(f64, f64)>> = angles
        .iter()
        .map(|&psi| spectrum::ray_profile(&t, psi, &j, PROFILE_T_MIN, PROFILE_T_MAX, PROFILE_PER_DECADE))
        .collect::<Result<_, _>>()?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["t".to_string()];
    header.extend(angles.iter().map(|psi| format!("psi={psi:.12}")));
    w.write_record(&header).map_err(csv_error)?;
    for (row, &(tt, _)) in columns[0].iter().enumerate() {
        let mut rec = vec![format!("{tt:e}")];
        rec.extend(columns.iter().map(|c| format!("{:e}", c[row].1)));
        w.write_record(&rec).map_err(csv_error)?;
    }
    let bytes = w.into_inner().map_err(csv_error)?;
    emit_bytes(common, &bytes)?;
    Ok(exit::OK)
}
