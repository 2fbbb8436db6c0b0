//! `cliffcalc`: S-spectrum, bisectoriality, functional calculi and theorem
//! verification for operators on finite-dimensional Clifford modules.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cliffcalc::Error;

/// Exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    pub const FAILURE: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const CLASS: u8 = 3;
    pub const QUADRATURE: u8 = 4;
    pub const NOT_BISECTORIAL: u8 = 5;
}

#[derive(Parser, Debug)]
#[command(name = "cliffcalc", version, about = "S-spectrum and slice functional calculi for Clifford operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// S-spectrum and bisectoriality report for an operator.
    Spectrum {
        operator: PathBuf,
        /// Sector angle for the resolvent bound (repeatable).
        #[arg(long, allow_hyphen_values = true)]
        phi: Vec<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluates f(T) with one of the calculi.
    Calc {
        operator: PathBuf,
        function: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Omega)]
        mode: Mode,
        /// Contour angle; chosen from the spectrum when omitted.
        #[arg(long)]
        phi: Option<f64>,
        /// Imaginary unit components (n values); defaults to e_1.
        #[arg(long, num_args = 1.., allow_hyphen_values = true)]
        j: Option<Vec<f64>>,
        /// Relative quadrature tolerance.
        #[arg(long)]
        tol: Option<f64>,
        /// Radius of the removed disc for the punctured and invertible modes.
        #[arg(long)]
        rho: Option<f64>,
        /// Also write the initial quadrature node table of the contour as CSV.
        #[arg(long)]
        nodes: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Runs verification suites over the standard function catalog.
    Verify {
        operator: PathBuf,
        /// Comma-separated: algebra, independence, product, kernel, projection, mapping, hinfty or all.
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        phi: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
        /// Also write one CSV row per check (suite, name, residual, tolerance, passed).
        #[arg(long)]
        residuals: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// CSV of t ||S_L^-1(t e^{J psi}, T)|| along the rays outside D_phi.
    Rayprofile {
        operator: PathBuf,
        #[arg(long, default_value_t = std::f64::consts::FRAC_PI_4)]
        phi: f64,
        #[arg(long, num_args = 1.., allow_hyphen_values = true)]
        j: Option<Vec<f64>>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Record wall-clock time in the manifest (output is then not reproducible).
    #[arg(long)]
    timing: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
#[value(rename_all = "snake_case")]
pub enum Mode {
    Omega,
    OmegaPunctured,
    Extended,
    ExtendedInvertible,
    Hinfty,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Omega => "omega",
            Mode::OmegaPunctured => "omega_punctured",
            Mode::Extended => "extended",
            Mode::ExtendedInvertible => "extended_invertible",
            Mode::Hinfty => "hinfty",
        }
    }
}

/// Error carrying the process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: exit::USAGE,
            message: message.into(),
        }
    }

    pub fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        Self {
            code: exit::FAILURE,
            message: format!("{}: {e}", path.display()),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::CalcClass(_) | Error::NotBnd(_) | Error::NotRegularizable(_) | Error::Precondition(_) | Error::Domain(_) => {
                exit::CLASS
            }
            Error::QuadratureDiverged { .. } => exit::QUADRATURE,
            Error::NotBisectorial(_) => exit::NOT_BISECTORIAL,
            Error::InvalidInput(_) | Error::DimensionMismatch(_) | Error::UnsupportedGenerators(_) => exit::USAGE,
            Error::SingularOperator { .. } | Error::SingularKernel | Error::InjectivityFailure { .. } => exit::FAILURE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("CLIFFCALC_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::usage(format!("CLIFFCALC_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::usage(format!("thread pool: {e}")))
}

fn run(cli: Cli) -> Result<u8, CliError> {
    configure_threads()?;
    match cli.command {
        Command::Spectrum { operator, phi, common } => commands::spectrum(&operator, &phi, &common),
        Command::Calc {
            operator,
            function,
            mode,
            phi,
            j,
            tol,
            rho,
            nodes,
            common,
        } => commands::calc(
            &operator,
            &function,
            &commands::CalcArgs {
                mode,
                phi,
                j,
                tol,
                rho,
                nodes,
            },
            &common,
        ),
        Command::Verify {
            operator,
            suite,
            seed,
            phi,
            tol,
            residuals,
            common,
        } => commands::verify(
            &operator,
            &commands::VerifyArgs {
                suite,
                seed,
                phi,
                tol,
                residuals,
            },
            &common,
        ),
        Command::Rayprofile { operator, phi, j, common } => commands::rayprofile(&operator, phi, j, &common),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
