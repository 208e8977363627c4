mod bundle;
mod manifest;
mod selftest;
mod surface;
mod torus_cmd;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use manifest::{CliError, CliResult, RunManifest, Sink};
use obstruct_core::series::{CoeffField, MIN_FLOAT_BITS};
use serde_json::Value;

#[derive(Parser)]
#[command(name = "obstruct", version, about = "Obstruction functions of CR hypersurfaces and circle bundles")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Backend {
    Exact,
    Float,
}

#[derive(Args, Clone)]
struct Common {
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Record wall time in the report (it always goes to stderr).
    #[arg(long)]
    timing: bool,
}

#[derive(Args, Clone)]
struct BackendArgs {
    #[arg(long, value_enum, default_value_t = Backend::Exact)]
    backend: Backend,
    /// Mantissa bits for the float backend.
    #[arg(long, default_value_t = 128)]
    precision: usize,
}

impl BackendArgs {
    fn field(&self) -> CliResult<CoeffField> {
        match self.backend {
            Backend::Exact => Ok(CoeffField::ExactGaussianRational),
            Backend::Float => {
                if self.precision < MIN_FLOAT_BITS {
                    return Err(CliError::Input(format!("--precision must be at least {MIN_FLOAT_BITS}")));
                }
                Ok(CoeffField::ComplexFloat { bits: self.precision })
            }
        }
    }

    fn record(&self, m: &mut RunManifest) {
        match self.backend {
            Backend::Exact => m.backend = "exact".into(),
            Backend::Float => {
                m.backend = "float".into();
                m.precision_bits = Some(self.precision);
            }
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Obstruction O(0) and K(0) of a normal form or defining series.
    Compute {
        #[arg(long)]
        input: PathBuf,
        /// Truncation weight (default 2n+6).
        #[arg(long)]
        weight: Option<i32>,
        #[command(flatten)]
        backend: BackendArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Check the trace conditions of a normal form.
    CmValidate {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// First weight at which two hypersurfaces differ. Without --b, compares
    /// the normal form in --a against its osculating ψ₀.
    Osculate {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: Option<PathBuf>,
        #[arg(long)]
        weight: Option<i32>,
        #[command(flatten)]
        common: Common,
    },
    /// ψ₀ construction and the K(ψ₀ + t x₁^{2n+4}) slope, n = 2 or 3.
    Thm31 {
        #[arg(long)]
        input: PathBuf,
        /// Truncation weight (default 2n+8).
        #[arg(long)]
        weight: Option<i32>,
        #[command(flatten)]
        backend: BackendArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Solve the flat or spherical circle-bundle equation from Cauchy data.
    CkSolve {
        #[arg(long, value_enum)]
        kind: bundle::Kind,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 12)]
        degree: i32,
        #[command(flatten)]
        backend: BackendArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Obstruction-flat, non-spherical germ.
    Thm41 {
        #[arg(long, default_value_t = 14)]
        degree: i32,
        #[command(flatten)]
        common: Common,
    },
    /// Density on a circle bundle over a flat torus.
    Torus(torus_cmd::TorusArgs),
    /// Embedded invariant checks.
    Selftest {
        #[command(flatten)]
        common: Common,
    },
}

/// Body of a report plus the failure to exit with after writing it.
pub struct Outcome {
    pub body: Value,
    pub failure: Option<CliError>,
}

impl Outcome {
    pub fn ok(body: Value) -> Self {
        Outcome { body, failure: None }
    }
}

fn configure_threads() -> CliResult<()> {
    if let Ok(v) = std::env::var("OBSTRUCT_THREADS") {
        let n: usize = v.trim().parse().map_err(|_| CliError::Input(format!("OBSTRUCT_THREADS={v:?} is not a count")))?;
        if n == 0 {
            return Err(CliError::Input("OBSTRUCT_THREADS must be positive".into()));
        }
        // Fails only if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    configure_threads()?;
    let started = Instant::now();
    let (name, common, result) = match cli.cmd {
        Command::Compute { input, weight, backend, common } => {
            let mut m = RunManifest::new("compute");
            backend.record(&mut m);
            let r = surface::compute(&mut m, &input, weight, backend.field()?);
            (m, common, r)
        }
        Command::CmValidate { input, common } => {
            let mut m = RunManifest::new("cm-validate");
            let r = surface::cm_validate(&mut m, &input);
            (m, common, r)
        }
        Command::Osculate { a, b, weight, common } => {
            let mut m = RunManifest::new("osculate");
            let r = surface::osculate(&mut m, &a, b.as_deref(), weight);
            (m, common, r)
        }
        Command::Thm31 { input, weight, backend, common } => {
            let mut m = RunManifest::new("thm31");
            backend.record(&mut m);
            let r = surface::thm31(&mut m, &input, weight, backend.field()?);
            (m, common, r)
        }
        Command::CkSolve { kind, data, degree, backend, common } => {
            let mut m = RunManifest::new("ck-solve");
            backend.record(&mut m);
            let r = bundle::ck_solve(&mut m, kind, &data, degree, backend.field()?);
            (m, common, r)
        }
        Command::Thm41 { degree, common } => {
            let mut m = RunManifest::new("thm41");
            let r = bundle::thm41(&mut m, degree);
            (m, common, r)
        }
        Command::Torus(args) => {
            let mut m = RunManifest::new("torus");
            m.backend = "f64".into();
            let common = args.common.clone();
            let r = torus_cmd::torus(&mut m, &args);
            (m, common, r)
        }
        Command::Selftest { common } => {
            let m = RunManifest::new("selftest");
            (m, common, selftest::run())
        }
    };
    let outcome = result?;
    let sink = Sink { out: common.out, timing: common.timing };
    sink.emit(name, outcome.body, started)?;
    match outcome.failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("obstruct: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
