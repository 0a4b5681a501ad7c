mod report;
mod suites;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use ultra_hardy::{Error, FracParams};

use report::{to_csv, to_json, SCHEMA};
use suites::{Settings, Suite};

const EXIT_VIOLATION: u8 = 1;
const EXIT_USAGE: u8 = 2;
const THREADS_ENV: &str = "ULTRA_HARDY_THREADS";

const DEFAULT_SIGMAS: [f64; 3] = [0.25, 0.5, 0.75];
const DEFAULT_LAMBDAS: [f64; 3] = [0.75, 1.0, 2.0];

#[derive(Parser)]
#[command(name = "ultra-hardy", version, about = "Verification reports for ultraspherical Hardy-type inequalities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Q, D, E, c_λ and the multipliers m_0..m_N.
    Constants(RunArgs),
    /// Run one verification suite over a parameter grid.
    Verify {
        #[arg(value_enum)]
        suite: SuiteArg,
        #[command(flatten)]
        args: RunArgs,
    },
    /// Sweep (σ, λ) and tabulate Q, the smallest deficit and the sharpness ratio.
    Table(RunArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Hardy,
    Gsr,
    Lemma2,
    Kernel,
    Heisenberg,
    Loguncert,
    Sharpness,
    Sphere,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Hardy => Suite::Hardy,
            SuiteArg::Gsr => Suite::Gsr,
            SuiteArg::Lemma2 => Suite::Lemma2,
            SuiteArg::Kernel => Suite::Kernel,
            SuiteArg::Heisenberg => Suite::Heisenberg,
            SuiteArg::Loguncert => Suite::LogUncert,
            SuiteArg::Sharpness => Suite::Sharpness,
            SuiteArg::Sphere => Suite::Sphere,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct RunArgs {
    /// Comma-separated λ values.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    lambda: Option<Vec<f64>>,
    /// Comma-separated σ values.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    sigma: Option<Vec<f64>>,
    /// Truncation degree N.
    #[arg(long, default_value_t = 64)]
    degree: usize,
    /// Grid size for pointwise checks.
    #[arg(long, default_value_t = 200)]
    nodes: usize,
    /// Quadrature tolerance.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// First seed of the random family.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

enum Failure {
    Usage(String),
    Violation(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain { .. } | Error::Regime { .. } | Error::LambdaMismatch { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Violation(e.to_string()),
        }
    }
}

impl RunArgs {
    fn settings(&self) -> Result<Settings, Failure> {
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Failure::Usage(format!("--tol must be positive, got {}", self.tol)));
        }
        if self.nodes == 0 {
            return Err(Failure::Usage("--nodes must be positive".into()));
        }
        Ok(Settings { degree: self.degree, nodes: self.nodes, tol: self.tol, seed: self.seed })
    }

    fn grid(&self, make: impl Fn(f64, f64) -> Result<FracParams, Error>) -> Result<Vec<FracParams>, Failure> {
        let sigmas = self.sigma.clone().unwrap_or_else(|| DEFAULT_SIGMAS.to_vec());
        let lambdas = self.lambda.clone().unwrap_or_else(|| DEFAULT_LAMBDAS.to_vec());
        if sigmas.is_empty() || lambdas.is_empty() {
            return Err(Failure::Usage("empty parameter grid".into()));
        }
        let mut cells = Vec::new();
        for &s in &sigmas {
            for &l in &lambdas {
                cells.push(make(s, l)?);
            }
        }
        Ok(cells)
    }

    fn config(&self, threads: Option<usize>) -> Value {
        json!({
            "lambda": self.lambda,
            "sigma": self.sigma,
            "degree": self.degree,
            "nodes": self.nodes,
            "tol": self.tol,
            "seed": self.seed,
            "format": match self.format { Format::Json => "json", Format::Csv => "csv" },
            "threads": threads,
        })
    }

    fn emit(&self, text: &str) -> Result<(), Failure> {
        match &self.out {
            Some(path) => std::fs::write(path, text)
                .map_err(|e| Failure::Violation(format!("cannot write {}: {e}", path.display()))),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }

    fn json_only(&self, command: &str) -> Result<(), Failure> {
        if self.format == Format::Csv {
            return Err(Failure::Usage(format!("--format csv is only available for `table`, not `{command}`")));
        }
        Ok(())
    }
}

fn thread_cap() -> Result<Option<usize>, Failure> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(None);
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Failure::Usage(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Failure::Violation(e.to_string()))?;
    Ok(Some(n))
}

fn envelope(command: &str, suite: Option<&str>, config: Value, pass: bool, results: Value) -> Value {
    json!({
        "schema": SCHEMA,
        "command": command,
        "suite": suite,
        "config": config,
        "pass": pass,
        "results": results,
    })
}

fn serialize(v: &Value) -> Result<String, Failure> {
    to_json(v).map_err(|e| Failure::Violation(e.to_string()))
}

fn execute(cli: Cli) -> Result<bool, Failure> {
    let threads = thread_cap()?;
    match cli.command {
        Command::Constants(args) => {
            args.json_only("constants")?;
            args.settings()?;
            let cells = args.grid(FracParams::theorem1)?;
            let rows = cells.iter().map(|p| suites::constants(p, args.degree)).collect::<Result<Vec<_>, Error>>()?;
            let report = envelope("constants", None, args.config(threads), true, Value::Array(rows));
            args.emit(&serialize(&report)?)?;
            Ok(true)
        }
        Command::Verify { suite, args } => {
            args.json_only("verify")?;
            let suite = Suite::from(suite);
            let settings = args.settings()?;
            let cells = match suite {
                Suite::Sphere => {
                    if args.lambda.is_some() {
                        return Err(Failure::Usage("the sphere suite fixes λ = 1/2; omit --lambda".into()));
                    }
                    let sigmas = args.sigma.clone().unwrap_or_else(|| DEFAULT_SIGMAS.to_vec());
                    if sigmas.is_empty() {
                        return Err(Failure::Usage("empty parameter grid".into()));
                    }
                    sigmas.iter().map(|&s| FracParams::theorem1(s, 0.5)).collect::<Result<Vec<_>, Error>>()?
                }
                _ => args.grid(|s, l| suite.params(s, l))?,
            };
            let outcome = suites::run(suite, &cells, &settings)?;
            let report =
                envelope("verify", Some(suite.name()), args.config(threads), outcome.pass, Value::Array(outcome.cells));
            args.emit(&serialize(&report)?)?;
            Ok(outcome.pass)
        }
        Command::Table(args) => {
            let settings = args.settings()?;
            let cells = args.grid(FracParams::theorem1)?;
            let rows = cells.iter().map(|p| suites::table_row(p, &settings)).collect::<Result<Vec<_>, Error>>()?;
            let text = match args.format {
                Format::Csv => to_csv(&rows),
                Format::Json => {
                    let rows = serde_json::to_value(&rows).map_err(|e| Failure::Violation(e.to_string()))?;
                    serialize(&envelope("table", None, args.config(threads), true, rows))?
                }
            };
            args.emit(&text)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_VIOLATION),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Violation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_VIOLATION)
        }
    }
}
