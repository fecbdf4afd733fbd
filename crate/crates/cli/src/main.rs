mod input;
mod quantity;
mod reproduce;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use deficit_core::clocc::{execute, ProtocolFile};
use deficit_core::deficits::{Direction, Quantity};
use deficit_core::measure::OptimizerConfig;
use deficit_core::scan::{self, Family, ScanOptions};
use deficit_core::Error;

use crate::input::{parse_state, StateInput};

const EXIT_USAGE: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_NUMERICAL: u8 = 4;

#[derive(Parser)]
#[command(name = "deficit-lab", version, about = "Information deficits and localizable information of quantum states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct OptimizerArgs {
    /// Grid points per measurement angle.
    #[arg(long, default_value_t = 24)]
    grid: usize,
    /// Number of best grid cells refined by the simplex search.
    #[arg(long, default_value_t = 8)]
    restarts: usize,
    /// Simplex iteration cap per refinement.
    #[arg(long, default_value_t = 200)]
    refine_iterations: usize,
    /// Simplex convergence tolerance.
    #[arg(long, default_value_t = 1e-8)]
    tolerance: f64,
}

impl From<OptimizerArgs> for OptimizerConfig {
    fn from(a: OptimizerArgs) -> Self {
        OptimizerConfig {
            grid_points_per_angle: a.grid,
            refine_iterations: a.refine_iterations,
            tolerance: a.tolerance,
            restarts: a.restarts,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Random,
    Iso,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one quantity and print a JSON report.
    Quantity {
        /// State name (singlet, mfs, cc, w, bell:p1,p2,p3,p4, iso:lambda,d, ghz:n,
        /// aharonov:n, acin:a,b,c,d,e[,phase], bb84:q1..q4, sausage:q1..q9) or a JSON state file.
        #[arg(long)]
        state: String,
        #[arg(long)]
        quantity: String,
        /// Measuring party for one-way quantities: A->B or B->A.
        #[arg(long, default_value = "A->B")]
        direction: String,
        #[command(flatten)]
        optimizer: OptimizerArgs,
    },
    /// Monte Carlo scan of two-qubit states written as CSV.
    Scan {
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Only 2x2 is supported.
        #[arg(long, default_value = "2x2")]
        dims: String,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads; DEFICIT_LAB_THREADS takes precedence.
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long, value_enum, default_value = "random")]
        family: FamilyArg,
        /// Isotropic weights as start:stop:step.
        #[arg(long, default_value = "0:1:0.05")]
        lambda: String,
        /// Skip the relative entropy of entanglement column.
        #[arg(long)]
        no_er: bool,
        /// Fill the runtime_ms column (output is then not byte-stable).
        #[arg(long)]
        timing: bool,
        #[command(flatten)]
        optimizer: OptimizerArgs,
    },
    /// Recompute the published numbers and print a pass/fail table.
    Reproduce {
        #[arg(long, default_value = "paper")]
        suite: String,
        #[command(flatten)]
        optimizer: OptimizerArgs,
    },
    /// Run a protocol file and print its entropy ledger as JSON.
    Protocol {
        #[arg(long)]
        state: String,
        /// Protocol JSON file.
        #[arg(long)]
        protocol: PathBuf,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::PostCheck(_) => EXIT_NUMERICAL,
            _ => EXIT_USAGE,
        };
        Failure { code, message: e.to_string() }
    }
}

fn io_failure(path: &std::path::Path, e: std::io::Error) -> Failure {
    Failure { code: EXIT_IO, message: format!("{}: {e}", path.display()) }
}

fn bipartite_state(arg: &str) -> Result<deficit_core::DensityMatrix, Failure> {
    match parse_state(arg)? {
        StateInput::Bipartite(rho) | StateInput::Multipartite(rho) => Ok(rho),
        StateInput::Acin { params, .. } => Ok(deficit_core::states::acin_state(&params).to_density()),
        StateInput::Aharonov(n) => Ok(deficit_core::states::aharonov(n)?.to_density()),
        StateInput::Ghz(n) if n <= 4 => Ok(deficit_core::states::ghz(n, n)?.to_density()),
        StateInput::Ghz(n) => Err(Failure {
            code: EXIT_USAGE,
            message: format!("ghz:{n} is too large to simulate as a density matrix"),
        }),
    }
}

fn threads(flag: Option<usize>) -> Result<Option<usize>, Failure> {
    match std::env::var("DEFICIT_LAB_THREADS") {
        Ok(v) => v.trim().parse().map(Some).map_err(|e| Failure {
            code: EXIT_USAGE,
            message: format!("DEFICIT_LAB_THREADS={v}: {e}"),
        }),
        Err(_) => Ok(flag),
    }
}

/// Writes a line to stdout; a closed pipe is not an error.
fn emit(text: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Quantity { state, quantity, direction, optimizer } => {
            let q: Quantity = quantity.parse()?;
            let dir: Direction = direction.parse()?;
            let input = parse_state(&state)?;
            let (report, converged) = quantity::evaluate(&input, q, dir, &optimizer.into())?;
            let json = quantity::to_json(&report, converged);
            emit(&serde_json::to_string_pretty(&json).expect("JSON value"));
        }
        Command::Scan { n, seed, dims, out, threads: t, family, lambda, no_er, timing, optimizer } => {
            if dims.trim().to_ascii_lowercase() != "2x2" {
                return Err(Error::UnsupportedDimension(format!("scan dims {dims}; only 2x2")).into());
            }
            let family = match family {
                FamilyArg::Random => Family::Random { n },
                FamilyArg::Iso => Family::Isotropic { lambdas: scan::parse_range(&lambda)? },
            };
            let opts = ScanOptions {
                family,
                seed,
                optimizer: optimizer.into(),
                with_er: !no_er,
                timing,
                threads: threads(t)?,
            };
            opts.optimizer.validate()?;
            // open first so an unwritable path fails before the work
            let file = File::create(&out).map_err(|e| io_failure(&out, e))?;
            let records = scan::run(&opts)?;
            let mut w = BufWriter::new(file);
            scan::write_csv(&mut w, &records)
                .and_then(|_| w.flush())
                .map_err(|e| io_failure(&out, e))?;
            emit(&scan::summarize(&records).to_string());
        }
        Command::Reproduce { suite, optimizer } => {
            if suite != "paper" {
                return Err(Error::InvalidParameter(format!("unknown suite `{suite}`")).into());
            }
            let s = reproduce::paper_suite(&optimizer.into())?;
            emit(s.render().trim_end());
            if !s.all_pass() {
                return Err(Failure { code: EXIT_NUMERICAL, message: "some rows failed".into() });
            }
        }
        Command::Protocol { state, protocol } => {
            let rho = bipartite_state(&state)?;
            let text = std::fs::read_to_string(&protocol).map_err(|e| io_failure(&protocol, e))?;
            let p = ProtocolFile::parse(&text)?.to_protocol(rho.dims())?;
            let (_, ledger) = execute(&rho, &p)?;
            let mut json = serde_json::to_value(&ledger).expect("ledger serializes");
            quantity::round_floats(&mut json);
            emit(&serde_json::to_string_pretty(&json).expect("JSON value"));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("deficit-lab: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
