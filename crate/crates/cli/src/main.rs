//! `qmc-reach`: reachable-subspace analysis of quantum Markov chains given as
//! a QASM body plus a channel file.
//!
//! Exit codes: 0 success, 1 engine/oracle disagreement, 2 parse or usage
//! error, 3 qubit cap exceeded, 4 internal invariant violation.

mod init;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qmc_reach::families;
use qmc_reach::numerics::DEFAULT_QUBIT_CAP;
use qmc_reach::oracle::{self, DensityMatrix, DEFAULT_ORACLE_CAP};
use qmc_reach::random::{random_instance, RandomShape};
use qmc_reach::{
    build_qmc, parse_qasm, reachable_subspace, ChannelFile, QuantumMarkovChain, ReachConfig,
    ReachError, Result, StateVector, SubspaceBasis, Tolerances,
};

use report::{BenchRow, CheckJson, ReachJson, SweepFailure, SweepJson};

/// Mutual containment threshold used by `check`.
const SPAN_TOL: f64 = 1e-6;

#[derive(Debug, Parser)]
#[command(
    name = "qmc-reach",
    version,
    about = "Reachable subspaces of quantum Markov chains"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute the subspace reachable from the initial states.
    Reach(RunArgs),
    /// Compare the engine with the brute-force density-matrix oracle.
    Check(CheckArgs),
    /// Run the bundled Grover, quantum-walk and repeat-until-success rows.
    Bench(CommonArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Null threshold for residual norms.
    #[arg(long)]
    tol: Option<f64>,
    /// Largest register the engine accepts.
    #[arg(long, default_value_t = DEFAULT_QUBIT_CAP)]
    cap: usize,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Debug, Args)]
struct ChainArgs {
    /// OpenQASM 2.0 chain body.
    #[arg(long)]
    circuit: PathBuf,
    /// JSON channel specification.
    #[arg(long)]
    channels: Option<PathBuf>,
    /// Initial states: labels over `0 1 + -` or `@file.json` amplitude files.
    /// Defaults to the circuit's `// @init` comment, then to all zeros.
    #[arg(long, num_args = 1..)]
    init: Option<Vec<String>>,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    chain: ChainArgs,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Args)]
struct CheckArgs {
    #[arg(long, required_unless_present = "random", conflicts_with = "random")]
    circuit: Option<PathBuf>,
    #[arg(long, requires = "circuit")]
    channels: Option<PathBuf>,
    #[arg(long, num_args = 1.., requires = "circuit")]
    init: Option<Vec<String>>,
    /// Sweep seeded random chains instead of a circuit file.
    #[arg(long)]
    random: bool,
    #[arg(long, requires = "random", default_value_t = 2)]
    qubits: usize,
    #[arg(long, requires = "random", default_value_t = 100)]
    seeds: u64,
    #[command(flatten)]
    common: CommonArgs,
}

impl CommonArgs {
    fn config(&self) -> Result<ReachConfig> {
        let tolerances = match self.tol {
            Some(t) => Tolerances::with_null_threshold(t)?,
            None => Tolerances::default(),
        };
        Ok(ReachConfig {
            tolerances,
            qubit_cap: self.cap,
        })
    }
}

fn exit_code(err: &ReachError) -> u8 {
    match err {
        ReachError::Usage(_) | ReachError::Parse { .. } => 2,
        ReachError::CapExceeded { .. } => 3,
        ReachError::Invariant(_) => 4,
    }
}

fn print_json<T: serde::Serialize>(value: &T) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("reports serialize")
    );
}

/// Parses the body, channel file and init entries into a chain.
fn load_chain(chain: &ChainArgs, cap: usize) -> Result<(QuantumMarkovChain, Vec<StateVector>)> {
    let source = init::read_file(&chain.circuit)?;
    let body = parse_qasm(&source)?;
    if body.num_qubits > cap {
        return Err(ReachError::CapExceeded {
            requested: body.num_qubits,
            cap,
        });
    }
    let sites = match &chain.channels {
        Some(path) => ChannelFile::parse(&init::read_file(path)?)?.sites()?,
        None => vec![],
    };
    let n = body.num_qubits;
    let qmc = build_qmc(body, sites)?;
    for w in qmc.warnings() {
        eprintln!("warning: {w}");
    }
    let states = match &chain.init {
        Some(entries) => init::resolve(entries, Path::new("."), n)?,
        None => {
            let base = chain.circuit.parent().unwrap_or(Path::new("."));
            init::resolve(&init::pragma(&source).unwrap_or_default(), base, n)?
        }
    };
    Ok((qmc, states))
}

fn cmd_reach(args: &RunArgs) -> Result<u8> {
    let config = args.common.config()?;
    let (qmc, states) = load_chain(&args.chain, config.qubit_cap)?;
    let report = reachable_subspace(&qmc, &states, &config)?;
    let json = ReachJson::from_report(&report);
    match args.common.format {
        Format::Text => print!("{}", report::format_reach(&json)),
        Format::Json => print_json(&json),
    }
    Ok(0)
}

/// Engine run and oracle run on the same chain, compared by mutual containment.
fn compare(
    qmc: &QuantumMarkovChain,
    states: &[StateVector],
    config: &ReachConfig,
) -> Result<CheckJson> {
    if qmc.num_qubits() > DEFAULT_ORACLE_CAP {
        return Err(ReachError::CapExceeded {
            requested: qmc.num_qubits(),
            cap: DEFAULT_ORACLE_CAP,
        });
    }
    let engine = reachable_subspace(qmc, states, config)?.subspace;
    let rho = DensityMatrix::from_vectors(states)?;
    let rho = rho.scaled(1.0 / rho.trace().re);
    let reference: SubspaceBasis = oracle::oracle_reachable(qmc, &rho, &config.tolerances)?;
    let engine_in_oracle = reference.max_residual_of(&engine)?;
    let oracle_in_engine = engine.max_residual_of(&reference)?;
    let agree = engine.dim() == reference.dim()
        && engine_in_oracle < SPAN_TOL
        && oracle_in_engine < SPAN_TOL;
    Ok(CheckJson {
        engine_dim: engine.dim(),
        oracle_dim: reference.dim(),
        engine_in_oracle,
        oracle_in_engine,
        agree,
        engine_basis: (!agree).then(|| report::dump_basis(&engine)),
        oracle_basis: (!agree).then(|| report::dump_basis(&reference)),
    })
}

fn cmd_check(args: &CheckArgs) -> Result<u8> {
    let config = args.common.config()?;
    if args.random {
        return sweep(args, &config);
    }
    let chain = ChainArgs {
        circuit: args.circuit.clone().expect("clap requires --circuit"),
        channels: args.channels.clone(),
        init: args.init.clone(),
    };
    let (qmc, states) = load_chain(&chain, config.qubit_cap)?;
    let check = compare(&qmc, &states, &config)?;
    match args.common.format {
        Format::Text => print!("{}", report::format_check(&check)),
        Format::Json => print_json(&check),
    }
    Ok(if check.agree { 0 } else { 1 })
}

fn sweep(args: &CheckArgs, config: &ReachConfig) -> Result<u8> {
    if args.qubits == 0 {
        return Err(ReachError::Usage("--qubits must be at least 1".into()));
    }
    let mut disagreements = Vec::new();
    for seed in 0..args.seeds {
        let inst = random_instance(seed, RandomShape::new(args.qubits));
        let check = compare(&inst.qmc, &inst.init, config)?;
        if !check.agree {
            disagreements.push(SweepFailure { seed, check });
        }
    }
    let summary = SweepJson {
        qubits: args.qubits,
        seeds: args.seeds,
        agreed: args.seeds - disagreements.len() as u64,
        disagreements,
    };
    match args.common.format {
        Format::Text => {
            println!(
                "random sweep: {} qubits, {}/{} agree",
                summary.qubits, summary.agreed, summary.seeds
            );
            for f in &summary.disagreements {
                print!("seed {}: {}", f.seed, report::format_check(&f.check));
            }
        }
        Format::Json => print_json(&summary),
    }
    Ok(if summary.disagreements.is_empty() {
        0
    } else {
        1
    })
}

fn bench_row(b: &families::Benchmark, config: &ReachConfig) -> (BenchRow, Option<ReachError>) {
    let mut row = BenchRow {
        name: b.name.clone(),
        qubits: b.num_qubits(),
        op_type: b.op_type.to_string(),
        initial_dim: SubspaceBasis::span_of(b.num_qubits(), &b.init, &config.tolerances)
            .map_or(b.init.len(), |s| s.dim()),
        time_s: None,
        reachable_dim: None,
        error: None,
    };
    let start = Instant::now();
    match b
        .qmc()
        .and_then(|qmc| reachable_subspace(&qmc, &b.init, config))
    {
        Ok(report) => {
            row.time_s = Some(start.elapsed().as_secs_f64());
            row.reachable_dim = Some(report.dim());
            if let Some(want) = b.expected_dim.filter(|&d| d != report.dim()) {
                eprintln!(
                    "warning: {} reached dim {}, expected {want}",
                    b.name,
                    report.dim()
                );
            }
            (row, None)
        }
        Err(e) => {
            row.error = Some(e.to_string());
            (row, Some(e))
        }
    }
}

fn cmd_bench(args: &CommonArgs) -> Result<u8> {
    let config = args.config()?;
    let mut rows = Vec::new();
    let mut first_error = None;
    for b in families::bundled() {
        let (row, err) = bench_row(&b, &config);
        if let Some(e) = err {
            eprintln!("error: {}: {e}", b.name);
            first_error.get_or_insert(e);
        }
        rows.push(row);
    }
    match args.format {
        Format::Text => print!("{}", report::format_bench(&rows)),
        Format::Json => print_json(&rows),
    }
    Ok(first_error.as_ref().map_or(0, exit_code))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Reach(a) => cmd_reach(a),
        Command::Check(a) => cmd_check(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
