//! The `knapsack` binary: argument parsing and exit-code policy over the
//! library in lib.rs. Exit codes: 0 success, 1 internal/selftest failure,
//! 2 usage or input error, 3 oracle refusal (instance too large to verify
//! exactly).

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use knapsack_cli::{bench, exact_opt, greedy_slack, selftest, Algorithm};
use knapsack_cli::gen::Dist;
use knapsack_fptas::solver::{describe_towers, solve_with_internal_eps};
use knapsack_fptas::stepfn::StepFunction;
use knapsack_fptas::{parse_instance, Error, Instance};

#[derive(Parser)]
#[command(
    name = "knapsack",
    version,
    about = "Approximation toolkit for the 0-1 knapsack problem"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve one instance file and print SOL.
    Solve(SolveArgs),
    /// Run a deterministic benchmark grid and write a CSV.
    Bench(BenchArgs),
    /// Run the built-in self-check suites.
    Selftest(SelftestArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// Instance file: a line `n W`, then n lines `w p` (# comments allowed).
    #[arg(long)]
    input: PathBuf,
    /// Approximation parameter: OPT <= (1 + eps) * SOL.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Per-stage internal accuracy, bypassing the eps budget split
    /// (experimentation; fptas only; end-to-end factor e^(26 * value)).
    #[arg(long, conflicts_with = "epsilon")]
    internal_eps: Option<f64>,
    /// Capacity override replacing the file's W.
    #[arg(long)]
    capacity: Option<f64>,
    #[arg(long, value_enum, default_value_t = Algorithm::Fptas)]
    algorithm: Algorithm,
    /// Write the profit profile as one `x y` pair per line, ascending.
    #[arg(long)]
    emit_function: Option<PathBuf>,
    /// Also compute the exact optimum and print OPT and ratio = OPT/SOL.
    #[arg(long)]
    verify: bool,
    /// Print the towers and partitions the solve would build (diagnostics).
    #[arg(long)]
    dump_towers: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated instance sizes.
    #[arg(long, value_delimiter = ',', required = true)]
    ns: Vec<usize>,
    /// Comma-separated approximation parameters.
    #[arg(long, value_delimiter = ',', required = true)]
    epsilons: Vec<f64>,
    /// Seeds 0..K for every (n, eps, algorithm) cell.
    #[arg(long)]
    seeds: u64,
    /// Instance family.
    #[arg(long, value_enum)]
    dist: Dist,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Comma-separated algorithms to run per cell.
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = vec![Algorithm::Fptas])]
    algs: Vec<Algorithm>,
}

#[derive(Args)]
struct SelftestArgs {
    /// Run only the named suite.
    #[arg(long)]
    suite: Option<String>,
    /// Inject a known defect to confirm failures are detected.
    #[arg(long)]
    corrupt: Option<String>,
}

/// A failed run, carrying the process exit code.
enum Failure {
    /// Bad flags or unusable input (exit 2).
    Usage(String),
    /// Exact verification refused at this size (exit 3).
    Refusal(String),
    /// Broken internal invariant or failed selftest (exit 1).
    Internal(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Refusal(_) => 3,
            Failure::Internal(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Refusal(m) | Failure::Internal(m) => m,
        }
    }
}

fn classify(e: Error) -> Failure {
    match e {
        Error::Domain(_) | Error::Parse { .. } => Failure::Usage(e.to_string()),
        Error::OracleRefused(_) => Failure::Refusal(e.to_string()),
        _ => Failure::Internal(e.to_string()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Solve(a) => cmd_solve(a),
        Cmd::Bench(a) => cmd_bench(a),
        Cmd::Selftest(a) => cmd_selftest(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn load_instance(a: &SolveArgs) -> Result<Instance, Failure> {
    let text = fs::read_to_string(&a.input)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", a.input.display())))?;
    let mut inst = parse_instance(&text).map_err(classify)?;
    if let Some(w) = a.capacity {
        if !(w > 0.0) || !w.is_finite() {
            return Err(Failure::Usage(format!(
                "--capacity {w}, expected a positive finite number"
            )));
        }
        inst.capacity = w;
    }
    Ok(inst)
}

fn cmd_solve(a: SolveArgs) -> Result<(), Failure> {
    let inst = load_instance(&a)?;
    if a.internal_eps.is_some() && a.algorithm != Algorithm::Fptas {
        return Err(Failure::Usage(format!(
            "--internal-eps only applies to --algorithm fptas, not {}",
            a.algorithm.name()
        )));
    }
    let needs_eps = matches!(
        a.algorithm,
        Algorithm::Fptas | Algorithm::Smalln | Algorithm::Capped
    ) && a.internal_eps.is_none();
    if needs_eps && a.epsilon.is_none() {
        return Err(Failure::Usage(format!(
            "--epsilon is required for --algorithm {}",
            a.algorithm.name()
        )));
    }
    if let Some(eps) = a.epsilon {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Failure::Usage(format!(
                "--epsilon {eps}, expected a positive finite number"
            )));
        }
    }
    if a.dump_towers {
        let eps = a
            .epsilon
            .ok_or_else(|| Failure::Usage("--dump-towers needs --epsilon".into()))?;
        print!("{}", describe_towers(&inst, eps).map_err(classify)?);
    }
    let (sol, profile) = match a.internal_eps {
        Some(eps_hat) => {
            let s = solve_with_internal_eps(&inst, eps_hat).map_err(classify)?;
            (s.value, s.profile)
        }
        None => {
            // Greedy and exact ignore eps; 0.5 is an arbitrary valid filler.
            let eps = a.epsilon.unwrap_or(0.5);
            a.algorithm.run_full(&inst, eps).map_err(classify)?
        }
    };
    println!("SOL {sol}");
    if a.algorithm == Algorithm::Greedy {
        println!("greedy bound: SOL >= OPT - {}", greedy_slack(&inst));
    }
    if a.verify {
        let opt = exact_opt(&inst).map_err(classify)?;
        println!("OPT {opt}");
        let ratio = if opt == sol { 1.0 } else { opt / sol };
        println!("ratio {ratio}");
    }
    if let Some(path) = &a.emit_function {
        fs::write(path, render_profile(&profile))
            .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

/// One `x y` pair per line, ascending in x, with the implicit origin made
/// explicit so the dump describes the whole function.
fn render_profile(profile: &StepFunction) -> String {
    let mut out = String::new();
    if profile.points().first().is_none_or(|&(x, _)| x > 0.0) {
        out.push_str("0 0\n");
    }
    for &(x, y) in profile.points() {
        let _ = writeln!(out, "{x} {y}");
    }
    out
}

fn cmd_bench(a: BenchArgs) -> Result<(), Failure> {
    if a.seeds == 0 {
        return Err(Failure::Usage("--seeds 0, expected at least 1".into()));
    }
    for &n in &a.ns {
        if n == 0 {
            return Err(Failure::Usage("--ns contains 0, sizes start at 1".into()));
        }
    }
    for &eps in &a.epsilons {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Failure::Usage(format!(
                "--epsilons contains {eps}, expected positive finite numbers"
            )));
        }
    }
    let records =
        bench::run_grid(&a.ns, &a.epsilons, &a.algs, a.dist, a.seeds).map_err(classify)?;
    let csv = bench::render_csv(&records);
    fs::write(&a.out, csv)
        .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", a.out.display())))?;
    println!("wrote {} rows to {}", records.len(), a.out.display());
    Ok(())
}

fn cmd_selftest(a: SelftestArgs) -> Result<(), Failure> {
    let reports =
        selftest::run(a.suite.as_deref(), a.corrupt.as_deref()).map_err(Failure::Usage)?;
    let mut all = true;
    for r in &reports {
        println!("{}", r.line());
        all &= r.passed;
    }
    if all {
        Ok(())
    } else {
        Err(Failure::Internal("selftest failed".into()))
    }
}
