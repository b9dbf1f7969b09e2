//! CSV benchmark runner: one row per (n, eps, algorithm, seed) cell.
//!
//! Rows are generated in sorted cell order, so repeated runs with the same
//! flags are byte-identical apart from the runtime_ms column. Timing covers
//! the solve call only.

use std::fmt::Write as _;
use std::time::Instant;

use knapsack_fptas::error::Result;
use knapsack_fptas::Instance;

use crate::gen::{self, Dist};
use crate::Algorithm;

/// The fixed CSV schema; the header line is part of the public contract.
pub const CSV_HEADER: &str = "n,eps,alg,capacity,sol,opt,ratio,runtime_ms,seed";

/// One benchmark cell result, formatted by [`render_csv`].
#[derive(Debug, Clone)]
pub struct BenchRecord {
    pub n: usize,
    pub eps: f64,
    pub alg: Algorithm,
    pub capacity: f64,
    pub sol: f64,
    /// Exact optimum when an oracle is feasible at this size.
    pub opt: Option<f64>,
    pub runtime_ms: f64,
    pub seed: u64,
}

impl BenchRecord {
    /// ratio = opt/sol >= 1 when the oracle ran (sol never exceeds opt).
    pub fn ratio(&self) -> Option<f64> {
        self.opt.map(|o| o / self.sol)
    }
}

/// The exact optimum at this cell's capacity, if any shipped oracle can
/// afford the instance.
pub fn oracle_opt(inst: &Instance) -> Option<f64> {
    crate::exact_opt(inst).ok()
}

/// Runs one (n, eps, alg, seed) cell: generate, solve, time, cross-check.
/// Errors pass through (e.g. the exact algorithm refusing an oversized
/// cell) so the caller decides the exit path.
pub fn run_cell(n: usize, eps: f64, alg: Algorithm, dist: Dist, seed: u64) -> Result<BenchRecord> {
    let inst = gen::generate(n, dist, gen::cell_seed(seed, n, eps));
    let start = Instant::now();
    let sol = alg.run(&inst, eps)?;
    let runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    let opt = oracle_opt(&inst);
    Ok(BenchRecord {
        n,
        eps,
        alg,
        capacity: inst.capacity,
        sol,
        opt,
        runtime_ms,
        seed,
    })
}

/// Full grid in deterministic order: n, then eps, then algorithm, then seed,
/// in the order given (callers pass sorted lists for sorted output).
pub fn run_grid(
    ns: &[usize],
    epsilons: &[f64],
    algs: &[Algorithm],
    dist: Dist,
    seeds: u64,
) -> Result<Vec<BenchRecord>> {
    let mut out = Vec::new();
    for &n in ns {
        for &eps in epsilons {
            for &alg in algs {
                for seed in 0..seeds {
                    out.push(run_cell(n, eps, alg, dist, seed)?);
                }
            }
        }
    }
    Ok(out)
}

pub fn render_csv(records: &[BenchRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        let (opt, ratio) = match r.opt {
            Some(o) => (format!("{o}"), format!("{}", o / r.sol)),
            None => (String::new(), String::new()),
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.n,
            r.eps,
            r.alg.name(),
            r.capacity,
            r.sol,
            opt,
            ratio,
            r.runtime_ms,
            r.seed
        );
    }
    out
}
