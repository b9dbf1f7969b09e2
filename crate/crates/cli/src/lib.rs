//! Library face of the `knapsack` command: algorithm dispatch, instance
//! generation, the benchmark grid, and the selftest suites. The binary in
//! `main.rs` is a thin argument layer over this, and the acceptance tests
//! drive these functions directly.

pub mod bench;
pub mod gen;
pub mod selftest;

use clap::ValueEnum;
use knapsack_fptas::error::{Error, Result};
use knapsack_fptas::instance::{clamp_eps, group_by_profit, preprocess};
use knapsack_fptas::multilevel::approx_capped;
use knapsack_fptas::oracle::{brute_force_profile, dp_profile, BRUTE_FORCE_MAX_N, DP_MAX_CELLS};
use knapsack_fptas::smawk::UniformFunction;
use knapsack_fptas::solver::{internal_eps, solve_small_n};
use knapsack_fptas::stepfn::{merge_dnc, StepFunction};
use knapsack_fptas::{solve, Instance};

/// Solver selection for `solve` and `bench`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algorithm {
    /// The full (1+eps)-approximation pipeline.
    Fptas,
    /// Per-item class merge: same guarantee, cheaper when n = O(1/eps).
    Smalln,
    /// Per-octave multi-level capped merge with a non-truncating cap
    /// (exposes the tower machinery directly; stage-bounded factor).
    Capped,
    /// Density greedy with skipping; SOL >= OPT - max fitting profit.
    Greedy,
    /// Exact oracle (brute force or weight DP); refuses oversized input.
    Exact,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Fptas => "fptas",
            Algorithm::Smalln => "smalln",
            Algorithm::Capped => "capped",
            Algorithm::Greedy => "greedy",
            Algorithm::Exact => "exact",
        }
    }

    /// Solves and returns the value at the instance capacity.
    pub fn run(self, inst: &Instance, eps: f64) -> Result<f64> {
        Ok(self.run_full(inst, eps)?.0)
    }

    /// Solves and returns (value at capacity, achievable profile). Every
    /// algorithm produces a profile whose value at W equals its SOL.
    pub fn run_full(self, inst: &Instance, eps: f64) -> Result<(f64, StepFunction)> {
        match self {
            Algorithm::Fptas => {
                let sol = solve(inst, eps)?;
                Ok((sol.value, sol.profile))
            }
            Algorithm::Smalln => {
                let profile = solve_small_n(inst, eps)?;
                let value = profile.eval(inst.capacity)?;
                Ok((value, profile))
            }
            Algorithm::Capped => {
                let profile = solve_capped(inst, eps)?;
                let value = profile.eval(inst.capacity)?;
                Ok((value, profile))
            }
            Algorithm::Greedy => greedy_solve(inst),
            Algorithm::Exact => {
                let profile = exact_profile(inst)?.truncate_domain(inst.capacity);
                let value = profile.eval(inst.capacity)?;
                Ok((value, profile))
            }
        }
    }
}

/// Variant of the solver that drives every profit octave through the
/// multi-level capped merge with a cap above the octave's total profit
/// mass (so the cap never truncates and the whole profile survives).
fn solve_capped(inst: &Instance, eps: f64) -> Result<StepFunction> {
    let (eps_user, _) = clamp_eps(eps)?;
    let eps_hat = internal_eps(eps_user);
    let pre = preprocess(inst, eps_hat)?;
    if pre.items.is_empty() {
        return Ok(StepFunction::zero());
    }
    let mut parts: Vec<StepFunction> = Vec::new();
    for group in group_by_profit(&pre) {
        let fs: Vec<UniformFunction> = group
            .items
            .iter()
            .map(|it| UniformFunction::new(it.profit, vec![it.weight]))
            .collect::<Result<_>>()?;
        let mass: f64 = fs.iter().map(UniformFunction::mass).sum();
        let f = approx_capped(&fs, mass * (1.0 + 1e-9), eps_hat)?
            .scale_values(group.scale)?
            .truncate_domain(inst.capacity);
        parts.push(f);
    }
    let live: Vec<&StepFunction> = parts.iter().filter(|f| !f.is_zero()).collect();
    if live.is_empty() {
        return Ok(StepFunction::zero());
    }
    let lo = live
        .iter()
        .filter_map(|f| f.min_positive_value())
        .fold(f64::INFINITY, f64::min);
    let hi = live.iter().map(|f| f.max_value()).fold(0.0, f64::max);
    Ok(merge_dnc(&parts, (3.0 * eps_hat).exp_m1(), lo, hi)?.truncate_domain(inst.capacity))
}

/// Density greedy: items in nonincreasing p/w order (ties by index), each
/// taken when it still fits. The profile is the prefix staircase of the
/// taken items, so its value at W is the greedy SOL.
fn greedy_solve(inst: &Instance) -> Result<(f64, StepFunction)> {
    for it in &inst.items {
        if !(it.weight > 0.0) || !(it.profit > 0.0) {
            return Err(Error::Domain(format!(
                "item ({}, {}) needs positive weight and profit",
                it.weight, it.profit
            )));
        }
    }
    let mut order: Vec<usize> = (0..inst.items.len()).collect();
    order.sort_by(|&a, &b| {
        let ua = inst.items[a].profit / inst.items[a].weight;
        let ub = inst.items[b].profit / inst.items[b].weight;
        ub.total_cmp(&ua).then(a.cmp(&b))
    });
    let mut room = inst.capacity;
    let mut wsum = 0.0;
    let mut psum = 0.0;
    let mut points = Vec::new();
    for &i in &order {
        let it = inst.items[i];
        if it.weight <= room {
            room -= it.weight;
            wsum += it.weight;
            psum += it.profit;
            points.push((wsum, psum));
        }
    }
    Ok((psum, StepFunction::from_points(points)?))
}

/// The additive slack of the greedy bound SOL >= OPT - slack: the largest
/// profit among items that fit the capacity at all.
pub fn greedy_slack(inst: &Instance) -> f64 {
    inst.items
        .iter()
        .filter(|it| it.weight <= inst.capacity)
        .map(|it| it.profit)
        .fold(0.0, f64::max)
}

/// The exact profile from whichever shipped oracle can afford the
/// instance: brute force below the subset-enumeration limit, else the
/// weight-indexed DP for integral weights under its cell guard.
pub fn exact_profile(inst: &Instance) -> Result<StepFunction> {
    let n = inst.items.len();
    if n <= BRUTE_FORCE_MAX_N {
        return brute_force_profile(&inst.items);
    }
    let integral = inst
        .items
        .iter()
        .all(|it| it.weight.fract() == 0.0 && it.weight >= 1.0);
    let wmax = inst.capacity.floor();
    if integral && wmax >= 1.0 && (n as f64) * wmax <= DP_MAX_CELLS as f64 {
        return dp_profile(&inst.items, wmax as u64);
    }
    Err(Error::OracleRefused(format!(
        "no exact oracle for n = {n} at this capacity: brute force stops at \
         n = {BRUTE_FORCE_MAX_N} and the weight DP needs integral weights \
         with n * W <= {DP_MAX_CELLS}"
    )))
}

/// Exact optimum at the instance capacity, when any oracle is feasible.
pub fn exact_opt(inst: &Instance) -> Result<f64> {
    exact_profile(inst)?.eval(inst.capacity)
}
