//! Exact reference implementations.
//!
//! These oracles are deliberately written with independent, simple logic
//! (full enumeration, dense DP, linear scans) so the approximation pipeline
//! can be validated against them. Each refuses inputs beyond its resource
//! guard instead of silently taking forever.

use crate::error::{Error, Result};
use crate::instance::Item;
use crate::stepfn::StepFunction;
use crate::tol::RATIO_TOL;

/// Hard cap on subset enumeration size for [`brute_force_profile`].
pub const BRUTE_FORCE_MAX_N: usize = 20;

/// Hard cap on `n · max_weight` for [`dp_profile`].
pub const DP_MAX_CELLS: u64 = 1_000_000_000;

/// Exact profit profile by full subset enumeration (n ≤ 20).
///
/// Returns the canonical step function whose value at x is the best total
/// profit of any item subset with total weight ≤ x.
pub fn brute_force_profile(items: &[Item]) -> Result<StepFunction> {
    let n = items.len();
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::OracleRefused(format!(
            "brute_force_profile handles n <= {BRUTE_FORCE_MAX_N}, got {n}"
        )));
    }
    let mut pts = Vec::with_capacity(1usize << n);
    for mask in 1u32..(1u32 << n) {
        let mut w = 0.0;
        let mut p = 0.0;
        for (i, it) in items.iter().enumerate() {
            if mask >> i & 1 == 1 {
                w += it.weight;
                p += it.profit;
            }
        }
        pts.push((w, p));
    }
    StepFunction::from_points(pts)
}

/// Exact profit profile for integer-weight instances via dense dynamic
/// programming over the weight axis, up to `wmax`.
///
/// Weights must be integers (within `RATIO_TOL`); the guard refuses
/// instances with n·wmax > [`DP_MAX_CELLS`].
pub fn dp_profile(items: &[Item], wmax: u64) -> Result<StepFunction> {
    let n = items.len() as u64;
    if n.saturating_mul(wmax) > DP_MAX_CELLS {
        return Err(Error::OracleRefused(format!(
            "dp_profile guard: n*wmax = {} exceeds {DP_MAX_CELLS}",
            n * wmax
        )));
    }
    let mut ws = Vec::with_capacity(items.len());
    for it in items {
        let r = it.weight.round();
        if (it.weight - r).abs() > RATIO_TOL * it.weight.abs().max(1.0) || r < 1.0 {
            return Err(Error::Domain(format!(
                "dp_profile requires positive integer weights, got {}",
                it.weight
            )));
        }
        ws.push(r as u64);
    }
    let cap = wmax as usize;
    let mut best = vec![f64::NEG_INFINITY; cap + 1];
    best[0] = 0.0;
    for (it, &w) in items.iter().zip(&ws) {
        let w = w as usize;
        if w > cap {
            continue;
        }
        for x in (w..=cap).rev() {
            let cand = best[x - w] + it.profit;
            if cand > best[x] {
                best[x] = cand;
            }
        }
    }
    let mut pts = Vec::new();
    let mut run = 0.0;
    for (x, &v) in best.iter().enumerate() {
        if v > run {
            run = v;
            pts.push((x as f64, v));
        }
    }
    StepFunction::from_points(pts)
}

/// Quadratic reference for `stepfn::exact_maxplus`, written independently:
/// materializes every pair sum (including each side's origin) and builds
/// the increasing hull with a linear scan instead of the shared envelope
/// helper's strict-max sweep.
pub fn brute_maxplus(f: &StepFunction, g: &StepFunction) -> StepFunction {
    let mut fp: Vec<(f64, f64)> = vec![(0.0, 0.0)];
    fp.extend_from_slice(f.points());
    let mut gp: Vec<(f64, f64)> = vec![(0.0, 0.0)];
    gp.extend_from_slice(g.points());
    let mut sums = Vec::with_capacity(fp.len() * gp.len());
    for &(fx, fy) in &fp {
        for &(gx, gy) in &gp {
            sums.push((fx + gx, fy + gy));
        }
    }
    sums.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut pts = Vec::new();
    let mut best = 0.0;
    for (x, y) in sums {
        if y > best {
            best = y;
            pts.push((x, y));
        }
    }
    StepFunction::from_points(pts).expect("pair sums of valid functions are valid points")
}

/// Linear-scan reference for `smawk::smawk_argmax`: per-row maximum with
/// ties resolved to the smallest column index.
pub fn brute_row_maxima(rows: usize, cols: usize, value: &dyn Fn(usize, usize) -> f64) -> Vec<usize> {
    let mut out = Vec::with_capacity(rows);
    for i in 0..rows {
        let mut arg = 0usize;
        let mut best = f64::NEG_INFINITY;
        for j in 0..cols {
            let v = value(i, j);
            if v > best {
                best = v;
                arg = j;
            }
        }
        out.push(arg);
    }
    out
}
