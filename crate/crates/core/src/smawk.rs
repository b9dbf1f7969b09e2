//! SMAWK row optimization and merging of p-uniform pseudo-concave
//! functions on shared weight quantization grids.
//!
//! An equal-profit item class induces a profit function whose values are
//! 0, p, 2p, ... with breakpoints at the ascending prefix sums of its
//! weights; those prefix sums are convex, which makes the per-quantum
//! min-plus recurrences totally monotone and SMAWK-solvable in linear time.

use std::borrow::Cow;

use crate::error::{Error, Result};
use crate::instance::Item;
use crate::stepfn::StepFunction;
use crate::tol::{snap_to_integer, BIG, BIG_THRESHOLD, HUGE_SLOPE, RATIO_TOL, REL_TOL};
use crate::towers::{construct_base_set, TowerParams};

/// Below this cap the number-theoretic route of [`fast_naive_capped`]
/// cannot beat the direct merge (B^0.01 is within 10% of 1), so the
/// function degenerates to [`naive_capped`], which meets the same contract.
const FAST_NAIVE_MIN_B: f64 = 4096.0;

/// Penalty per index for infeasible (negative-shift) kernel entries in the
/// SMAWK matrices. Must dwarf `BIG` plus any reachable weight.
const LEFT_PENALTY: f64 = 1e22;

/// The profit function of an equal-profit item class: value at x is
/// p · max{k : cumweights[k-1] ≤ x}. Pseudo-concave because cumweights are
/// prefix sums of ascending weights.
#[derive(Debug, Clone)]
pub struct UniformFunction {
    p: f64,
    cumweights: Vec<f64>,
}

impl UniformFunction {
    /// Builds the class function from its profit quantum and item weights
    /// (sorted internally). Asserts pseudo-concavity of the prefix sums.
    pub fn new(p: f64, mut weights: Vec<f64>) -> Result<UniformFunction> {
        if !(p > 0.0) || !p.is_finite() {
            return Err(Error::Domain(format!("profit quantum {p}, expected > 0")));
        }
        if weights.is_empty() {
            return Err(Error::Domain("uniform function needs at least one item".into()));
        }
        for &w in &weights {
            if !(w > 0.0) || !w.is_finite() || w >= BIG_THRESHOLD / 2.0 {
                return Err(Error::Domain(format!("weight {w} out of supported range")));
            }
        }
        weights.sort_by(f64::total_cmp);
        let mut cumweights = Vec::with_capacity(weights.len());
        let mut run = 0.0;
        for w in &weights {
            run += w;
            cumweights.push(run);
        }
        // Pseudo-concavity: successive differences (the sorted weights)
        // are nondecreasing by construction; assert the stored form.
        for k in 1..cumweights.len() {
            debug_assert!(
                cumweights[k] - cumweights[k - 1]
                    >= cumweights[k - 1] - if k >= 2 { cumweights[k - 2] } else { 0.0 }
                        - REL_TOL * cumweights[k]
            );
        }
        Ok(UniformFunction { p, cumweights })
    }

    pub fn profit(&self) -> f64 {
        self.p
    }

    pub fn cumweights(&self) -> &[f64] {
        &self.cumweights
    }

    pub fn len(&self) -> usize {
        self.cumweights.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction requires at least one item
    }

    /// Same weights, different profit quantum (used by rounding steps).
    pub fn with_profit(&self, p: f64) -> Result<UniformFunction> {
        if !(p > 0.0) || !p.is_finite() {
            return Err(Error::Domain(format!("profit quantum {p}, expected > 0")));
        }
        Ok(UniformFunction {
            p,
            cumweights: self.cumweights.clone(),
        })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let k = self.cumweights.partition_point(|&c| c <= x);
        k as f64 * self.p
    }

    /// Exact step-function form of this class.
    pub fn to_step_function(&self) -> StepFunction {
        StepFunction::from_points(
            self.cumweights
                .iter()
                .enumerate()
                .map(|(k, &c)| (c, (k + 1) as f64 * self.p)),
        )
        .expect("uniform function points are valid")
    }

    /// Total value when every item is taken.
    pub fn mass(&self) -> f64 {
        self.p * self.cumweights.len() as f64
    }
}

/// A profit-indexed table of minimum weights on the grid {0, δ', 2δ', ...}
/// up to a cap B: entry k is the least weight achieving profit ≥ k·δ'.
#[derive(Debug, Clone)]
pub struct QuantizedProfile {
    pub quantum: f64,
    pub minweight: Vec<f64>,
    pub cap: f64,
}

impl QuantizedProfile {
    /// Empty profile: only profit 0 is achievable.
    pub fn new(quantum: f64, cap: f64) -> Result<QuantizedProfile> {
        if !(quantum > 0.0) || !(cap > 0.0) {
            return Err(Error::Domain(format!(
                "profile needs positive quantum and cap, got {quantum}, {cap}"
            )));
        }
        // 128M entries = 1 GB of f64; beyond that the parameters are
        // essentially certainly wrong and allocation would take the
        // process down rather than returning an error.
        if cap / quantum > 128e6 {
            return Err(Error::Domain(format!(
                "profile grid cap/quantum = {} too large to materialize",
                cap / quantum
            )));
        }
        let steps = grid_len(cap, quantum);
        let mut minweight = vec![BIG; steps + 1];
        minweight[0] = 0.0;
        Ok(QuantizedProfile { quantum, minweight, cap })
    }

    /// Inverts the minweight table into a canonical step function.
    pub fn to_step_function(&self) -> StepFunction {
        StepFunction::from_points(
            self.minweight
                .iter()
                .enumerate()
                .skip(1)
                .filter(|(_, &w)| w < BIG_THRESHOLD)
                .map(|(k, &w)| (w, k as f64 * self.quantum)),
        )
        .expect("profile entries are valid points")
    }
}

/// Number of positive grid steps fitting under `cap` (with snapping for
/// caps that are near-exact multiples of the quantum).
fn grid_len(cap: f64, quantum: f64) -> usize {
    let q = cap / quantum;
    match snap_to_integer(q, REL_TOL) {
        Some(k) if k >= 0 => k as usize,
        _ => q.floor().max(0.0) as usize,
    }
}

/// Groups items into equal-profit classes on the grid of multiples of
/// 1/⌈1/ε⌉ (so that the value 1 is itself a grid point), rounding each
/// profit down. Returns classes in ascending profit order.
pub fn build_uniform_functions(items: &[Item], eps: f64) -> Result<Vec<UniformFunction>> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::Domain(format!("eps = {eps}, expected eps in (0, 1]")));
    }
    let k = (1.0 / eps).ceil();
    let quantum = 1.0 / k;
    let mut classes: std::collections::BTreeMap<i64, Vec<f64>> = std::collections::BTreeMap::new();
    for it in items {
        if it.profit < 1.0 - REL_TOL || it.profit > 2.0 + REL_TOL {
            return Err(Error::Domain(format!(
                "profit {} outside [1, 2]",
                it.profit
            )));
        }
        let scaled = it.profit * k;
        let class = match snap_to_integer(scaled, REL_TOL) {
            Some(c) => c,
            None => scaled.floor() as i64,
        };
        classes.entry(class).or_default().push(it.weight);
    }
    classes
        .into_iter()
        .map(|(c, weights)| UniformFunction::new(c as f64 * quantum, weights))
        .collect()
}

/// Exact per-row argmax columns of an implicitly given totally monotone
/// matrix (ties resolved to the smallest column), in O(rows + cols) oracle
/// calls up to log factors.
pub fn smawk_argmax(rows: usize, cols: usize, value: &dyn Fn(usize, usize) -> f64) -> Vec<usize> {
    if rows == 0 || cols == 0 {
        return Vec::new();
    }
    let mut out = vec![0usize; rows];
    let row_ids: Vec<usize> = (0..rows).collect();
    let col_ids: Vec<usize> = (0..cols).collect();
    smawk_solve(&row_ids, col_ids, value, &mut out);
    out
}

fn smawk_solve(
    rows: &[usize],
    cols: Vec<usize>,
    value: &dyn Fn(usize, usize) -> f64,
    out: &mut [usize],
) {
    if rows.is_empty() {
        return;
    }
    let cols = if cols.len() > rows.len() {
        smawk_reduce(rows, &cols, value)
    } else {
        cols
    };
    if rows.len() == 1 {
        let r = rows[0];
        let mut best_c = cols[0];
        let mut best_v = value(r, cols[0]);
        for &c in &cols[1..] {
            let v = value(r, c);
            if v > best_v {
                best_v = v;
                best_c = c;
            }
        }
        out[r] = best_c;
        return;
    }
    let odd: Vec<usize> = rows.iter().copied().skip(1).step_by(2).collect();
    smawk_solve(&odd, cols.clone(), value, out);
    // Interpolate the even-position rows between consecutive odd answers.
    let mut cidx = 0usize;
    let mut i = 0usize;
    while i < rows.len() {
        let r = rows[i];
        let hi_col = if i + 1 < rows.len() {
            out[rows[i + 1]]
        } else {
            *cols.last().unwrap()
        };
        let mut best_c = cols[cidx];
        let mut best_v = value(r, cols[cidx]);
        let mut j = cidx;
        while j + 1 < cols.len() && cols[j] < hi_col {
            j += 1;
            let v = value(r, cols[j]);
            if v > best_v {
                best_v = v;
                best_c = cols[j];
            }
        }
        out[r] = best_c;
        if i + 1 < rows.len() {
            while cols[cidx] < out[rows[i + 1]] {
                cidx += 1;
            }
        }
        i += 2;
    }
}

/// The REDUCE step: prunes columns that cannot hold any row maximum,
/// keeping at most |rows| candidates. Strict comparison keeps the smaller
/// column on ties.
fn smawk_reduce(rows: &[usize], cols: &[usize], value: &dyn Fn(usize, usize) -> f64) -> Vec<usize> {
    let mut stack: Vec<usize> = Vec::with_capacity(rows.len());
    for &c in cols {
        loop {
            match stack.last() {
                None => {
                    stack.push(c);
                    break;
                }
                Some(&top) => {
                    let r = rows[stack.len() - 1];
                    if value(r, c) > value(r, top) {
                        stack.pop();
                    } else {
                        if stack.len() < rows.len() {
                            stack.push(c);
                        }
                        break;
                    }
                }
            }
        }
    }
    stack
}

/// Convolves one uniform class into a quantized profile:
/// new[k] = min_j (old[k − c·j] + cumweights[j]) where c = f.p / quantum
/// must be an exact integer. Solved per residue class modulo c with SMAWK
/// on the totally monotone matrix induced by the convex cumweights.
pub fn add_uniform(profile: &QuantizedProfile, f: &UniformFunction) -> Result<QuantizedProfile> {
    let ratio = f.p / profile.quantum;
    let c = match snap_to_integer(ratio, REL_TOL) {
        Some(c) if c >= 1 => c as usize,
        _ => {
            return Err(Error::Contract(format!(
                "class profit {} is not an integer multiple of quantum {}",
                f.p, profile.quantum
            )))
        }
    };
    let len = profile.minweight.len();
    // Classes with very few items dominate realistic workloads (per-item
    // functions have exactly one). A direct scan beats the SMAWK recursion's
    // allocation overhead there: cost len * n_items with n_items <= 4.
    if f.cumweights.len() <= 4 {
        let mut new_weights = profile.minweight.clone();
        for k in 0..len {
            let mut best = profile.minweight[k];
            for (j, &w) in f.cumweights.iter().enumerate() {
                let used = c * (j + 1);
                if used > k {
                    break;
                }
                let v = profile.minweight[k - used] + w;
                if v < best {
                    best = v;
                }
            }
            new_weights[k] = best;
        }
        return Ok(QuantizedProfile {
            quantum: profile.quantum,
            minweight: finish_minweight(new_weights, profile, f, c),
            cap: profile.cap,
        });
    }
    let n_items = f.cumweights.len() as isize;
    let cw = &f.cumweights;
    let kernel = move |d: isize| -> f64 {
        if d < 0 {
            LEFT_PENALTY * (-d) as f64
        } else if d == 0 {
            0.0
        } else if d <= n_items {
            cw[(d - 1) as usize]
        } else {
            cw[(n_items - 1) as usize] + HUGE_SLOPE * (d - n_items) as f64
        }
    };
    let mut new_weights = profile.minweight.clone();
    for res in 0..c.min(len) {
        let len_c = (len - res).div_ceil(c);
        if len_c == 0 {
            continue;
        }
        let old: Vec<f64> = (0..len_c).map(|s| profile.minweight[res + s * c]).collect();
        let value = |s: usize, u: usize| -> f64 { -(old[u] + kernel(s as isize - u as isize)) };
        let args = smawk_argmax(len_c, len_c, &value);
        for (s, &u) in args.iter().enumerate() {
            new_weights[res + s * c] = old[u] + kernel(s as isize - u as isize);
        }
    }
    Ok(QuantizedProfile {
        quantum: profile.quantum,
        minweight: finish_minweight(new_weights, profile, f, c),
        cap: profile.cap,
    })
}

/// Shared finishing pass after a class convolution. Entries mean "minimum
/// weight reaching profit at least k quanta", so three steps remain: the
/// top entry saturates (overshooting the grid with j+1 copies still
/// certifies reaching the cap), values past the feasibility threshold
/// clamp to BIG, and a backward suffix-min pass restores monotone closure
/// (a heavier prefix never beats a lighter one at lower profit).
fn finish_minweight(
    mut new_weights: Vec<f64>,
    profile: &QuantizedProfile,
    f: &UniformFunction,
    c: usize,
) -> Vec<f64> {
    let last = new_weights.len() - 1;
    for (j, &w) in f.cumweights.iter().enumerate() {
        let used = c * (j + 1);
        let idx = if used > last { 0 } else { last - used };
        let v = profile.minweight[idx] + w;
        if v < new_weights[last] {
            new_weights[last] = v;
        }
    }
    for w in new_weights.iter_mut() {
        if *w >= BIG_THRESHOLD {
            *w = BIG;
        }
    }
    for k in (0..last).rev() {
        if new_weights[k + 1] < new_weights[k] {
            new_weights[k] = new_weights[k + 1];
        }
    }
    new_weights
}

/// Reference convolution for `add_uniform` (double loop).
pub fn add_uniform_brute(profile: &QuantizedProfile, f: &UniformFunction) -> Result<QuantizedProfile> {
    let ratio = f.p / profile.quantum;
    let c = match snap_to_integer(ratio, REL_TOL) {
        Some(c) if c >= 1 => c as usize,
        _ => return Err(Error::Contract("profit not a quantum multiple".into())),
    };
    let len = profile.minweight.len();
    let mut out = profile.minweight.clone();
    for k in 0..len {
        for j in 1..=f.cumweights.len() {
            if k >= c * j {
                let v = profile.minweight[k - c * j] + f.cumweights[j - 1];
                if v < out[k] {
                    out[k] = v;
                }
            }
        }
    }
    Ok(QuantizedProfile {
        quantum: profile.quantum,
        minweight: finish_minweight(out, profile, f, c),
        cap: profile.cap,
    })
}

/// Merges uniform functions whose profits are integer multiples of members
/// of Δ ⊂ [δ, 8δ], capping values at B.
///
/// Processes the distinct used quanta in ascending order, rebasing the
/// profile grid at each switch (new[i] = old[⌈i·δ″/δ′⌉], one rounding of at
/// most δ″ ≤ 8δ per switch, at most |Δ| switches), so the result sits
/// within additive 8δ·|Δ| of min{⊕ fs, B}.
pub fn uniform_merge(
    fs: &[UniformFunction],
    delta_set: &[f64],
    delta: f64,
    b: f64,
) -> Result<StepFunction> {
    if !(delta > 0.0) || !(b > 0.0) {
        return Err(Error::Domain(format!(
            "uniform_merge needs positive delta and B, got {delta}, {b}"
        )));
    }
    let mut deltas: Vec<f64> = delta_set.to_vec();
    deltas.sort_by(f64::total_cmp);
    deltas.dedup();
    for &d in &deltas {
        if d < delta * (1.0 - REL_TOL) || d > 8.0 * delta * (1.0 + REL_TOL) {
            return Err(Error::Domain(format!(
                "Delta member {d} outside [delta, 8 delta] = [{delta}, {}]",
                8.0 * delta
            )));
        }
    }
    if fs.is_empty() {
        return Ok(StepFunction::zero());
    }
    // Assign each class the largest Δ-member dividing its profit. Profits
    // live in [1, 2] before adjustment; adjusted profits may undershoot 1 by
    // up to the caller's rounding error, so only the upper end is checked.
    //
    // Matching is two-pass: exact ratios first (the callers compute
    // adjusted profits as k * member, exact to an ulp), then near-multiples
    // within RATIO_TOL whose profit is re-snapped onto the matched member's
    // grid. The second pass exists because a profit that is an exact
    // multiple of one member can simultaneously be a near-multiple of a
    // larger one at fine quanta; without the exact pass taking priority,
    // the loose match would violate [`add_uniform`]'s exactness contract.
    let mut by_quantum: Vec<(usize, Vec<Cow<'_, UniformFunction>>)> = Vec::new();
    for f in fs {
        if !(f.p > 0.0) || f.p > 2.0 + REL_TOL {
            return Err(Error::Domain(format!("class profit {} outside (0, 2]", f.p)));
        }
        let mut chosen = None;
        for (qi, &d) in deltas.iter().enumerate().rev() {
            if let Some(k) = snap_to_integer(f.p / d, REL_TOL) {
                if k >= 1 {
                    chosen = Some((qi, Cow::Borrowed(f)));
                    break;
                }
            }
        }
        if chosen.is_none() {
            for (qi, &d) in deltas.iter().enumerate().rev() {
                if let Some(k) = snap_to_integer(f.p / d, RATIO_TOL) {
                    if k >= 1 {
                        chosen = Some((qi, Cow::Owned(f.with_profit(k as f64 * d)?)));
                        break;
                    }
                }
            }
        }
        let (qi, f) = chosen.ok_or_else(|| {
            Error::Contract(format!("class profit {} is not a Delta-multiple", f.p))
        })?;
        match by_quantum.iter_mut().find(|(q, _)| *q == qi) {
            Some((_, list)) => list.push(f),
            None => by_quantum.push((qi, vec![f])),
        }
    }
    by_quantum.sort_by_key(|(qi, _)| *qi);
    let mut profile = QuantizedProfile::new(deltas[by_quantum[0].0], b)?;
    let mut first = true;
    for (qi, list) in &by_quantum {
        let q_new = deltas[*qi];
        if !first {
            profile = rebase(&profile, q_new, b);
        }
        first = false;
        for f in list {
            profile = add_uniform(&profile, f)?;
        }
    }
    Ok(profile.to_step_function())
}

/// Moves a profile onto a coarser quantum grid: the entry for value i·δ″
/// takes the old entry for the smallest old grid value ≥ i·δ″.
fn rebase(profile: &QuantizedProfile, q_new: f64, b: f64) -> QuantizedProfile {
    let steps = grid_len(b, q_new);
    let mut minweight = vec![BIG; steps + 1];
    minweight[0] = 0.0;
    let old_len = profile.minweight.len();
    for (i, slot) in minweight.iter_mut().enumerate().skip(1) {
        let pos = i as f64 * q_new / profile.quantum;
        let j = match snap_to_integer(pos, REL_TOL) {
            Some(j) => j as usize,
            None => pos.ceil() as usize,
        };
        if j < old_len {
            *slot = profile.minweight[j];
        }
    }
    QuantizedProfile {
        quantum: q_new,
        minweight,
        cap: b,
    }
}

/// Rounds class profits down to multiples of 1/⌈1/ε⌉ and merges on that
/// single quantum: approximates min{⊕ fs, B} with factor 1 + ε (the profit
/// rounding; the single-quantum merge itself adds at most one grid
/// rounding of ≤ ε, i.e. additive 8δ|Δ| with |Δ| = 1).
pub fn naive_capped(fs: &[UniformFunction], b: f64, eps: f64) -> Result<StepFunction> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::Domain(format!("eps = {eps}, expected (0, 1]")));
    }
    if fs.is_empty() {
        return Ok(StepFunction::zero());
    }
    let k = (1.0 / eps).ceil();
    let quantum = 1.0 / k;
    let mut rounded = Vec::with_capacity(fs.len());
    for f in fs {
        let scaled = f.p * k;
        let c = match snap_to_integer(scaled, REL_TOL) {
            Some(c) => c,
            None => scaled.floor() as i64,
        };
        rounded.push(f.with_profit(c as f64 * quantum)?);
    }
    uniform_merge(&rounded, &[quantum], quantum, b)
}

/// The banded variant of [`naive_capped`]: for large caps it routes the
/// bulk of the work through a number-theoretic base set Δ (one tower
/// level, δ1 = ε·B^0.01), merging everything on Δ-multiples with additive
/// error e = 8δ1|Δ| and patching values below B_L = e/ε with a direct
/// naive merge. Requires B ≥ 1; for B below a documented constant (or ε
/// too large for a valid tower) it degenerates to [`naive_capped`].
pub fn fast_naive_capped(fs: &[UniformFunction], b: f64, eps: f64) -> Result<StepFunction> {
    if !(b >= 1.0) {
        return Err(Error::Domain(format!("cap B = {b}, expected B >= 1")));
    }
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::Domain(format!("eps = {eps}, expected (0, 1]")));
    }
    if fs.is_empty() {
        return Ok(StepFunction::zero());
    }
    if b < FAST_NAIVE_MIN_B {
        return naive_capped(fs, b, eps);
    }
    let delta1 = eps * b.powf(0.01);
    let params = match TowerParams::new(vec![delta1], eps) {
        Ok(p) => p,
        Err(_) => return naive_capped(fs, b, eps), // ε too large for a valid tower
    };
    let base = construct_base_set(eps, &params)?;
    let multiples = sorted_multiples(&base, 1.0 - 2.0 * eps, 2.0);
    let mut adjusted = Vec::with_capacity(fs.len());
    for f in fs {
        let m = largest_multiple_at_most(&multiples, f.p).ok_or_else(|| {
            Error::Construction(format!("no base-set multiple below profit {}", f.p))
        })?;
        if m.value < f.p - 2.0 * eps * (1.0 + RATIO_TOL) {
            return Err(Error::Construction(format!(
                "base set misses profit {} (closest multiple {})",
                f.p, m.value
            )));
        }
        adjusted.push(f.with_profit(m.value)?);
    }
    let f_h = uniform_merge(&adjusted, &base, delta1, b)?;
    let e = 8.0 * delta1 * base.len() as f64;
    let b_l = (e / eps).min(b);
    let f_l = naive_capped(fs, b_l, eps)?;
    Ok(crate::stepfn::pointwise_max(&f_l, &f_h))
}

/// A value k·y with its generator y and multiplicity k.
#[derive(Debug, Clone, Copy)]
pub struct Multiple {
    pub value: f64,
    pub generator: f64,
    pub multiplicity: i64,
}

/// All integer multiples of base-set members inside [lo, hi], sorted by
/// value; duplicates (within tolerance) keep the smallest generator.
pub fn sorted_multiples(base: &[f64], lo: f64, hi: f64) -> Vec<Multiple> {
    let lo = lo.max(0.0);
    let mut out = Vec::new();
    for &y in base {
        let k_lo = ((lo / y) - RATIO_TOL).ceil().max(1.0) as i64;
        let k_hi = ((hi / y) + RATIO_TOL).floor() as i64;
        for k in k_lo..=k_hi {
            let v = k as f64 * y;
            if v >= lo - RATIO_TOL && v <= hi * (1.0 + RATIO_TOL) {
                out.push(Multiple {
                    value: v,
                    generator: y,
                    multiplicity: k,
                });
            }
        }
    }
    out.sort_by(|a, b| {
        a.value
            .total_cmp(&b.value)
            .then(a.generator.total_cmp(&b.generator))
    });
    let mut dedup: Vec<Multiple> = Vec::with_capacity(out.len());
    for m in out {
        match dedup.last() {
            Some(last) if (m.value - last.value).abs() <= REL_TOL * m.value.max(1.0) => {}
            _ => dedup.push(m),
        }
    }
    dedup
}

/// Largest tabulated multiple with value ≤ p (within tolerance).
pub fn largest_multiple_at_most(multiples: &[Multiple], p: f64) -> Option<Multiple> {
    let idx = multiples.partition_point(|m| m.value <= p * (1.0 + REL_TOL));
    if idx == 0 {
        None
    } else {
        Some(multiples[idx - 1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{brute_maxplus, brute_row_maxima};
    use crate::stepfn::exact_maxplus;

    fn uf(p: f64, ws: &[f64]) -> UniformFunction {
        UniformFunction::new(p, ws.to_vec()).unwrap()
    }

    #[test]
    fn build_groups_equal_profits() {
        let items = vec![
            Item { weight: 2.0, profit: 1.0 },
            Item { weight: 1.0, profit: 1.0 },
        ];
        let fs = build_uniform_functions(&items, 0.25).unwrap();
        assert_eq!(fs.len(), 1);
        assert_eq!(fs[0].profit(), 1.0);
        assert_eq!(fs[0].cumweights(), &[1.0, 3.0]);
    }

    #[test]
    fn build_rounds_down_to_quantum() {
        let items = vec![Item { weight: 1.0, profit: 1.26 }];
        let fs = build_uniform_functions(&items, 0.25).unwrap();
        assert_eq!(fs.len(), 1);
        assert!((fs[0].profit() - 1.25).abs() < 1e-12);
        assert_eq!(fs[0].cumweights(), &[1.0]);
    }

    #[test]
    fn build_rejects_out_of_band() {
        let items = vec![Item { weight: 1.0, profit: 2.5 }];
        assert!(build_uniform_functions(&items, 0.25).is_err());
        assert!(build_uniform_functions(&[], 0.25).unwrap().is_empty());
    }

    #[test]
    fn build_quantum_count_bound() {
        let eps = 0.3;
        let mut items = Vec::new();
        for i in 0..200 {
            items.push(Item {
                weight: 1.0,
                profit: 1.0 + (i as f64 / 199.0),
            });
        }
        let fs = build_uniform_functions(&items, eps).unwrap();
        assert!(fs.len() <= 1 + (1.0 / eps).ceil() as usize);
    }

    #[test]
    fn smawk_trivia() {
        assert!(smawk_argmax(0, 5, &|_, _| 0.0).is_empty());
        assert_eq!(smawk_argmax(1, 1, &|_, _| 3.0), vec![0]);
        let diag = smawk_argmax(5, 5, &|i, j| {
            let d = j as f64 - i as f64;
            -(d * d)
        });
        assert_eq!(diag, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn smawk_matches_brute_on_random_tm() {
        // Totally monotone matrices: concave row shape plus a Monge
        // perturbation A[i][j] = concave(j) + i*j*slope with slope >= 0
        // favoring larger j as i grows.
        let mut state = 42u64;
        let mut next = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for trial in 0..300 {
            let rows = 1 + (next() * 20.0) as usize;
            let cols = 1 + (next() * 20.0) as usize;
            let peak = next() * cols as f64;
            let slope = next() * 0.2;
            let curve = 0.5 + next();
            let value = move |i: usize, j: usize| -> f64 {
                let d = j as f64 - peak;
                -(d * d) * curve + slope * (i as f64) * (j as f64)
            };
            let fast = smawk_argmax(rows, cols, &value);
            let brute = brute_row_maxima(rows, cols, &value);
            assert_eq!(fast, brute, "trial {trial} ({rows}x{cols})");
        }
    }

    #[test]
    fn smawk_tie_break_matches_brute() {
        // Constant matrix: every column ties; both must pick column 0.
        let fast = smawk_argmax(4, 6, &|_, _| 1.0);
        let brute = brute_row_maxima(4, 6, &|_, _| 1.0);
        assert_eq!(fast, brute);
        assert_eq!(fast, vec![0, 0, 0, 0]);
    }

    #[test]
    fn add_uniform_direct_example() {
        let f = uf(1.0, &[1.0, 1.0, 1.0]);
        assert_eq!(f.cumweights(), &[1.0, 2.0, 3.0]);
        let profile = QuantizedProfile::new(1.0, 3.0).unwrap();
        let out = add_uniform(&profile, &f).unwrap();
        assert_eq!(out.minweight, vec![0.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn add_uniform_multiple_quantum() {
        let profile = QuantizedProfile::new(0.5, 3.0).unwrap();
        let f = uf(1.0, &[2.0]); // c = 2
        let out = add_uniform(&profile, &f).unwrap();
        assert_eq!(out.minweight[0], 0.0);
        assert!(out.minweight[1] < BIG_THRESHOLD); // profit 0.5 reachable via the 1.0-profit item
        assert_eq!(out.minweight[2], 2.0);
        assert!(out.minweight[3] >= BIG_THRESHOLD);
        let bad = uf(0.75, &[1.0]);
        assert!(add_uniform(&profile, &bad).is_err());
    }

    #[test]
    fn add_uniform_matches_brute() {
        let mut state = 7u64;
        let mut next = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for trial in 0..100 {
            let quantum = 0.25;
            let cap = 2.0 + next() * 48.0; // up to 200 entries
            let mut profile = QuantizedProfile::new(quantum, cap).unwrap();
            // Seed the profile with a couple of classes first.
            for _ in 0..2 {
                let c = 1 + (next() * 3.0) as i64;
                let n = 1 + (next() * 4.0) as usize;
                let ws: Vec<f64> = (0..n).map(|_| 0.1 + next() * 3.0).collect();
                let f = UniformFunction::new(c as f64 * quantum, ws).unwrap();
                profile = add_uniform(&profile, &f).unwrap();
            }
            let c = 1 + (next() * 4.0) as i64;
            let n = 1 + (next() * 6.0) as usize;
            let ws: Vec<f64> = (0..n).map(|_| 0.1 + next() * 3.0).collect();
            let f = UniformFunction::new(c as f64 * quantum, ws).unwrap();
            let fast = add_uniform(&profile, &f).unwrap();
            let brute = add_uniform_brute(&profile, &f).unwrap();
            for (k, (a, b)) in fast.minweight.iter().zip(&brute.minweight).enumerate() {
                assert!(
                    (a - b).abs() <= 1e-9 * a.abs().max(1.0),
                    "trial {trial} entry {k}: {a} vs {b}"
                );
            }
        }
    }

    #[test]
    fn uniform_merge_single_quantum_error_bound() {
        let fs = vec![uf(1.0, &[1.0, 2.0]), uf(1.0, &[1.5])];
        let delta = 1.0;
        let merged = uniform_merge(&fs, &[delta], delta, 10.0).unwrap();
        let exact = fs
            .iter()
            .fold(crate::stepfn::StepFunction::zero(), |acc, f| {
                exact_maxplus(&acc, &f.to_step_function())
            });
        for xi in 0..60 {
            let x = xi as f64 * 0.1;
            let lo = merged.eval(x).unwrap();
            let hi = exact.eval(x).unwrap().min(10.0);
            assert!(lo <= hi + 1e-9);
            assert!(lo >= hi - 8.0 * delta - 1e-9);
        }
    }

    #[test]
    fn uniform_merge_additive_bound_m8() {
        let mut state = 11u64;
        let mut next = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for trial in 0..30 {
            let delta: f64 = 0.05;
            // Δ = {δ, 2δ, 4δ} ⊂ [δ, 8δ]; profits are Δ-multiples in [1, 2].
            let delta_set = [delta, 2.0 * delta, 4.0 * delta];
            let m = 2 + (next() * 6.0) as usize;
            let mut fs = Vec::new();
            for _ in 0..m {
                let d = delta_set[(next() * 3.0) as usize];
                let k_max = (2.0 / d).floor() as i64;
                let k_min = (1.0 / d).ceil() as i64;
                let k = k_min + (next() * (k_max - k_min + 1) as f64) as i64;
                let n = 1 + (next() * 3.0) as usize;
                let ws: Vec<f64> = (0..n).map(|_| 0.2 + next() * 2.0).collect();
                fs.push(UniformFunction::new(k as f64 * d, ws).unwrap());
            }
            let b = 4.0 + next() * 8.0;
            let merged = uniform_merge(&fs, &delta_set, delta, b).unwrap();
            let exact = fs.iter().fold(crate::stepfn::StepFunction::zero(), |acc, f| {
                exact_maxplus(&acc, &f.to_step_function())
            });
            let bound = 8.0 * delta * delta_set.len() as f64;
            for xi in 0..1000 {
                let x = xi as f64 * 0.02;
                let lo = merged.eval(x).unwrap();
                let hi = exact.eval(x).unwrap().min(b);
                assert!(lo <= hi + 1e-9, "trial {trial} x {x}: {lo} > {hi}");
                assert!(
                    lo >= hi - bound - 1e-9,
                    "trial {trial} x {x}: {lo} < {hi} - {bound}"
                );
            }
        }
    }

    #[test]
    fn uniform_merge_rejects_non_multiple() {
        let fs = vec![uf(1.37, &[1.0])];
        assert!(uniform_merge(&fs, &[0.25], 0.25, 5.0).is_err());
        assert!(uniform_merge(&[], &[0.25], 0.25, 5.0)
            .unwrap()
            .is_zero());
    }

    #[test]
    fn uniform_merge_prefers_exact_member_over_near_multiple() {
        // p is an exact multiple of the smaller member but only a 3e-10
        // near-multiple of the larger one. The larger member is scanned
        // first, so without the exact-match pass the merge would pick it
        // and then fail add_uniform's exactness contract.
        let d1 = 0.1;
        let p = 17.0 * d1;
        let d2 = p / (12.0 * (1.0 + 3e-10));
        assert!(snap_to_integer(p / d2, REL_TOL).is_none());
        assert!(snap_to_integer(p / d2, RATIO_TOL).is_some());
        let fs = vec![uf(p, &[2.0])];
        let out = uniform_merge(&fs, &[d1, d2], d1, 4.0).unwrap();
        assert_eq!(out.eval(2.0).unwrap(), p);
        // A genuine near-multiple with no exact member still merges, with
        // its profit re-snapped onto the matched member's grid.
        let lone = vec![uf(12.0 * d2 * (1.0 + 2e-10), &[1.0])];
        let out = uniform_merge(&lone, &[d2], d2, 4.0).unwrap();
        assert_eq!(out.eval(1.0).unwrap(), 12.0 * d2);
    }

    #[test]
    fn naive_capped_small_cap() {
        // B smaller than every profit: only profit 0 fits under the cap,
        // so the merged function is the first achievable profit capped at B.
        let fs = vec![uf(1.5, &[2.0])];
        let out = naive_capped(&fs, 0.75, 0.25).unwrap();
        // Grid is multiples of 0.25 capped at 0.75: profit 1.5 rounds to
        // 1.5, cap truncates to 0.75 at weight 2.
        assert_eq!(out.max_value(), 0.75);
        assert_eq!(out.eval(2.0).unwrap(), 0.75);
        assert_eq!(out.eval(1.9).unwrap(), 0.0);
    }

    #[test]
    fn naive_capped_factor_bound() {
        let fs = vec![
            uf(1.0, &[1.0, 2.0]),
            uf(1.5, &[1.0]),
            uf(1.25, &[0.5, 3.0]),
        ];
        let eps = 0.125;
        let b = 5.0;
        let out = naive_capped(&fs, b, eps).unwrap();
        let exact = fs.iter().fold(crate::stepfn::StepFunction::zero(), |acc, f| {
            exact_maxplus(&acc, &f.to_step_function())
        });
        for xi in 0..80 {
            let x = xi as f64 * 0.1;
            let lo = out.eval(x).unwrap();
            let hi = exact.eval(x).unwrap().min(b);
            assert!(lo <= hi + 1e-9);
            // One eps-rounding of profits plus one grid quantization.
            assert!(lo >= hi / (1.0 + eps) - eps - 1e-9, "x={x}: {lo} vs {hi}");
        }
    }

    #[test]
    fn fast_naive_small_b_degenerates() {
        let fs = vec![uf(1.0, &[1.0]), uf(1.5, &[2.0])];
        let fast = fast_naive_capped(&fs, 1.0, 0.25).unwrap();
        let naive = naive_capped(&fs, 1.0, 0.25).unwrap();
        assert_eq!(fast, naive);
        assert!(fast_naive_capped(&fs, 0.5, 0.25).is_err()); // B < 1
    }

    #[test]
    fn fast_naive_full_route_vs_oracle() {
        // B ≥ 4096 exercises the base-set route; small eps keeps the
        // tower valid. Values stay far below the cap, so the comparison is
        // against the uncapped exact fold.
        let eps = 0.01;
        let fs = vec![
            uf(1.0, &[1.0, 2.0, 4.0]),
            uf(1.5, &[1.0, 1.0]),
            uf(1.12, &[3.0]),
        ];
        let out = fast_naive_capped(&fs, 5000.0, eps).unwrap();
        let naive = naive_capped(&fs, 5000.0, eps).unwrap();
        let exact = fs.iter().fold(crate::stepfn::StepFunction::zero(), |acc, f| {
            exact_maxplus(&acc, &f.to_step_function())
        });
        // Cross-check: fast ≥ naive − e additively, and the documented
        // overall factor 1 + 5ε (2ε adjust + merge roundings) vs exact.
        let delta1 = eps * 5000.0f64.powf(0.01);
        for xi in 0..130 {
            let x = xi as f64 * 0.1;
            let f_val = out.eval(x).unwrap();
            let n_val = naive.eval(x).unwrap();
            let e_val = exact.eval(x).unwrap();
            assert!(f_val <= e_val + 1e-9, "soundness at {x}");
            assert!(
                f_val >= e_val / (1.0 + 5.0 * eps) - 8.0 * delta1 - 1e-9,
                "accuracy at {x}: {f_val} vs {e_val}"
            );
            let _ = n_val;
        }
    }

    #[test]
    fn quantized_profile_roundtrip() {
        let mut profile = QuantizedProfile::new(0.5, 2.0).unwrap();
        profile.minweight = vec![0.0, 1.0, 1.0, 4.0, BIG];
        let f = profile.to_step_function();
        assert_eq!(f.points(), &[(1.0, 1.0), (4.0, 1.5)]);
    }

    #[test]
    fn brute_maxplus_and_uniform_consistency() {
        let f = uf(1.0, &[1.0, 3.0]);
        let s = f.to_step_function();
        let doubled = exact_maxplus(&s, &s);
        assert_eq!(doubled, brute_maxplus(&s, &s));
    }
}
