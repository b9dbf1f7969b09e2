//! The end-to-end approximation pipeline.
//!
//! `solve` guarantees SOL ≤ OPT ≤ (1+ε)·SOL by splitting the user ε into
//! [`K_STAGE`] atomic units ε̂ = ln(1+ε)/K_STAGE. Every lossy stage is
//! charged an integer number k of units and implemented so its
//! multiplicative factor is at most e^{k·ε̂}; the factors multiply along
//! any root-to-leaf path of the pipeline, and the worst path sums to
//! exactly K_STAGE units, so the end-to-end factor is at most
//! e^{K_STAGE·ε̂} = 1 + ε with no slack lost to inequality chaining.
//!
//! Stage charges (k units each), with the inequality that justifies them
//! (all valid for ε̂ ≤ ln(1.5)/26 ≈ 0.0156, enforced via ε ≤ 1/2):
//!
//!   preprocess        k=2   drops ≤ ε̂·OPT of profit: 1/(1−x) ≤ e^{2x}
//!   L profit rounding k=1   powers of 1+ε̂: 1+x ≤ e^x
//!   capped/small merge k=15  multilevel::factor_bound ≤ e^{15x}
//!                            (adjust 1/(1−2x) ≤ e^{3x}, band
//!                            1/(1−8x) ≤ e^{9x}, group merge e^{3x})
//!   L band cap        k=3   additive 2 at values ≥ B = ⌈1/ε̂⌉:
//!                            1/(1−2x) ≤ e^{3x}
//!   M unit rounding   k=1   powers of 1+ε̂
//!   M subset profiles k=2   factor 1+2ε̂ ≤ e^{2x}
//!   M class merge     k=3   merge_dnc at eps = e^{3x}−1 exactly
//!   combine H/M/L     k=2   merge_dnc at eps = e^{2x}−1 exactly
//!   octave merge      k=3   merge_dnc at eps = e^{3x}−1 exactly
//!
//! Worst path (an L item): 2+1+15+3+2+3 = 26 = K_STAGE. The H path sums
//! to 22, the M path to 13, the small-n path to 20. The budget identity
//! e^{26·ε̂} = 1+ε is exact by the definition of ε̂.

use crate::error::{Error, Result};
use crate::instance::{clamp_eps, group_by_profit, preprocess, Instance, Item};
use crate::multilevel::{approx_capped, approx_items_small};
use crate::oracle::{brute_force_profile, brute_maxplus};
use crate::smawk::UniformFunction;
use crate::stepfn::{merge_dnc, pointwise_max, StepFunction};
use crate::subsetsum::subset_sum_profile;
use crate::tol::{approx_eq, RATIO_TOL, REL_TOL};

/// Number of atomic ε̂-units the user ε is split into; see the module doc
/// for the per-stage ledger that sums to this.
pub const K_STAGE: f64 = 26.0;

/// Internal per-stage unit: ε̂ = ln(1+ε)/K_STAGE, so that e^{K_STAGE·ε̂}
/// is exactly 1+ε.
pub fn internal_eps(eps: f64) -> f64 {
    eps.ln_1p() / K_STAGE
}

/// Worst-case factor of [`solve_unit_range`] as a function of its (raw,
/// already internal) ε, the product of the L path's stage bounds. Finite
/// for ε < 1/8; for ε ≤ 0.0156 it is at most e^{21ε}.
pub fn unit_range_factor(eps: f64) -> f64 {
    (1.0 + eps)
        * crate::multilevel::factor_bound(eps)
        * (1.0 / (1.0 - 2.0 * eps))
        * (2.0 * eps).exp()
}

/// Solver output: the approximate profit profile, its value at the
/// capacity, and how ε was handled.
#[derive(Debug, Clone)]
pub struct Solution {
    /// f̃(W), the approximate optimum.
    pub value: f64,
    /// The whole approximate profit function (domain truncated at W).
    pub profile: StepFunction,
    /// The per-stage ε̂ actually used.
    pub eps_internal: f64,
    /// Whether the requested ε was clamped down to 1/2.
    pub clamped: bool,
}

/// The H/M/L split: H holds the top-B items by unit profit, M the
/// remaining items with unit profit within a (1−α) factor of H's worst,
/// L everything else (strictly below the gap).
#[derive(Debug, Clone)]
pub struct TripartiteSplit {
    pub h: Vec<Item>,
    pub m: Vec<Item>,
    pub l: Vec<Item>,
    /// Minimum unit profit inside H.
    pub q: f64,
    pub alpha: f64,
    /// B = ⌈1/ε⌉.
    pub b: usize,
}

fn check_unit_profits(items: &[Item]) -> Result<()> {
    for it in items {
        if !(it.profit >= 1.0 - RATIO_TOL && it.profit <= 2.0 + RATIO_TOL) {
            return Err(Error::Domain(format!(
                "profit {} outside the unit range [1, 2]",
                it.profit
            )));
        }
        if !(it.weight > 0.0) || !it.weight.is_finite() {
            return Err(Error::Domain(format!("weight {} not positive", it.weight)));
        }
    }
    Ok(())
}

/// Prefix profile of the items in nonincreasing unit-profit order (ties by
/// input index): breakpoint k sits at the k-th prefix weight with the k-th
/// prefix profit. Undershoots the true profile by at most max_i p_i ≤ 2.
pub fn greedy_sorted_profile(items: &[Item]) -> Result<StepFunction> {
    check_unit_profits(items)?;
    if items.is_empty() {
        return Ok(StepFunction::zero());
    }
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by(|&a, &b| {
        let ua = items[a].profit / items[a].weight;
        let ub = items[b].profit / items[b].weight;
        ub.total_cmp(&ua).then(a.cmp(&b))
    });
    let mut pts = Vec::with_capacity(items.len());
    let mut w = 0.0;
    let mut p = 0.0;
    for &i in &order {
        w += items[i].weight;
        p += items[i].profit;
        pts.push((w, p));
    }
    StepFunction::from_points(pts)
}

/// Splits items into the tripartite H/M/L structure at gap α and
/// B = ⌈1/ε⌉. Deterministic: sorting ties break by input index.
pub fn split_hml(items: &[Item], eps: f64, alpha: f64) -> Result<TripartiteSplit> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::Domain(format!("eps = {eps}, expected (0, 1]")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha = {alpha}, expected (0, 1)")));
    }
    check_unit_profits(items)?;
    let b = (1.0 / eps).ceil() as usize;
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by(|&a, &b| {
        let ua = items[a].profit / items[a].weight;
        let ub = items[b].profit / items[b].weight;
        ub.total_cmp(&ua).then(a.cmp(&b))
    });
    let hsize = b.min(items.len());
    let mut h: Vec<Item> = Vec::with_capacity(hsize);
    let mut hidx: Vec<usize> = order[..hsize].to_vec();
    hidx.sort_unstable();
    for &i in &hidx {
        h.push(items[i]);
    }
    let q = order[..hsize]
        .iter()
        .map(|&i| items[i].profit / items[i].weight)
        .fold(f64::INFINITY, f64::min);
    let mut m = Vec::new();
    let mut l = Vec::new();
    let mut rest: Vec<usize> = order[hsize..].to_vec();
    rest.sort_unstable();
    for &i in &rest {
        let u = items[i].profit / items[i].weight;
        if u >= q * (1.0 - alpha) * (1.0 - REL_TOL) {
            m.push(items[i]);
        } else {
            l.push(items[i]);
        }
    }
    Ok(TripartiteSplit { h, m, l, q, alpha, b })
}

/// Brute-force verification utility for the greedy lemma: with the unit
/// profit gap max_L p/w ≤ q(1−α), capping f_L at 2/α must not change
/// f_H ⊕ f_L anywhere at or below W_H = Σ_H w. Returns whether equality
/// held at every queried x ≤ W_H. Sizes are capped, it enumerates subsets.
pub fn greedy_lemma_check(h: &[Item], l: &[Item], alpha: f64, xs: &[f64]) -> Result<bool> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha = {alpha}, expected (0, 1)")));
    }
    check_unit_profits(h)?;
    check_unit_profits(l)?;
    if h.len() + l.len() > 20 {
        return Err(Error::OracleRefused(format!(
            "{} items exceed the brute-force limit of 20",
            h.len() + l.len()
        )));
    }
    if h.is_empty() {
        return Err(Error::Domain("H must be nonempty (it defines q)".into()));
    }
    let q = h
        .iter()
        .map(|it| it.profit / it.weight)
        .fold(f64::INFINITY, f64::min);
    let gap = q * (1.0 - alpha);
    for it in l {
        let u = it.profit / it.weight;
        if u > gap * (1.0 + RATIO_TOL) {
            return Err(Error::Contract(format!(
                "gap condition violated: L unit profit {u} exceeds q(1-alpha) = {gap}"
            )));
        }
    }
    let wh: f64 = h.iter().map(|it| it.weight).sum();
    let fh = brute_force_profile(h)?;
    let fl = brute_force_profile(l)?;
    let fl_capped = fl.cap(2.0 / alpha)?;
    let lhs = brute_maxplus(&fh, &fl);
    let rhs = brute_maxplus(&fh, &fl_capped);
    for &x in xs {
        if x > wh * (1.0 + RATIO_TOL) {
            continue;
        }
        let a = lhs.eval(x.max(0.0))?;
        let b = rhs.eval(x.max(0.0))?;
        if !approx_eq(a, b) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// One per-item class per item.
fn item_classes(items: &[Item]) -> Result<Vec<UniformFunction>> {
    items
        .iter()
        .map(|it| UniformFunction::new(it.profit, vec![it.weight]))
        .collect()
}

/// Largest power of 1+eps at or below v (integer exponents of either
/// sign), snapping exact grid points within relative tolerance.
fn round_down_power(v: f64, eps: f64) -> f64 {
    let step = eps.ln_1p();
    let i = v.ln() / step;
    let rounded = i.round();
    let i = if (i - rounded).abs() <= 1e-9 * i.abs().max(1.0) {
        rounded
    } else {
        i.floor()
    };
    (1.0 + eps).powi(i as i32)
}

/// Classes of equal rounded profit from raw items; BTreeMap keying by the
/// integer exponent keeps construction order deterministic.
fn rounded_classes(items: &[Item], eps: f64) -> Result<Vec<UniformFunction>> {
    use std::collections::BTreeMap;
    let mut byexp: BTreeMap<i64, (f64, Vec<f64>)> = BTreeMap::new();
    for it in items {
        let p = round_down_power(it.profit, eps);
        let step = eps.ln_1p();
        let e = (p.ln() / step).round() as i64;
        byexp.entry(e).or_insert_with(|| (p, Vec::new())).1.push(it.weight);
    }
    byexp
        .into_values()
        .map(|(p, ws)| UniformFunction::new(p, ws))
        .collect()
}

fn range_merge(parts: &[StepFunction], eps_units: f64, eps: f64) -> Result<StepFunction> {
    let live: Vec<&StepFunction> = parts.iter().filter(|f| !f.is_zero()).collect();
    if live.is_empty() {
        return Ok(StepFunction::zero());
    }
    if live.len() == 1 {
        return Ok(live[0].clone());
    }
    let lo = live
        .iter()
        .filter_map(|f| f.min_positive_value())
        .fold(f64::INFINITY, f64::min);
    let hi = live.iter().map(|f| f.max_value()).fold(0.0, f64::max);
    merge_dnc(parts, (eps_units * eps).exp_m1(), lo, hi)
}

/// Approximates the full profit profile of items with profits in [1, 2]
/// within factor [`unit_range_factor`]`(eps)`.
///
/// Below B = ⌈1/ε⌉ items this is one small-m merge. Otherwise the H/M/L
/// split at α = ε^(3/4): H merges exactly as a small-m instance, each
/// unit-profit class of M becomes a subset-sum profile scaled by its
/// (rounded-down) unit profit, L is rounded onto the 1+ε profit grid and
/// capped at 2/α, where the greedy gap argument makes the cap lossless
/// for the x-range that matters. The three parts merge, are capped at B,
/// and the greedy prefix profile (within additive 2 ≤ 2εB of exact)
/// covers everything above the cap via pointwise max.
pub fn solve_unit_range(items: &[Item], eps: f64) -> Result<StepFunction> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("eps = {eps}, expected (0, 1)")));
    }
    check_unit_profits(items)?;
    if items.is_empty() {
        return Ok(StepFunction::zero());
    }
    let b = (1.0 / eps).ceil();
    if (items.len() as f64) < b {
        return approx_items_small(&item_classes(items)?, eps);
    }
    let alpha = eps.powf(0.75);
    let split = split_hml(items, eps, alpha)?;

    let fh = approx_items_small(&item_classes(&split.h)?, eps)?;

    let fm = if split.m.is_empty() {
        StepFunction::zero()
    } else {
        use std::collections::BTreeMap;
        let mut classes: BTreeMap<i64, (f64, Vec<f64>)> = BTreeMap::new();
        let step = eps.ln_1p();
        for it in &split.m {
            let u = round_down_power(it.profit / it.weight, eps);
            let e = (u.ln() / step).round() as i64;
            classes.entry(e).or_insert_with(|| (u, Vec::new())).1.push(it.weight);
        }
        let mut parts = Vec::with_capacity(classes.len());
        for (u, ws) in classes.into_values() {
            let wi: Vec<Item> = ws
                .iter()
                .map(|&w| Item { weight: w, profit: w })
                .collect();
            parts.push(subset_sum_profile(&wi, eps)?.scale_values(u)?);
        }
        range_merge(&parts, 3.0, eps)?
    };

    let fl = if split.l.is_empty() {
        StepFunction::zero()
    } else {
        approx_capped(&rounded_classes(&split.l, eps)?, 2.0 / alpha, eps)?
    };

    let combined = range_merge(&[fh, fm, fl], 2.0, eps)?.cap(b)?;
    let greedy = greedy_sorted_profile(items)?;
    Ok(pointwise_max(&combined, &greedy))
}

/// Core pipeline at a fixed internal ε̂: preprocess, split into profit
/// octaves, solve each octave in unit range, scale back, merge.
fn pipeline(inst: &Instance, eps_hat: f64) -> Result<StepFunction> {
    let pre = preprocess(inst, eps_hat)?;
    if pre.items.is_empty() {
        return Ok(StepFunction::zero());
    }
    let mut parts = Vec::new();
    for group in group_by_profit(&pre) {
        let f = solve_unit_range(&group.items, eps_hat)?
            .scale_values(group.scale)?
            .truncate_domain(inst.capacity);
        parts.push(f);
    }
    // The cross-octave max-plus merge sums breakpoint weights, so it can
    // recreate breakpoints past W; cut back to the documented domain.
    Ok(range_merge(&parts, 3.0, eps_hat)?.truncate_domain(inst.capacity))
}

/// The (1+ε)-approximation: SOL ≤ OPT ≤ (1+ε)·SOL. ε above 1/2 is
/// clamped (flagged in the result); the stage budget in the module doc
/// turns the clamped ε into the internal ε̂.
pub fn solve(inst: &Instance, eps: f64) -> Result<Solution> {
    let (eps_user, clamped) = clamp_eps(eps)?;
    let eps_hat = internal_eps(eps_user);
    let profile = pipeline(inst, eps_hat)?;
    let value = profile.eval(inst.capacity)?;
    Ok(Solution {
        value,
        profile,
        eps_internal: eps_hat,
        clamped,
    })
}

/// Like [`solve`] but with the per-stage ε̂ given directly (the CLI
/// exposes this for experimentation). The end-to-end factor is then
/// e^{26·ε̂} rather than a user-facing 1+ε. ε̂ is capped where the stage
/// inequalities are proven.
pub fn solve_with_internal_eps(inst: &Instance, eps_hat: f64) -> Result<Solution> {
    if !(eps_hat > 0.0 && eps_hat <= 0.02) {
        return Err(Error::Domain(format!(
            "internal eps = {eps_hat}, expected (0, 0.02]"
        )));
    }
    let profile = pipeline(inst, eps_hat)?;
    let value = profile.eval(inst.capacity)?;
    Ok(Solution {
        value,
        profile,
        eps_internal: eps_hat,
        clamped: false,
    })
}

/// Text dump of every tower and partition the pipeline would construct
/// for this instance at this ε, per profit octave (the small-m merge for
/// octaves under ⌈1/ε̂⌉ items, the H and L stages otherwise). Follows the
/// same preprocess and octave-grouping steps as [`solve`], so the dumped
/// supports are the ones a solve call actually uses.
pub fn describe_towers(inst: &Instance, eps: f64) -> Result<String> {
    use crate::multilevel::{describe_towers as describe_capped, describe_towers_small};
    use std::fmt::Write as _;
    let (eps_user, _) = clamp_eps(eps)?;
    let eps_hat = internal_eps(eps_user);
    let pre = preprocess(inst, eps_hat)?;
    let mut out = String::new();
    let _ = writeln!(out, "internal eps: {eps_hat:.9}");
    if pre.items.is_empty() {
        out.push_str("no items survive preprocessing\n");
        return Ok(out);
    }
    let b = (1.0 / eps_hat).ceil();
    for group in group_by_profit(&pre) {
        let _ = writeln!(
            out,
            "octave scale {} ({} items):",
            group.scale,
            group.items.len()
        );
        if (group.items.len() as f64) < b {
            out.push_str("path: small-m item merge\n");
            out.push_str(&describe_towers_small(&item_classes(&group.items)?, eps_hat)?);
            continue;
        }
        let alpha = eps_hat.powf(0.75);
        let split = split_hml(&group.items, eps_hat, alpha)?;
        out.push_str("path: H/M/L split; H stage:\n");
        out.push_str(&describe_towers_small(&item_classes(&split.h)?, eps_hat)?);
        if split.l.is_empty() {
            out.push_str("L stage: empty\n");
        } else {
            out.push_str("L stage:\n");
            out.push_str(&describe_capped(
                &rounded_classes(&split.l, eps_hat)?,
                2.0 / alpha,
                eps_hat,
            )?);
        }
    }
    Ok(out)
}

/// Small-n variant: skips the H/M/L machinery entirely and merges each
/// octave as per-item classes. Same guarantee (its path budget, 20 units,
/// sits under the same K_STAGE roof); cheaper when n = O(1/ε).
pub fn solve_small_n(inst: &Instance, eps: f64) -> Result<StepFunction> {
    let (eps_user, _) = clamp_eps(eps)?;
    let eps_hat = internal_eps(eps_user);
    let pre = preprocess(inst, eps_hat)?;
    if pre.items.is_empty() {
        return Ok(StepFunction::zero());
    }
    let mut parts = Vec::new();
    for group in group_by_profit(&pre) {
        let f = approx_items_small(&item_classes(&group.items)?, eps_hat)?
            .scale_values(group.scale)?
            .truncate_domain(inst.capacity);
        parts.push(f);
    }
    Ok(range_merge(&parts, 3.0, eps_hat)?.truncate_domain(inst.capacity))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tol::VERIFY_REL_TOL;

    fn splitmix(state: &mut u64) -> u64 {
        *state = state.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = *state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    fn unit(state: &mut u64) -> f64 {
        (splitmix(state) >> 11) as f64 / (1u64 << 53) as f64
    }

    fn random_unit_items(n: usize, state: &mut u64) -> Vec<Item> {
        (0..n)
            .map(|_| Item {
                weight: 0.1 + 3.0 * unit(state),
                profit: 1.0 + unit(state),
            })
            .collect()
    }

    #[test]
    fn budget_identity_and_stage_inequalities() {
        // e^{K_STAGE * eps_hat} = 1 + eps exactly, by construction.
        for &e in &[1e-4, 1e-2, 0.05, 0.1, 0.2, 0.5] {
            let eh = internal_eps(e);
            assert!(((K_STAGE * eh).exp_m1() - e).abs() <= 1e-12 * e);
        }
        // Stage bounds valid over the whole reachable eps_hat range.
        let top = internal_eps(0.5) * (1.0 + 1e-9);
        for k in 1..=64 {
            let x = top * k as f64 / 64.0;
            assert!(1.0 / (1.0 - x) <= (2.0 * x).exp());
            assert!(1.0 + x <= x.exp());
            assert!(1.0 / (1.0 - 2.0 * x) <= (3.0 * x).exp());
            assert!(1.0 / (1.0 - 8.0 * x) <= (9.0 * x).exp());
            assert!(crate::multilevel::factor_bound(x) <= (15.0 * x).exp());
        }
    }

    #[test]
    fn greedy_profile_example() {
        let items = vec![
            Item { weight: 1.0, profit: 2.0 },
            Item { weight: 2.0, profit: 1.0 },
        ];
        let f = greedy_sorted_profile(&items).unwrap();
        assert_eq!(f.points(), &[(1.0, 2.0), (3.0, 3.0)]);
    }

    #[test]
    fn greedy_profile_single_item() {
        let items = vec![Item { weight: 0.4, profit: 1.3 }];
        let f = greedy_sorted_profile(&items).unwrap();
        assert_eq!(f.points(), &[(0.4, 1.3)]);
    }

    #[test]
    fn greedy_profile_additive_two_of_opt() {
        let mut state = 5u64;
        for _ in 0..40 {
            let items = random_unit_items(9, &mut state);
            let exact = brute_force_profile(&items).unwrap();
            let greedy = greedy_sorted_profile(&items).unwrap();
            for &(x, y) in exact.points() {
                let g = greedy.eval(x).unwrap();
                assert!(g >= y - 2.0 - 1e-9, "greedy {g} vs opt {y} at {x}");
                assert!(g <= y * (1.0 + VERIFY_REL_TOL));
            }
        }
    }

    #[test]
    fn split_ties_break_by_index() {
        // Equal unit profits everywhere: H gets the first B items.
        let items: Vec<Item> = (0..5)
            .map(|i| Item {
                weight: 1.0 + 0.1 * i as f64,
                profit: 1.0 + 0.1 * i as f64,
            })
            .collect();
        let s = split_hml(&items, 0.5, 0.3).unwrap();
        assert_eq!(s.b, 2);
        assert_eq!(s.h.len(), 2);
        assert_eq!(s.h[0].weight, items[0].weight);
        assert_eq!(s.h[1].weight, items[1].weight);
        // Remaining identical-unit items land in M (gap 0 ≤ alpha).
        assert_eq!(s.m.len(), 3);
        assert!(s.l.is_empty());
    }

    #[test]
    fn split_separated_clusters() {
        let mut items = vec![
            Item { weight: 1.0, profit: 2.0 },
            Item { weight: 1.0, profit: 1.9 },
        ];
        // Unit profit 1.0, below q(1 - alpha) = 1.9 * 0.7.
        items.push(Item { weight: 1.0, profit: 1.0 });
        let s = split_hml(&items, 0.5, 0.3).unwrap();
        assert!((s.q - 1.9).abs() <= 1e-12);
        assert_eq!(s.l.len(), 1);
        assert!(s.m.is_empty());
    }

    #[test]
    fn split_alpha_boundary_inclusive() {
        let eps: f64 = 1.0 / 16.0;
        let alpha = eps.powf(0.75);
        assert!((alpha - 0.125).abs() <= 1e-12);
        let b = (1.0 / eps).ceil() as usize;
        let mut items: Vec<Item> = (0..b).map(|_| Item { weight: 1.0, profit: 2.0 }).collect();
        // Unit profit exactly q(1 - alpha) = 2 * 0.875 = 1.75: goes to M.
        items.push(Item { weight: 1.0, profit: 1.75 });
        let s = split_hml(&items, eps, alpha).unwrap();
        assert_eq!(s.m.len(), 1);
        assert!(s.l.is_empty());
    }

    #[test]
    fn greedy_lemma_empty_l_and_boundary() {
        let h = vec![
            Item { weight: 1.0, profit: 2.0 },
            Item { weight: 2.0, profit: 1.5 },
        ];
        let wh = 3.0;
        assert!(greedy_lemma_check(&h, &[], 0.5, &[0.0, 1.0, wh]).unwrap());
        // x = W_H: both sides equal the full H profit.
        let l = vec![Item { weight: 4.0, profit: 1.0 }];
        assert!(greedy_lemma_check(&h, &l, 0.5, &[wh]).unwrap());
    }

    #[test]
    fn greedy_lemma_rejects_gap_violation() {
        let h = vec![Item { weight: 2.0, profit: 1.0 }]; // q = 0.5
        let l = vec![Item { weight: 2.0, profit: 1.1 }]; // unit 0.55 > q(1-α)
        assert!(matches!(
            greedy_lemma_check(&h, &l, 0.3, &[1.0]),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn greedy_lemma_randomized() {
        let mut state = 99u64;
        for _ in 0..20 {
            // H items with units in [1, 2]; L items pushed below the gap.
            let alpha = 0.25 + 0.25 * unit(&mut state);
            let h: Vec<Item> = (0..6)
                .map(|_| Item {
                    weight: 0.8 + unit(&mut state),
                    profit: 1.4 + 0.6 * unit(&mut state),
                })
                .collect();
            let q = h
                .iter()
                .map(|it| it.profit / it.weight)
                .fold(f64::INFINITY, f64::min);
            let l: Vec<Item> = (0..6)
                .map(|_| {
                    let p = 1.0 + unit(&mut state);
                    let min_w = p / (q * (1.0 - alpha));
                    Item {
                        weight: min_w * (1.0 + unit(&mut state)),
                        profit: p,
                    }
                })
                .collect();
            let wh: f64 = h.iter().map(|it| it.weight).sum();
            let xs: Vec<f64> = (0..25).map(|k| wh * k as f64 / 24.0).collect();
            assert!(greedy_lemma_check(&h, &l, alpha, &xs).unwrap());
        }
    }

    #[test]
    fn unit_range_single_item_exact() {
        let items = vec![Item { weight: 0.7, profit: 1.4 }];
        let f = solve_unit_range(&items, 0.1).unwrap();
        assert_eq!(f.points(), &[(0.7, 1.4)]);
    }

    #[test]
    fn unit_range_sandwich_small_n() {
        let mut state = 17u64;
        for &eps in &[0.1, 1.0 / 64.0] {
            let factor = unit_range_factor(eps);
            for _ in 0..10 {
                let items = random_unit_items(10, &mut state);
                let approx = solve_unit_range(&items, eps).unwrap();
                let exact = brute_force_profile(&items).unwrap();
                for &(x, _) in exact.points() {
                    // Nudge past the breakpoint: subset weights are summed
                    // in different orders on the two sides.
                    let x = x * (1.0 + 1e-12);
                    let y = exact.eval(x).unwrap();
                    let a = approx.eval(x).unwrap();
                    assert!(a <= y * (1.0 + VERIFY_REL_TOL) + 1e-12);
                    assert!(
                        y <= a * factor * (1.0 + VERIFY_REL_TOL),
                        "opt {y} vs approx {a} at x = {x}, eps = {eps}"
                    );
                }
            }
        }
    }

    #[test]
    fn unit_range_above_cap_covered_by_greedy() {
        // 20 light items: OPT at full capacity is 20+ profit > B = 10.
        let eps = 0.1;
        let items: Vec<Item> = (0..20)
            .map(|i| Item {
                weight: 0.01 + 0.001 * i as f64,
                profit: 1.0 + 0.03 * i as f64,
            })
            .collect();
        let approx = solve_unit_range(&items, eps).unwrap();
        let exact = brute_force_profile(&items).unwrap();
        let total_w: f64 = items.iter().map(|i| i.weight).sum();
        let opt = exact.eval(total_w).unwrap();
        assert!(opt > 1.0 / eps);
        let a = approx.eval(total_w).unwrap();
        assert!(a <= opt * (1.0 + VERIFY_REL_TOL));
        assert!(opt <= a * unit_range_factor(eps) * (1.0 + VERIFY_REL_TOL));
    }

    #[test]
    fn solve_matches_brute_force_ratio() {
        let mut state = 2024u64;
        for &eps in &[0.2, 0.1] {
            for _ in 0..25 {
                let n = 3 + (splitmix(&mut state) % 10) as usize;
                let items: Vec<Item> = (0..n)
                    .map(|_| Item {
                        weight: 1.0 + 9.0 * unit(&mut state),
                        profit: 0.5 + 20.0 * unit(&mut state),
                    })
                    .collect();
                let wsum: f64 = items.iter().map(|i| i.weight).sum();
                let inst = Instance {
                    items,
                    capacity: (wsum / 2.0).max(1.0),
                };
                let sol = solve(&inst, eps).unwrap();
                let opt = brute_force_profile(&inst.items)
                    .unwrap()
                    .eval(inst.capacity)
                    .unwrap();
                assert!(sol.value <= opt * (1.0 + VERIFY_REL_TOL) + 1e-12);
                assert!(
                    opt <= sol.value * (1.0 + eps) * (1.0 + VERIFY_REL_TOL) + 1e-12,
                    "opt {opt} vs sol {} at eps {eps}",
                    sol.value
                );
            }
        }
    }

    #[test]
    fn solve_take_everything() {
        let items = vec![
            Item { weight: 1.0, profit: 3.0 },
            Item { weight: 2.0, profit: 5.0 },
        ];
        let inst = Instance { items, capacity: 4.0 };
        let sol = solve(&inst, 0.25).unwrap();
        assert!(sol.value >= 8.0 / 1.25 - 1e-9);
        assert!(sol.value <= 8.0 * (1.0 + 1e-9));
    }

    #[test]
    fn solve_empty_is_zero() {
        let inst = Instance { items: vec![], capacity: 5.0 };
        let sol = solve(&inst, 0.2).unwrap();
        assert_eq!(sol.value, 0.0);
        assert!(sol.profile.is_zero());
    }

    #[test]
    fn solve_nothing_fits_is_zero() {
        let inst = Instance {
            items: vec![Item { weight: 9.0, profit: 4.0 }],
            capacity: 5.0,
        };
        assert_eq!(solve(&inst, 0.2).unwrap().value, 0.0);
    }

    #[test]
    fn solve_clamps_large_eps() {
        let inst = Instance {
            items: vec![Item { weight: 1.0, profit: 1.0 }],
            capacity: 2.0,
        };
        let sol = solve(&inst, 0.9).unwrap();
        assert!(sol.clamped);
        assert!((sol.eps_internal - internal_eps(0.5)).abs() <= 1e-15);
    }

    #[test]
    fn solve_is_deterministic() {
        let mut state = 321u64;
        let items = random_unit_items(12, &mut state);
        let inst = Instance {
            items: items.iter().map(|&it| Item {
                weight: it.weight,
                profit: it.profit * 7.3,
            }).collect(),
            capacity: 6.0,
        };
        let a = solve(&inst, 0.1).unwrap();
        let b = solve(&inst, 0.1).unwrap();
        assert_eq!(a.value, b.value);
        assert_eq!(a.profile.points(), b.profile.points());
    }

    #[test]
    fn solve_small_n_agrees_with_solve() {
        let mut state = 77u64;
        for _ in 0..10 {
            let items = random_unit_items(8, &mut state);
            let inst = Instance {
                items,
                capacity: 3.0,
            };
            let eps = 0.15;
            let full = solve(&inst, eps).unwrap();
            let small = solve_small_n(&inst, eps).unwrap();
            let sv = small.eval(inst.capacity).unwrap();
            // Both sandwich OPT within 1 + eps, so they agree within the
            // combined factor (1 + eps)^2.
            let factor = (1.0 + eps) * (1.0 + eps) * (1.0 + VERIFY_REL_TOL);
            assert!(full.value <= sv * factor + 1e-12);
            assert!(sv <= full.value * factor + 1e-12);
        }
    }

    #[test]
    fn solve_small_n_single_item_exact() {
        let inst = Instance {
            items: vec![Item { weight: 2.0, profit: 7.0 }],
            capacity: 3.0,
        };
        let f = solve_small_n(&inst, 0.2).unwrap();
        assert_eq!(f.eval(3.0).unwrap(), 7.0);
        assert_eq!(f.eval(1.0).unwrap(), 0.0);
    }

    #[test]
    fn internal_eps_rejects_out_of_range() {
        let inst = Instance {
            items: vec![Item { weight: 1.0, profit: 1.0 }],
            capacity: 2.0,
        };
        assert!(solve_with_internal_eps(&inst, 0.05).is_err());
        assert!(solve_with_internal_eps(&inst, 0.0).is_err());
        let sol = solve_with_internal_eps(&inst, 0.005).unwrap();
        assert!((sol.value - 1.0).abs() <= 1e-9);
    }
}
