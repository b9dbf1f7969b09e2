//! Multi-level capped merging of profit classes.
//!
//! The target quantity is min{B, f_1 ⊕ … ⊕ f_m} for p-uniform classes with
//! profits in [1, 2]. A single quantized table would need B/ε entries; the
//! multi-level scheme instead runs d = O(log log 1/ε) passes whose grids
//! get simultaneously coarser in value (δ_i) and taller in cap (B_i), so
//! that each pass costs about B_i/δ_i = t√(B/r)/ε and pass i is accurate
//! precisely on the value band [B_{i-1}, B_i]:
//!
//!   level i rounds every class profit down to a multiple of its assigned
//!   level-i generator (additive ≤ 8ε per class, usually ≤ 2ε), merges on a
//!   δ_i-grid capped at B_i (additive ≤ 8δ_i|Δ_i| ≤ 8εB_{i-1}), and the
//!   final answer takes the pointwise max over levels, so a query whose true
//!   value lies in [B_{i-1}, B_i] is answered by level i within relative
//!   error: max(g_0…g_d) ≥ F_adj(x) − 8εB_{i-1} ≥ F_adj(x)(1 − 8ε).
//!
//! Everything here underestimates: class profits only move down, merges cap
//! and floor. The documented factor bound for one group is therefore
//!
//!   f̃ ≤ min{B_d, F} and min{B, F} ≤ f̃ · 1/((1 − 2ε)(1 − 8ε))
//!
//! (the 2ε from profit adjustment, the 8ε from the band argument), and the
//! group-merging wrappers add exactly e^{3ε} (they call [`merge_dnc`] with
//! eps = e^{3ε} − 1). These bounds are what [`factor_bound`] computes and
//! what the solver's stage budget charges for this module.

use crate::error::{Error, Result};
use crate::smawk::{fast_naive_capped, naive_capped, uniform_merge, UniformFunction};
use crate::stepfn::{merge_dnc, pointwise_max_many, StepFunction};
use crate::tol::{approx_eq, RATIO_TOL, REL_TOL, VERIFY_REL_TOL};
use crate::towers::{
    construct_base_set, generate_tower, partition_profits, Assignment, TowerParams,
};

/// Levels stop growing here; root = √(B/r) < 2^(2^8) always holds for
/// representable B, so hitting the limit means corrupted inputs.
const MAX_LEVELS: usize = 8;

/// Per-level grid schedule: level count d, the base growth rate α ∈ [2, 4),
/// value resolutions δ_1 ≤ … ≤ δ_d, caps B_0 ≤ … ≤ B_d and the slack
/// factor t ≥ α that the caps carry.
///
/// Identities (all relative to the inputs (B, r, ε)):
///   α^(2^(d-1)) = √(B/r),  2^(2^(d-1)) ≤ √(B/r) < 2^(2^d),
///   δ_i = ε√(Br)/α^(2^(d-i))  (so δ_1 = εr exactly),
///   B_i = Bt/α^(2^(d-i))      (so B_0 = rt and B_d = Bt/α ≥ B).
#[derive(Debug, Clone)]
pub struct LevelSchedule {
    d: usize,
    alpha: f64,
    deltas: Vec<f64>,
    caps: Vec<f64>,
    t: f64,
    b: f64,
    r: usize,
    eps: f64,
}

impl LevelSchedule {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// δ_1..δ_d (index 0 is δ_1).
    pub fn deltas(&self) -> &[f64] {
        &self.deltas
    }

    /// B_0..B_d (index i is B_i, so the slice has d+1 entries).
    pub fn caps(&self) -> &[f64] {
        &self.caps
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// The tower band schedule this level schedule induces.
    pub fn tower_params(&self) -> Result<TowerParams> {
        TowerParams::new(self.deltas.clone(), self.eps)
    }

    /// Same schedule with the slack factor replaced by max{α, t} and the
    /// caps recomputed. t is measured once from the actual partition output
    /// (its defining max over group set sizes); no iteration happens.
    pub fn with_t(&self, t: f64) -> LevelSchedule {
        let t = t.max(self.alpha);
        let powers = alpha_powers(self.alpha, self.d);
        LevelSchedule {
            caps: compute_caps(self.b, &powers, self.d, t),
            t,
            ..self.clone()
        }
    }
}

/// powers[j] = α^(2^j) for j = 0..=d, by repeated squaring (keeps the
/// identity α^(2^d) = B/r to full precision instead of powf drift).
fn alpha_powers(alpha: f64, d: usize) -> Vec<f64> {
    let mut powers = Vec::with_capacity(d + 1);
    powers.push(alpha);
    for j in 1..=d {
        let prev = powers[j - 1];
        powers.push(prev * prev);
    }
    powers
}

fn compute_caps(b: f64, powers: &[f64], d: usize, t: f64) -> Vec<f64> {
    (0..=d).map(|i| b * t / powers[d - i]).collect()
}

/// Picks d, α, the δ-ladder and provisional caps (t = α) for a capped merge
/// at cap B with r groups. Fails with a domain error when B < 4r or when
/// the ladder tops out above the tower bound δ_d ≤ 1/8 (callers fall back
/// to the naive merge in that case).
pub fn choose_level_params(b: f64, r: usize, eps: f64) -> Result<LevelSchedule> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("eps = {eps}, expected (0, 1)")));
    }
    if r == 0 {
        return Err(Error::Domain("r = 0, expected a positive group count".into()));
    }
    let rf = r as f64;
    if !b.is_finite() || b < 4.0 * rf {
        return Err(Error::Domain(format!("cap B = {b} below 4r = {}", 4.0 * rf)));
    }
    let root = (b / rf).sqrt();
    let mut d = 1usize;
    while (2f64).powi(1 << d) <= root * (1.0 + RATIO_TOL) {
        d += 1;
        if d > MAX_LEVELS {
            return Err(Error::Domain(format!(
                "level count exploded for B = {b}, r = {r}"
            )));
        }
    }
    let alpha = root.powf(1.0 / (1u64 << (d - 1)) as f64);
    let powers = alpha_powers(alpha, d);
    let sbr = (b * rf).sqrt();
    let deltas: Vec<f64> = (1..=d).map(|i| eps * sbr / powers[d - i]).collect();
    if deltas[d - 1] > 0.125 * (1.0 + RATIO_TOL) {
        return Err(Error::Domain(format!(
            "delta_d = {} exceeds 1/8: no valid tower at eps = {eps}, B = {b}, r = {r}",
            deltas[d - 1]
        )));
    }
    let t = alpha;
    let caps = compute_caps(b, &powers, d, t);
    Ok(LevelSchedule {
        d,
        alpha,
        deltas,
        caps,
        t,
        b,
        r,
        eps,
    })
}

/// Largest integer k with k·z ≤ p, snapping to exact multiples within
/// relative tolerance first (products of tower reals carry rounding dust).
fn snap_floor(p: f64, z: f64) -> f64 {
    let ratio = p / z;
    let rounded = ratio.round();
    if rounded >= 1.0 && (ratio - rounded).abs() <= RATIO_TOL * ratio.max(1.0) {
        rounded
    } else {
        ratio.floor()
    }
}

/// One group's capped merge: g_0 from the naive-with-base-set path at cap
/// B_0, then one [`uniform_merge`] per level on profits rounded down to the
/// assigned generator chain's level-i member, pointwise max over all of
/// them, capped at B_d.
///
/// `fs` and `assignments` run in parallel (assignment k describes class k,
/// as sliced out of a [`crate::towers::GroupedProfits`]). The generator
/// chain guarantees a level-i multiple within [p − 8ε, p]; failing that
/// guard means the base set underlying the assignments is broken, which is
/// a contract error, not an approximation loss.
pub fn approx_group(
    fs: &[UniformFunction],
    assignments: &[Assignment],
    sched: &LevelSchedule,
    eps: f64,
) -> Result<StepFunction> {
    if fs.len() != assignments.len() {
        return Err(Error::Contract(format!(
            "{} classes vs {} assignments",
            fs.len(),
            assignments.len()
        )));
    }
    if !approx_eq(eps, sched.eps) {
        return Err(Error::Contract(format!(
            "eps = {eps} disagrees with the schedule's eps = {}",
            sched.eps
        )));
    }
    if fs.is_empty() {
        return Ok(StepFunction::zero());
    }
    let d = sched.d;
    let mut layers: Vec<StepFunction> = Vec::with_capacity(d + 1);
    layers.push(fast_naive_capped(fs, sched.caps[0], eps)?);
    for i in 1..=d {
        let delta = sched.deltas[i - 1];
        let mut adjusted = Vec::with_capacity(fs.len());
        let mut members: Vec<f64> = Vec::with_capacity(fs.len());
        for (f, a) in fs.iter().zip(assignments.iter()) {
            if a.chain.len() != d {
                return Err(Error::Contract(format!(
                    "assignment chain has {} levels, schedule has {d}",
                    a.chain.len()
                )));
            }
            let z = a.chain[i - 1];
            let p = f.profit();
            let k = snap_floor(p, z);
            let pi = k * z;
            if k < 1.0 || pi < p - 8.0 * eps * (1.0 + RATIO_TOL) || pi > p * (1.0 + REL_TOL) {
                return Err(Error::Contract(format!(
                    "no multiple of level-{i} generator {z} inside [p - 8eps, p] for profit {p}"
                )));
            }
            adjusted.push(f.with_profit(pi)?);
            members.push(z);
        }
        members.sort_by(f64::total_cmp);
        members.dedup_by(|a, b| (*a - *b).abs() <= REL_TOL * b.max(1.0));
        // t was finalized as the max over exactly these counts, so the
        // per-level error premise 8δ_i|Δ_i| ≤ 8εB_{i-1}t-slack holds.
        debug_assert!(
            members.len() as f64 * sched.eps * sched.r as f64 / delta
                <= sched.t * (1.0 + RATIO_TOL)
        );
        layers.push(uniform_merge(&adjusted, &members, delta, sched.caps[i])?);
    }
    let refs: Vec<&StepFunction> = layers.iter().collect();
    pointwise_max_many(&refs).cap(sched.caps[d])
}

/// The defining max for the schedule slack: t = max{α, |Δ_i^(j)|·εr/δ_i}
/// over all levels i and groups j, measured on the actual partition.
fn finalize_t(
    sched: &LevelSchedule,
    groups: &[Vec<usize>],
    assignments: &[Assignment],
) -> f64 {
    let rf = sched.r as f64;
    let mut t = sched.alpha;
    let mut zs: Vec<f64> = Vec::new();
    for i in 1..=sched.d {
        let delta = sched.deltas[i - 1];
        for group in groups {
            if group.is_empty() {
                continue;
            }
            zs.clear();
            zs.extend(group.iter().map(|&ix| assignments[ix].chain[i - 1]));
            zs.sort_by(f64::total_cmp);
            let mut count = 0usize;
            let mut last = f64::NEG_INFINITY;
            for &z in &zs {
                if z > last * (1.0 + REL_TOL) {
                    count += 1;
                    last = z;
                }
            }
            t = t.max(count as f64 * sched.eps * rf / delta);
        }
    }
    t
}

/// Shared tail of the two public merges: partition, finalize t, run the
/// groups, merge the group results at factor exactly e^{3ε}.
fn run_partitioned(
    fs: &[UniformFunction],
    sched: &LevelSchedule,
    eps: f64,
    group_mass_bound: Option<f64>,
) -> Result<StepFunction> {
    let params = sched.tower_params()?;
    let profits: Vec<f64> = fs.iter().map(|f| f.profit()).collect();
    let grouped = partition_profits(&profits, sched.r, eps, &params)?;
    let sched = sched.with_t(finalize_t(sched, &grouped.groups, &grouped.assignments));
    let mut parts: Vec<StepFunction> = Vec::new();
    for group in &grouped.groups {
        if group.is_empty() {
            continue;
        }
        let gfs: Vec<UniformFunction> = group.iter().map(|&ix| fs[ix].clone()).collect();
        if let Some(bound) = group_mass_bound {
            let mass: f64 = gfs.iter().map(UniformFunction::mass).sum();
            assert!(
                mass <= bound * (1.0 + VERIFY_REL_TOL),
                "group mass {mass} exceeds the provable bound {bound}"
            );
        }
        let gas: Vec<Assignment> = group
            .iter()
            .map(|&ix| grouped.assignments[ix].clone())
            .collect();
        parts.push(approx_group(&gfs, &gas, &sched, eps)?);
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
    merge_dnc(&parts, (3.0 * eps).exp_m1(), lo, hi)
}

fn validate_octave_profits(fs: &[UniformFunction]) -> Result<()> {
    for f in fs {
        let p = f.profit();
        if !(p >= 1.0 - RATIO_TOL && p <= 2.0 + RATIO_TOL) {
            return Err(Error::Domain(format!("class profit {p} outside [1, 2]")));
        }
    }
    Ok(())
}

/// min{B, f_1 ⊕ … ⊕ f_m} within factor e^{3ε}/((1−2ε)(1−8ε)), for classes
/// with profits in [1, 2].
///
/// r = max{1, ⌈B^(1/3)⌉} groups (clamped to m). Outside the workable cap
/// band [ε^(-0.01)/4, 4/ε], or when no valid schedule exists at this ε
/// (B < 4r, or δ_d would exceed 1/8), the call degenerates to
/// [`naive_capped`], which meets a strictly tighter factor.
pub fn approx_capped(fs: &[UniformFunction], b: f64, eps: f64) -> Result<StepFunction> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("eps = {eps}, expected (0, 1)")));
    }
    if !(b > 0.0) || !b.is_finite() {
        return Err(Error::Domain(format!("cap B = {b}, expected finite positive")));
    }
    if fs.is_empty() {
        return Ok(StepFunction::zero());
    }
    validate_octave_profits(fs)?;
    let m = fs.len();
    if b < eps.powf(-0.01) / 4.0 || b > 4.0 / eps {
        return naive_capped(fs, b, eps);
    }
    let r = (b.cbrt().ceil() as usize).max(1).min(m);
    let sched = match choose_level_params(b, r, eps) {
        Ok(s) => s,
        Err(Error::Domain(_)) => return naive_capped(fs, b, eps),
        Err(e) => return Err(e),
    };
    run_partitioned(fs, &sched, eps, None)?.cap(b)
}

/// f_1 ⊕ … ⊕ f_m (uncapped) within factor e^{3ε}/((1−2ε)(1−8ε)), for m
/// classes with profits in [1, 2].
///
/// r = max{1, ⌈m^(3/4)·ε^(1/2)⌉}. The schedule needs a cap before the
/// partition exists (the tower resolutions depend on it), so it uses the
/// a priori bound B̄ = max{4r, (5m/r + 1)·q} on any group's profit mass:
/// the partitioner packs at most s·⌈2D/r⌉ ≤ 5m/r + 1 classes per group
/// (s ≤ m/D + 1 and r ≤ D ≤ m) and q is the heaviest single class (q ≤ 2
/// for the per-item classes this is normally called with). Caps therefore
/// never truncate and the merge covers the whole profile; the measured
/// group mass is asserted against B̄. Outside the workable band
/// m ∈ [ε^(-2/3)/4, 4/ε], or with no valid schedule, falls back to
/// [`naive_capped`] with a cap above the total mass.
pub fn approx_items_small(fs: &[UniformFunction], eps: f64) -> Result<StepFunction> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("eps = {eps}, expected (0, 1)")));
    }
    if fs.is_empty() {
        return Ok(StepFunction::zero());
    }
    if fs.len() == 1 {
        return Ok(fs[0].to_step_function());
    }
    validate_octave_profits(fs)?;
    let m = fs.len();
    let mf = m as f64;
    let total_mass: f64 = fs.iter().map(UniformFunction::mass).sum();
    let fallback_cap = (2.0 * mf).max(total_mass) * (1.0 + REL_TOL);
    if mf < eps.powf(-2.0 / 3.0) / 4.0 || mf > 4.0 / eps {
        return naive_capped(fs, fallback_cap, eps);
    }
    let r = ((mf.powf(0.75) * eps.sqrt()).ceil() as usize).max(1).min(m);
    let rf = r as f64;
    let heaviest = fs.iter().map(UniformFunction::mass).fold(0.0, f64::max);
    let bbar = (4.0 * rf).max(((5.0 * mf / rf + 1.0) * heaviest).ceil() + 1.0);
    let sched = match choose_level_params(bbar, r, eps) {
        Ok(s) => s,
        Err(Error::Domain(_)) => return naive_capped(fs, fallback_cap, eps),
        Err(e) => return Err(e),
    };
    run_partitioned(fs, &sched, eps, Some(bbar))
}

/// Text dump (one set per line) of the number-theoretic support
/// [`approx_capped`] builds for these classes: the level schedule, the
/// base set and every tower level, and the profit partition. The parameter
/// selection mirrors `approx_capped` exactly, so on its naive fallback
/// paths the dump says so instead (no towers exist there).
pub fn describe_towers(fs: &[UniformFunction], b: f64, eps: f64) -> Result<String> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("eps = {eps}, expected (0, 1)")));
    }
    if !(b > 0.0) || !b.is_finite() {
        return Err(Error::Domain(format!("cap B = {b}, expected finite positive")));
    }
    if fs.is_empty() {
        return Ok("no classes: nothing to build\n".into());
    }
    validate_octave_profits(fs)?;
    let m = fs.len();
    if b < eps.powf(-0.01) / 4.0 || b > 4.0 / eps {
        return Ok(format!(
            "naive path (cap {b} outside the tower band): no towers built\n"
        ));
    }
    let r = (b.cbrt().ceil() as usize).max(1).min(m);
    match choose_level_params(b, r, eps) {
        Ok(sched) => describe_schedule(fs, &sched, eps),
        Err(Error::Domain(why)) => Ok(format!("naive path ({why}): no towers built\n")),
        Err(e) => Err(e),
    }
}

/// Like [`describe_towers`] but for the uncapped [`approx_items_small`]
/// parameterization (band on m, a priori cap B-bar).
pub fn describe_towers_small(fs: &[UniformFunction], eps: f64) -> Result<String> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("eps = {eps}, expected (0, 1)")));
    }
    if fs.len() < 2 {
        return Ok("no classes to partition: nothing to build\n".into());
    }
    validate_octave_profits(fs)?;
    let m = fs.len();
    let mf = m as f64;
    if mf < eps.powf(-2.0 / 3.0) / 4.0 || mf > 4.0 / eps {
        return Ok(format!(
            "naive path ({m} classes outside the tower band): no towers built\n"
        ));
    }
    let r = ((mf.powf(0.75) * eps.sqrt()).ceil() as usize).max(1).min(m);
    let rf = r as f64;
    let heaviest = fs.iter().map(UniformFunction::mass).fold(0.0, f64::max);
    let bbar = (4.0 * rf).max(((5.0 * mf / rf + 1.0) * heaviest).ceil() + 1.0);
    match choose_level_params(bbar, r, eps) {
        Ok(sched) => describe_schedule(fs, &sched, eps),
        Err(Error::Domain(why)) => Ok(format!("naive path ({why}): no towers built\n")),
        Err(e) => Err(e),
    }
}

fn describe_schedule(
    fs: &[UniformFunction],
    sched: &LevelSchedule,
    eps: f64,
) -> Result<String> {
    use std::fmt::Write as _;
    let params = sched.tower_params()?;
    let base = construct_base_set(eps, &params)?;
    let tower = generate_tower(&base, &params)?;
    let profits: Vec<f64> = fs.iter().map(|f| f.profit()).collect();
    let grouped = partition_profits(&profits, sched.r, eps, &params)?;
    let sched = sched.with_t(finalize_t(sched, &grouped.groups, &grouped.assignments));
    let mut out = String::new();
    let _ = writeln!(
        out,
        "schedule: d={} r={} alpha={:.6} t={:.6} eps={:.6}",
        sched.d, sched.r, sched.alpha, sched.t, eps
    );
    let _ = write!(out, "deltas:");
    for d in &sched.deltas {
        let _ = write!(out, " {d:.9}");
    }
    out.push('\n');
    let _ = write!(out, "caps:");
    for c in &sched.caps {
        let _ = write!(out, " {c:.6}");
    }
    out.push('\n');
    out.push_str(&tower.dump());
    out.push_str(&grouped.dump());
    Ok(out)
}

/// The documented worst-case approximation factor of [`approx_capped`] and
/// [`approx_items_small`] at a given ε < 1/8: group internals contribute
/// 1/((1−2ε)(1−8ε)), the group merge exactly e^{3ε}. The naive fallbacks
/// stay below 1/(1−2ε)·(1+ε), which this dominates.
pub fn factor_bound(eps: f64) -> f64 {
    assert!(eps < 0.125, "factor bound requires eps < 1/8, got {eps}");
    (3.0 * eps).exp() / ((1.0 - 2.0 * eps) * (1.0 - 8.0 * eps))
}
