//! Multi-level set towers over the reals.
//!
//! A *tower* is a chain of finite sets Δ_1, …, Δ_d where Δ_1 ⊂ [δ_1, 8δ_1]
//! and each later level collects every integer multiple of a previous-level
//! member that lands in the next band:
//!
//! ```text
//! Δ_{i+1} = [δ_{i+1}, 8δ_{i+1}] ∩ ⋃_{k ∈ ℤ} k·Δ_i
//! ```
//!
//! Towers let the solver round profits in [1, 2] onto a lattice whose quantum
//! grows with the value scale: a profit p is adjusted down to a multiple k·y
//! of a top-level member y, and the generator chain of y (one member per
//! level, each dividing the next) lets the same assignment be reused at every
//! level with the level's own quantum. The base set Δ_1 is built by a greedy
//! hitting-set pass over interval unions
//!
//! ```text
//! I_p = ⋃_{K good} [(p−ε)/K, p/K],   p ∈ {1, 1+ε, …, 1+⌊1/ε⌋ε},
//! ```
//!
//! where the *good integers* K for p are the products k_1⋯k_{d−1}·j whose
//! prefix products satisfy k_1⋯k_{i−1} ∈ [δ_i/δ_1, 2δ_i/δ_1] and whose total
//! lies in [p/(4δ_1), p/(2δ_1)]. Picking x ∈ I_p via such a K guarantees the
//! whole chain x·k_1, x·k_1k_2, … stays inside the tower bands, so k·y = x·K
//! approximates p from below within ε.
//!
//! The module also provides the profit partitioner (split a profit multiset
//! into r groups with small per-group base sets) and an exact counting
//! utility for product-representable integers used by validation suites.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::smawk::{largest_multiple_at_most, sorted_multiples, Multiple};
use crate::tol::{snap_to_integer, RATIO_TOL, REL_TOL, VERIFY_REL_TOL};

/// Maximum number of profit-grid points 1/ε the base-set constructor will
/// materialize; finer grids would need gigabytes for the interval system.
const BASE_GRID_LIMIT: f64 = 2.0e7;

/// Hard cap on the total number of interval records in one construction
/// (about 2.9 GB at 24 bytes each); exceeding it is a domain error rather
/// than an OOM kill.
const MAX_INTERVAL_RECORDS: usize = 120_000_000;

/// Cached (base set, tower, sorted multiples) entries kept per thread.
const SUPPORT_CACHE_CAP: usize = 16;

/// Constant c in the partitioner precondition r ≤ min{c·δ_1/ε, m}.
pub const PARTITION_CAPACITY_CONSTANT: f64 = 1.0;

/// Band schedule δ_1 ≤ δ_2/2 ≤ … plus the grid resolution ε.
///
/// Valid schedules satisfy ε ≤ δ_1, δ_i ≤ δ_{i+1}/2 for every consecutive
/// pair, and δ_d ≤ 1/8 (all with relative tolerance 1e-9).
#[derive(Debug, Clone, PartialEq)]
pub struct TowerParams {
    deltas: Vec<f64>,
    eps: f64,
}

impl TowerParams {
    pub fn new(deltas: Vec<f64>, eps: f64) -> Result<Self> {
        if deltas.is_empty() {
            return Err(Error::Domain("empty delta schedule".into()));
        }
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::Domain(format!("eps = {eps}, expected eps > 0")));
        }
        for &d in &deltas {
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::Domain(format!("delta = {d}, expected positive")));
            }
        }
        if eps > deltas[0] * (1.0 + RATIO_TOL) {
            return Err(Error::Domain(format!(
                "eps = {eps} exceeds delta_1 = {}",
                deltas[0]
            )));
        }
        for w in deltas.windows(2) {
            if w[0] > w[1] / 2.0 * (1.0 + RATIO_TOL) {
                return Err(Error::Domain(format!(
                    "delta step {} -> {} grows by less than 2x",
                    w[0], w[1]
                )));
            }
        }
        let last = *deltas.last().unwrap();
        if last > 0.125 * (1.0 + RATIO_TOL) {
            return Err(Error::Domain(format!(
                "top delta = {last}, expected at most 1/8"
            )));
        }
        Ok(TowerParams { deltas, eps })
    }

    /// Number of levels d.
    pub fn d(&self) -> usize {
        self.deltas.len()
    }

    /// The band schedule δ_1..δ_d.
    pub fn deltas(&self) -> &[f64] {
        &self.deltas
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    fn cache_key(&self) -> (u64, Vec<u64>) {
        (
            self.eps.to_bits(),
            self.deltas.iter().map(|d| d.to_bits()).collect(),
        )
    }
}

/// A generated tower: one sorted member list per level plus, for every
/// member above the base, the index of one level-below generator (the
/// smallest member that divides it). Parent pointers make generator-chain
/// lookups O(d) instead of a scan per level.
#[derive(Debug, Clone)]
pub struct SetTower {
    levels: Vec<Vec<f64>>,
    parents: Vec<Vec<u32>>,
    params: TowerParams,
}

impl SetTower {
    /// All levels, base first.
    pub fn levels(&self) -> &[Vec<f64>] {
        &self.levels
    }

    /// Level i (1-indexed, so `level(1)` is the base set).
    pub fn level(&self, i: usize) -> &[f64] {
        &self.levels[i - 1]
    }

    /// The top set Δ_d whose multiples approximate profits.
    pub fn top(&self) -> &[f64] {
        self.levels.last().unwrap()
    }

    pub fn d(&self) -> usize {
        self.levels.len()
    }

    pub fn params(&self) -> &TowerParams {
        &self.params
    }

    /// Plain-text dump, one level per line, for diagnostic output.
    pub fn dump(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        for (i, lvl) in self.levels.iter().enumerate() {
            let _ = write!(out, "level {}:", i + 1);
            for v in lvl {
                let _ = write!(out, " {v:.12}");
            }
            out.push('\n');
        }
        out
    }
}

/// Builds the tower generated by `base` under `params`.
///
/// Requires base ⊂ [δ_1, 8δ_1], sorted or not. Levels are deduplicated with
/// relative tolerance 1e-12 (double-precision products of equal values can
/// differ in the last bits). The size bound
/// |Δ_i| ≤ 8^{i−1}·(δ_i/δ_1)·|Δ_1| is asserted: it follows from the band
/// widths, so a violation is a construction bug, not an input error.
pub fn generate_tower(base: &[f64], params: &TowerParams) -> Result<SetTower> {
    if base.is_empty() {
        return Err(Error::Domain("empty base set".into()));
    }
    let d1 = params.deltas[0];
    let mut level1: Vec<f64> = base.to_vec();
    level1.sort_by(f64::total_cmp);
    level1.dedup_by(|a, b| (*a - *b).abs() <= REL_TOL * a.abs().max(1.0));
    for &x in &level1 {
        if !x.is_finite() || x < d1 * (1.0 - RATIO_TOL) || x > 8.0 * d1 * (1.0 + RATIO_TOL) {
            return Err(Error::Domain(format!(
                "base member {x} outside [delta_1, 8 delta_1] = [{d1}, {}]",
                8.0 * d1
            )));
        }
    }
    let base_len = level1.len();
    let mut levels = vec![level1];
    let mut parents: Vec<Vec<u32>> = vec![Vec::new()];
    for li in 1..params.d() {
        let lo = params.deltas[li];
        let hi = 8.0 * lo;
        let prev = &levels[li - 1];
        let mut cands: Vec<(f64, u32)> = Vec::new();
        for (zi, &z) in prev.iter().enumerate() {
            let k_lo = ((lo / z) * (1.0 - RATIO_TOL)).ceil().max(1.0) as i64;
            let k_hi = ((hi / z) * (1.0 + RATIO_TOL)).floor() as i64;
            for k in k_lo..=k_hi {
                let v = k as f64 * z;
                if v >= lo * (1.0 - RATIO_TOL) && v <= hi * (1.0 + RATIO_TOL) {
                    cands.push((v, zi as u32));
                }
            }
        }
        cands.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut vals: Vec<f64> = Vec::new();
        let mut pars: Vec<u32> = Vec::new();
        let mut gi = 0;
        while gi < cands.len() {
            let anchor = cands[gi].0;
            let mut best = cands[gi];
            let mut gj = gi + 1;
            while gj < cands.len() && cands[gj].0 - anchor <= REL_TOL * anchor.max(1.0) {
                if cands[gj].1 < best.1 {
                    best = cands[gj];
                }
                gj += 1;
            }
            vals.push(best.0);
            pars.push(best.1);
            gi = gj;
        }
        let bound = 8f64.powi(li as i32) * (lo / d1) * base_len as f64;
        assert!(
            vals.len() as f64 <= bound * (1.0 + VERIFY_REL_TOL),
            "tower level {} has {} members, exceeding the size bound {}",
            li + 1,
            vals.len(),
            bound
        );
        levels.push(vals);
        parents.push(pars);
    }
    Ok(SetTower {
        levels,
        parents,
        params: params.clone(),
    })
}

fn lookup_sorted(sorted: &[f64], y: f64) -> Option<usize> {
    let idx = sorted.partition_point(|v| *v < y * (1.0 - VERIFY_REL_TOL));
    if idx < sorted.len() && (sorted[idx] - y).abs() <= VERIFY_REL_TOL * y.abs().max(sorted[idx].abs()) {
        Some(idx)
    } else {
        None
    }
}

/// Per-level member indices of the generator chain of `y`, base first.
pub(crate) fn find_generator_indices(y: f64, tower: &SetTower) -> Result<Vec<usize>> {
    let top = tower.top();
    let Some(ti) = lookup_sorted(top, y) else {
        return Err(Error::NotFound(format!("{y} is not in the top set")));
    };
    let d = tower.d();
    let mut idxs = vec![0usize; d];
    idxs[d - 1] = ti;
    for li in (1..d).rev() {
        idxs[li - 1] = tower.parents[li][idxs[li]] as usize;
    }
    Ok(idxs)
}

/// Generator chain x = z_1, z_2, …, z_d = y with every ratio z_{i+1}/z_i an
/// integer (verified within 1e-9 and snapped). Every top-set member has a
/// chain by construction; a missing one is reported as a not-found error.
pub fn find_generator(y: f64, tower: &SetTower) -> Result<Vec<f64>> {
    let idxs = find_generator_indices(y, tower)?;
    let chain: Vec<f64> = idxs
        .iter()
        .zip(tower.levels.iter())
        .map(|(&i, lvl)| lvl[i])
        .collect();
    for w in chain.windows(2) {
        if snap_to_integer(w[1] / w[0], VERIFY_REL_TOL).is_none() {
            return Err(Error::Construction(format!(
                "chain ratio {} / {} is not an integer",
                w[1], w[0]
            )));
        }
    }
    Ok(chain)
}

/// A good integer K for some profit p, together with one witness
/// factorization [k_1, …, k_{d−1}, j] whose product is K and whose prefix
/// products lie in the required bands.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoodInteger {
    pub value: u64,
    pub factors: Vec<u64>,
}

/// Prefix products k_1⋯k_{i−1} allowed at each level, as maps
/// value -> (previous value, last factor) for witness recovery. Entry 0 is
/// the trivial prefix {1}; entry i (1-based) holds prefixes constrained to
/// [δ_{i+1}/δ_1, 2δ_{i+1}/δ_1].
fn prefix_levels(params: &TowerParams) -> Vec<BTreeMap<u64, (u64, u64)>> {
    let d = params.d();
    let d1 = params.deltas[0];
    let mut levels: Vec<BTreeMap<u64, (u64, u64)>> = Vec::with_capacity(d);
    let mut first = BTreeMap::new();
    first.insert(1u64, (0u64, 0u64));
    levels.push(first);
    for i in 1..d {
        let lo = params.deltas[i] / d1;
        let hi = 2.0 * lo;
        let mut next = BTreeMap::new();
        for &pref in levels[i - 1].keys() {
            let pf = pref as f64;
            let k_lo = ((lo / pf) * (1.0 - RATIO_TOL)).ceil().max(1.0) as u64;
            let k_hi = ((hi / pf) * (1.0 + RATIO_TOL)).floor() as u64;
            for k in k_lo..=k_hi {
                let v = pref * k;
                let vf = v as f64;
                if vf >= lo * (1.0 - RATIO_TOL) && vf <= hi * (1.0 + RATIO_TOL) {
                    next.entry(v).or_insert((pref, k));
                }
            }
        }
        levels.push(next);
    }
    levels
}

/// The final band [p/(4δ_1), p/(2δ_1)] as inclusive integer endpoints.
fn final_band(p: f64, d1: f64) -> Result<(u64, u64)> {
    let lo = p / (4.0 * d1);
    let hi = p / (2.0 * d1);
    if hi > 9.0e15 {
        return Err(Error::Domain(format!(
            "good-integer range up to {hi} exceeds exactly representable integers"
        )));
    }
    let k_lo = (lo * (1.0 - RATIO_TOL)).ceil().max(1.0) as u64;
    let k_hi = (hi * (1.0 + RATIO_TOL)).floor() as u64;
    Ok((k_lo, k_hi))
}

/// Enumerates every good integer for p, sorted ascending, each with one
/// witness factorization recovered from the prefix dynamic program.
///
/// K is good when K = k_1⋯k_{d−1}·j with k_1⋯k_{i−1} ∈ [δ_i/δ_1, 2δ_i/δ_1]
/// for 2 ≤ i ≤ d and K ∈ [p/(4δ_1), p/(2δ_1)] (closed bands, relative
/// tolerance 1e-9 at the endpoints).
pub fn enumerate_good_integers(p: f64, params: &TowerParams) -> Result<Vec<GoodInteger>> {
    if !(p.is_finite() && p >= 1.0 - RATIO_TOL && p <= 2.0 + RATIO_TOL) {
        return Err(Error::Domain(format!("p = {p}, expected p in [1, 2]")));
    }
    let d = params.d();
    let levels = prefix_levels(params);
    let (k_lo, k_hi) = final_band(p, params.deltas[0])?;
    let mut goods: BTreeMap<u64, (u64, u64)> = BTreeMap::new();
    for &pref in levels[d - 1].keys() {
        let j_lo = k_lo.div_ceil(pref).max(1);
        let j_hi = k_hi / pref;
        for j in j_lo..=j_hi {
            goods.entry(pref * j).or_insert((pref, j));
        }
    }
    let mut out = Vec::with_capacity(goods.len());
    for (&k, &(pref, j)) in &goods {
        let mut factors = Vec::with_capacity(d);
        factors.push(j);
        let mut cur = pref;
        for lvl in (1..d).rev() {
            let &(prev, f) = levels[lvl]
                .get(&cur)
                .expect("prefix recorded during the forward pass");
            factors.push(f);
            cur = prev;
        }
        debug_assert_eq!(cur, 1);
        factors.reverse();
        debug_assert_eq!(factors.iter().product::<u64>(), k);
        out.push(GoodInteger { value: k, factors });
    }
    Ok(out)
}

/// Exhaustive reference for [`enumerate_good_integers`]: tries every K in
/// the final band and searches all ordered factorizations directly.
/// Exponential in d; intended for validation at small 1/δ_1 only.
pub fn enumerate_good_integers_brute(p: f64, params: &TowerParams) -> Result<Vec<u64>> {
    if !(p.is_finite() && p >= 1.0 - RATIO_TOL && p <= 2.0 + RATIO_TOL) {
        return Err(Error::Domain(format!("p = {p}, expected p in [1, 2]")));
    }
    let d1 = params.deltas[0];
    let (k_lo, k_hi) = final_band(p, d1)?;
    if k_hi > 1 << 20 {
        return Err(Error::Domain(
            "brute-force factorization search is limited to K <= 2^20".into(),
        ));
    }
    fn admits(k: u64, level: usize, pref: u64, params: &TowerParams) -> bool {
        if level == params.d() {
            return pref <= k && k % pref == 0;
        }
        let d1 = params.deltas[0];
        let lo = params.deltas[level] / d1;
        let hi = 2.0 * lo;
        let pf = pref as f64;
        let q_lo = ((lo / pf) * (1.0 - RATIO_TOL)).ceil().max(1.0) as u64;
        let q_hi = ((hi / pf) * (1.0 + RATIO_TOL)).floor() as u64;
        for q in q_lo..=q_hi {
            let v = pref * q;
            let vf = v as f64;
            if vf < lo * (1.0 - RATIO_TOL) || vf > hi * (1.0 + RATIO_TOL) {
                continue;
            }
            if v > k || k % v != 0 {
                continue;
            }
            if admits(k, level + 1, v, params) {
                return true;
            }
        }
        false
    }
    let mut out = Vec::new();
    for k in k_lo..=k_hi {
        if admits(k, 1, 1, params) {
            out.push(k);
        }
    }
    Ok(out)
}

/// One interval [(p−ε)/K, p/K] of some I_p; `pidx` indexes the profit grid
/// and `k` is the good integer. Kept lean: tens of millions of these exist
/// at fine resolutions.
#[derive(Clone, Copy)]
struct Interval {
    lo: f64,
    hi: f64,
    pidx: u32,
    k: u32,
}

/// Cached construction products shared by callers that need more than the
/// base set itself: the generated tower and its sorted top-set multiples
/// over [1−2ε, 2].
#[derive(Clone)]
pub(crate) struct BaseSupport {
    pub(crate) base: Arc<Vec<f64>>,
    pub(crate) tower: Arc<SetTower>,
    pub(crate) multiples: Arc<Vec<Multiple>>,
}

thread_local! {
    static SUPPORT_CACHE: RefCell<BTreeMap<(u64, Vec<u64>), BaseSupport>> =
        RefCell::new(BTreeMap::new());
}

/// Memoized base-set construction. The same (ε, δ-schedule) pair recurs for
/// every profit octave of a solve and across benchmark cells; rebuilding the
/// interval system each time would dominate the runtime.
pub(crate) fn cached_support(eps: f64, params: &TowerParams) -> Result<BaseSupport> {
    let key = params.cache_key();
    if let Some(hit) = SUPPORT_CACHE.with(|c| c.borrow().get(&key).cloned()) {
        return Ok(hit);
    }
    let support = build_support(eps, params)?;
    SUPPORT_CACHE.with(|c| {
        let mut map = c.borrow_mut();
        if map.len() >= SUPPORT_CACHE_CAP {
            map.clear();
        }
        map.insert(key, support.clone());
    });
    Ok(support)
}

/// The profit grid {1, 1+ε, …, 1+⌊1/ε⌋ε}.
fn profit_grid(eps: f64) -> Vec<f64> {
    let n = (1.0 / eps).floor() as usize;
    (0..=n).map(|i| 1.0 + i as f64 * eps).collect()
}

fn build_support(eps: f64, params: &TowerParams) -> Result<BaseSupport> {
    if !crate::tol::approx_eq(eps, params.eps) {
        return Err(Error::Domain(format!(
            "eps = {eps} disagrees with the schedule's eps = {}",
            params.eps
        )));
    }
    if 1.0 / eps > BASE_GRID_LIMIT {
        return Err(Error::Domain(format!(
            "eps = {eps} needs a profit grid beyond {BASE_GRID_LIMIT} points"
        )));
    }
    let d1 = params.deltas[0];
    let ps = profit_grid(eps);
    let np = ps.len();

    // Interval system: one record per (grid profit, good integer).
    let prefixes: Vec<u64> = prefix_levels(params)
        .pop()
        .unwrap()
        .into_keys()
        .collect();
    let mut by_lo: Vec<Interval> = Vec::new();
    let mut scratch: Vec<u64> = Vec::new();
    for (pidx, &p) in ps.iter().enumerate() {
        let (k_lo, k_hi) = final_band(p, d1)?;
        scratch.clear();
        if prefixes.len() == 1 && prefixes[0] == 1 {
            scratch.extend(k_lo..=k_hi);
        } else {
            for &pref in &prefixes {
                let j_lo = k_lo.div_ceil(pref).max(1);
                let j_hi = k_hi / pref;
                for j in j_lo..=j_hi {
                    scratch.push(pref * j);
                }
            }
            scratch.sort_unstable();
            scratch.dedup();
        }
        if scratch.is_empty() {
            return Err(Error::Construction(format!(
                "no good integers for grid profit {p}: the interval union I_p is empty"
            )));
        }
        if by_lo.len() + scratch.len() > MAX_INTERVAL_RECORDS {
            return Err(Error::Domain(
                "interval system too large to materialize".into(),
            ));
        }
        for &k in &scratch {
            debug_assert!(k <= u32::MAX as u64);
            let kf = k as f64;
            by_lo.push(Interval {
                lo: (p - eps) / kf,
                hi: p / kf,
                pidx: pidx as u32,
                k: k as u32,
            });
        }
        // Larger K means an interval entirely to the left: p/(K+1) ≤ (p−ε)/K
        // holds whenever p ≥ ε(K+1), which the final band guarantees. So the
        // intervals of one profit are pairwise disjoint.
        debug_assert!(scratch.windows(2).all(|w| {
            let right_lo = (p - eps) / w[0] as f64;
            let left_hi = p / w[1] as f64;
            left_hi <= right_lo * (1.0 + VERIFY_REL_TOL)
        }));
    }

    // Greedy hitting set: repeatedly take the point contained in the most
    // intervals of still-unhit profits (leftmost on ties). The maximum is
    // always attained at some interval's left endpoint, so a single sweep
    // over endpoint events per round finds it; records of hit profits are
    // compacted away before the next round.
    by_lo.sort_unstable_by(|a, b| {
        a.lo.total_cmp(&b.lo)
            .then(a.pidx.cmp(&b.pidx))
            .then(a.k.cmp(&b.k))
    });
    let mut by_hi: Vec<(f64, u32)> = by_lo.iter().map(|r| (r.hi, r.pidx)).collect();
    by_hi.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut hit = vec![false; np];
    let mut remaining = np;
    let mut chosen: Vec<f64> = Vec::new();
    while remaining > 0 {
        let (best_x, best_cnt) = {
            let mut best_x = f64::NAN;
            let mut best_c = 0usize;
            let mut c = 0usize;
            let (mut i, mut j) = (0usize, 0usize);
            while i < by_lo.len() {
                let x = by_lo[i].lo;
                while j < by_hi.len() && by_hi[j].0 < x {
                    c -= 1;
                    j += 1;
                }
                while i < by_lo.len() && by_lo[i].lo == x {
                    c += 1;
                    i += 1;
                }
                if c > best_c {
                    best_c = c;
                    best_x = x;
                }
            }
            (best_x, best_c)
        };
        assert!(best_cnt > 0, "unhit profit left without any interval");
        chosen.push(best_x);
        let mut newly = 0usize;
        for r in by_lo.iter() {
            if r.lo > best_x {
                break;
            }
            if r.hi >= best_x && !hit[r.pidx as usize] {
                hit[r.pidx as usize] = true;
                newly += 1;
            }
        }
        debug_assert!(newly == best_cnt);
        remaining -= newly;
        by_lo.retain(|r| !hit[r.pidx as usize]);
        by_hi.retain(|e| !hit[e.1 as usize]);
    }
    drop(by_lo);
    drop(by_hi);
    chosen.sort_by(f64::total_cmp);
    for &x in &chosen {
        assert!(
            x >= d1 * (1.0 - VERIFY_REL_TOL) && x <= 4.0 * d1 * (1.0 + VERIFY_REL_TOL),
            "chosen base point {x} escapes [delta_1, 4 delta_1]"
        );
    }

    let tower = generate_tower(&chosen, params)?;
    let multiples = sorted_multiples(tower.top(), 1.0 - 2.0 * eps, 2.0);
    for &p in &ps {
        let ok = largest_multiple_at_most(&multiples, p)
            .map(|m| m.value >= p - eps * (1.0 + RATIO_TOL))
            .unwrap_or(false);
        if !ok {
            return Err(Error::Construction(format!(
                "constructed base set leaves grid profit {p} without a multiple in [p - eps, p]"
            )));
        }
    }
    Ok(BaseSupport {
        base: Arc::new(chosen),
        tower: Arc::new(tower),
        multiples: Arc::new(multiples),
    })
}

/// Builds a base set Δ_1 ⊂ [δ_1, 4δ_1] such that every profit-grid point
/// p ∈ {1, 1+ε, …, 1+⌊1/ε⌋ε} has a top-set multiple in [p−ε, p].
///
/// Construction: materialize the interval unions I_p, then greedily pick the
/// point hitting the most unhit I_p (leftmost on ties) until all are hit.
/// The result is verified against the stated guarantee before returning; an
/// empty I_p or a failed verification is a construction error (surfaced, not
/// patched). Results are memoized per thread.
pub fn construct_base_set(eps: f64, params: &TowerParams) -> Result<Vec<f64>> {
    Ok(cached_support(eps, params)?.base.as_ref().clone())
}

/// Where one profit landed: its group, the adjusted value k·y ≤ p, and the
/// full generator chain of y (so every level can reuse the same assignment
/// with its own quantum chain[i]).
#[derive(Debug, Clone)]
pub struct Assignment {
    pub group: usize,
    pub x: f64,
    pub y: f64,
    pub k: i64,
    pub value: f64,
    pub chain: Vec<f64>,
}

/// A partition of a profit multiset into r groups with per-group base sets.
#[derive(Debug, Clone)]
pub struct GroupedProfits {
    /// Item indices per group (into the input profit slice).
    pub groups: Vec<Vec<usize>>,
    /// Sorted distinct level-1 generators used by each group.
    pub bases: Vec<Vec<f64>>,
    /// Per input profit, its placement (indexed like the input).
    pub assignments: Vec<Assignment>,
}

impl GroupedProfits {
    /// Plain-text dump, one set per line, for diagnostic output.
    pub fn dump(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        for (j, (base, group)) in self.bases.iter().zip(self.groups.iter()).enumerate() {
            let _ = write!(out, "base {}:", j + 1);
            for x in base {
                let _ = write!(out, " {x:.12}");
            }
            out.push('\n');
            let _ = write!(out, "group {}:", j + 1);
            for i in group {
                let _ = write!(out, " {i}");
            }
            out.push('\n');
        }
        out
    }
}

/// Splits profits in [1, 2] into r groups such that each group's members are
/// within ε (from below) of multiples of a top set generated by a small
/// per-group base set.
///
/// Follows the grouping construction: build one global base set and tower,
/// assign every profit to its closest top-set multiple k·y ≤ p, bucket
/// profits by the level-1 generator x of y, drop empty buckets, cut buckets
/// into chunks of at most s = ⌈m/D⌉ items (D = max{r, number of nonempty
/// buckets}), and pack the at most 2D chunks into r groups of at most
/// ⌈2D/r⌉ chunks each, keeping chunks of the same x adjacent. The per-group
/// item bound s·⌈2D/r⌉ is asserted.
///
/// Requires r ≤ min{c·δ_1/ε, m} with c = [`PARTITION_CAPACITY_CONSTANT`].
pub fn partition_profits(
    profits: &[f64],
    r: usize,
    eps: f64,
    params: &TowerParams,
) -> Result<GroupedProfits> {
    let m = profits.len();
    if m == 0 {
        return Err(Error::Domain("empty profit multiset".into()));
    }
    if r == 0 {
        return Err(Error::Domain("r = 0, expected a positive group count".into()));
    }
    let d1 = params.deltas[0];
    let r_cap = PARTITION_CAPACITY_CONSTANT * d1 / eps;
    if r as f64 > r_cap * (1.0 + RATIO_TOL) || r > m {
        return Err(Error::Domain(format!(
            "r = {r} exceeds min(c * delta_1 / eps, m) = min({r_cap}, {m})"
        )));
    }
    for &p in profits {
        if !(p.is_finite() && p >= 1.0 - RATIO_TOL && p <= 2.0 + RATIO_TOL) {
            return Err(Error::Domain(format!("profit {p} outside [1, 2]")));
        }
    }
    let support = cached_support(eps, params)?;

    let mut placements: Vec<(usize, Multiple)> = Vec::with_capacity(m);
    for &p in profits.iter() {
        let mm = largest_multiple_at_most(&support.multiples, p).ok_or_else(|| {
            Error::Construction(format!("no top-set multiple at or below profit {p}"))
        })?;
        // The base construction guarantees a multiple within ε below every
        // grid profit {1, 1+ε, ...}; an arbitrary real in [1, 2] first rounds
        // down to the grid (≤ ε) and then to that grid point's multiple
        // (≤ ε), so 2ε is the contract for general multisets.
        if mm.value < p - 2.0 * eps * (1.0 + RATIO_TOL) {
            return Err(Error::Construction(format!(
                "closest top-set multiple {} misses profit {p} by more than 2*eps",
                mm.value
            )));
        }
        let chain_idx = find_generator_indices(mm.generator, &support.tower)?;
        placements.push((chain_idx[0], mm));
    }

    // Bucket by level-1 generator; only nonempty buckets exist in the map.
    let mut buckets: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (item, &(xi, _)) in placements.iter().enumerate() {
        buckets.entry(xi).or_default().push(item);
    }
    let d_cap = r.max(buckets.len());
    let s = m.div_ceil(d_cap);
    let mut chunks: Vec<Vec<usize>> = Vec::new();
    for items in buckets.values() {
        for chunk in items.chunks(s) {
            chunks.push(chunk.to_vec());
        }
    }
    assert!(
        chunks.len() <= 2 * d_cap,
        "{} chunks exceed the 2D bound with D = {d_cap}",
        chunks.len()
    );
    let per_group = chunks.len().div_ceil(r);
    let group_cap = s * (2 * d_cap).div_ceil(r);

    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); r];
    for (ci, chunk) in chunks.iter().enumerate() {
        groups[ci / per_group.max(1)].extend_from_slice(chunk);
    }
    for (j, g) in groups.iter().enumerate() {
        assert!(
            g.len() <= group_cap,
            "group {j} holds {} items, exceeding s * ceil(2D/r) = {group_cap}",
            g.len()
        );
    }

    let mut assignments: Vec<Assignment> = Vec::with_capacity(m);
    for (xi, mm) in &placements {
        let chain_idx = find_generator_indices(mm.generator, &support.tower)?;
        debug_assert_eq!(chain_idx[0], *xi);
        let chain: Vec<f64> = chain_idx
            .iter()
            .zip(support.tower.levels.iter())
            .map(|(&i, lvl)| lvl[i])
            .collect();
        assignments.push(Assignment {
            group: usize::MAX,
            x: chain[0],
            y: mm.generator,
            k: mm.multiplicity,
            value: mm.value,
            chain,
        });
    }
    for (j, g) in groups.iter().enumerate() {
        for &item in g {
            assignments[item].group = j;
        }
    }
    debug_assert!(assignments.iter().all(|a| a.group != usize::MAX));

    let mut bases: Vec<Vec<f64>> = Vec::with_capacity(r);
    for g in &groups {
        let mut xs: Vec<f64> = g.iter().map(|&i| assignments[i].x).collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup_by(|a, b| (*a - *b).abs() <= REL_TOL * a.abs().max(1.0));
        bases.push(xs);
    }
    Ok(GroupedProfits {
        groups,
        bases,
        assignments,
    })
}

/// Counting mode for [`count_product_representable`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountMode {
    /// Integers t ≤ T_d admitting a factorization n_1⋯n_d with every prefix
    /// product in (T_i/2, T_i].
    Brute,
    /// Ordered prime d-tuples (p_1, …, p_d) with every prefix product in
    /// (T_i/2, T_i], counted with multiplicity.
    Tuples,
}

/// Exact counts for the product-representability question at small scale.
///
/// Requires T_1 ≥ 2, T_{i+1} ≥ 2·T_i, and T_d ≤ 2^20. The two modes
/// cross-check each other: every valid prime tuple multiplies out to a
/// representable integer and at most d! orderings share one product, so
/// tuples ≤ d!·brute. The reverse does not hold (a representable integer
/// need not factor into primes within the bands: T = (4) has brute = 2 for
/// {3, 4} but only the tuple (3), since 4 = 2·2 puts no prime in (2, 4]).
pub fn count_product_representable(thresholds: &[f64], mode: CountMode) -> Result<u64> {
    if thresholds.is_empty() {
        return Err(Error::Domain("empty threshold chain".into()));
    }
    for &t in thresholds {
        if !t.is_finite() {
            return Err(Error::Domain(format!("threshold {t} is not finite")));
        }
    }
    if thresholds[0] < 2.0 {
        return Err(Error::Domain(format!(
            "T_1 = {}, expected at least 2",
            thresholds[0]
        )));
    }
    for w in thresholds.windows(2) {
        if w[1] < 2.0 * w[0] {
            return Err(Error::Domain(format!(
                "threshold step {} -> {} grows by less than 2x",
                w[0], w[1]
            )));
        }
    }
    let td_f = *thresholds.last().unwrap();
    if td_f > (1 << 20) as f64 {
        return Err(Error::Domain(format!(
            "T_d = {td_f} exceeds the 2^20 counting limit"
        )));
    }
    let td = td_f.floor() as usize;
    let in_band = |v: usize, t: f64| -> bool { (v as f64) > t / 2.0 && (v as f64) <= t };
    match mode {
        CountMode::Brute => {
            let mut cur = vec![false; td + 1];
            for (v, slot) in cur.iter_mut().enumerate().skip(1) {
                *slot = in_band(v, thresholds[0]);
            }
            for &t in &thresholds[1..] {
                let mut next = vec![false; td + 1];
                for v in 1..=td {
                    if !cur[v] {
                        continue;
                    }
                    let k_min = (t / (2.0 * v as f64)).floor() as usize + 1;
                    let k_max = (t / v as f64).floor() as usize;
                    for k in k_min..=k_max {
                        let w = v * k;
                        if w <= td && in_band(w, t) {
                            next[w] = true;
                        }
                    }
                }
                cur = next;
            }
            Ok(cur.iter().filter(|b| **b).count() as u64)
        }
        CountMode::Tuples => {
            let primes = sieve_primes(td);
            let mut cur: Vec<u64> = vec![0; td + 1];
            for &p in &primes {
                if in_band(p, thresholds[0]) {
                    cur[p] = 1;
                }
            }
            for &t in &thresholds[1..] {
                let mut next: Vec<u64> = vec![0; td + 1];
                for v in 1..=td {
                    if cur[v] == 0 {
                        continue;
                    }
                    let q_min = (t / (2.0 * v as f64)).floor() as usize + 1;
                    let q_max = (t / v as f64).floor() as usize;
                    let start = primes.partition_point(|&p| p < q_min);
                    for &p in &primes[start..] {
                        if p > q_max {
                            break;
                        }
                        let w = v * p;
                        if w <= td && in_band(w, t) {
                            next[w] += cur[v];
                        }
                    }
                }
                cur = next;
            }
            Ok(cur.iter().sum())
        }
    }
}

fn sieve_primes(limit: usize) -> Vec<usize> {
    if limit < 2 {
        return Vec::new();
    }
    let mut is_prime = vec![true; limit + 1];
    is_prime[0] = false;
    is_prime[1] = false;
    let mut i = 2;
    while i * i <= limit {
        if is_prime[i] {
            let mut j = i * i;
            while j <= limit {
                is_prime[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    (2..=limit).filter(|&v| is_prime[v]).collect()
}
