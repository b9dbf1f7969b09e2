//! Monotone step-function algebra.
//!
//! A [`StepFunction`] is the universal currency of the solver: profit
//! profiles map a weight budget x to the best achievable profit f(x). All
//! functions here are nonnegative, nondecreasing, and stored in canonical
//! form (both coordinates strictly increasing). The zero function is the
//! empty point list.
//!
//! Besides evaluation and capping, this module provides the exact
//! (max,+)-convolution, value rounding onto geometric grids, and the
//! divide-and-conquer approximate merge of many functions.

use crate::error::{Error, Result};
use crate::tol::{REL_TOL, VERIFY_REL_TOL};

/// When merging two step functions inside `merge_dnc`, the exact quadratic
/// convolution is used as long as the breakpoint-pair count stays below this
/// limit; larger nodes switch to the grid-window merge, which computes the
/// identical rounded result in O(grid · window) time.
const EXACT_NODE_LIMIT: usize = 4_000_000;

/// Grids longer than this are never materialized. Rounding requests finer
/// than the limit return the input unchanged, which satisfies the same
/// sandwich (with equality) and the same complexity bound, since the bound
/// scales with 1/ε.
const MAX_GRID_LEN: f64 = 32_000_000.0;

/// Monotone nondecreasing step function in canonical form.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    points: Vec<(f64, f64)>,
}

impl StepFunction {
    /// The zero function (empty breakpoint list; f(x) = 0 everywhere).
    pub fn zero() -> Self {
        StepFunction { points: Vec::new() }
    }

    /// Builds the upper envelope of an arbitrary set of (x, y) pairs.
    ///
    /// Points with y ≤ 0 contribute nothing (the function is 0 before the
    /// first breakpoint by convention) and are dropped. Non-finite
    /// coordinates or negative x are rejected.
    pub fn from_points<I: IntoIterator<Item = (f64, f64)>>(pts: I) -> Result<Self> {
        let mut v = Vec::new();
        for (x, y) in pts {
            if !x.is_finite() || !y.is_finite() {
                return Err(Error::Domain("non-finite breakpoint coordinate".into()));
            }
            if x < 0.0 {
                return Err(Error::Domain(format!("negative breakpoint x = {x}")));
            }
            if y > 0.0 {
                v.push((x, y));
            }
        }
        Ok(envelope(v))
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn complexity(&self) -> usize {
        self.points.len()
    }

    pub fn is_zero(&self) -> bool {
        self.points.is_empty()
    }

    /// f(x): the y of the largest breakpoint with x_i ≤ x, or 0 if none.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !x.is_finite() || x < 0.0 {
            return Err(Error::Domain(format!("eval at x = {x}, expected x >= 0")));
        }
        let idx = self.points.partition_point(|&(px, _)| px <= x);
        Ok(if idx == 0 { 0.0 } else { self.points[idx - 1].1 })
    }

    /// Largest value attained (0 for the zero function).
    pub fn max_value(&self) -> f64 {
        self.points.last().map_or(0.0, |&(_, y)| y)
    }

    /// Smallest positive value attained, if any.
    pub fn min_positive_value(&self) -> Option<f64> {
        self.points.first().map(|&(_, y)| y)
    }

    /// Pointwise min{f, B} in canonical form.
    pub fn cap(&self, b: f64) -> Result<StepFunction> {
        if !(b > 0.0) {
            return Err(Error::Domain(format!("cap bound B = {b}, expected B > 0")));
        }
        Ok(envelope(
            self.points.iter().map(|&(x, y)| (x, y.min(b))).collect(),
        ))
    }

    /// Restriction to x ≤ xmax (breakpoints beyond xmax dropped).
    pub fn truncate_domain(&self, xmax: f64) -> StepFunction {
        let idx = self.points.partition_point(|&(px, _)| px <= xmax);
        StepFunction {
            points: self.points[..idx].to_vec(),
        }
    }

    /// Multiplies every value by c > 0 (x-coordinates unchanged).
    pub fn scale_values(&self, c: f64) -> Result<StepFunction> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::Domain(format!("scale factor {c}, expected > 0")));
        }
        Ok(StepFunction {
            points: self.points.iter().map(|&(x, y)| (x, y * c)).collect(),
        })
    }

    /// Multiplies both coordinates by c > 0.
    pub fn scale_xy(&self, c: f64) -> Result<StepFunction> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::Domain(format!("scale factor {c}, expected > 0")));
        }
        Ok(StepFunction {
            points: self.points.iter().map(|&(x, y)| (x * c, y * c)).collect(),
        })
    }
}

/// Canonicalizes a raw point set into its upper envelope.
///
/// Keeps, in order of increasing x, only points whose value strictly exceeds
/// everything at smaller or equal x. Callers must have filtered y ≤ 0.
fn envelope(mut pts: Vec<(f64, f64)>) -> StepFunction {
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    for (x, y) in pts {
        debug_assert!(y > 0.0 && x >= 0.0);
        match out.last() {
            Some(&(_, ly)) if y <= ly => {}
            _ => out.push((x, y)),
        }
    }
    StepFunction { points: out }
}

/// Pointwise maximum of two step functions.
pub fn pointwise_max(f: &StepFunction, g: &StepFunction) -> StepFunction {
    pointwise_max_many(&[f, g])
}

/// Pointwise maximum of any number of step functions.
///
/// The max of monotone step functions equals the upper envelope of all their
/// breakpoints, so complexity is bounded by the sum of the inputs'.
pub fn pointwise_max_many(fs: &[&StepFunction]) -> StepFunction {
    let mut pts = Vec::with_capacity(fs.iter().map(|f| f.complexity()).sum());
    for f in fs {
        pts.extend_from_slice(f.points());
    }
    envelope(pts)
}

/// Exact (max,+)-convolution: (f ⊕ g)(x) = max over x' of f(x') + g(x − x').
///
/// Enumerates all breakpoint pairs, including each function's implicit
/// (0, 0) origin, and canonicalizes. Quadratic in the complexities.
pub fn exact_maxplus(f: &StepFunction, g: &StepFunction) -> StepFunction {
    let fp = f.points();
    let gp = g.points();
    let mut pts = Vec::with_capacity((fp.len() + 1) * (gp.len() + 1));
    pts.extend_from_slice(fp);
    pts.extend_from_slice(gp);
    for &(fx, fy) in fp {
        for &(gx, gy) in gp {
            pts.push((fx + gx, fy + gy));
        }
    }
    envelope(pts)
}

/// A geometric value grid anchored at `anchor`: level k holds
/// anchor·base^k, built by repeated multiplication so the table is exactly
/// reproducible and monotone.
#[derive(Debug)]
pub(crate) struct PowerGrid {
    pows: Vec<f64>,
}

impl PowerGrid {
    /// Grid covering [anchor, top]. `base` must exceed 1.
    pub(crate) fn new(anchor: f64, base: f64, top: f64) -> PowerGrid {
        debug_assert!(anchor > 0.0 && base > 1.0 && top.is_finite());
        let mut pows = vec![anchor];
        let mut v = anchor;
        while v <= top {
            v *= base;
            pows.push(v);
        }
        PowerGrid { pows }
    }

    #[allow(dead_code)]
    pub(crate) fn len(&self) -> usize {
        self.pows.len()
    }

    pub(crate) fn value(&self, k: usize) -> f64 {
        self.pows[k]
    }

    /// Largest k with pows[k] ≤ y. Requires y ≥ anchor·(1 − REL_TOL);
    /// values microscopically below the anchor snap to level 0.
    pub(crate) fn floor_index(&self, y: f64) -> usize {
        let anchor = self.pows[0];
        debug_assert!(y >= anchor * (1.0 - VERIFY_REL_TOL));
        if y <= anchor {
            return 0;
        }
        let base = self.pows[1] / self.pows[0];
        let guess = ((y / anchor).ln() / base.ln()).floor();
        let mut k = if guess.is_finite() && guess > 0.0 {
            (guess as usize).min(self.pows.len() - 1)
        } else {
            0
        };
        while k + 1 < self.pows.len() && self.pows[k + 1] <= y {
            k += 1;
        }
        while k > 0 && self.pows[k] > y {
            k -= 1;
        }
        k
    }
}

/// Rounds every value of f down onto the grid {A·(1+ε)^k}.
///
/// The result f̃ satisfies f̃ ≤ f ≤ (1+ε)·f̃ pointwise. Requires the range
/// of f to lie in {0} ∪ [A, ∞).
pub fn round_down_powers(f: &StepFunction, eps: f64, a: f64) -> Result<StepFunction> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::Domain(format!("anchor A = {a}, expected A > 0")));
    }
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::Domain(format!("eps = {eps}, expected eps > 0")));
    }
    if f.is_zero() {
        return Ok(StepFunction::zero());
    }
    let lo = f.min_positive_value().unwrap();
    if lo < a * (1.0 - REL_TOL) {
        return Err(Error::Domain(format!(
            "function value {lo} lies below the rounding anchor {a}"
        )));
    }
    if (f.max_value() / a).ln() / eps.ln_1p() > MAX_GRID_LEN {
        return Ok(f.clone());
    }
    let grid = PowerGrid::new(a, 1.0 + eps, f.max_value());
    Ok(round_on_grid(f, &grid))
}

/// Rounds f down onto an existing grid (same semantics as
/// `round_down_powers`). Idempotent for inputs already on the grid.
fn round_on_grid(f: &StepFunction, grid: &PowerGrid) -> StepFunction {
    envelope(
        f.points()
            .iter()
            .map(|&(x, y)| (x, grid.value(grid.floor_index(y))))
            .collect(),
    )
}

/// Approximate (max,+)-merge of many step functions (balanced
/// divide-and-conquer with per-level value rounding).
///
/// Every input's range must lie in {0} ∪ [A·(1−1e-9), B·(1+1e-9)]. The
/// result f̃ satisfies f̃ ≤ F ≤ (1+ε)·f̃ where F is the exact fold, because
/// with L = ⌈log2 m⌉ there are L+1 rounding layers (one at the leaves, one
/// after each internal convolution) at per-layer factor 1 + γ with
/// γ = ln(1+ε)/(L+1), and (1+γ)^(L+1) ≤ e^((L+1)γ) = 1 + ε exactly.
pub fn merge_dnc(fs: &[StepFunction], eps: f64, a: f64, b: f64) -> Result<StepFunction> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::Domain(format!("eps = {eps}, expected eps > 0")));
    }
    if !(a > 0.0) || !(b >= a * (1.0 - REL_TOL)) {
        return Err(Error::Domain(format!(
            "invalid range bounds A = {a}, B = {b}"
        )));
    }
    let live: Vec<&StepFunction> = fs.iter().filter(|f| !f.is_zero()).collect();
    if live.is_empty() {
        return Ok(StepFunction::zero());
    }
    for f in &live {
        let lo = f.min_positive_value().unwrap();
        let hi = f.max_value();
        if lo < a * (1.0 - VERIFY_REL_TOL) || hi > b * (1.0 + VERIFY_REL_TOL) {
            return Err(Error::Domain(format!(
                "input range [{lo}, {hi}] escapes [{a}, {b}]"
            )));
        }
    }
    if live.len() == 1 {
        return round_down_powers(live[0], eps, a);
    }
    let m = live.len();
    let layers = (usize::BITS - (m - 1).leading_zeros()) as f64 + 1.0; // ⌈log2 m⌉ + 1
    let gamma = eps.ln_1p() / layers;
    let top = b * m as f64 * 2.0;
    if (top / a).ln() / gamma.ln_1p() > MAX_GRID_LEN {
        // The grid would be too fine to materialize; the unrounded exact
        // fold meets the sandwich with equality at such ε.
        return Ok(live
            .into_iter()
            .fold(StepFunction::zero(), |acc, f| exact_maxplus(&acc, f)));
    }
    // Partial sums of m functions bounded by B each stay below m·B; a factor
    // 2 of headroom absorbs the 1e-9 range slack.
    let grid = PowerGrid::new(a, 1.0 + gamma, top);
    let leaves: Vec<StepFunction> = live.iter().map(|f| round_on_grid(f, &grid)).collect();
    Ok(fold_balanced(&leaves, &grid))
}

fn fold_balanced(fs: &[StepFunction], grid: &PowerGrid) -> StepFunction {
    match fs.len() {
        0 => StepFunction::zero(),
        1 => fs[0].clone(),
        n => {
            let mid = n / 2;
            let l = fold_balanced(&fs[..mid], grid);
            let r = fold_balanced(&fs[mid..], grid);
            merge_node(&l, &r, grid)
        }
    }
}

/// One divide-and-conquer node: the grid-rounded (max,+)-convolution of two
/// grid-valued inputs. Uses the exact quadratic convolution for small
/// nodes and the window merge (identical output) for large ones.
fn merge_node(l: &StepFunction, r: &StepFunction, grid: &PowerGrid) -> StepFunction {
    if l.is_zero() {
        return r.clone();
    }
    if r.is_zero() {
        return l.clone();
    }
    if l.complexity().saturating_mul(r.complexity()) <= EXACT_NODE_LIMIT {
        round_on_grid(&exact_maxplus(l, r), grid)
    } else {
        window_merge(l, r, grid)
    }
}

/// Densifies a grid-valued step function into per-level minimum weights:
/// out[k] = min x with f(x) ≥ grid.value(k), for k up to floor_index(max).
fn densify(f: &StepFunction, grid: &PowerGrid) -> Vec<f64> {
    let kmax = grid.floor_index(f.max_value());
    let mut out = vec![f64::INFINITY; kmax + 1];
    let mut next = 0usize;
    for &(x, y) in f.points() {
        let k = grid.floor_index(y);
        for slot in out.iter_mut().take(k + 1).skip(next) {
            *slot = x;
        }
        next = next.max(k + 1);
    }
    debug_assert!(next == kmax + 1);
    out
}

/// Grid-window (max,+)-merge of two grid-valued functions, bit-identical to
/// `round_on_grid(exact_maxplus(l, r))`.
///
/// For output level k, the optimal breakpoint pair (u, v) with
/// value(u) + value(v) ≥ value(k) must have its larger side within
/// w = ⌈log_base 2⌉ + 2 levels of k (otherwise the sum falls short of
/// value(k)), so scanning offsets d ∈ [1, w] from each side plus the two
/// single-function candidates covers every undominated pair.
fn window_merge(l: &StepFunction, r: &StepFunction, grid: &PowerGrid) -> StepFunction {
    let xl = densify(l, grid);
    let xr = densify(r, grid);
    let kmax_out = grid.floor_index_of_sum(l.max_value(), r.max_value());
    let mut out = vec![f64::INFINITY; kmax_out + 1];
    for (k, slot) in out.iter_mut().enumerate() {
        let mut best = f64::INFINITY;
        if k < xl.len() {
            best = best.min(xl[k]);
        }
        if k < xr.len() {
            best = best.min(xr[k]);
        }
        *slot = best;
    }
    let base = grid.value(1) / grid.value(0);
    let w = (2.0f64.ln() / base.ln()).ceil() as usize + 2;
    pair_scan(&xl, &xr, &mut out, grid, w);
    pair_scan(&xr, &xl, &mut out, grid, w);
    let pts: Vec<(f64, f64)> = out
        .iter()
        .enumerate()
        .filter(|(_, x)| x.is_finite())
        .map(|(k, &x)| (x, grid.value(k)))
        .collect();
    envelope(pts)
}

impl PowerGrid {
    /// floor_index of a + b without constructing the sum's grid overflow;
    /// the grid is always built with headroom for partial sums.
    fn floor_index_of_sum(&self, a: f64, b: f64) -> usize {
        let s = a + b;
        debug_assert!(s <= *self.pows.last().unwrap() * (1.0 + VERIFY_REL_TOL));
        self.floor_index(s.min(*self.pows.last().unwrap()))
    }
}

/// Scans pairs whose `major` side sits d ∈ [1, w] levels below the output
/// level k, pairing it with the cheapest feasible `minor` level. For fixed
/// d the minimal feasible minor level is nondecreasing in k, so a moving
/// pointer makes each (d, ·) sweep linear.
fn pair_scan(major: &[f64], minor: &[f64], out: &mut [f64], grid: &PowerGrid, w: usize) {
    let kmax_out = out.len() - 1;
    for d in 1..=w {
        if d > kmax_out {
            break;
        }
        let mut v = 0usize;
        let k_hi = kmax_out.min(major.len() - 1 + d);
        for k in d..=k_hi {
            let u = k - d;
            let need = grid.value(k);
            let have_u = grid.value(u);
            while v < minor.len() && have_u + grid.value(v) < need {
                v += 1;
            }
            if v >= minor.len() {
                break; // thresholds only grow with k for fixed d
            }
            let cand = major[u] + minor[v];
            if cand < out[k] {
                out[k] = cand;
            }
        }
    }
}
