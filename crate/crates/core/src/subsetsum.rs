//! Subset-sum sketching for items whose profit equals their weight.
//!
//! A [`SumSketch`] is a small list of attainable subset sums that covers
//! every attainable sum s ≤ W from below within ε·W. The solver uses it for
//! medium-unit-profit items, whose profit function is (a scaled copy of) the
//! subset-sum profile, so a capacity-indexed envelope over sketch values is
//! already the whole profit function.
//!
//! Internal scheme (the published contract is coverage + soundness + size;
//! the scheme itself is an implementation choice): dynamic programming over
//! value cells of width ζ = εW/4, keeping the smallest and the largest
//! reached sum per cell. Keeping both endpoints makes the cell loss stable
//! under further items instead of accumulating: if a candidate u ∈ [s−2ζ, s]
//! lands in a cell whose maximum is still ≤ s, that maximum is an even
//! better representative; otherwise the cell maximum overshoots s, so the
//! cell minimum sits within ζ below s. Either way some kept value lies in
//! [s − 2ζ, s], giving coverage ε·W/2, twice as strong as the contract.

use crate::error::{Error, Result};
use crate::instance::Item;
use crate::stepfn::StepFunction;
use crate::tol::{approx_eq, REL_TOL};

/// Hard guard: a sketch never holds more than this many values per 1/ε.
/// The cell structure yields at most 2·(4/ε + 2) = 8/ε + 4 values.
pub const SKETCH_SIZE_FACTOR: f64 = 16.0;

/// Multiplicative undershoot of [`subset_sum_profile`]: the returned f̃
/// satisfies f̃ ≤ f ≤ (1 + PROFILE_FACTOR·ε)·f̃ for ε ≤ 1/2.
pub const PROFILE_FACTOR: f64 = 2.0;

/// A sorted list of attainable subset sums covering [0, W].
#[derive(Debug, Clone)]
pub struct SumSketch {
    values: Vec<f64>,
    cap: f64,
    eps: f64,
}

impl SumSketch {
    /// Sketch values, ascending; the first is always 0.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// The reference capacity W the sketch was built for.
    pub fn capacity(&self) -> f64 {
        self.cap
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Largest sketch value ≤ s (within relative tolerance). For attainable
    /// s ≤ W this is at least s − ε·W/2 by the coverage guarantee.
    pub fn best_at(&self, s: f64) -> f64 {
        let idx = self
            .values
            .partition_point(|v| *v <= s * (1.0 + REL_TOL) + REL_TOL);
        if idx == 0 {
            0.0
        } else {
            self.values[idx - 1]
        }
    }
}

/// Builds a subset-sum sketch: every attainable sum s ≤ W has a sketch value
/// in [s − εW, s] (this implementation achieves [s − εW/2, s]), every sketch
/// value is itself attainable, and the size stays below 16/ε.
///
/// Weights above W are ignored (they fit no counted subset). Runs in
/// O(n/ε) time and O(1/ε) space.
pub fn subset_sum_sketch(weights: &[f64], w: f64, eps: f64) -> Result<SumSketch> {
    if !(w > 0.0) || !w.is_finite() {
        return Err(Error::Domain(format!("W = {w}, expected a positive real")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("eps = {eps}, expected 0 < eps < 1")));
    }
    for &wi in weights {
        if !(wi > 0.0) || !wi.is_finite() {
            return Err(Error::Domain(format!("weight {wi}, expected positive")));
        }
    }
    let zeta = eps * w / 4.0;
    let ncells = (w / zeta).floor() as usize + 2;
    let mut cells: Vec<Option<(f64, f64)>> = vec![None; ncells];
    let cell_of = |v: f64| -> usize { ((v / zeta).floor() as usize).min(ncells - 1) };
    let insert = |cells: &mut Vec<Option<(f64, f64)>>, v: f64| {
        let c = cell_of(v);
        match &mut cells[c] {
            Some((mn, mx)) => {
                if v < *mn {
                    *mn = v;
                }
                if v > *mx {
                    *mx = v;
                }
            }
            slot => *slot = Some((v, v)),
        }
    };
    insert(&mut cells, 0.0);
    let mut snapshot: Vec<f64> = Vec::with_capacity(2 * ncells);
    for &wi in weights {
        if wi > w * (1.0 + REL_TOL) {
            continue;
        }
        snapshot.clear();
        for cell in cells.iter().flatten() {
            snapshot.push(cell.0);
            if cell.1 > cell.0 {
                snapshot.push(cell.1);
            }
        }
        for &v in &snapshot {
            let s = v + wi;
            if s <= w * (1.0 + REL_TOL) {
                insert(&mut cells, s);
            }
        }
    }
    let mut values: Vec<f64> = Vec::new();
    for cell in cells.iter().flatten() {
        values.push(cell.0);
        if cell.1 > cell.0 {
            values.push(cell.1);
        }
    }
    debug_assert!(values.windows(2).all(|p| p[0] < p[1]));
    assert!(
        values.len() as f64 <= SKETCH_SIZE_FACTOR / eps,
        "sketch holds {} values, above the 16/eps = {} guard",
        values.len(),
        SKETCH_SIZE_FACTOR / eps
    );
    Ok(SumSketch {
        values,
        cap: w,
        eps,
    })
}

/// The profit profile of items with p_i = w_i, as a step function with
/// breakpoints (s', s') on the identity line.
///
/// Runs [`subset_sum_sketch`] at doubling capacities (from the smallest
/// weight up to the total weight) and merges the value lists; for any
/// attainable sum the rung just above it has additive error at most ε times
/// twice the sum, so f̃ ≤ f ≤ (1 + 2ε)·f̃ for ε ≤ 1/2.
pub fn subset_sum_profile(items: &[Item], eps: f64) -> Result<StepFunction> {
    subset_sum_profile_capped(items, eps, f64::INFINITY)
}

/// Like [`subset_sum_profile`] but stops the capacity ladder at the first
/// rung ≥ `cap`; values above `cap` are never needed by a caller that caps
/// there. The same approximation bound holds on [0, cap].
pub fn subset_sum_profile_capped(items: &[Item], eps: f64, cap: f64) -> Result<StepFunction> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("eps = {eps}, expected 0 < eps < 1")));
    }
    if !(cap > 0.0) {
        return Err(Error::Domain(format!("cap = {cap}, expected positive")));
    }
    for it in items {
        if !approx_eq(it.profit, it.weight) {
            return Err(Error::Contract(format!(
                "item with profit {} != weight {} in a subset-sum profile",
                it.profit, it.weight
            )));
        }
    }
    let weights: Vec<f64> = items
        .iter()
        .map(|it| it.weight)
        .filter(|&wi| wi <= cap * (1.0 + REL_TOL))
        .collect();
    if weights.is_empty() {
        return Ok(StepFunction::zero());
    }
    let wmin = weights.iter().cloned().fold(f64::INFINITY, f64::min);
    let total: f64 = weights.iter().sum();
    let top = total.min(cap);
    let mut union: Vec<f64> = Vec::new();
    let mut rung = wmin;
    loop {
        let filtered: Vec<f64> = weights
            .iter()
            .cloned()
            .filter(|&wi| wi <= rung * (1.0 + REL_TOL))
            .collect();
        let sketch = subset_sum_sketch(&filtered, rung, eps)?;
        union.extend_from_slice(sketch.values());
        if rung >= top {
            break;
        }
        rung *= 2.0;
    }
    union.sort_by(f64::total_cmp);
    union.dedup_by(|a, b| (*a - *b).abs() <= REL_TOL * a.abs().max(1.0));
    StepFunction::from_points(union.into_iter().filter(|&v| v > 0.0).map(|v| (v, v)))
}
