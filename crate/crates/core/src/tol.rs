//! Centralized numeric tolerances.
//!
//! All floating-point comparisons in the library go through these constants
//! so that the accuracy contract is auditable in one place.

/// Relative tolerance for structural decisions: snapping near-integers,
/// deduplicating set elements, recognizing quantum multiples, and checking
/// "p equals w" style preconditions. Values within this relative distance
/// are treated as equal.
pub const REL_TOL: f64 = 1e-12;

/// Relative slack allowed on top of proven multiplicative guarantees when a
/// test or verification step compares two f64 computations. Covers rounding
/// noise accumulated along O(n log n) arithmetic, not algorithmic error.
pub const VERIFY_REL_TOL: f64 = 1e-9;

/// Tolerance used when an integer is recovered from a ratio of two f64
/// values (generator chains, quantum multiplicities). Looser than `REL_TOL`
/// because the ratio compounds two roundings.
pub const RATIO_TOL: f64 = 1e-9;

/// Finite stand-in for "unreachable" in quantized weight profiles. Kept
/// finite so Monge-structure comparisons never see infinities; anything at
/// or above `BIG_THRESHOLD` is treated as unreachable on output.
pub const BIG: f64 = 1e18;

/// Threshold above which a quantized profile entry is considered
/// unreachable (see `BIG`).
pub const BIG_THRESHOLD: f64 = 1e17;

/// Slope used to extend convex weight sequences when padding SMAWK matrix
/// kernels out of range. At least `BIG`, so that any padded candidate lands
/// above `BIG_THRESHOLD` and clamps to unreachable instead of leaking a
/// phantom feasible entry.
pub const HUGE_SLOPE: f64 = 1e18;

/// Returns true when `a` and `b` are equal within `REL_TOL` relative to
/// their magnitude (absolute for values near zero).
pub fn approx_eq(a: f64, b: f64) -> bool {
    let scale = a.abs().max(b.abs()).max(1.0);
    (a - b).abs() <= REL_TOL * scale
}

/// Rounds `x` to the nearest integer if it is within `tol` (relative) of
/// one, otherwise returns `None`.
pub fn snap_to_integer(x: f64, tol: f64) -> Option<i64> {
    let r = x.round();
    let scale = x.abs().max(1.0);
    if (x - r).abs() <= tol * scale && r.abs() < 9.0e15 {
        Some(r as i64)
    } else {
        None
    }
}
