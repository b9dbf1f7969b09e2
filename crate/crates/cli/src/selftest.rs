//! Deterministic self-check suites behind `knapsack selftest`. Each suite
//! re-verifies one module against an independent reference at desk scale.
//! All randomness comes from fixed [`SplitMix64`] seeds, so two runs print
//! byte-identical output.

use std::fmt::Write as _;

use knapsack_fptas::oracle::{brute_force_profile, dp_profile};
use knapsack_fptas::smawk::{
    add_uniform, add_uniform_brute, smawk_argmax, QuantizedProfile, UniformFunction,
};
use knapsack_fptas::stepfn::{exact_maxplus, merge_dnc, StepFunction};
use knapsack_fptas::subsetsum::{subset_sum_sketch, SKETCH_SIZE_FACTOR};
use knapsack_fptas::towers::{
    construct_base_set, find_generator, generate_tower, partition_profits, TowerParams,
};
use knapsack_fptas::{solve, Item};

use crate::gen::{self, Dist, SplitMix64};

/// Suites in the order they run and print.
pub const SUITES: [&str; 6] = ["oracles", "stepfn", "smawk", "towers", "subsetsum", "solver"];

/// Valid `--corrupt` targets: each injects one artificial defect so a user
/// can confirm the selftest actually detects failures.
pub const CORRUPT_TARGETS: [&str; 1] = ["smawk"];

const TOL: f64 = 1e-9;

pub struct SuiteReport {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl SuiteReport {
    pub fn line(&self) -> String {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        format!("suite {}: {} ({})", self.name, verdict, self.detail)
    }
}

struct Check {
    count: usize,
    failed: usize,
    first: Option<String>,
}

impl Check {
    fn new() -> Check {
        Check { count: 0, failed: 0, first: None }
    }

    fn that(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        self.count += 1;
        if !ok {
            self.failed += 1;
            if self.first.is_none() {
                self.first = Some(msg());
            }
        }
    }

    fn report(self, name: &'static str, extra: &str) -> SuiteReport {
        let passed = self.failed == 0;
        let mut detail = if passed {
            format!("{} checks", self.count)
        } else {
            format!(
                "{} of {} checks failed; first: {}",
                self.failed,
                self.count,
                self.first.unwrap_or_default()
            )
        };
        if !extra.is_empty() {
            detail.push_str("; ");
            detail.push_str(extra);
        }
        SuiteReport { name, passed, detail }
    }
}

/// Runs the selected suites. `filter` restricts to one suite by name and
/// `corrupt` injects the named defect; unknown names are usage errors.
pub fn run(filter: Option<&str>, corrupt: Option<&str>) -> Result<Vec<SuiteReport>, String> {
    if let Some(f) = filter {
        if !SUITES.contains(&f) {
            return Err(format!(
                "unknown suite '{f}'; expected one of: {}",
                SUITES.join(", ")
            ));
        }
    }
    if let Some(c) = corrupt {
        if !CORRUPT_TARGETS.contains(&c) {
            return Err(format!(
                "unknown corruption target '{c}'; expected one of: {}",
                CORRUPT_TARGETS.join(", ")
            ));
        }
    }
    let mut out = Vec::new();
    for name in SUITES {
        if filter.is_some_and(|f| f != name) {
            continue;
        }
        out.push(match name {
            "oracles" => suite_oracles(),
            "stepfn" => suite_stepfn(),
            "smawk" => suite_smawk(corrupt == Some("smawk")),
            "towers" => suite_towers(),
            "subsetsum" => suite_subsetsum(),
            "solver" => suite_solver(),
            _ => unreachable!("suite list covers all names"),
        });
    }
    Ok(out)
}

fn rel_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= TOL * a.abs().max(b.abs()).max(1.0)
}

/// Random items with integer weights (subset sums stay exact in f64) and
/// integer profits, sized for the brute-force oracle.
fn small_items(rng: &mut SplitMix64, max_n: u64, max_w: u64) -> Vec<Item> {
    let n = 1 + rng.uniform(max_n) as usize;
    (0..n)
        .map(|_| Item {
            weight: rng.uniform(max_w) as f64,
            profit: rng.uniform(1_000) as f64,
        })
        .collect()
}

fn suite_oracles() -> SuiteReport {
    let mut c = Check::new();
    let mut rng = SplitMix64::new(0x6F7261);
    for _ in 0..40 {
        let items = small_items(&mut rng, 12, 30);
        let wmax: u64 = items.iter().map(|it| it.weight as u64).sum::<u64>().max(1);
        let brute = match brute_force_profile(&items) {
            Ok(f) => f,
            Err(e) => {
                c.that(false, || format!("brute force failed: {e}"));
                continue;
            }
        };
        let dp = match dp_profile(&items, wmax) {
            Ok(f) => f,
            Err(e) => {
                c.that(false, || format!("dp failed: {e}"));
                continue;
            }
        };
        for x in 0..=wmax {
            let (bv, dv) = (brute.eval(x as f64).unwrap(), dp.eval(x as f64).unwrap());
            c.that(rel_eq(bv, dv), || {
                format!("dp {dv} != brute {bv} at x = {x} on {items:?}")
            });
        }
    }
    c.report("oracles", "")
}

/// Random canonical staircase with integer breakpoints, so max-plus sums of
/// coordinates are exact.
fn random_step(rng: &mut SplitMix64) -> StepFunction {
    let k = 1 + rng.uniform(5) as usize;
    let mut xs: Vec<u64> = (0..k).map(|_| rng.uniform(24)).collect();
    xs.sort_unstable();
    xs.dedup();
    let mut y = 0.0;
    let mut pts = Vec::new();
    for x in xs {
        y += rng.uniform(50) as f64 / 10.0;
        pts.push((x as f64, y));
    }
    StepFunction::from_points(pts).expect("generated points are canonical")
}

fn suite_stepfn() -> SuiteReport {
    let mut c = Check::new();
    let mut rng = SplitMix64::new(0x73746570);
    for _ in 0..60 {
        let f = random_step(&mut rng);
        let g = random_step(&mut rng);
        let h = exact_maxplus(&f, &g);
        for x in 0..=50u64 {
            let x = x as f64;
            let mut want = 0.0f64;
            for &(xf, yf) in f.points() {
                if xf <= x {
                    want = want.max(yf + g.eval(x - xf).unwrap());
                }
            }
            for &(xg, yg) in g.points() {
                if xg <= x {
                    want = want.max(yg + f.eval(x - xg).unwrap());
                }
            }
            let got = h.eval(x).unwrap();
            c.that(rel_eq(got, want), || {
                format!("max-plus {got} != reference {want} at x = {x}")
            });
        }
    }
    for round in 0..30 {
        let m = 2 + rng.uniform(3) as usize;
        let fs: Vec<StepFunction> = (0..m).map(|_| random_step(&mut rng)).collect();
        let eps = if round % 2 == 0 { 0.25 } else { 0.1 };
        let mut exact = fs[0].clone();
        for f in &fs[1..] {
            exact = exact_maxplus(&exact, f);
        }
        let lo = fs
            .iter()
            .filter_map(StepFunction::min_positive_value)
            .fold(f64::INFINITY, f64::min);
        let hi = fs.iter().map(StepFunction::max_value).sum::<f64>().max(lo);
        let merged = match merge_dnc(&fs, eps, lo, hi) {
            Ok(f) => f,
            Err(e) => {
                c.that(false, || format!("merge failed: {e}"));
                continue;
            }
        };
        for x in 0..=60u64 {
            let x = x as f64;
            let (mv, ev) = (merged.eval(x).unwrap(), exact.eval(x).unwrap());
            c.that(mv <= ev * (1.0 + TOL), || {
                format!("merge overshoots: {mv} > exact {ev} at x = {x}")
            });
            c.that(ev <= mv * (1.0 + eps) * (1.0 + TOL), || {
                format!("merge too low: exact {ev} > (1 + {eps}) * {mv} at x = {x}")
            });
        }
    }
    c.report("stepfn", "")
}

fn suite_smawk(corrupt: bool) -> SuiteReport {
    let mut c = Check::new();
    let mut rng = SplitMix64::new(0x736D61);
    for _ in 0..120 {
        let rows = 1 + rng.uniform(25) as usize;
        let cols = 2 + rng.uniform(24) as usize;
        let slope = rng.uniform(9) as f64 / 2.0;
        let curve = 0.5 + rng.uniform(6) as f64 / 2.0;
        let step = rng.uniform(4) as f64 / 2.0;
        let value = move |i: usize, j: usize| -> f64 {
            let peak = step * i as f64;
            -curve * (j as f64 - peak) * (j as f64 - peak) + slope * (i * j) as f64
        };
        let mut fast = smawk_argmax(rows, cols, &value);
        if corrupt {
            // Deliberate defect injection: shift the first row's argmax.
            fast[0] = (fast[0] + 1) % cols;
        }
        for i in 0..rows {
            let mut best = 0usize;
            for j in 1..cols {
                if value(i, j) > value(i, best) {
                    best = j;
                }
            }
            c.that(fast[i] == best, || {
                format!("argmax row {i}: fast {} != brute {best}", fast[i])
            });
        }
    }
    for _ in 0..60 {
        let quantum = 1.0 + rng.uniform(4) as f64;
        let cap = quantum * (4 + rng.uniform(20)) as f64;
        let mut fast = QuantizedProfile::new(quantum, cap).expect("valid quantum");
        let mut brute = fast.clone();
        for _ in 0..=rng.uniform(2) {
            let p = quantum * rng.uniform(8) as f64;
            let k = 1 + rng.uniform(6) as usize;
            let weights: Vec<f64> = (0..k).map(|_| rng.uniform(30) as f64).collect();
            let f = UniformFunction::new(p, weights).expect("positive weights");
            fast = add_uniform(&fast, &f).expect("uniform add");
            brute = add_uniform_brute(&brute, &f).expect("brute add");
        }
        c.that(fast.minweight == brute.minweight, || {
            format!(
                "uniform add differs from brute at quantum {quantum}: {:?} vs {:?}",
                fast.minweight, brute.minweight
            )
        });
    }
    c.report("smawk", "")
}

fn suite_towers() -> SuiteReport {
    let mut c = Check::new();
    let mut rng = SplitMix64::new(0x746F77);
    let schedules: [&[f64]; 3] = [
        &[1.0 / 8.0],
        &[1.0 / 16.0, 1.0 / 8.0],
        &[1.0 / 32.0, 1.0 / 16.0, 1.0 / 8.0],
    ];
    for eps in [1.0 / 32.0, 1.0 / 64.0] {
        for deltas in schedules {
            let params = match TowerParams::new(deltas.to_vec(), eps) {
                Ok(p) => p,
                Err(e) => {
                    c.that(false, || format!("params rejected: {e}"));
                    continue;
                }
            };
            let base = match construct_base_set(eps, &params) {
                Ok(b) => b,
                Err(e) => {
                    c.that(false, || format!("base construction failed: {e}"));
                    continue;
                }
            };
            let tower = match generate_tower(&base, &params) {
                Ok(t) => t,
                Err(e) => {
                    c.that(false, || format!("tower generation failed: {e}"));
                    continue;
                }
            };
            for (li, level) in tower.levels().iter().enumerate() {
                let (lo, hi) = (deltas[li], 8.0 * deltas[li]);
                for &v in level {
                    c.that(v >= lo * (1.0 - TOL) && v <= hi * (1.0 + TOL), || {
                        format!("level {} member {v} outside [{lo}, {hi}]", li + 1)
                    });
                }
                let bound = 8f64.powi(li as i32) * (deltas[li] / deltas[0]) * base.len() as f64;
                c.that(level.len() as f64 <= bound * (1.0 + TOL), || {
                    format!("level {} size {} exceeds bound {bound}", li + 1, level.len())
                });
            }
            for &y in tower.top() {
                match find_generator(y, &tower) {
                    Ok(chain) => {
                        c.that(rel_eq(chain[chain.len() - 1], y), || {
                            format!("chain for {y} ends at {}", chain[chain.len() - 1])
                        });
                        c.that(base.iter().any(|&x| rel_eq(x, chain[0])), || {
                            format!("chain head {} is not a base member", chain[0])
                        });
                    }
                    Err(e) => c.that(false, || format!("no chain for top member {y}: {e}")),
                }
            }
            let steps = (1.0 / eps).floor() as usize;
            for s in 0..=steps {
                let p = 1.0 + s as f64 * eps;
                // Snap before flooring: an ulp below an integer would
                // otherwise cost a whole z-step, which dwarfs eps.
                let hit = tower.top().iter().any(|&z| {
                    let k = (p / z * (1.0 + TOL)).floor();
                    k >= 1.0 && k * z >= p - eps * (1.0 + TOL) && k * z <= p * (1.0 + TOL)
                });
                c.that(hit, || format!("no top multiple within eps below p = {p}"));
            }
            let m = 40;
            let profits: Vec<f64> =
                (0..m).map(|_| 1.0 + rng.uniform(1_000) as f64 / 1_000.0).collect();
            let r = ((deltas[0] / eps).floor() as usize).clamp(1, m);
            match partition_profits(&profits, r, eps, &params) {
                Ok(grouped) => {
                    let mut seen = vec![0usize; m];
                    for group in &grouped.groups {
                        for &i in group {
                            seen[i] += 1;
                        }
                    }
                    c.that(seen.iter().all(|&s| s == 1), || {
                        "partition does not cover every profit exactly once".to_string()
                    });
                    for (i, asg) in grouped.assignments.iter().enumerate() {
                        let p = profits[i];
                        c.that(
                            asg.value <= p * (1.0 + TOL)
                                && asg.value >= p * (1.0 - 2.0 * eps) * (1.0 - TOL),
                            || format!("assignment {} for profit {p} outside band", asg.value),
                        );
                    }
                }
                Err(e) => c.that(false, || format!("partition failed: {e}")),
            }
        }
    }
    let mut sizes = String::new();
    for pow in 5..=10u32 {
        let eps = 0.5f64.powi(pow as i32);
        let params = TowerParams::new(vec![1.0 / 8.0], eps).expect("d = 1 schedule");
        let base = construct_base_set(eps, &params).expect("base at this eps");
        let _ = write!(sizes, "{}eps=2^-{pow} |D1|={}", if pow > 5 { ", " } else { "" }, base.len());
    }
    c.report("towers", &format!("base sizes at delta=1/8: {sizes}"))
}

fn suite_subsetsum() -> SuiteReport {
    let mut c = Check::new();
    let mut rng = SplitMix64::new(0x737562);
    for round in 0..60 {
        let n = 1 + rng.uniform(12) as usize;
        let weights: Vec<f64> = (0..n).map(|_| rng.uniform(40) as f64).collect();
        let w = (weights.iter().sum::<f64>() / 2.0).round().max(1.0);
        let eps = if round % 2 == 0 { 1.0 / 8.0 } else { 1.0 / 16.0 };
        let sketch = match subset_sum_sketch(&weights, w, eps) {
            Ok(s) => s,
            Err(e) => {
                c.that(false, || format!("sketch failed: {e}"));
                continue;
            }
        };
        let values = sketch.values();
        c.that((values.len() as f64) <= SKETCH_SIZE_FACTOR / eps, || {
            format!("sketch size {} exceeds {}", values.len(), SKETCH_SIZE_FACTOR / eps)
        });
        c.that(!values.is_empty() && values[0] == 0.0, || {
            "sketch does not start at 0".to_string()
        });
        c.that(values.windows(2).all(|p| p[0] < p[1]), || {
            "sketch values are not strictly ascending".to_string()
        });
        let mut sums = vec![0.0f64];
        for &wt in &weights {
            let mut next = Vec::with_capacity(sums.len() * 2);
            next.extend_from_slice(&sums);
            next.extend(sums.iter().map(|s| s + wt));
            next.sort_by(f64::total_cmp);
            next.dedup();
            sums = next;
        }
        for &v in values {
            c.that(sums.iter().any(|&s| rel_eq(s, v)), || {
                format!("sketch value {v} is not a subset sum")
            });
        }
        for &s in &sums {
            if s > w {
                continue;
            }
            let got = sketch.best_at(s);
            c.that(got <= s * (1.0 + TOL) && got >= s - eps * w - TOL, || {
                format!("coverage miss at sum {s}: best_at = {got}, floor {}", s - eps * w)
            });
        }
    }
    c.report("subsetsum", "")
}

fn suite_solver() -> SuiteReport {
    let mut c = Check::new();
    for seed in 0..15u64 {
        let dist = if seed % 2 == 0 { Dist::Uniform } else { Dist::Correlated };
        let n = 2 + (seed as usize % 9);
        let inst = gen::generate(n, dist, seed);
        let opt = brute_force_profile(&inst.items)
            .and_then(|f| f.truncate_domain(inst.capacity).eval(inst.capacity))
            .expect("brute oracle at n <= 10");
        for eps in [0.3, 0.12] {
            let sol = match solve(&inst, eps) {
                Ok(s) => s,
                Err(e) => {
                    c.that(false, || format!("solve failed on seed {seed}: {e}"));
                    continue;
                }
            };
            c.that(sol.value <= opt * (1.0 + TOL), || {
                format!("seed {seed} eps {eps}: SOL {} > OPT {opt}", sol.value)
            });
            c.that(opt <= sol.value * (1.0 + eps) * (1.0 + TOL), || {
                format!("seed {seed} eps {eps}: OPT {opt} > (1 + eps) SOL {}", sol.value)
            });
            let again = solve(&inst, eps).expect("repeat solve");
            c.that(again.value.to_bits() == sol.value.to_bits(), || {
                format!("seed {seed} eps {eps}: repeated solve differs")
            });
        }
    }
    c.report("solver", "")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_suites_pass_clean() {
        let reports = run(None, None).unwrap();
        assert_eq!(reports.len(), SUITES.len());
        for r in &reports {
            assert!(r.passed, "{}", r.line());
        }
    }

    #[test]
    fn corrupt_smawk_is_detected() {
        let reports = run(Some("smawk"), Some("smawk")).unwrap();
        assert_eq!(reports.len(), 1);
        assert!(!reports[0].passed);
        assert!(reports[0].line().contains("FAIL"));
    }

    #[test]
    fn filter_selects_one_suite() {
        let reports = run(Some("towers"), None).unwrap();
        assert_eq!(reports.len(), 1);
        assert_eq!(reports[0].name, "towers");
        assert!(reports[0].detail.contains("|D1|="));
    }

    #[test]
    fn unknown_names_are_rejected() {
        assert!(run(Some("nope"), None).is_err());
        assert!(run(None, Some("nope")).is_err());
    }
}
