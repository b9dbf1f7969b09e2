//! Input model: items, instances, parsing, preprocessing, profit grouping.

use crate::error::{Error, Result};
use crate::tol::REL_TOL;

/// One knapsack item. Weight shares the capacity's unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Item {
    pub weight: f64,
    pub profit: f64,
}

/// A knapsack instance: items plus capacity W.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub items: Vec<Item>,
    pub capacity: f64,
}

/// A profit-octave group: items whose profits were rescaled by 2^j into
/// [1, 2); `scale` = 2^j restores original profits.
#[derive(Debug, Clone)]
pub struct ProfitGroup {
    pub items: Vec<Item>,
    pub scale: f64,
}

/// Parses the text instance format: optional `#` comment lines, then a
/// data line `n W`, then n lines `w_i p_i`, whitespace-separated.
pub fn parse_instance(text: &str) -> Result<Instance> {
    let mut header: Option<(usize, f64)> = None;
    let mut items = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected 2 fields, found {}", fields.len()),
            });
        }
        match header {
            None => {
                let n: usize = fields[0].parse().map_err(|_| Error::Parse {
                    line: line_no,
                    msg: format!("invalid item count '{}'", fields[0]),
                })?;
                let w: f64 = fields[1].parse().map_err(|_| Error::Parse {
                    line: line_no,
                    msg: format!("invalid capacity '{}'", fields[1]),
                })?;
                if !(w > 0.0) || !w.is_finite() {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: format!("capacity must be positive, got {w}"),
                    });
                }
                header = Some((n, w));
            }
            Some((n, _)) => {
                if items.len() == n {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: format!("trailing data after {n} declared items"),
                    });
                }
                let w: f64 = fields[0].parse().map_err(|_| Error::Parse {
                    line: line_no,
                    msg: format!("invalid weight '{}'", fields[0]),
                })?;
                let p: f64 = fields[1].parse().map_err(|_| Error::Parse {
                    line: line_no,
                    msg: format!("invalid profit '{}'", fields[1]),
                })?;
                if !(w > 0.0) || !w.is_finite() {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: format!("weight must be positive, got {w}"),
                    });
                }
                if !(p > 0.0) || !p.is_finite() {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: format!("profit must be positive, got {p}"),
                    });
                }
                items.push(Item { weight: w, profit: p });
            }
        }
    }
    match header {
        None => Err(Error::Parse {
            line: 1,
            msg: "missing header line 'n W'".into(),
        }),
        Some((n, capacity)) => {
            if items.len() != n {
                Err(Error::Parse {
                    line: text.lines().count(),
                    msg: format!("declared {n} items, found {}", items.len()),
                })
            } else {
                Ok(Instance { items, capacity })
            }
        }
    }
}

/// The paper-level reductions: drop items heavier than the capacity, then
/// drop items with profit ≤ (ε/n)·max profit (threshold over the surviving
/// items). Guarantees max/min profit ratio ≤ n/ε afterwards; total value
/// loss is within factor 1 + ε of the original optimum.
pub fn preprocess(inst: &Instance, eps: f64) -> Result<Instance> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("eps = {eps}, expected 0 < eps < 1")));
    }
    let fitting: Vec<Item> = inst
        .items
        .iter()
        .copied()
        .filter(|it| it.weight <= inst.capacity)
        .collect();
    if fitting.is_empty() {
        return Ok(Instance {
            items: Vec::new(),
            capacity: inst.capacity,
        });
    }
    let maxp = fitting.iter().map(|it| it.profit).fold(0.0, f64::max);
    let threshold = eps / fitting.len() as f64 * maxp;
    let items: Vec<Item> = fitting
        .into_iter()
        .filter(|it| it.profit > threshold)
        .collect();
    Ok(Instance {
        items,
        capacity: inst.capacity,
    })
}

/// Splits items into profit octaves: item with profit p goes to the unique
/// group j with p/2^j ∈ [1, 2), so a profit of exactly 2^(j+1) lands in
/// group j+1 with rescaled profit 1. Groups are returned in ascending j
/// with nonempty item lists.
pub fn group_by_profit(inst: &Instance) -> Vec<ProfitGroup> {
    use std::collections::BTreeMap;
    let mut groups: BTreeMap<i32, Vec<Item>> = BTreeMap::new();
    for it in &inst.items {
        let mut j = it.profit.log2().floor() as i32;
        // Fix up floating rounding so that p/2^j ∈ [1, 2) exactly.
        loop {
            let scaled = it.profit / 2f64.powi(j);
            if scaled < 1.0 {
                j -= 1;
            } else if scaled >= 2.0 {
                j += 1;
            } else {
                break;
            }
        }
        let scale = 2f64.powi(j);
        groups.entry(j).or_default().push(Item {
            weight: it.weight,
            profit: it.profit / scale,
        });
    }
    groups
        .into_iter()
        .map(|(j, items)| ProfitGroup {
            items,
            scale: 2f64.powi(j),
        })
        .collect()
}

/// Validates ε for the end-to-end solver: must be positive; values above
/// 1/2 are clamped to 1/2 (the guarantees assume small ε). Returns the ε
/// actually used and whether clamping occurred.
pub fn clamp_eps(eps: f64) -> Result<(f64, bool)> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::Domain(format!("eps = {eps}, expected eps > 0")));
    }
    if eps > 0.5 {
        Ok((0.5, true))
    } else {
        Ok((eps, false))
    }
}

/// True when two floats are equal within the library's structural
/// tolerance, re-exported here for instance-level comparisons.
pub fn profits_equal(a: f64, b: f64) -> bool {
    (a - b).abs() <= REL_TOL * a.abs().max(b.abs()).max(1.0)
}
