use std::collections::BTreeSet;
use std::fs::File;
use std::ops::RangeInclusive;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use super::{Computed, ProofLedger, RunConfig, StageRunner};
use crate::error::Result;
use crate::kfib::{enumerate_solutions, solve_small_n, write_csv, Solution};

/// The sporadic solutions `(k, n, F_n^(k))`.
pub const THEOREM_TABLE: [(u32, u64, u64); 22] = [
    (2, 7, 13),
    (2, 8, 21),
    (2, 9, 34),
    (2, 10, 55),
    (2, 11, 89),
    (2, 12, 144),
    (2, 13, 233),
    (2, 14, 377),
    (3, 6, 13),
    (3, 7, 24),
    (3, 8, 44),
    (3, 9, 81),
    (4, 6, 15),
    (4, 7, 29),
    (4, 8, 56),
    (4, 12, 773),
    (5, 7, 31),
    (5, 8, 61),
    (6, 8, 63),
    (7, 13, 2000),
    (8, 10, 255),
    (9, 11, 511),
];

/// `(value, n, k_min)`: `F_n^(k) = value` for every `k >= k_min`.
pub const THEOREM_FAMILIES: [(u64, u64, u32); 3] = [(16, 6, 5), (32, 7, 6), (64, 8, 7)];

/// Every `(k, n, value)` the theorem predicts with `k` in range and `n <= n_max`.
pub fn expected_solutions(k_range: RangeInclusive<u32>, n_max: u64) -> BTreeSet<(u32, u64, BigUint)> {
    let mut out = BTreeSet::new();
    for &(k, n, v) in &THEOREM_TABLE {
        if k_range.contains(&k) && n <= n_max {
            out.insert((k, n, BigUint::from(v)));
        }
    }
    for &(v, n, k_min) in &THEOREM_FAMILIES {
        if n > n_max {
            continue;
        }
        for k in k_min.max(*k_range.start())..=*k_range.end() {
            out.insert((k, n, BigUint::from(v)));
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntryCheck {
    pub k: u32,
    pub n: u64,
    pub value: u64,
    pub in_range: bool,
    pub found: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyCheck {
    pub value: u64,
    pub n: u64,
    pub k_min: u32,
    /// Members with `k <= k_max`.
    pub expected: usize,
    pub found: usize,
    /// Whether the power-of-two analysis produced this family.
    pub from_small_n: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub k_max: u32,
    pub n_max: u64,
    pub entries: Vec<EntryCheck>,
    pub families: Vec<FamilyCheck>,
    /// Enumerated solutions the theorem does not list.
    pub extras: Vec<Solution>,
    /// Predicted `(k, n, value)` the enumeration did not produce.
    pub misses: Vec<(u32, u64, String)>,
    /// Families from the power-of-two analysis beyond the three listed.
    pub unexpected_families: Vec<u64>,
    pub solutions: usize,
}

impl TheoremReport {
    pub fn holds(&self) -> bool {
        self.extras.is_empty()
            && self.misses.is_empty()
            && self.unexpected_families.is_empty()
            && self.entries.iter().all(|e| !e.in_range || e.found)
            && self.families.iter().all(|f| f.from_small_n && f.found == f.expected)
    }
}

fn check(k_max: u32, n_max: u64) -> Result<(TheoremReport, Vec<Solution>)> {
    let solutions = enumerate_solutions(2..=k_max, n_max)?;
    let found: BTreeSet<(u32, u64, BigUint)> = solutions.iter().map(|s| (s.k, s.n, s.value.clone())).collect();
    let expected = expected_solutions(2..=k_max, n_max);
    let small = solve_small_n(k_max);

    let entries = THEOREM_TABLE
        .iter()
        .map(|&(k, n, value)| EntryCheck {
            k,
            n,
            value,
            in_range: k <= k_max && n <= n_max,
            found: found.contains(&(k, n, BigUint::from(value))),
        })
        .collect();
    let families = THEOREM_FAMILIES
        .iter()
        .map(|&(value, n, k_min)| {
            let v = BigUint::from(value);
            let members = (k_min..=k_max).filter(|_| n <= n_max);
            FamilyCheck {
                value,
                n,
                k_min,
                expected: members.clone().count(),
                found: members.filter(|&k| found.contains(&(k, n, v.clone()))).count(),
                from_small_n: small.families.iter().any(|f| f.value == v && f.n == n && f.k_min == k_min),
            }
        })
        .collect();
    let unexpected_families = small
        .families
        .iter()
        .filter(|f| !THEOREM_FAMILIES.iter().any(|&(v, _, _)| f.value == BigUint::from(v)))
        .map(|f| u64::try_from(&f.value).unwrap_or(u64::MAX))
        .collect();
    let extras = solutions.iter().filter(|s| !expected.contains(&(s.k, s.n, s.value.clone()))).cloned().collect();
    let misses = expected.iter().filter(|e| !found.contains(e)).map(|(k, n, v)| (*k, *n, v.to_string())).collect();
    let report = TheoremReport {
        k_max,
        n_max,
        entries,
        families,
        extras,
        misses,
        unexpected_families,
        solutions: solutions.len(),
    };
    Ok((report, solutions))
}

/// Enumerates `k <= theorem_k_max`, `n <= n_max` and compares itemwise with
/// the table and the three families.
pub fn verify_theorem(cfg: &RunConfig) -> Result<TheoremReport> {
    cfg.validate()?;
    Ok(crate::par::with_jobs(cfg.jobs, || check(cfg.theorem_k_max, cfg.n_max))?.0)
}

/// [`verify_theorem`] as a ledger stage, plus `solutions.csv`.
pub fn run_verify_theorem(cfg: &RunConfig) -> Result<ProofLedger> {
    cfg.validate()?;
    let mut runner = StageRunner::new(cfg)?;
    let inputs = serde_json::json!({ "k_range": [2, cfg.theorem_k_max], "n_max": cfg.n_max });
    let mut sols = None;
    let report: TheoremReport = runner.run(
        "verify-theorem",
        "enumeration over k, n equals the table plus the 16, 32, 64 families",
        &inputs,
        || {
            let (report, solutions) = crate::par::with_jobs(cfg.jobs, || check(cfg.theorem_k_max, cfg.n_max))?;
            sols = Some(solutions);
            Ok(Computed { holds: report.holds(), value: report, precision_bits: 0 })
        },
    )?;
    if let Some(dir) = runner.dir() {
        let solutions = match sols {
            Some(s) => s,
            None => enumerate_solutions(2..=report.k_max, report.n_max)?,
        };
        write_csv(&solutions, File::create(dir.join("solutions.csv"))?)?;
    }
    runner.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_scale_theorem() {
        let cfg = RunConfig { theorem_k_max: 12, n_max: 60, ..RunConfig::default() };
        let r = verify_theorem(&cfg).unwrap();
        assert!(r.holds(), "{r:?}");
        assert!(r.entries.iter().all(|e| e.found));
        assert_eq!(r.families[0].expected, 8);
    }

    #[test]
    fn expected_set_counts() {
        let e = expected_solutions(2..=10, 500);
        // 22 sporadic + 6 + 5 + 4 family members
        assert_eq!(e.len(), 22 + 6 + 5 + 4);
        assert!(e.contains(&(4, 12, BigUint::from(773u32))));
        assert!(!e.contains(&(4, 13, BigUint::from(1490u32))));
    }
}
