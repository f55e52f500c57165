use std::fs::File;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use super::logs::LogTable;
use super::theorem::expected_solutions;
use super::{Computed, ProofLedger, RunConfig, StageRunner};
use crate::error::{Error, Result};
use crate::kfib::{enumerate_solutions, write_csv, Solution};
use crate::linforms::{stage_bounds_small_k, SmallKBounds};
use crate::realnum::{dominant_root, fk, CachedSource, CertifiedReal, FnSource, PrecisionPolicy, SharedSource};
use crate::reduction::{dujella_petho_walk, int_source, CfCache, ReductionInstance, ReductionReport};

/// Convergents tried past `q > 6M`. For `d1 = 9` and large `k`, `mu` sits
/// within about `k 2^-k` of `-gamma`, which needs `q` near `(M 2^k / k)^(1/2)`.
pub const SMALL_K_WALK: usize = 200;

/// `log alpha`, `log f_k(alpha)` and `alpha` for one `k`, memoized.
#[derive(Clone)]
pub struct KSources {
    pub k: u32,
    pub alpha: SharedSource,
    pub log_alpha: SharedSource,
    pub log_f: SharedSource,
}

impl KSources {
    pub fn new(k: u32) -> Self {
        let alpha = CachedSource::shared(FnSource::shared(format!("alpha_{k}"), move |p| {
            Ok(dominant_root(k, p + 8)?.alpha.to_precision(p))
        }));
        let a = alpha.clone();
        let log_alpha = CachedSource::shared(FnSource::shared(format!("log(alpha_{k})"), move |p| {
            Ok(a.eval(p + 16)?.ln()?.to_precision(p))
        }));
        let a = alpha.clone();
        let guard = 24 + (32 - k.leading_zeros());
        let log_f = CachedSource::shared(FnSource::shared(format!("log(f_{k}(alpha_{k}))"), move |p| {
            Ok(fk(k, &a.eval(p + guard)?)?.ln()?.to_precision(p))
        }));
        KSources { k, alpha, log_alpha, log_f }
    }
}

fn quotient(label: String, num: SharedSource, den: SharedSource) -> SharedSource {
    FnSource::shared(label, move |p| Ok(num.eval(p + 16)?.checked_div(&den.eval(p + 16)?)?.to_precision(p)))
}

fn max_precision(reports: &[ReductionReport]) -> u32 {
    reports
        .iter()
        .filter_map(|r| match &r.outcome {
            crate::reduction::ReductionOutcome::ReducedBound { precision_bits, .. } => Some(*precision_bits),
            crate::reduction::ReductionOutcome::Inconclusive { precision_bits, .. } => Some(*precision_bits),
            _ => None,
        })
        .max()
        .unwrap_or(0)
}

fn worst(reports: &[ReductionReport]) -> Option<&ReductionReport> {
    reports
        .iter()
        .filter_map(|r| match &r.outcome {
            crate::reduction::ReductionOutcome::ReducedBound { w_upper_scaled, .. } => Some((w_upper_scaled, r)),
            _ => None,
        })
        .max_by(|a, b| a.0.cmp(b.0))
        .map(|(_, r)| r)
}

/// First round for one `k`: `|(n-1) gamma - (m+ell) + mu| < 10 * 10^-m` with
/// `gamma = log alpha / log 10`, `mu = log(9 f_k(alpha) / d1) / log 10`,
/// `n - 1 <= M_k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Round1K {
    pub k: u32,
    #[serde(with = "crate::dec")]
    pub m_bound: BigInt,
    /// One report per `d1 = 1..=9`.
    pub reports: Vec<ReductionReport>,
    /// Largest certified upper bound on `log(A q / epsilon) / log B`.
    pub w_upper: String,
    #[serde(with = "crate::dec")]
    pub w_upper_scaled: BigInt,
    pub w_max: u64,
    /// Largest `m` that survives: `ceil(w) - 1`, at least 1.
    pub m_cap: u64,
    pub failures: Vec<String>,
}

pub fn round1_for_k(
    src: &KSources,
    logs: &LogTable,
    m_bound: &BigInt,
    cache: &CfCache,
    policy: &PrecisionPolicy,
) -> Result<Round1K> {
    let k = src.k;
    let gamma = quotient(format!("log(alpha_{k})/log(10)"), src.log_alpha.clone(), logs.ln10());
    let cf = cache.get_beyond(&gamma, &(m_bound * 6), SMALL_K_WALK + 1)?;
    let mut reports = Vec::with_capacity(9);
    for d1 in 1..=9u8 {
        let (l9, lf, ld, l10) = (logs.ln_digit(9), src.log_f.clone(), logs.ln_digit(d1), logs.ln10());
        let mu = FnSource::shared(format!("log(9 f_{k}(alpha)/{d1})/log(10)"), move |p| {
            let w = p + 16;
            let num = &(&l9.eval(w)? + &lf.eval(w)?) - &ld.eval(w)?;
            Ok(num.checked_div(&l10.eval(w)?)?.to_precision(p))
        });
        let inst = ReductionInstance {
            label: format!("round1 k={k} d1={d1}"),
            gamma: gamma.clone(),
            mu,
            a: int_source(10),
            b: int_source(10),
            m: m_bound.clone(),
        };
        reports.push(dujella_petho_walk(&inst, &cf, policy, SMALL_K_WALK)?);
    }
    let failures: Vec<String> = reports
        .iter()
        .filter(|r| r.outcome.w_max().is_none())
        .map(|r| format!("{}: {:?}", r.label, r.outcome))
        .collect();
    let top = worst(&reports).cloned();
    let (w_upper, w_upper_scaled, w_max) = match &top {
        Some(r) => match &r.outcome {
            crate::reduction::ReductionOutcome::ReducedBound { w_bound, w_upper_scaled, w_max, .. } => {
                (w_bound.clone(), w_upper_scaled.clone(), *w_max)
            }
            _ => unreachable!(),
        },
        None => (String::new(), BigInt::from(0), 0),
    };
    Ok(Round1K {
        k,
        m_bound: m_bound.clone(),
        reports,
        w_upper,
        w_upper_scaled,
        w_max,
        m_cap: w_max.saturating_sub(1).max(1),
        failures,
    })
}

/// Second round for one `k`: `|ell gamma - n + mu| < 21 alpha^-n` with
/// `gamma = log 10 / log alpha`,
/// `mu = 1 + log((d1 10^m - (d1 - d2)) / (9 f_k(alpha))) / log alpha`,
/// `ell <= M_k`, over all digit pairs and `1 <= m <= m_cap`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Round2K {
    pub k: u32,
    #[serde(with = "crate::dec")]
    pub m_bound: BigInt,
    pub m_cap: u32,
    pub cells: usize,
    /// The reduction with the largest bound.
    pub worst: Option<ReductionReport>,
    pub w_upper: String,
    #[serde(with = "crate::dec")]
    pub w_upper_scaled: BigInt,
    pub w_max: u64,
    /// Largest `n` that survives: `ceil(w) - 1`.
    pub n_cap: u64,
    pub precision_bits: u32,
    pub failures: Vec<ReductionReport>,
}

pub fn round2_for_k(
    src: &KSources,
    logs: &LogTable,
    m_bound: &BigInt,
    m_cap: u32,
    cache: &CfCache,
    policy: &PrecisionPolicy,
) -> Result<Round2K> {
    let k = src.k;
    let gamma = quotient(format!("log(10)/log(alpha_{k})"), logs.ln10(), src.log_alpha.clone());
    let cf = cache.get_beyond(&gamma, &(m_bound * 6), SMALL_K_WALK + 1)?;
    let cells: Vec<(u8, u8, u32)> =
        (1..=m_cap).flat_map(|m| (1..=9u8).flat_map(move |d1| (0..=9u8).map(move |d2| (d1, d2, m)))).collect();
    let n_cells = cells.len();
    let results = crate::par::map_collect(cells, |(d1, d2, m)| {
        let (ln_n, l9, lf, la) = (logs.ln_block(m, d1, d2), logs.ln_digit(9), src.log_f.clone(), src.log_alpha.clone());
        let mu = FnSource::shared(format!("1+log(N({m},{d1},{d2})/(9 f_{k}))/log(alpha_{k})"), move |p| {
            let w = p + 16;
            let num = &(&ln_n.eval(w)? - &l9.eval(w)?) - &lf.eval(w)?;
            Ok((&CertifiedReal::one(w) + &num.checked_div(&la.eval(w)?)?).to_precision(p))
        });
        let inst = ReductionInstance {
            label: format!("round2 k={k} m={m} d1={d1} d2={d2}"),
            gamma: gamma.clone(),
            mu,
            a: int_source(21),
            b: src.alpha.clone(),
            m: m_bound.clone(),
        };
        dujella_petho_walk(&inst, &cf, policy, SMALL_K_WALK)
    });
    let reports: Vec<ReductionReport> = results.into_iter().collect::<Result<_>>()?;
    let failures: Vec<ReductionReport> = reports.iter().filter(|r| r.outcome.w_max().is_none()).cloned().collect();
    let precision_bits = max_precision(&reports);
    let top = worst(&reports).cloned();
    let (w_upper, w_upper_scaled, w_max) = match top.as_ref().map(|r| &r.outcome) {
        Some(crate::reduction::ReductionOutcome::ReducedBound { w_bound, w_upper_scaled, w_max, .. }) => {
            (w_bound.clone(), w_upper_scaled.clone(), *w_max)
        }
        _ => (String::new(), BigInt::from(0), 0),
    };
    Ok(Round2K {
        k,
        m_bound: m_bound.clone(),
        m_cap,
        cells: n_cells,
        worst: top,
        w_upper,
        w_upper_scaled,
        w_max,
        n_cap: w_max.saturating_sub(1),
        precision_bits,
        failures,
    })
}

#[derive(Serialize, Deserialize)]
struct BoundsOut {
    per_k: Vec<SmallKBounds>,
}

#[derive(Serialize, Deserialize)]
struct Round1Out {
    per_k: Vec<Round1K>,
    max_w_upper: String,
    max_w_max: u64,
    argmax_k: u32,
    /// `m <= m_cap` for every `k` in range.
    m_cap: u64,
}

#[derive(Serialize, Deserialize)]
struct Round2Out {
    per_k: Vec<Round2K>,
    max_w_upper: String,
    max_w_max: u64,
    argmax_k: u32,
    /// `n <= n_cap` for every `k` in range.
    n_cap: u64,
}

#[derive(Serialize, Deserialize)]
struct SweepOut {
    k_range: (u32, u32),
    n_max: u64,
    solutions: Vec<Solution>,
    extras: Vec<Solution>,
    misses: Vec<(u32, u64, String)>,
}

const ROUND1_TARGET: i64 = 151;
const ROUND2_TARGET: i64 = 501;

fn cf_cache(cfg: &RunConfig) -> Result<CfCache> {
    match &cfg.out_dir {
        Some(dir) => CfCache::with_dir(dir.join("cf-cache"), cfg.policy),
        None => Ok(CfCache::in_memory(cfg.policy)),
    }
}

/// Bounds, both reduction rounds and the final sweep for `k` in
/// `[k_min, k_max]`.
pub fn run_small_k(cfg: &RunConfig) -> Result<ProofLedger> {
    cfg.validate_small_k()?;
    crate::par::with_jobs(cfg.jobs, || small_k_stages(cfg))
}

fn small_k_stages(cfg: &RunConfig) -> Result<ProofLedger> {
    let mut runner = StageRunner::new(cfg)?;
    let ks: Vec<u32> = (cfg.k_min..=cfg.k_max).collect();
    let range = serde_json::json!([cfg.k_min, cfg.k_max]);

    let bounds: BoundsOut = runner.run(
        "small-k-bounds",
        "n < 9e28 k^8 log^5 k and m + ell < 3e28 k^8 log^5 k",
        &serde_json::json!({ "k_range": range }),
        || {
            let per_k =
                crate::par::map_collect(ks.clone(), stage_bounds_small_k).into_iter().collect::<Result<Vec<_>>>()?;
            let holds = per_k.iter().all(SmallKBounds::all_hold);
            Ok(Computed { value: BoundsOut { per_k }, holds, precision_bits: crate::linforms::LF_BITS })
        },
    )?;

    let logs = LogTable::new();
    let cache = cf_cache(cfg)?;
    let sources: Vec<KSources> = ks.iter().map(|&k| KSources::new(k)).collect();
    let policy = cfg.policy;

    let n_bounds: Vec<String> = bounds.per_k.iter().map(|b| b.n_bound.to_string()).collect();
    let r1: Round1Out = runner.run(
        "small-k-round1",
        "max log(A q / epsilon) / log B < 151 over k, d1, so m <= 150",
        &serde_json::json!({ "k_range": range, "M_k": n_bounds, "A": 10, "B": 10 }),
        || {
            let jobs: Vec<(&KSources, &BigInt)> = sources.iter().zip(bounds.per_k.iter().map(|b| &b.n_bound)).collect();
            let per_k = crate::par::map_collect(jobs, |(src, m)| round1_for_k(src, &logs, m, &cache, &policy))
                .into_iter()
                .collect::<Result<Vec<_>>>()?;
            let top = per_k.iter().max_by(|a, b| a.w_upper_scaled.cmp(&b.w_upper_scaled)).expect("nonempty");
            let holds = per_k.iter().all(|r| r.failures.is_empty())
                && per_k.iter().all(|r| r.w_upper_scaled < BigInt::from(ROUND1_TARGET) << 32);
            let precision_bits = per_k.iter().map(|r| max_precision(&r.reports)).max().unwrap_or(0);
            let out = Round1Out {
                max_w_upper: top.w_upper.clone(),
                max_w_max: top.w_max,
                argmax_k: top.k,
                m_cap: per_k.iter().map(|r| r.m_cap).max().unwrap_or(1),
                per_k,
            };
            Ok(Computed { value: out, holds, precision_bits })
        },
    )?;

    let n_cap = if cfg.round2 {
        let m_cap = u32::try_from(r1.m_cap).map_err(|_| Error::Mismatch(format!("m cap {} too large", r1.m_cap)))?;
        let ml_bounds: Vec<String> = bounds.per_k.iter().map(|b| b.ml_bound.to_string()).collect();
        let r2: Round2Out = runner.run(
            "small-k-round2",
            "max log(A q / epsilon) / log B < 501 over k, d1, d2, m, so n <= 500",
            &serde_json::json!({ "k_range": range, "M_k": ml_bounds, "m_cap": m_cap, "A": 21, "B": "alpha" }),
            || {
                let mut per_k = Vec::with_capacity(sources.len());
                for (src, b) in sources.iter().zip(&bounds.per_k) {
                    let r = round2_for_k(src, &logs, &b.ml_bound, m_cap, &cache, &policy)?;
                    log::info!("round 2, k = {}: n <= {}", r.k, r.n_cap);
                    per_k.push(r);
                }
                let top = per_k.iter().max_by(|a, b| a.w_upper_scaled.cmp(&b.w_upper_scaled)).expect("nonempty");
                let holds = per_k.iter().all(|r| r.failures.is_empty())
                    && per_k.iter().all(|r| r.w_upper_scaled < BigInt::from(ROUND2_TARGET) << 32);
                let precision_bits = per_k.iter().map(|r| r.precision_bits).max().unwrap_or(0);
                let out = Round2Out {
                    max_w_upper: top.w_upper.clone(),
                    max_w_max: top.w_max,
                    argmax_k: top.k,
                    n_cap: per_k.iter().map(|r| r.n_cap).max().unwrap_or(0),
                    per_k,
                };
                Ok(Computed { value: out, holds, precision_bits })
            },
        )?;
        r2.n_cap
    } else {
        cfg.n_max
    };

    let sweep: SweepOut = runner.run(
        "small-k-final-sweep",
        "F_n^(k) for n <= 500 has exactly the listed two-repdigit values",
        &serde_json::json!({ "k_range": range, "n_max": cfg.n_max, "n_cap": n_cap }),
        || {
            let solutions = enumerate_solutions(cfg.k_min..=cfg.k_max, cfg.n_max)?;
            let expected = expected_solutions(cfg.k_min..=cfg.k_max, cfg.n_max);
            let extras: Vec<Solution> =
                solutions.iter().filter(|s| !expected.contains(&(s.k, s.n, s.value.clone()))).cloned().collect();
            let misses: Vec<(u32, u64, String)> = expected
                .iter()
                .filter(|(k, n, v)| !solutions.iter().any(|s| s.k == *k && s.n == *n && s.value == *v))
                .map(|(k, n, v)| (*k, *n, v.to_string()))
                .collect();
            let holds = extras.is_empty() && misses.is_empty() && n_cap <= cfg.n_max;
            let out = SweepOut { k_range: (cfg.k_min, cfg.k_max), n_max: cfg.n_max, solutions, extras, misses };
            Ok(Computed { value: out, holds, precision_bits: 0 })
        },
    )?;
    if let Some(dir) = runner.dir() {
        write_csv(&sweep.solutions, File::create(dir.join("small-k-solutions.csv"))?)?;
    }
    runner.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linforms::stage_bounds_small_k;
    use crate::reduction::ReductionOutcome;

    #[test]
    fn round1_at_k4() {
        let src = KSources::new(4);
        let logs = LogTable::new();
        let b = stage_bounds_small_k(4).unwrap();
        let cache = CfCache::in_memory(PrecisionPolicy::default());
        let r = round1_for_k(&src, &logs, &b.n_bound, &cache, &PrecisionPolicy::default()).unwrap();
        assert!(r.failures.is_empty(), "{:?}", r.failures);
        assert_eq!(r.reports.len(), 9);
        assert!(r.w_max <= 151);
    }

    #[test]
    fn near_degenerate_d1_9_needs_the_long_walk() {
        let k = 400;
        let src = KSources::new(k);
        let logs = LogTable::new();
        let b = stage_bounds_small_k(k).unwrap();
        let cache = CfCache::in_memory(PrecisionPolicy::default());
        let r = round1_for_k(&src, &logs, &b.n_bound, &cache, &PrecisionPolicy::default()).unwrap();
        assert!(r.failures.is_empty(), "{:?}", r.failures);
        let first = match &r.reports[0].outcome {
            ReductionOutcome::ReducedBound { index, .. } => *index,
            o => panic!("{o:?}"),
        };
        match &r.reports[8].outcome {
            ReductionOutcome::ReducedBound { index, w_max, .. } => {
                assert!(*index > first + 32);
                assert!(*w_max > 100 && *w_max <= 151);
            }
            o => panic!("{o:?}"),
        }
    }

    #[test]
    fn round2_at_k5_small_m() {
        let src = KSources::new(5);
        let logs = LogTable::new();
        let b = stage_bounds_small_k(5).unwrap();
        let cache = CfCache::in_memory(PrecisionPolicy::default());
        let r = round2_for_k(&src, &logs, &b.ml_bound, 3, &cache, &PrecisionPolicy::default()).unwrap();
        assert_eq!(r.cells, 270);
        assert!(r.failures.is_empty());
        assert!(r.n_cap <= 500);
    }
}
