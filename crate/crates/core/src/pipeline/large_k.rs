use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use super::logs::LogTable;
use super::{Computed, ProofLedger, RunConfig, StageRunner};
use crate::error::Result;
use crate::linforms::{ml_bound_at, stage_bounds_large_k, StageBound, LF_BITS};
use crate::realnum::{ln2, log2_of_10, CertifiedReal, FnSource, PrecisionPolicy, SharedSource};
use crate::reduction::{
    degenerate_mu, dujella_petho, int_source, legendre_exponent_bound, legendre_lower, theta_source, CfCache,
    ContinuedFraction, DegenerateMu, LegendreBound, ReductionInstance, ReductionOutcome, ReductionReport,
    EXTRA_CONVERGENTS,
};

/// Bound on `m + ell` for `k > 500`.
pub const M_A: &str = "1.5e282";
/// Bound on `m + ell` once `k <= 1950`.
pub const M_B: &str = "1.6e59";
/// `lambda <= 955` after the first round.
pub const LAMBDA_A: i64 = 955;
/// `lambda <= 210` after the second round.
pub const LAMBDA_B: i64 = 210;

const FRAC: u32 = 32;

fn sci_int(text: &str) -> BigInt {
    CertifiedReal::parse_decimal(text, 0).ok().and_then(|x| x.floor()).expect("integer literal")
}

/// Certified upper bound `u` on a real quantity, stored as `ceil(u 2^32)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RealUpper {
    pub shown: String,
    #[serde(with = "crate::dec")]
    pub scaled: BigInt,
}

impl RealUpper {
    pub fn of(x: &CertifiedReal) -> Self {
        RealUpper { shown: x.to_sci_string(10), scaled: x.to_precision(FRAC).scaled_endpoints().1.clone() }
    }

    fn from_outcome(o: &ReductionOutcome) -> Option<Self> {
        match o {
            ReductionOutcome::ReducedBound { w_bound, w_upper_scaled, .. } => {
                Some(RealUpper { shown: w_bound.clone(), scaled: w_upper_scaled.clone() })
            }
            _ => None,
        }
    }

    /// The bound itself, as an exact dyadic.
    pub fn value(&self) -> CertifiedReal {
        CertifiedReal::dyadic(self.scaled.clone(), FRAC)
    }

    pub fn at_most(&self, n: i64) -> bool {
        self.scaled <= BigInt::from(n) << FRAC
    }

    /// Largest integer strictly below the bound.
    pub fn int_below(&self) -> i64 {
        let one = BigInt::from(1) << FRAC;
        let c = self.scaled.div_ceil(&one) - 1;
        i64::try_from(c).unwrap_or(i64::MAX)
    }

    fn max(self, other: Self) -> Self {
        if other.scaled > self.scaled {
            other
        } else {
            self
        }
    }
}

#[derive(Clone, Copy, Debug)]
enum Base {
    Two,
    Sqrt2,
}

impl Base {
    fn real(self, p: u32) -> CertifiedReal {
        match self {
            Base::Two => CertifiedReal::exact_int(2, p),
            Base::Sqrt2 => CertifiedReal::exact_int(2, p).sqrt().expect("positive"),
        }
    }

    fn source(self) -> SharedSource {
        match self {
            Base::Two => int_source(2),
            Base::Sqrt2 => FnSource::shared("sqrt(2)", |p| CertifiedReal::exact_int(2, p).sqrt()),
        }
    }

    fn name(self) -> &'static str {
        match self {
            Base::Two => "2",
            Base::Sqrt2 => "sqrt(2)",
        }
    }
}

/// `|x theta - y| < A B^-w` with `0 < x < M`, settled by the Legendre bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LegendreCase {
    pub label: String,
    pub legendre: LegendreBound,
    pub a: i64,
    pub base: String,
    /// `A (a_M + 2) M`, exact.
    #[serde(with = "crate::dec")]
    pub product: BigInt,
    /// `w < log(A (a_M + 2) M) / log B`.
    pub bound: RealUpper,
}

fn legendre_case(label: String, cf: &ContinuedFraction, m: &BigInt, a: i64, base: Base) -> Result<LegendreCase> {
    let lb = legendre_lower(cf, m)?;
    let w = legendre_exponent_bound(&lb, &CertifiedReal::exact_int(a, LF_BITS), &base.real(LF_BITS))?;
    Ok(LegendreCase {
        label,
        product: &lb.factor * m * a,
        legendre: lb,
        a,
        base: base.name().into(),
        bound: RealUpper::of(&w),
    })
}

/// `|(m + ell) theta - n + mu| < 38 2^-lambda`, `mu = 2 + log(d1 / 9) / log 2`,
/// over `d1 = 1..=9`; `d1 = 9` makes `mu = 2` and goes to the Legendre bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct E6Round {
    #[serde(with = "crate::dec")]
    pub m: BigInt,
    pub reports: Vec<ReductionReport>,
    /// Over `d1 = 1..=8`.
    pub dp_lambda: RealUpper,
    pub d1_9: LegendreCase,
    /// `lambda` is below this for every `d1`.
    pub lambda: RealUpper,
    pub precision_bits: u32,
    pub failures: Vec<String>,
}

fn theta_cf(cache: &CfCache, m: &BigInt) -> Result<std::sync::Arc<ContinuedFraction>> {
    cache.get_beyond(&theta_source(), &(m * 6), EXTRA_CONVERGENTS + 1)
}

pub fn e6_round(m: &BigInt, cf: &ContinuedFraction, policy: &PrecisionPolicy) -> Result<E6Round> {
    let mut reports = Vec::with_capacity(9);
    for d1 in 1..=9i64 {
        let mu = FnSource::shared(format!("2+log({d1}/9)/log(2)"), move |p| {
            let w = p + 16;
            let l = CertifiedReal::ratio(d1, 9, w).ln()?;
            Ok((&CertifiedReal::exact_int(2, w) + &l.checked_div(&ln2(w))?).to_precision(p))
        });
        let inst = ReductionInstance {
            label: format!("E6 d1={d1}"),
            gamma: theta_source(),
            mu,
            a: int_source(38),
            b: int_source(2),
            m: m.clone(),
        };
        reports.push(dujella_petho(&inst, cf, policy)?);
    }
    let mut failures = Vec::new();
    let mut dp_lambda: Option<RealUpper> = None;
    let mut precision_bits = 0;
    for r in &reports[..8] {
        match RealUpper::from_outcome(&r.outcome) {
            Some(u) => dp_lambda = Some(dp_lambda.map_or(u.clone(), |d| d.max(u))),
            None => failures.push(format!("{}: {:?}", r.label, r.outcome)),
        }
        if let ReductionOutcome::ReducedBound { precision_bits: p, .. } = r.outcome {
            precision_bits = precision_bits.max(p);
        }
    }
    let dp_lambda = dp_lambda.unwrap_or(RealUpper { shown: "none".into(), scaled: BigInt::from(0) });
    let d1_9 = legendre_case("E6 d1=9 (mu = 2)".into(), cf, m, 38, Base::Two)?;
    let lambda = dp_lambda.clone().max(d1_9.bound.clone());
    Ok(E6Round { m: m.clone(), reports, dp_lambda, d1_9, lambda, precision_bits, failures })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegenerateCase {
    pub mu: DegenerateMu,
    pub legendre: LegendreCase,
}

/// `|ell theta - n + mu| < 9 sqrt(2)^-k`,
/// `mu = 2 + log((d1 10^m - (d1 - d2)) / 9) / log 2`, over digit pairs and
/// `1 <= m <= m_cap`. Cells with `mu = c0 + c1 theta` go to the Legendre
/// bound with `x = ell + c1 < M + c1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct E4Round {
    #[serde(with = "crate::dec")]
    pub m: BigInt,
    pub m_cap: u32,
    pub cells: usize,
    pub worst: Option<ReductionReport>,
    /// `k` is below this in every reduced cell.
    pub k_dp: RealUpper,
    pub degenerate: Vec<DegenerateCase>,
    pub k_degenerate: RealUpper,
    #[serde(with = "crate::dec")]
    pub max_degenerate_product: BigInt,
    pub precision_bits: u32,
    pub failures: Vec<ReductionReport>,
}

impl E4Round {
    pub fn k_cap(&self) -> i64 {
        self.k_dp.int_below().max(self.k_degenerate.int_below())
    }
}

pub fn e4_round(
    m_big: &BigInt,
    m_cap: u32,
    cf: &ContinuedFraction,
    logs: &LogTable,
    policy: &PrecisionPolicy,
) -> Result<E4Round> {
    let mut regular = Vec::new();
    let mut degenerate = Vec::new();
    for m in 1..=m_cap {
        for d1 in 1..=9u8 {
            for d2 in 0..=9u8 {
                match degenerate_mu(m, d1, d2) {
                    Some(dm) => degenerate.push(dm),
                    None => regular.push((m, d1, d2)),
                }
            }
        }
    }
    let cells = regular.len() + degenerate.len();
    let results = crate::par::map_collect(regular, |(m, d1, d2)| {
        let ln_n = logs.ln_block(m, d1, d2);
        let l9 = logs.ln_digit(9);
        let mu = FnSource::shared(format!("2+log(N({m},{d1},{d2})/9)/log(2)"), move |p| {
            let w = p + 16;
            let num = &ln_n.eval(w)? - &l9.eval(w)?;
            Ok((&CertifiedReal::exact_int(2, w) + &num.checked_div(&ln2(w))?).to_precision(p))
        });
        let inst = ReductionInstance {
            label: format!("E4 m={m} d1={d1} d2={d2}"),
            gamma: theta_source(),
            mu,
            a: int_source(9),
            b: Base::Sqrt2.source(),
            m: m_big.clone(),
        };
        dujella_petho(&inst, cf, policy)
    });
    let reports: Vec<ReductionReport> = results.into_iter().collect::<Result<_>>()?;
    let failures: Vec<ReductionReport> = reports.iter().filter(|r| r.outcome.w_max().is_none()).cloned().collect();
    let mut worst: Option<(RealUpper, &ReductionReport)> = None;
    let mut precision_bits = 0;
    for r in &reports {
        if let Some(u) = RealUpper::from_outcome(&r.outcome) {
            if worst.as_ref().is_none_or(|(w, _)| u.scaled > w.scaled) {
                worst = Some((u, r));
            }
        }
        if let ReductionOutcome::ReducedBound { precision_bits: p, .. } = r.outcome {
            precision_bits = precision_bits.max(p);
        }
    }
    let zero = RealUpper { shown: "none".into(), scaled: BigInt::from(0) };
    let (k_dp, worst) = match worst {
        Some((u, r)) => (u, Some(r.clone())),
        None => (zero.clone(), None),
    };
    let mut cases = Vec::with_capacity(degenerate.len());
    for dm in degenerate {
        let bound = m_big + dm.c1;
        let label = format!("E4 m={} d1={} d2={} (mu = {} + {} theta)", dm.m, dm.d1, dm.d2, dm.c0, dm.c1);
        cases.push(DegenerateCase { mu: dm, legendre: legendre_case(label, cf, &bound, 9, Base::Sqrt2)? });
    }
    let k_degenerate = cases.iter().map(|c| c.legendre.bound.clone()).fold(zero, RealUpper::max);
    let max_degenerate_product = cases.iter().map(|c| c.legendre.product.clone()).max().unwrap_or_default();
    Ok(E4Round {
        m: m_big.clone(),
        m_cap,
        cells,
        worst,
        k_dp,
        degenerate: cases,
        k_degenerate,
        max_degenerate_product,
        precision_bits,
        failures,
    })
}

/// A stage result together with the named checks it must pass.
#[derive(Clone, Debug, Serialize, Deserialize)]
struct Checked<T> {
    result: T,
    checks: BTreeMap<String, bool>,
}

impl<T> Checked<T> {
    fn new(result: T, checks: &[(&str, bool)]) -> Self {
        Checked { result, checks: checks.iter().map(|(k, v)| (k.to_string(), *v)).collect() }
    }

    fn holds(&self) -> bool {
        self.checks.values().all(|&v| v)
    }
}

fn computed<T>(c: Checked<T>, precision_bits: u32) -> Result<Computed<Checked<T>>> {
    Ok(Computed { holds: c.holds(), value: c, precision_bits })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct Split {
    lambda: RealUpper,
    /// From `lambda = k / 2`.
    k_cap: i64,
    /// From `lambda = theta m`.
    m_cap: i64,
}

/// `lambda` is `k / 2` or `theta m` with integers `k`, `m`; whether every such
/// value below `lambda` is at most `n`.
pub fn attainable_lambda_at_most(lambda: &RealUpper, n: i64) -> Result<bool> {
    let s = split(lambda)?;
    let theta_m = log2_of_10(LF_BITS).mul_int(&BigInt::from(s.m_cap.max(0)));
    Ok(s.k_cap <= 2 * n && theta_m.certainly_le(&CertifiedReal::exact_int(n, LF_BITS)))
}

fn split(lambda: &RealUpper) -> Result<Split> {
    let l = lambda.value();
    let two_l = RealUpper::of(&l.mul_int(&BigInt::from(2)));
    let over_theta = RealUpper::of(&l.to_precision(LF_BITS).checked_div(&log2_of_10(LF_BITS))?);
    Ok(Split { lambda: lambda.clone(), k_cap: two_l.int_below(), m_cap: over_theta.int_below() })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct KBound {
    k_split: i64,
    k_e4: i64,
    k_degenerate: i64,
    k_cap: i64,
}

/// The chain for `k > 500`: absolute bounds, then two reduction rounds that
/// end in `k <= 450`.
pub fn run_large_k(cfg: &RunConfig) -> Result<ProofLedger> {
    cfg.validate()?;
    crate::par::with_jobs(cfg.jobs, || large_k_stages(cfg))
}

fn large_k_stages(cfg: &RunConfig) -> Result<ProofLedger> {
    let mut runner = StageRunner::new(cfg)?;
    let policy = cfg.policy;
    let cache = match &cfg.out_dir {
        Some(dir) => CfCache::with_dir(dir.join("cf-cache"), policy)?,
        None => CfCache::in_memory(policy),
    };
    let logs = LogTable::new();

    let chain: Checked<Vec<StageBound>> = runner.run(
        "large-k-bounds",
        "k < 3.6e30, m + ell < 1.5e282, n < 4.5e282 for k > 500",
        &serde_json::json!({ "k_min": 501 }),
        || {
            let stages = stage_bounds_large_k()?;
            let ok = stages.iter().all(|s| s.holds);
            let ml = stages.iter().any(|s| s.name == "absolute-m+l" && s.printed == M_A && s.holds);
            computed(Checked::new(stages, &[("all links hold", ok), ("m + ell < 1.5e282", ml)]), LF_BITS)
        },
    )?;
    debug_assert!(chain.holds());
    let m_a = sci_int(M_A);
    let cf = theta_cf(&cache, &m_a)?;

    let e6a: Checked<E6Round> = runner.run(
        "round-a-e6",
        "lambda <= 950 for d1 <= 8; 2^lambda < 38 * 5395 * 1.5e282 < 3.1e287 for d1 = 9",
        &serde_json::json!({ "M": M_A, "A": 38, "B": 2 }),
        || {
            let r = e6_round(&m_a, &cf, &policy)?;
            let checks = [
                ("every d1 <= 8 reduces", r.failures.is_empty()),
                ("lambda <= 950 for d1 <= 8", attainable_lambda_at_most(&r.dp_lambda, 950)?),
                ("38 (a_M + 2) M < 3.1e287", r.d1_9.product < sci_int("3.1e287")),
                ("lambda <= 955 for d1 = 9", attainable_lambda_at_most(&r.d1_9.bound, LAMBDA_A)?),
            ];
            let p = r.precision_bits;
            computed(Checked::new(r, &checks), p)
        },
    )?;

    let split_a: Checked<Split> = runner.run(
        "round-a-split",
        "lambda = k/2 gives k <= 1910; lambda = theta m gives m <= 290",
        &serde_json::json!({ "lambda": e6a.result.lambda }),
        || {
            let s = split(&e6a.result.lambda)?;
            let checks = [("k <= 1910", s.k_cap <= 1910), ("m <= 290", s.m_cap <= 290)];
            computed(Checked::new(s, &checks), LF_BITS)
        },
    )?;

    let e4a: Checked<E4Round> = runner.run(
        "round-a-e4",
        "k <= 1950 off the degenerate list; 2^(k/2) < 9 * 5395 * 1.5e282 < 7.3e286 on it",
        &serde_json::json!({ "M": M_A, "m_cap": 290, "A": 9, "B": "sqrt(2)" }),
        || {
            let r = e4_round(&m_a, 290, &cf, &logs, &policy)?;
            let checks = [
                ("every regular cell reduces", r.failures.is_empty()),
                ("k <= 1950 off the list", r.k_dp.int_below() <= 1950),
                ("9 (a_M + 2) M' < 7.3e286", r.max_degenerate_product < sci_int("7.3e286")),
                ("k <= 1905 on the list", r.k_degenerate.int_below() <= 1905),
            ];
            let p = r.precision_bits;
            computed(Checked::new(r, &checks), p)
        },
    )?;

    let k_a: Checked<KBound> = runner.run(
        "round-a-k",
        "k <= 1950, hence m + ell < 1.6e59",
        &serde_json::json!({
            "k_split": split_a.result.k_cap,
            "k_e4": e4a.result.k_dp.int_below(),
            "k_degenerate": e4a.result.k_degenerate.int_below(),
        }),
        || {
            let kb = KBound {
                k_split: split_a.result.k_cap,
                k_e4: e4a.result.k_dp.int_below(),
                k_degenerate: e4a.result.k_degenerate.int_below(),
                k_cap: split_a.result.k_cap.max(e4a.result.k_cap()),
            };
            let ml = ml_bound_at(&BigInt::from(1950));
            let checks = [
                ("k <= 1950", kb.k_cap <= 1950),
                (
                    "3e28 k^8 log^5 k <= 1.6e59 at k = 1950",
                    ml.certainly_le(&CertifiedReal::parse_decimal(M_B, LF_BITS)?),
                ),
            ];
            computed(Checked::new(kb, &checks), LF_BITS)
        },
    )?;
    debug_assert!(k_a.holds());
    let m_b = sci_int(M_B);

    let e6b: Checked<E6Round> = runner.run(
        "round-b-e6",
        "lambda <= 210, including d1 = 9",
        &serde_json::json!({ "M": M_B, "A": 38, "B": 2 }),
        || {
            let r = e6_round(&m_b, &cf, &policy)?;
            let checks = [
                ("every d1 <= 8 reduces", r.failures.is_empty()),
                ("lambda <= 210", attainable_lambda_at_most(&r.lambda, LAMBDA_B)?),
            ];
            let p = r.precision_bits;
            computed(Checked::new(r, &checks), p)
        },
    )?;

    let split_b: Checked<Split> = runner.run(
        "round-b-split",
        "lambda = k/2 gives k <= 420; lambda = theta m gives m <= 65",
        &serde_json::json!({ "lambda": e6b.result.lambda }),
        || {
            let s = split(&e6b.result.lambda)?;
            let checks = [("k <= 420", s.k_cap <= 420), ("m <= 65", s.m_cap <= 65)];
            computed(Checked::new(s, &checks), LF_BITS)
        },
    )?;

    let e4b: Checked<E4Round> = runner.run(
        "round-b-e4",
        "k <= 450 for 1 <= m <= 65, degenerate cells included",
        &serde_json::json!({ "M": M_B, "m_cap": 65, "A": 9, "B": "sqrt(2)" }),
        || {
            let r = e4_round(&m_b, 65, &cf, &logs, &policy)?;
            let checks = [
                ("every regular cell reduces", r.failures.is_empty()),
                ("k <= 450 off the list", r.k_dp.int_below() <= 450),
                ("k <= 450 on the list", r.k_degenerate.int_below() <= 450),
            ];
            let p = r.precision_bits;
            computed(Checked::new(r, &checks), p)
        },
    )?;

    let _: Checked<KBound> = runner.run(
        "contradiction",
        "k <= 450 contradicts k > 500",
        &serde_json::json!({
            "k_split": split_b.result.k_cap,
            "k_e4": e4b.result.k_dp.int_below(),
            "k_degenerate": e4b.result.k_degenerate.int_below(),
        }),
        || {
            let kb = KBound {
                k_split: split_b.result.k_cap,
                k_e4: e4b.result.k_dp.int_below(),
                k_degenerate: e4b.result.k_degenerate.int_below(),
                k_cap: split_b.result.k_cap.max(e4b.result.k_cap()),
            };
            let checks = [("k <= 450", kb.k_cap <= 450), ("k <= 500", kb.k_cap <= 500)];
            computed(Checked::new(kb, &checks), 0)
        },
    )?;
    runner.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_upper_integer_parts() {
        let u = RealUpper::of(&CertifiedReal::ratio(19095, 10, 64));
        assert_eq!(u.int_below(), 1909);
        assert!(u.at_most(1910));
        assert!(!u.at_most(1909));
        let exact = RealUpper { shown: "3".into(), scaled: BigInt::from(3) << FRAC };
        assert_eq!(exact.int_below(), 2);
    }

    #[test]
    fn split_of_955() {
        let s = split(&RealUpper { shown: "955".into(), scaled: BigInt::from(955) << FRAC }).unwrap();
        assert_eq!(s.k_cap, 1909);
        assert_eq!(s.m_cap, 287);
        let above = RealUpper::of(&CertifiedReal::parse_decimal("955.014", 64).unwrap());
        assert!(!above.at_most(955));
        assert!(attainable_lambda_at_most(&above, 955).unwrap());
        let far = RealUpper::of(&CertifiedReal::parse_decimal("955.6", 64).unwrap());
        assert!(!attainable_lambda_at_most(&far, 955).unwrap());
    }

    #[test]
    fn round_b_e6_small_case() {
        let cache = CfCache::in_memory(PrecisionPolicy::default());
        let m = sci_int(M_B);
        let cf = theta_cf(&cache, &m).unwrap();
        let r = e6_round(&m, &cf, &PrecisionPolicy::default()).unwrap();
        assert!(r.failures.is_empty());
        assert!(matches!(r.reports[8].outcome, ReductionOutcome::EpsilonNonpositive { .. }));
        assert!(attainable_lambda_at_most(&r.lambda, LAMBDA_B).unwrap());
    }
}
