//! One line per acceptance criterion: `PASS`/`FAIL`, the measured values and
//! the wall time. Exits non-zero if any criterion fails.

use std::collections::BTreeSet;
use std::time::Instant;

use num_bigint::{BigInt, BigUint};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use repfib_core::kfib::{two_block_decompose, TwoBlockDecomposition};
use repfib_core::linforms::{c_k, stage_bounds_large_k, stage_bounds_small_k};
use repfib_core::pipeline::{
    attainable_lambda_at_most, e4_round, e6_round, expected_solutions, round1_for_k, verify_theorem, KSources,
    LogTable, RealUpper, RunConfig, LAMBDA_A, LAMBDA_B, M_A, M_B, THEOREM_FAMILIES, THEOREM_TABLE,
};
use repfib_core::realnum::{dd_errors, ln2, zeta_within_bound, CertifiedReal, FnSource, PrecisionPolicy, SharedSource};
use repfib_core::reduction::{
    dujella_petho, int_source, legendre_lower, theta_source, CfCache, ContinuedFraction, ReductionInstance,
    ReductionOutcome, EXTRA_CONVERGENTS,
};
use repfib_core::{solve_small_n, Result};

type Verdict = Result<(bool, String)>;
type Criterion = (&'static str, fn() -> Verdict);

fn int(text: &str) -> BigInt {
    CertifiedReal::parse_decimal(text, 0).unwrap().floor().unwrap()
}

fn theta_cf(m: &BigInt) -> Result<std::sync::Arc<ContinuedFraction>> {
    CfCache::in_memory(PrecisionPolicy::default()).get_beyond(&theta_source(), &(m * 6), EXTRA_CONVERGENTS + 1)
}

fn c1_theorem() -> Verdict {
    let cfg = RunConfig { theorem_k_max: 500, n_max: 500, ..RunConfig::default() };
    let r = verify_theorem(&cfg)?;
    let entries = r.entries.iter().filter(|e| e.in_range && e.found).count();
    let families = r.families.iter().filter(|f| f.from_small_n && f.found == f.expected).count();
    let expected = expected_solutions(2..=500, 500).len();
    let ok = r.holds()
        && entries == THEOREM_TABLE.len()
        && families == THEOREM_FAMILIES.len()
        && r.extras.is_empty()
        && r.misses.is_empty()
        && r.solutions == expected;
    Ok((
        ok,
        format!(
            "{entries}/22 table entries, {families}/3 families, {} solutions (expected {expected}), {} extras, {} misses",
            r.solutions,
            r.extras.len(),
            r.misses.len()
        ),
    ))
}

fn c2_dresden_du() -> Verdict {
    let half = CertifiedReal::ratio(1, 2, 64);
    let mut worst = 0f64;
    let mut checked = 0;
    for k in 2..=20 {
        for e in dd_errors(k, 300)? {
            if !e.abs().certainly_lt(&half) {
                return Ok((false, format!("k={k}: |e| = {e} not certified below 1/2")));
            }
            worst = worst.max(e.abs().upper_f64());
            checked += 1;
        }
    }
    Ok((true, format!("{checked} pairs (k, n), max |e| <= {worst:.6}")))
}

fn c3_zeta() -> Verdict {
    let mut checked = 0;
    for k in 10..=40u32 {
        let top = (1u64 << (k / 2)).min(500);
        for n in 2..top {
            if !zeta_within_bound(k, n)? {
                return Ok((false, format!("k={k}, n={n}: |zeta| >= 2 / 2^(k/2)")));
            }
            checked += 1;
        }
    }
    Ok((true, format!("{checked} pairs, 2 <= n < min(2^(k/2), 500)")))
}

fn c4_small_n() -> Verdict {
    let r = solve_small_n(12);
    let values: BTreeSet<u64> = r.families.iter().map(|f| f.value.to_string().parse().unwrap()).collect();
    let ok = r.ell_bound <= 3 && r.block_sum_bound <= 13 && values == BTreeSet::from([16, 32, 64]);
    Ok((ok, format!("ell <= {}, m + ell <= {}, families {values:?}", r.ell_bound, r.block_sum_bound)))
}

fn c5_theta_cf() -> Verdict {
    let m = int(M_A);
    let cf = theta_cf(&m)?;
    let head: Vec<String> = cf.quotients[..4].iter().map(|a| a.to_string()).collect();
    let lb = legendre_lower(&cf, &m)?;
    let ok = head == ["3", "3", "9", "2"]
        && cf.quotients[135] == BigInt::from(5393)
        && lb.n_index == 570
        && cf.q[570] <= m
        && m < cf.q[571]
        && lb.a_m == BigInt::from(5393)
        && lb.argmax == 135
        && lb.factor == BigInt::from(5395);
    Ok((
        ok,
        format!(
            "head {head:?}, a_135 = {}, q_570 <= M < q_571: {}, factor {}, {} terms at {} bits",
            cf.quotients[135],
            cf.q[570] <= m && m < cf.q[571],
            lb.factor,
            cf.len(),
            cf.precision
        ),
    ))
}

fn c6_lambda() -> Verdict {
    let product = BigInt::from(38 * 5395) * int(M_A);
    let cap = int("3.1e287");
    let log2_cap = CertifiedReal::exact_int(cap.clone(), 256).ln()?.checked_div(&ln2(256))?;
    let lambda = RealUpper::of(&log2_cap);
    let ok = product < cap && attainable_lambda_at_most(&lambda, LAMBDA_A)?;
    Ok((
        ok,
        format!(
            "38 * 5395 * 1.5e282 < 3.1e287: {}, lambda < {}, attainable lambda <= 955",
            product < cap,
            lambda.shown
        ),
    ))
}

fn c7_matveev() -> Verdict {
    let fl3 = stage_bounds_large_k()?.into_iter().find(|s| s.name == "matveev-FL3").expect("FL3 stage");
    let mut ok = fl3.holds;
    let mut notes = vec![format!("t=3 coefficient {} <= 1.1e12: {}", fl3.computed, fl3.holds)];
    for k in [4u32, 10, 100] {
        let kf = f64::from(k);
        let closed = 1.4
            * 30f64.powi(6)
            * 3f64.powf(4.5)
            * kf
            * kf
            * (1.0 + kf.ln())
            * (4.0 * kf * kf.ln())
            * 2f64.ln()
            * (kf * 10f64.ln());
        let ours = c_k(k);
        let within = ours.upper_f64() <= closed * 1.05 && ours.lower_f64() >= closed / 1.05;
        ok &= within;
        notes.push(format!("c_{k} = {} ({within})", ours.to_sci_string(6)));
    }
    Ok((ok, notes.join(", ")))
}

fn c8_small_k_round1() -> Verdict {
    let logs = LogTable::new();
    let cache = CfCache::in_memory(PrecisionPolicy::default());
    let policy = PrecisionPolicy::default();
    let mut worst = (0u32, String::new(), BigInt::from(0));
    for k in 4..=20 {
        let m = stage_bounds_small_k(k)?.n_bound;
        let r = round1_for_k(&KSources::new(k), &logs, &m, &cache, &policy)?;
        if !r.failures.is_empty() {
            return Ok((false, format!("k={k}: {:?}", r.failures)));
        }
        if r.w_upper_scaled > worst.2 {
            worst = (k, r.w_upper.clone(), r.w_upper_scaled.clone());
        }
    }
    let ok = worst.2 < BigInt::from(151) << 32;
    Ok((ok, format!("153 reductions, max log(Aq/eps)/log B = {} at k = {} (< 151)", worst.1, worst.0)))
}

fn c9_round_a() -> Verdict {
    let m = int(M_A);
    let cf = theta_cf(&m)?;
    let r = e6_round(&m, &cf, &PrecisionPolicy::default())?;
    let dp = r.failures.is_empty() && attainable_lambda_at_most(&r.dp_lambda, 950)?;
    let legendre = r.d1_9.legendre.factor == BigInt::from(5395) && attainable_lambda_at_most(&r.d1_9.bound, LAMBDA_A)?;
    Ok((
        dp && legendre,
        format!(
            "d1 <= 8: lambda < {} (<= 950: {dp}); d1 = 9: factor {}, lambda < {} (attainable <= 955: {legendre})",
            r.dp_lambda.shown, r.d1_9.legendre.factor, r.d1_9.bound.shown
        ),
    ))
}

fn c10_round_b() -> Verdict {
    let m = int(M_B);
    let cf = theta_cf(&m)?;
    let policy = PrecisionPolicy::default();
    let e6 = e6_round(&m, &cf, &policy)?;
    let l_ok = e6.failures.is_empty() && attainable_lambda_at_most(&e6.lambda, LAMBDA_B)?;
    let e4 = e4_round(&m, 65, &cf, &LogTable::new(), &policy)?;
    let k_ok = e4.failures.is_empty() && e4.k_cap() <= 450;
    Ok((
        l_ok && k_ok,
        format!(
            "E6 lambda < {}; E4 over {} cells ({} degenerate): k < {} / {} so k <= {} < 500",
            e6.lambda.shown,
            e4.cells,
            e4.degenerate.len(),
            e4.k_dp.shown,
            e4.k_degenerate.shown,
            e4.k_cap()
        ),
    ))
}

fn two_block_round_trips(rng: &mut StdRng, cases: usize) -> Result<bool> {
    for _ in 0..cases {
        let d1 = rng.gen_range(1..=9u8);
        let d2 = rng.gen_range(0..=9u8);
        let m = rng.gen_range(1..=40u32);
        let ell = rng.gen_range(1..=40u32);
        let shape = TwoBlockDecomposition::new(d1, d2, m, ell)?;
        let v = shape.value();
        let found = two_block_decompose(&v)?;
        if !found.contains(&shape) || found.iter().any(|d| d.value() != v) {
            return Ok(false);
        }
        let noise = BigUint::from(rng.gen::<u64>());
        if two_block_decompose(&noise)?.iter().any(|d| d.value() != noise) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn convergents_are_good(cf: &ContinuedFraction, gamma: &CertifiedReal) -> bool {
    (0..cf.len() - 1).all(|i| {
        // |gamma - p/q| < 1/(q q')  <=>  |gamma q - p| q' < 1
        let err = (&gamma.mul_int(&cf.q[i]) - &CertifiedReal::exact_int(cf.p[i].clone(), gamma.precision())).abs();
        err.mul_int(&cf.q[i + 1]).certainly_lt(&CertifiedReal::one(gamma.precision()))
    })
}

/// Samples `r <= M` and checks `|r gamma - s + mu| >= A B^-w_max` at the
/// nearest `s`, which rules out every `w >= w_max`.
fn dp_falsification(rng: &mut StdRng, samples: usize) -> Result<bool> {
    let m = BigInt::from(1_000_000);
    let cf = theta_cf(&m)?;
    let policy = PrecisionPolicy::default();
    for d1 in 1..=8i64 {
        let mu: SharedSource = FnSource::shared(format!("2+log({d1}/9)/log 2"), move |p| {
            let w = p + 16;
            let l = CertifiedReal::ratio(d1, 9, w).ln()?.checked_div(&ln2(w))?;
            Ok((&CertifiedReal::exact_int(2, w) + &l).to_precision(p))
        });
        let inst = ReductionInstance {
            label: format!("sample d1={d1}"),
            gamma: theta_source(),
            mu: mu.clone(),
            a: int_source(38),
            b: int_source(2),
            m: m.clone(),
        };
        let w_max = match dujella_petho(&inst, &cf, &policy)?.outcome {
            ReductionOutcome::ReducedBound { w_max, .. } => w_max,
            _ => return Ok(false),
        };
        let p = 256;
        let (g, u) = (theta_source().eval(p)?, mu.eval(p)?);
        let floor_val =
            CertifiedReal::exact_int(38, p).checked_div(&CertifiedReal::exact_int(BigInt::from(1) << w_max, p))?;
        for _ in 0..samples {
            let r = BigInt::from(rng.gen_range(1..=1_000_000i64));
            let x = &g.mul_int(&r) + &u;
            if x.dist_to_nearest_int().certainly_lt(&floor_val) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn refinement_is_monotone() -> Result<bool> {
    let sources = [theta_source(), KSources::new(7).log_alpha, KSources::new(30).log_f];
    for s in sources {
        let mut prev: Option<CertifiedReal> = None;
        for p in [64, 128, 256, 512, 1024] {
            let x = s.eval(p)?;
            if let Some(q) = &prev {
                if q.intersect(&x).is_none() || x.width_log2() > q.width_log2() {
                    return Ok(false);
                }
            }
            prev = Some(x);
        }
    }
    Ok(true)
}

fn c11_properties() -> Verdict {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let rt = two_block_round_trips(&mut rng, 100_000)?;
    let m = int(M_A);
    let cf = theta_cf(&m)?;
    let gamma = theta_source().eval(cf.precision + 64)?;
    let conv = convergents_are_good(&cf, &gamma);
    let dp = dp_falsification(&mut rng, 2_000)?;
    let mono = refinement_is_monotone()?;
    Ok((
        rt && conv && dp && mono,
        format!(
            "two-block round trip x1e5: {rt}, convergent quality over {} terms: {conv}, sampled falsification: {dp}, monotone refinement: {mono}",
            cf.len()
        ),
    ))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("theorem table reproduction", c1_theorem),
        ("Binet-type error below 1/2", c2_dresden_du),
        ("zeta bound for k in [10, 40]", c3_zeta),
        ("power-of-two regime", c4_small_n),
        ("continued fraction of log 10 / log 2", c5_theta_cf),
        ("lambda <= 955 from 3.1e287", c6_lambda),
        ("Matveev constants", c7_matveev),
        ("small-k round 1, k in [4, 20]", c8_small_k_round1),
        ("large-k round A", c9_round_a),
        ("large-k round B", c10_round_b),
        ("property suites", c11_properties),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let id = format!("criterion {:>2}", i + 1);
        if !filter.is_empty() && !filter.iter().any(|x| name.contains(x.as_str()) || id.contains(x.as_str())) {
            continue;
        }
        let t = Instant::now();
        let (ok, detail) = match f() {
            Ok(v) => v,
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            failed += 1;
        }
        println!("{} {id} {name}: {detail} [{:.1?}]", if ok { "PASS" } else { "FAIL" }, t.elapsed());
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
