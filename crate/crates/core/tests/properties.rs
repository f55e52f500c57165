use num_bigint::{BigInt, BigUint};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use repfib_core::kfib::{two_block_decompose, TwoBlockDecomposition};
use repfib_core::linforms::{matveev_constant, matveev_exponent, MatveevInstance};
use repfib_core::pipeline::{run_small_k, RunConfig};
use repfib_core::realnum::{CertifiedReal, FnSource, PrecisionPolicy, SharedSource};
use repfib_core::reduction::{cf_expand, legendre_lower, theta_source};

fn sqrt_source(n: u64) -> SharedSource {
    FnSource::shared(format!("sqrt({n})"), move |p| CertifiedReal::exact_int(n, p).sqrt())
}

fn log_ratio_source(a: u64, b: u64) -> SharedSource {
    FnSource::shared(format!("log {a} / log {b}"), move |p| {
        let w = p + 16;
        Ok(CertifiedReal::exact_int(a, w).ln()?.checked_div(&CertifiedReal::exact_int(b, w).ln()?)?.to_precision(p))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn two_block_shapes_round_trip(d1 in 1u8..=9, d2 in 0u8..=9, m in 1u32..60, ell in 1u32..60) {
        let shape = TwoBlockDecomposition::new(d1, d2, m, ell).unwrap();
        let v = shape.value();
        prop_assert_eq!(v.to_string(), shape.digit_string());
        let found = two_block_decompose(&v).unwrap();
        prop_assert!(found.contains(&shape));
        for d in found {
            prop_assert_eq!(d.value(), v.clone());
        }
    }

    #[test]
    fn decompositions_reproduce_arbitrary_values(x in any::<u64>()) {
        let v = BigUint::from(x);
        for d in two_block_decompose(&v).unwrap() {
            prop_assert_eq!(d.value(), v.clone());
        }
    }

    #[test]
    fn refinement_narrows_and_overlaps(n in 2u64..10_000, p in 32u32..400) {
        let s = sqrt_source(n);
        let coarse = s.eval(p).unwrap();
        let fine = s.eval(2 * p).unwrap();
        prop_assert!(coarse.intersect(&fine).is_some());
        prop_assert!(fine.width_log2() <= coarse.width_log2());
        let l = fine.ln().unwrap();
        prop_assert!(l.intersect(&coarse.ln().unwrap()).is_some());
    }

    #[test]
    fn matveev_is_monotone(a1 in 1u32..1000, a2 in 1u32..1000, bump in 1u32..1000, t in 2u32..6, d in 1u32..50) {
        let r = |x: u32| CertifiedReal::ratio(i64::from(x), 7, 128);
        let base = MatveevInstance::new("base", d, BigInt::from(3), vec![r(a1), r(a2)]).unwrap();
        let bigger = MatveevInstance::new("bigger", d, BigInt::from(3), vec![r(a1 + bump), r(a2)]).unwrap();
        let longer_d = MatveevInstance::new("D", d, BigInt::from(30), vec![r(a1), r(a2)]).unwrap();
        let e = matveev_exponent(&base).unwrap();
        prop_assert!(e.certainly_lt(&matveev_exponent(&bigger).unwrap()));
        prop_assert!(e.certainly_lt(&matveev_exponent(&longer_d).unwrap()));
        prop_assert!(matveev_constant(t, d).certainly_lt(&matveev_constant(t + 1, d)));
        prop_assert!(matveev_constant(t, d).certainly_lt(&matveev_constant(t, d + 1)));
    }
}

#[test]
fn convergents_satisfy_the_quality_bound() {
    let policy = PrecisionPolicy::default();
    for (label, src) in [
        ("sqrt 2", sqrt_source(2)),
        ("sqrt 1999", sqrt_source(1999)),
        ("log 10 / log 3", log_ratio_source(10, 3)),
        ("log 7 / log 2", log_ratio_source(7, 2)),
    ] {
        let cf = cf_expand(src.clone(), 120, &policy).unwrap();
        let p = cf.precision + 64;
        let g = src.eval(p).unwrap();
        for i in 0..cf.len() - 1 {
            let err = (&g.mul_int(&cf.q[i]) - &CertifiedReal::exact_int(cf.p[i].clone(), p)).abs();
            assert!(err.mul_int(&cf.q[i + 1]).certainly_lt(&CertifiedReal::one(p)), "{label}: convergent {i}");
        }
    }
    let s2 = cf_expand(sqrt_source(2), 40, &policy).unwrap();
    assert!(s2.quotients[1..].iter().all(|a| *a == BigInt::from(2)));
}

#[test]
fn expansions_are_deterministic() {
    let policy = PrecisionPolicy::default();
    let a = cf_expand(theta_source(), 300, &policy).unwrap();
    let b = cf_expand(theta_source(), 300, &policy).unwrap();
    assert_eq!(a.quotients, b.quotients);
    assert_eq!(a.precision, b.precision);
}

/// For `0 < x < M`: `|x gamma - y*| > 1 / ((a_M + 2) x)` with `y*` nearest.
#[test]
fn legendre_bound_holds_on_samples() {
    let policy = PrecisionPolicy::default();
    let mut rng = StdRng::seed_from_u64(7);
    for (src, m) in [
        (theta_source(), 1_000_000i64),
        (log_ratio_source(10, 3), 50_000),
        (sqrt_source(3), 10_000),
        (log_ratio_source(5, 2), 2),
    ] {
        let cf = cf_expand(src.clone(), 60, &policy).unwrap();
        let mb = BigInt::from(m);
        let lb = legendre_lower(&cf, &mb).unwrap();
        let p = 192;
        let g = src.eval(p).unwrap();
        for _ in 0..2_500 {
            let x = BigInt::from(rng.gen_range(1..m.max(2)));
            let dist = g.mul_int(&x).dist_to_nearest_int();
            let floor = CertifiedReal::one(p).checked_div(&CertifiedReal::exact_int(&lb.factor * &x, p)).unwrap();
            assert!(floor.certainly_lt(&dist), "{}: x = {x}", cf.label);
        }
    }
}

#[test]
fn ledger_replay_is_deterministic() {
    let run = || {
        let cfg = RunConfig { k_min: 4, k_max: 6, n_max: 200, ..RunConfig::default() };
        let mut ledger = run_small_k(&cfg).unwrap();
        for s in &mut ledger.stages {
            s.wall_ms = 0;
        }
        ledger
    };
    let first = run();
    assert!(first.holds());
    assert_eq!(first, run());
}

#[test]
fn resumed_ledger_matches_a_fresh_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig {
        k_min: 5,
        k_max: 5,
        n_max: 200,
        out_dir: Some(dir.path().into()),
        resume: true,
        ..RunConfig::default()
    };
    let fresh = run_small_k(&cfg).unwrap();
    assert!(dir.path().join("ledger.json").exists());
    assert!(dir.path().join("small-k-round2.json").exists());
    let resumed = run_small_k(&cfg).unwrap();
    assert_eq!(fresh, resumed);
}
