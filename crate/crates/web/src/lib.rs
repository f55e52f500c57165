//! Browser bindings: enumeration, the Binet-type error curve and the
//! continued fraction of `log 10 / log 2` with its Legendre bound. Every
//! export returns a JSON string.

use num_bigint::BigInt;
use repfib_core::realnum::{dd_errors, dominant_root, CertifiedReal, PrecisionPolicy};
use repfib_core::reduction::{legendre_lower, theta_source, CfCache};
use repfib_core::{enumerate_solutions, Error, Result};
use serde_json::json;
use wasm_bindgen::prelude::*;

const MAX_K: u32 = 200;
const MAX_N: u64 = 1000;

fn js(r: Result<String>) -> std::result::Result<String, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

pub fn enumerate_json(k_min: u32, k_max: u32, n_max: u64) -> Result<String> {
    if k_max > MAX_K || n_max > MAX_N {
        return Err(Error::InvalidArgument(format!("demo limits are k <= {MAX_K}, n <= {MAX_N}")));
    }
    let sols = enumerate_solutions(k_min..=k_max, n_max)?;
    Ok(serde_json::to_string(&sols)?)
}

/// Solutions `F_n^(k) = d1..d1 d2..d2` with `k_min <= k <= k_max`, `n <= n_max`.
#[wasm_bindgen]
pub fn enumerate(k_min: u32, k_max: u32, n_max: u32) -> std::result::Result<String, JsError> {
    js(enumerate_json(k_min, k_max, u64::from(n_max)))
}

pub fn error_curve_json(k: u32, n_max: u64) -> Result<String> {
    if !(2..=MAX_K).contains(&k) || n_max > MAX_N {
        return Err(Error::InvalidArgument(format!("demo limits are 2 <= k <= {MAX_K}, n <= {MAX_N}")));
    }
    let root = dominant_root(k, 128)?;
    let errs = dd_errors(k, n_max)?;
    let half = CertifiedReal::ratio(1, 2, 64);
    let within = errs.iter().all(|e| e.abs().certainly_lt(&half));
    let points: Vec<_> =
        errs.iter().enumerate().map(|(i, e)| json!({ "n": i + 1, "lo": e.lower_f64(), "hi": e.upper_f64() })).collect();
    Ok(json!({
        "k": k,
        "alpha": root.alpha.to_decimal_string(30),
        "fk_alpha": root.fk_alpha.to_decimal_string(30),
        "all_below_half": within,
        "points": points,
    })
    .to_string())
}

/// `e(n) = F_n^(k) - f_k(alpha) alpha^(n-1)` as certified `[lo, hi]` pairs.
#[wasm_bindgen]
pub fn error_curve(k: u32, n_max: u32) -> std::result::Result<String, JsError> {
    js(error_curve_json(k, u64::from(n_max)))
}

pub fn theta_legendre_json(bound: &str) -> Result<String> {
    let m = CertifiedReal::parse_decimal(bound.trim(), 64)?
        .floor()
        .filter(|m| *m >= BigInt::from(1))
        .ok_or_else(|| Error::InvalidArgument(format!("M must be a positive integer, got {bound:?}")))?;
    if m.bits() > 1200 {
        return Err(Error::InvalidArgument("demo limit is M < 2^1200".into()));
    }
    let cache = CfCache::in_memory(PrecisionPolicy::default());
    let cf = cache.get_beyond(&theta_source(), &m, 1)?;
    let lb = legendre_lower(&cf, &m)?;
    let j = lb.n_index + 1;
    let head: Vec<String> = cf.quotients.iter().take(j + 1).map(|a| a.to_string()).collect();
    Ok(json!({
        "M": m.to_string(),
        "n_index": lb.n_index,
        "q_n": cf.q[lb.n_index].to_string(),
        "q_next": cf.q[j].to_string(),
        "a_max": lb.a_m.to_string(),
        "argmax": lb.argmax,
        "factor": lb.factor.to_string(),
        "quotients": head,
        "precision_bits": cf.precision,
    })
    .to_string())
}

/// Continued fraction of `log 10 / log 2` up to the first `q > M`, with
/// `a_M = max a_i` and the factor `a_M + 2` in `|x theta - y| > 1/((a_M + 2) x)`.
#[wasm_bindgen]
pub fn theta_legendre(bound: &str) -> std::result::Result<String, JsError> {
    js(theta_legendre_json(bound))
}
