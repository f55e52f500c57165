//! Logarithm and exponential of exact dyadic points with rigorous error bounds.

use std::sync::Mutex;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::certified::{ceil_shr, floor_div, floor_shr, CertifiedReal};

const GUARD_BITS: u32 = 64;

/// `atanh(u/v) * 2^w` truncated, together with an error bound in ulps.
///
/// Requires `v > 0` and `|u/v| <= 1/3`. Each partial term carries an error
/// below 3 ulps and the tail after the power underflows stays below 3 ulps.
fn atanh_fixed(u: &BigInt, v: &BigInt, w: u32) -> (BigInt, u64) {
    debug_assert!(v.is_positive());
    debug_assert!(BigInt::from(3) * u.abs() <= *v);
    let negative = u.is_negative();
    let u = u.abs();
    let small = u.bits() <= 31 && v.bits() <= 31;
    let (u2, v2) = (&u * &u, v * v);
    let z2 = if small { BigInt::zero() } else { floor_div(&(&u2 << w), &v2) };
    let mut pow = floor_div(&(&u << w), v);
    let mut sum = BigInt::zero();
    let mut j: u64 = 0;
    while !pow.is_zero() {
        sum += &pow / BigInt::from(2 * j + 1);
        pow = if small { (&pow * &u2) / &v2 } else { floor_shr(&(&pow * &z2), w) };
        j += 1;
    }
    let sum = if negative { -sum } else { sum };
    (sum, 3 * j + 10)
}

static LN2_CACHE: Mutex<Option<CertifiedReal>> = Mutex::new(None);

/// Enclosure of `ln 2` with `w` fractional bits.
pub fn ln2(w: u32) -> CertifiedReal {
    if let Some(c) = LN2_CACHE.lock().unwrap().as_ref() {
        if c.precision() >= w {
            return c.to_precision(w);
        }
    }
    let inner = w + GUARD_BITS;
    let (s, err) = atanh_fixed(&BigInt::one(), &BigInt::from(3), inner);
    let e = BigInt::from(err);
    let val = CertifiedReal::from_endpoints(2 * (&s - &e), 2 * (&s + &e), inner).to_precision(w);
    *LN2_CACHE.lock().unwrap() = Some(val.clone());
    val
}

/// Enclosure of `ln(m * 2^-q)` with `p` fractional bits, as scaled endpoints.
pub(crate) fn ln_dyadic(m: &BigInt, q: u32, p: u32) -> (BigInt, BigInt) {
    assert!(m.is_positive());
    let w = p + GUARD_BITS;
    let bits = m.bits() as i64;
    // m / 2^bits lies in [1/2, 1); pick t so that y = m / 2^t is in [2/3, 4/3)
    let top = BigInt::one() << bits as u32;
    let t = if BigInt::from(3) * m < BigInt::from(2) * &top { bits - 1 } else { bits };
    let pow_t = BigInt::one() << t as u32;
    let (s, err) = atanh_fixed(&(m - &pow_t), &(m + &pow_t), w);
    let err = BigInt::from(err);
    let e = t - q as i64;
    let l2 = ln2(w);
    let (l2lo, l2hi) = l2.scaled_endpoints();
    let eb = BigInt::from(e);
    let (elo, ehi) = if e >= 0 { (&eb * l2lo, &eb * l2hi) } else { (&eb * l2hi, &eb * l2lo) };
    let lo = 2 * (&s - &err) + elo;
    let hi = 2 * (&s + &err) + ehi;
    (floor_shr(&lo, GUARD_BITS), ceil_shr(&hi, GUARD_BITS))
}

/// Enclosure of `exp(m * 2^-q)` with `p` fractional bits, as scaled endpoints.
pub(crate) fn exp_dyadic(m: &BigInt, q: u32, p: u32) -> (BigInt, BigInt) {
    let int_bits = (m.abs() >> q).bits() as u32;
    let s = int_bits + 12;
    let magnitude = if m.is_positive() {
        // exp(x) < 2^(2x) for x > 0
        2 * ((m >> q).to_u32().unwrap_or(u32::MAX / 4) + 1)
    } else {
        0
    };
    let w = p + s + magnitude + GUARD_BITS;
    // r = x / 2^s, |r| < 2^-12
    let r = CertifiedReal::dyadic(m.clone(), q + s).to_precision(w.max(q + s));
    let mut term = CertifiedReal::one(w);
    let mut sum = CertifiedReal::one(w);
    let mut j: u64 = 1;
    loop {
        term = (&term * &r).div_int(&BigInt::from(j)).expect("nonzero").to_precision(w);
        sum = &sum + &term;
        let mag = term.abs();
        if mag.cmp_ratio(&BigInt::one(), &(BigInt::one() << (w - 2))) == Some(std::cmp::Ordering::Less) {
            // remaining tail is bounded by |term| * |r| / (1 - |r|) < |term|
            let bound = mag.to_precision(w).scaled_endpoints().1.clone() + 1;
            let tail = CertifiedReal::from_endpoints(-&bound, bound, w);
            sum = &sum + &tail;
            break;
        }
        j += 1;
    }
    let mut acc = sum;
    for _ in 0..s {
        acc = &acc * &acc;
    }
    let out = acc.to_precision(p);
    let (lo, hi) = out.scaled_endpoints();
    (lo.clone(), hi.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln2_digits() {
        let l = ln2(200);
        // ln 2 = 0.693147180559945309417232121458176568...
        assert!(l.to_decimal_string(30).starts_with("0.693147180559945309417232121458"));
        assert!(l.width_log2().unwrap() <= -190);
    }

    #[test]
    fn ln10_digits() {
        let ten = CertifiedReal::exact_int(10, 300);
        let l = ten.ln().unwrap();
        // ln 10 = 2.302585092994045684017991454684364207601...
        assert!(l.to_decimal_string(36).starts_with("2.30258509299404568401799145468436420"));
    }

    #[test]
    fn ln_of_small_and_large_points() {
        let x = CertifiedReal::ratio(1, 1000, 200);
        let l = x.ln().unwrap();
        assert!((l.midpoint_f64() - (0.001f64).ln()).abs() < 1e-12);
        let big = CertifiedReal::exact_int(num_traits::pow(BigInt::from(10), 300), 100);
        let l = big.ln().unwrap();
        assert!((l.midpoint_f64() - 300.0 * 10f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn exp_ln_roundtrip() {
        let x = CertifiedReal::ratio(7, 3, 160);
        let e = x.exp();
        assert!((e.midpoint_f64() - (7.0f64 / 3.0).exp()).abs() < 1e-12);
        let back = e.ln().unwrap();
        assert!(back.contains(&x) || back.intersect(&x).is_some());
        let n = CertifiedReal::ratio(-50, 1, 200).exp();
        assert!((n.midpoint_f64() / (-50f64).exp() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn atanh_error_bound_is_honest() {
        // atanh(1/5) = 0.2027325540540821909890...
        let (s, err) = atanh_fixed(&BigInt::from(1), &BigInt::from(5), 120);
        let approx = CertifiedReal::from_endpoints(&s - BigInt::from(err), &s + BigInt::from(err), 120);
        assert!(approx.to_decimal_string(20).starts_with("0.2027325540540821909"));
    }
}
