//! Matveev's lower bound for linear forms in logarithms, logarithmic heights,
//! and the explicit bound chain built from them.

mod bounds;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::realnum::CertifiedReal;

pub use bounds::{
    c_k, check_log_square_inversion, ml_bound_at, solve_below, stage_bounds_large_k, stage_bounds_small_k,
    SmallKBounds, StageBound,
};

/// Working precision (fractional bits) for bound evaluation.
pub const LF_BITS: u32 = 192;

pub(crate) fn lit(text: &str) -> CertifiedReal {
    CertifiedReal::parse_decimal(text, LF_BITS).expect("well-formed literal")
}

pub(crate) fn ln_int(n: impl Into<BigInt>) -> CertifiedReal {
    CertifiedReal::exact_int(n, LF_BITS).ln().expect("positive integer")
}

/// `log|eta_1^b_1 ... eta_t^b_t - 1| > -E` data: `t` algebraic numbers in a real
/// field of degree `degree`, exponents bounded by `d`, and the `A_i`.
#[derive(Clone, Debug, Serialize)]
pub struct MatveevInstance {
    pub label: String,
    pub t: u32,
    pub degree: u32,
    #[serde(with = "crate::dec")]
    pub d: BigInt,
    pub a: Vec<CertifiedReal>,
}

impl MatveevInstance {
    pub fn new(label: impl Into<String>, degree: u32, d: BigInt, a: Vec<CertifiedReal>) -> Result<Self> {
        let t = a.len() as u32;
        if t < 2 {
            return Err(Error::InvalidArgument(format!("need at least two logarithms, got {t}")));
        }
        if degree < 1 {
            return Err(Error::InvalidArgument("field degree must be at least 1".into()));
        }
        if !d.is_positive() {
            return Err(Error::InvalidArgument(format!("D must be positive, got {d}")));
        }
        if let Some(i) = a.iter().position(|x| !x.is_positive()) {
            return Err(Error::NotPositive(format!("A_{} = {}", i + 1, a[i])));
        }
        Ok(MatveevInstance { label: label.into(), t, degree, d, a })
    }

    /// `1.4 * 30^(t+3) * t^4.5 * d^2 * (1 + log d) * A_1 ... A_t`, i.e. the
    /// exponent divided by `1 + log D`.
    pub fn coefficient(&self) -> CertifiedReal {
        self.a.iter().fold(matveev_constant(self.t, self.degree), |acc, x| &acc * x)
    }

    /// Whether every `A_i` is at least the matching floor
    /// `max(d h(eta_i), |log eta_i|, 0.16)`. Identical enclosures count as
    /// equal, which is how `A_i = h(eta_i)` choices show up.
    pub fn admits(&self, floors: &[CertifiedReal]) -> bool {
        floors.len() == self.a.len() && self.a.iter().zip(floors).all(|(a, f)| f == a || f.certainly_le(a))
    }
}

/// `1.4 * 30^(t+3) * t^4.5 * d^2 * (1 + log d)`.
pub fn matveev_constant(t: u32, degree: u32) -> CertifiedReal {
    let p = LF_BITS;
    let tb = BigInt::from(t);
    let t45 = CertifiedReal::exact_int(num_traits::pow(tb.clone(), 9), p).sqrt().expect("nonnegative");
    let pow30 = num_traits::pow(BigInt::from(30), (t + 3) as usize);
    let d = BigInt::from(degree);
    let one_plus_log_d = &CertifiedReal::one(p) + &ln_int(d.clone());
    let base = lit("1.4").mul_int(&(pow30 * &d * &d));
    &(&base * &t45) * &one_plus_log_d
}

/// Evaluates `E` with `log|Lambda| > -E`, rounding outward.
pub fn matveev_exponent(inst: &MatveevInstance) -> Result<CertifiedReal> {
    if inst.a.len() as u32 != inst.t {
        return Err(Error::InvalidArgument("t does not match the number of A_i".into()));
    }
    if let Some(i) = inst.a.iter().position(|x| !x.is_positive()) {
        return Err(Error::NotPositive(format!("A_{} = {}", i + 1, inst.a[i])));
    }
    if !inst.d.is_positive() {
        return Err(Error::InvalidArgument("D must be positive".into()));
    }
    let one_plus_log_d = &CertifiedReal::one(LF_BITS) + &ln_int(inst.d.clone());
    Ok(&inst.coefficient() * &one_plus_log_d)
}

/// `max(d h, |log eta|, 0.16)`.
pub fn a_floor(degree: u32, height: &CertifiedReal, abs_log: &CertifiedReal) -> CertifiedReal {
    height.mul_int(&BigInt::from(degree)).max(&abs_log.abs()).max(&lit("0.16"))
}

/// `h(p/q) = log max(|p|, q)` after reduction to lowest terms.
pub fn height_rational(p: &BigInt, q: &BigInt) -> Result<CertifiedReal> {
    if p.is_zero() || q.is_zero() {
        return Err(Error::InvalidArgument("height of zero or of an undefined quotient".into()));
    }
    let g = p.gcd(q);
    let (p, q) = (p / &g, q / &g);
    Ok(ln_int(p.abs().max(q.abs())))
}

/// Height majorants for the first `eta` of each Matveev application.
#[derive(Clone, Debug, Serialize)]
pub struct HeightBounds {
    pub k: u32,
    pub m: u32,
    pub d1: u8,
    pub d2: u8,
    /// `log 9 + 2 log k`, bounding `h(9 f_k(alpha) / d1)`.
    pub fl1: CertifiedReal,
    /// `4 log k`, the majorant actually used.
    pub fl1_majorant: CertifiedReal,
    /// `log 9 + 2 log k + log(d1 10^m - (d1 - d2))`, bounding
    /// `h((d1 10^m - (d1 - d2)) / (9 f_k(alpha)))`.
    pub fl2: CertifiedReal,
    /// `4 log k + (m + 1) log 10`.
    pub fl2_simplified: CertifiedReal,
    /// Exact `h((d1 10^m - (d1 - d2)) / 9)` for the rational form.
    pub rational: CertifiedReal,
    /// `log 9 + (m + 1) log 10`, its majorant.
    pub rational_majorant: CertifiedReal,
}

impl HeightBounds {
    /// `3.8e12 k^4 log^2 k log n`, valid once `m log 10 < 3.7e12 k^4 log^2 k log n`.
    pub fn fl2_majorant(&self, n: u64) -> CertifiedReal {
        let lk = ln_int(self.k);
        let c = lit("3.8e12").mul_int(&num_traits::pow(BigInt::from(self.k), 4));
        &(&c * &(&lk * &lk)) * &ln_int(n)
    }
}

pub fn height_bounds(k: u32, m: u32, d1: u8, d2: u8) -> Result<HeightBounds> {
    if k < 4 {
        return Err(Error::InvalidArgument(format!("height majorants need k >= 4, got {k}")));
    }
    if !(1..=9).contains(&d1) || d2 > 9 || m < 1 {
        return Err(Error::InvalidArgument(format!("bad block data m={m}, d1={d1}, d2={d2}")));
    }
    let lk = ln_int(k);
    let l9 = ln_int(9);
    let l10 = ln_int(10);
    let n_val = BigInt::from(d1) * num_traits::pow(BigInt::from(10), m as usize) - (i32::from(d1) - i32::from(d2));
    let two_lk = lk.mul_int(&BigInt::from(2));
    let fl1 = &l9 + &two_lk;
    let fl1_majorant = lk.mul_int(&BigInt::from(4));
    let fl2 = &fl1 + &ln_int(n_val.clone());
    let m1_l10 = l10.mul_int(&BigInt::from(m + 1));
    let fl2_simplified = &fl1_majorant + &m1_l10;
    let rational = height_rational(&n_val, &BigInt::from(9))?;
    let rational_majorant = &l9 + &m1_l10;
    Ok(HeightBounds { k, m, d1, d2, fl1, fl1_majorant, fl2, fl2_simplified, rational, rational_majorant })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(x: &CertifiedReal, v: f64, rel: f64) -> bool {
        (x.midpoint_f64() / v - 1.0).abs() < rel
    }

    #[test]
    fn constant_at_floor_values() {
        let a = vec![lit("0.16"); 3];
        let inst = MatveevInstance::new("floor", 1, BigInt::from(3), a).unwrap();
        let e = matveev_exponent(&inst).unwrap();
        let expect = 1.4 * 30f64.powi(6) * 3f64.powf(4.5) * (1.0 + 3f64.ln()) * 0.16f64.powi(3);
        assert!(close(&e, expect, 1e-12));
    }

    #[test]
    fn rejects_bad_instances() {
        assert!(MatveevInstance::new("t1", 1, BigInt::from(3), vec![lit("1")]).is_err());
        assert!(MatveevInstance::new("neg", 1, BigInt::from(3), vec![lit("1"), lit("-1")]).is_err());
        assert!(MatveevInstance::new("d0", 1, BigInt::from(0), vec![lit("1"), lit("1")]).is_err());
        assert!(MatveevInstance::new("deg0", 0, BigInt::from(3), vec![lit("1"), lit("1")]).is_err());
    }

    #[test]
    fn rational_heights() {
        assert!(close(&height_rational(&BigInt::from(10), &BigInt::from(1)).unwrap(), 10f64.ln(), 1e-15));
        // 6/4 = 3/2
        assert!(close(&height_rational(&BigInt::from(6), &BigInt::from(4)).unwrap(), 3f64.ln(), 1e-15));
        assert!(close(&height_rational(&BigInt::from(-7), &BigInt::from(9)).unwrap(), 9f64.ln(), 1e-15));
        assert!(height_rational(&BigInt::from(0), &BigInt::from(9)).is_err());
    }

    #[test]
    fn height_chain_at_k4() {
        let h = height_bounds(4, 3, 7, 2).unwrap();
        assert!(close(&h.fl1_majorant, 4.0 * 4f64.ln(), 1e-15));
        assert!(h.fl1.certainly_lt(&h.fl1_majorant));
        assert!(h.fl2.certainly_lt(&h.fl2_simplified));
        assert!(h.rational.certainly_le(&h.rational_majorant));
        assert!(h.fl2_simplified.certainly_lt(&h.fl2_majorant(6)));
        assert!(height_bounds(3, 1, 1, 0).is_err());
    }

    #[test]
    fn floors_for_the_rational_form() {
        // eta = d1/9, 10, 2 over Q
        let inst = MatveevInstance::new("FL3", 1, BigInt::from(1000), vec![ln_int(9), ln_int(10), ln_int(2)]).unwrap();
        for d1 in 1..=9i64 {
            let h1 = height_rational(&BigInt::from(d1), &BigInt::from(9)).unwrap();
            let l1 = &ln_int(9) - &ln_int(d1);
            let floors =
                vec![a_floor(1, &h1, &l1), a_floor(1, &ln_int(10), &ln_int(10)), a_floor(1, &ln_int(2), &ln_int(2))];
            assert!(inst.admits(&floors), "d1={d1}");
        }
        let small = MatveevInstance::new("tight", 1, BigInt::from(3), vec![lit("0.1"), ln_int(10)]).unwrap();
        assert!(!small.admits(&[lit("0.16"), ln_int(10)]));
    }
}
