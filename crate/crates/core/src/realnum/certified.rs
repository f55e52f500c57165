use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// A real number known to lie in `[lo, hi] * 2^-prec`.
///
/// Endpoints are exact dyadic rationals with `prec` fractional bits. Every
/// operation rounds the lower endpoint down and the upper endpoint up, so the
/// true value is always enclosed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertifiedReal {
    lo: BigInt,
    hi: BigInt,
    prec: u32,
}

pub(crate) fn floor_shr(a: &BigInt, n: u32) -> BigInt {
    // num-bigint's arithmetic shift rounds toward negative infinity
    a >> n
}

pub(crate) fn ceil_shr(a: &BigInt, n: u32) -> BigInt {
    -((-a) >> n)
}

pub(crate) fn floor_div(a: &BigInt, b: &BigInt) -> BigInt {
    a.div_floor(b)
}

pub(crate) fn ceil_div(a: &BigInt, b: &BigInt) -> BigInt {
    -((-a).div_floor(b))
}

impl CertifiedReal {
    pub fn from_endpoints(lo: BigInt, hi: BigInt, prec: u32) -> Self {
        assert!(lo <= hi, "inverted interval");
        CertifiedReal { lo, hi, prec }
    }

    pub fn exact_int(n: impl Into<BigInt>, prec: u32) -> Self {
        let v = n.into() << prec;
        CertifiedReal { lo: v.clone(), hi: v, prec }
    }

    pub fn zero(prec: u32) -> Self {
        Self::exact_int(0, prec)
    }

    pub fn one(prec: u32) -> Self {
        Self::exact_int(1, prec)
    }

    /// Tightest enclosure of `num / den` at `prec` fractional bits.
    pub fn from_ratio(num: &BigInt, den: &BigInt, prec: u32) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::InvalidArgument("zero denominator".into()));
        }
        let (num, den) = if den.is_negative() { (-num, -den) } else { (num.clone(), den.clone()) };
        let scaled = num << prec;
        Ok(CertifiedReal { lo: floor_div(&scaled, &den), hi: ceil_div(&scaled, &den), prec })
    }

    pub fn ratio(num: i64, den: i64, prec: u32) -> Self {
        Self::from_ratio(&BigInt::from(num), &BigInt::from(den), prec).expect("nonzero denominator")
    }

    /// `mantissa * 10^exp`, e.g. `sci(37, 11)` is `3.7e12`.
    pub fn sci(mantissa: i64, exp: i32, prec: u32) -> Self {
        let ten = BigInt::from(10);
        if exp >= 0 {
            Self::exact_int(BigInt::from(mantissa) * num_traits::pow(ten, exp as usize), prec)
        } else {
            Self::from_ratio(&BigInt::from(mantissa), &num_traits::pow(ten, (-exp) as usize), prec).expect("nonzero")
        }
    }

    /// Parses a decimal literal such as `3.7e12`, `0.16` or `-5`, enclosing it
    /// as tightly as `prec` bits allow.
    pub fn parse_decimal(text: &str, prec: u32) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("not a decimal literal: {text:?}"));
        let t = text.trim();
        let (mant, exp) = match t.find(['e', 'E']) {
            Some(i) => (&t[..i], t[i + 1..].parse::<i64>().map_err(|_| bad())?),
            None => (t, 0),
        };
        let (neg, mant) = match mant.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, mant.strip_prefix('+').unwrap_or(mant)),
        };
        let (int_part, frac_part) = mant.split_once('.').unwrap_or((mant, ""));
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad());
        }
        if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let digits: BigInt = format!("{int_part}{frac_part}").parse().map_err(|_| bad())?;
        let digits = if neg { -digits } else { digits };
        let e = exp - frac_part.len() as i64;
        let ten = BigInt::from(10);
        if e >= 0 {
            Ok(Self::exact_int(digits * num_traits::pow(ten, e as usize), prec))
        } else {
            Self::from_ratio(&digits, &num_traits::pow(ten, (-e) as usize), prec)
        }
    }

    /// Exact dyadic `m * 2^-frac_bits`, kept exact by raising precision if needed.
    pub fn dyadic(m: BigInt, frac_bits: u32) -> Self {
        CertifiedReal { lo: m.clone(), hi: m, prec: frac_bits }
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    /// Scaled endpoints: the value lies in `[lo, hi] * 2^-precision()`.
    pub fn scaled_endpoints(&self) -> (&BigInt, &BigInt) {
        (&self.lo, &self.hi)
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    /// Re-express at `p` fractional bits, rounding outward when `p` is smaller.
    pub fn to_precision(&self, p: u32) -> Self {
        match p.cmp(&self.prec) {
            Ordering::Equal => self.clone(),
            Ordering::Greater => {
                let d = p - self.prec;
                CertifiedReal { lo: &self.lo << d, hi: &self.hi << d, prec: p }
            }
            Ordering::Less => {
                let d = self.prec - p;
                CertifiedReal { lo: floor_shr(&self.lo, d), hi: ceil_shr(&self.hi, d), prec: p }
            }
        }
    }

    fn at(&self, p: u32) -> (BigInt, BigInt) {
        let r = self.to_precision(p);
        (r.lo, r.hi)
    }

    /// `hi - lo` in units of `2^-prec`.
    pub fn width_ulps(&self) -> BigInt {
        &self.hi - &self.lo
    }

    /// Upper bound on `log2(hi - lo)`; `None` for an exact value.
    pub fn width_log2(&self) -> Option<i64> {
        let w = self.width_ulps();
        if w.is_zero() {
            None
        } else {
            Some(w.bits() as i64 - self.prec as i64)
        }
    }

    /// Radius `(hi - lo) / 2` as an upper-rounded f64.
    pub fn radius_f64(&self) -> f64 {
        dyadic_to_f64(&self.width_ulps(), self.prec + 1) * (1.0 + 1e-15)
    }

    pub fn midpoint_f64(&self) -> f64 {
        dyadic_to_f64(&(&self.lo + &self.hi), self.prec + 1)
    }

    /// Midpoint as an exact dyadic `(numerator, frac_bits)`.
    pub fn midpoint(&self) -> (BigInt, u32) {
        (&self.lo + &self.hi, self.prec + 1)
    }

    pub fn lower_f64(&self) -> f64 {
        dyadic_to_f64(&self.lo, self.prec)
    }

    pub fn upper_f64(&self) -> f64 {
        dyadic_to_f64(&self.hi, self.prec)
    }

    /// Sign of the value, or `None` when the interval contains zero and is not exactly zero.
    pub fn sign(&self) -> Option<Ordering> {
        if self.lo.is_positive() {
            Some(Ordering::Greater)
        } else if self.hi.is_negative() {
            Some(Ordering::Less)
        } else if self.lo.is_zero() && self.hi.is_zero() {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    pub fn is_positive(&self) -> bool {
        self.lo.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.hi.is_negative()
    }

    /// Certified comparison with `num / den` (den > 0); `None` if undecided.
    pub fn cmp_ratio(&self, num: &BigInt, den: &BigInt) -> Option<Ordering> {
        assert!(den.is_positive());
        // compare lo * den with num * 2^prec
        let target = num << self.prec;
        let lo = &self.lo * den;
        let hi = &self.hi * den;
        if lo > target {
            Some(Ordering::Greater)
        } else if hi < target {
            Some(Ordering::Less)
        } else if lo == target && hi == target {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    pub fn cmp_int(&self, n: &BigInt) -> Option<Ordering> {
        self.cmp_ratio(n, &BigInt::one())
    }

    /// Certified comparison of two enclosures.
    pub fn partial_cmp_certified(&self, other: &Self) -> Option<Ordering> {
        (self - other).sign()
    }

    pub fn certainly_lt(&self, other: &Self) -> bool {
        (self - other).is_negative()
    }

    /// True when every point of `self` is `<=` every point of `other`.
    pub fn certainly_le(&self, other: &Self) -> bool {
        !(self - other).hi.is_positive()
    }

    /// Pointwise maximum.
    pub fn max(&self, other: &Self) -> Self {
        let p = self.prec.max(other.prec);
        let (a, b) = self.at(p);
        let (c, d) = other.at(p);
        CertifiedReal { lo: a.max(c), hi: b.max(d), prec: p }
    }

    /// Pointwise minimum.
    pub fn min(&self, other: &Self) -> Self {
        let p = self.prec.max(other.prec);
        let (a, b) = self.at(p);
        let (c, d) = other.at(p);
        CertifiedReal { lo: a.min(c), hi: b.min(d), prec: p }
    }

    pub fn floor_lower(&self) -> BigInt {
        floor_shr(&self.lo, self.prec)
    }

    pub fn ceil_upper(&self) -> BigInt {
        ceil_shr(&self.hi, self.prec)
    }

    /// `floor(x)` when every point of the enclosure has the same floor.
    pub fn floor(&self) -> Option<BigInt> {
        let a = floor_shr(&self.lo, self.prec);
        let b = floor_shr(&self.hi, self.prec);
        (a == b).then_some(a)
    }

    pub fn contains(&self, other: &Self) -> bool {
        let p = self.prec.max(other.prec);
        let (a, b) = self.at(p);
        let (c, d) = other.at(p);
        a <= c && d <= b
    }

    pub fn contains_dyadic(&self, m: &BigInt, frac_bits: u32) -> bool {
        self.contains(&CertifiedReal::dyadic(m.clone(), frac_bits))
    }

    pub fn intersect(&self, other: &Self) -> Option<Self> {
        let p = self.prec.max(other.prec);
        let (a, b) = self.at(p);
        let (c, d) = other.at(p);
        let lo = a.max(c);
        let hi = b.min(d);
        (lo <= hi).then_some(CertifiedReal { lo, hi, prec: p })
    }

    /// Smallest interval containing both.
    pub fn hull(&self, other: &Self) -> Self {
        let p = self.prec.max(other.prec);
        let (a, b) = self.at(p);
        let (c, d) = other.at(p);
        CertifiedReal { lo: a.min(c), hi: b.max(d), prec: p }
    }

    pub fn abs(&self) -> Self {
        if !self.lo.is_negative() {
            self.clone()
        } else if !self.hi.is_positive() {
            -self
        } else {
            let m = (-&self.lo).max(self.hi.clone());
            CertifiedReal { lo: BigInt::zero(), hi: m, prec: self.prec }
        }
    }

    pub fn mul_int(&self, n: &BigInt) -> Self {
        let (a, b) = (&self.lo * n, &self.hi * n);
        if n.is_negative() {
            CertifiedReal { lo: b, hi: a, prec: self.prec }
        } else {
            CertifiedReal { lo: a, hi: b, prec: self.prec }
        }
    }

    pub fn div_int(&self, n: &BigInt) -> Result<Self> {
        if n.is_zero() {
            return Err(Error::ContainsZero("integer divisor".into()));
        }
        let (x, n) = if n.is_negative() { (-self, -n) } else { (self.clone(), n.clone()) };
        Ok(CertifiedReal { lo: floor_div(&x.lo, &n), hi: ceil_div(&x.hi, &n), prec: x.prec })
    }

    pub fn recip(&self) -> Result<Self> {
        Self::one(self.prec).checked_div(self)
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        if other.sign().is_none_or(|s| s == Ordering::Equal) {
            return Err(Error::ContainsZero(other.to_string()));
        }
        if other.hi.is_negative() {
            return (-self).checked_div(&-other);
        }
        let p = self.prec.max(other.prec);
        let (a, b) = self.at(p);
        let (c, d) = other.at(p);
        let q = |x: &BigInt, y: &BigInt, up: bool| {
            let s = x << p;
            if up {
                ceil_div(&s, y)
            } else {
                floor_div(&s, y)
            }
        };
        let (lo, hi) = if !a.is_negative() {
            (q(&a, &d, false), q(&b, &c, true))
        } else if !b.is_positive() {
            (q(&a, &c, false), q(&b, &d, true))
        } else {
            (q(&a, &c, false), q(&b, &c, true))
        };
        Ok(CertifiedReal { lo, hi, prec: p })
    }

    /// Integer power.
    pub fn powu(&self, e: u64) -> Self {
        if e == 0 {
            return Self::one(self.prec);
        }
        let p = self.prec;
        if !self.lo.is_negative() {
            CertifiedReal { lo: pow_round(&self.lo, e, p, false), hi: pow_round(&self.hi, e, p, true), prec: p }
        } else if !self.hi.is_positive() {
            let pos = (-self).powu(e);
            if e.is_multiple_of(2) {
                pos
            } else {
                -&pos
            }
        } else if e.is_multiple_of(2) {
            let m = (-&self.lo).max(self.hi.clone());
            CertifiedReal { lo: BigInt::zero(), hi: pow_round(&m, e, p, true), prec: p }
        } else {
            let lo = -pow_round(&-&self.lo, e, p, true);
            CertifiedReal { lo, hi: pow_round(&self.hi, e, p, true), prec: p }
        }
    }

    pub fn sqrt(&self) -> Result<Self> {
        if self.lo.is_negative() {
            return Err(Error::NotPositive(format!("sqrt of {self}")));
        }
        let p = self.prec;
        let lo_s = (&self.lo << p).magnitude().sqrt();
        let hi_arg = (&self.hi << p).magnitude().clone();
        let hi_r = hi_arg.sqrt();
        let hi_s = if &hi_r * &hi_r == hi_arg { hi_r } else { hi_r + 1u32 };
        Ok(CertifiedReal { lo: BigInt::from(lo_s), hi: BigInt::from(hi_s), prec: p })
    }

    /// Natural logarithm at the enclosure's own precision.
    pub fn ln(&self) -> Result<Self> {
        self.ln_at(self.prec)
    }

    /// Natural logarithm with `p` fractional bits in the result.
    pub fn ln_at(&self, p: u32) -> Result<Self> {
        if !self.lo.is_positive() {
            return Err(Error::NotPositive(self.to_string()));
        }
        if self.is_exact() && self.lo == BigInt::one() << self.prec {
            return Ok(Self::zero(p));
        }
        let (lo, _) = super::elementary::ln_dyadic(&self.lo, self.prec, p);
        let (_, hi) = if self.is_exact() {
            super::elementary::ln_dyadic(&self.lo, self.prec, p)
        } else {
            super::elementary::ln_dyadic(&self.hi, self.prec, p)
        };
        Ok(CertifiedReal { lo, hi, prec: p })
    }

    pub fn exp(&self) -> Self {
        let p = self.prec;
        let (lo, _) = super::elementary::exp_dyadic(&self.lo, p, p);
        let (_, hi) = super::elementary::exp_dyadic(&self.hi, p, p);
        CertifiedReal { lo, hi, prec: p }
    }

    /// Enclosure of `||x||`, the distance to the nearest integer.
    pub fn dist_to_nearest_int(&self) -> Self {
        if self.prec == 0 {
            return self.to_precision(1).dist_to_nearest_int();
        }
        let p = self.prec;
        let one = BigInt::one() << p;
        let half = BigInt::one() << (p - 1);
        let d = |x: &BigInt| -> BigInt {
            let r = x.mod_floor(&one);
            if r > half {
                &one - r
            } else {
                r
            }
        };
        let (da, db) = (d(&self.lo), d(&self.hi));
        let contains_int = floor_shr(&self.lo, p) != floor_shr(&self.hi, p) || self.lo.mod_floor(&one).is_zero();
        let shifted_lo = &self.lo - &half;
        let shifted_hi = &self.hi - &half;
        let contains_half =
            floor_shr(&shifted_lo, p) != floor_shr(&shifted_hi, p) || shifted_lo.mod_floor(&one).is_zero();
        let lo = if contains_int { BigInt::zero() } else { da.clone().min(db.clone()) };
        let hi = if contains_half { half } else { da.max(db) };
        CertifiedReal { lo, hi, prec: p }
    }

    /// Scientific rendering of the midpoint with `sig` significant digits,
    /// e.g. `3.6566e12±4.1e-30`.
    pub fn to_sci_string(&self, sig: usize) -> String {
        let sig = sig.max(1);
        let (mid, bits) = self.midpoint();
        if mid.is_zero() {
            return format!("0±{:.1e}", self.radius_f64());
        }
        // decimal exponent estimate, corrected below
        let mut e = ((mid.bits() as f64 - bits as f64) * std::f64::consts::LOG10_2).floor() as i64;
        let ten = BigInt::from(10);
        let render = |e: i64| -> BigInt {
            let shift = sig as i64 - 1 - e;
            let num = if shift >= 0 { &mid * num_traits::pow(ten.clone(), shift as usize) } else { mid.clone() };
            let den_pow = if shift < 0 { num_traits::pow(ten.clone(), (-shift) as usize) } else { BigInt::one() };
            let den = den_pow << bits;
            floor_div(&((num << 1) + &den), &(den << 1))
        };
        let mut digits = render(e);
        for _ in 0..4 {
            let len = digits.magnitude().to_string().len();
            if len > sig {
                e += 1;
            } else if len < sig {
                e -= 1;
            } else {
                break;
            }
            digits = render(e);
        }
        let text = digits.magnitude().to_string();
        let (head, tail) = text.split_at(1);
        let sign = if digits.is_negative() { "-" } else { "" };
        let body = if tail.is_empty() { head.to_string() } else { format!("{head}.{tail}") };
        format!("{sign}{body}e{e}±{:.1e}", self.radius_f64())
    }

    /// Decimal rendering `midpoint±radius` with `digits` fractional digits.
    pub fn to_decimal_string(&self, digits: usize) -> String {
        let (mid, bits) = self.midpoint();
        let scaled = {
            let t = mid * num_traits::pow(BigInt::from(10), digits);
            // round to nearest
            let half = BigInt::one() << (bits - 1);
            floor_shr(&(t + half), bits)
        };
        let neg = scaled.is_negative();
        let s = scaled.magnitude().to_string();
        let s = if s.len() <= digits { format!("{}{}", "0".repeat(digits + 1 - s.len()), s) } else { s };
        let (int_part, frac_part) = s.split_at(s.len() - digits);
        let body = if digits == 0 { int_part.to_string() } else { format!("{int_part}.{frac_part}") };
        format!("{}{}±{:.2e}", if neg { "-" } else { "" }, body, self.radius_f64())
    }
}

fn pow_round(base: &BigInt, e: u64, p: u32, up: bool) -> BigInt {
    let shr = |x: &BigInt| if up { ceil_shr(x, p) } else { floor_shr(x, p) };
    let mut result = BigInt::one() << p;
    let mut b = base.clone();
    let mut e = e;
    while e > 0 {
        if e & 1 == 1 {
            result = shr(&(&result * &b));
        }
        e >>= 1;
        if e > 0 {
            b = shr(&(&b * &b));
        }
    }
    result
}

pub(crate) fn dyadic_to_f64(m: &BigInt, frac_bits: u32) -> f64 {
    let bits = m.bits();
    let (top, shift) = if bits > 64 {
        let s = bits - 64;
        ((m.magnitude() >> s).to_f64().unwrap_or(f64::MAX), s as i64)
    } else {
        (m.magnitude().to_f64().unwrap_or(f64::MAX), 0)
    };
    let exp = shift - frac_bits as i64;
    let mag = top * 2f64.powi(exp.clamp(-2000, 2000) as i32);
    if m.sign() == Sign::Minus {
        -mag
    } else {
        mag
    }
}

impl fmt::Display for CertifiedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mid = self.midpoint_f64();
        let digits = if mid != 0.0 && (mid.abs() >= 1e12 || mid.abs() < 1e-6) { 0 } else { 12 };
        if digits == 0 {
            write!(f, "{:.12e}±{:.2e}", mid, self.radius_f64())
        } else {
            write!(f, "{}", self.to_decimal_string(digits))
        }
    }
}

impl Serialize for CertifiedReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl std::ops::Neg for &CertifiedReal {
    type Output = CertifiedReal;
    fn neg(self) -> CertifiedReal {
        CertifiedReal { lo: -&self.hi, hi: -&self.lo, prec: self.prec }
    }
}

impl std::ops::Neg for CertifiedReal {
    type Output = CertifiedReal;
    fn neg(self) -> CertifiedReal {
        -&self
    }
}

impl std::ops::Add for &CertifiedReal {
    type Output = CertifiedReal;
    fn add(self, o: &CertifiedReal) -> CertifiedReal {
        let p = self.prec.max(o.prec);
        let (a, b) = self.at(p);
        let (c, d) = o.at(p);
        CertifiedReal { lo: a + c, hi: b + d, prec: p }
    }
}

impl std::ops::Sub for &CertifiedReal {
    type Output = CertifiedReal;
    fn sub(self, o: &CertifiedReal) -> CertifiedReal {
        let p = self.prec.max(o.prec);
        let (a, b) = self.at(p);
        let (c, d) = o.at(p);
        CertifiedReal { lo: a - d, hi: b - c, prec: p }
    }
}

impl std::ops::Mul for &CertifiedReal {
    type Output = CertifiedReal;
    fn mul(self, o: &CertifiedReal) -> CertifiedReal {
        let p = self.prec.max(o.prec);
        let (a, b) = self.at(p);
        let (c, d) = o.at(p);
        let (lo, hi) = if !a.is_negative() && !c.is_negative() {
            (&a * &c, &b * &d)
        } else {
            let prods = [&a * &c, &a * &d, &b * &c, &b * &d];
            let lo = prods.iter().min().unwrap().clone();
            let hi = prods.iter().max().unwrap().clone();
            (lo, hi)
        };
        CertifiedReal { lo: floor_shr(&lo, p), hi: ceil_shr(&hi, p), prec: p }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl std::ops::$tr for CertifiedReal {
            type Output = CertifiedReal;
            fn $m(self, o: CertifiedReal) -> CertifiedReal {
                (&self).$m(&o)
            }
        }
        impl std::ops::$tr<&CertifiedReal> for CertifiedReal {
            type Output = CertifiedReal;
            fn $m(self, o: &CertifiedReal) -> CertifiedReal {
                (&self).$m(o)
            }
        }
        impl std::ops::$tr<CertifiedReal> for &CertifiedReal {
            type Output = CertifiedReal;
            fn $m(self, o: CertifiedReal) -> CertifiedReal {
                self.$m(&o)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

/// Convenience for building exact integers from unsigned big values.
pub fn big(n: &BigUint) -> BigInt {
    BigInt::from(n.clone())
}
