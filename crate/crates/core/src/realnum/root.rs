use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{One, Signed};

use super::CertifiedReal;
use crate::error::{Error, Result};
use crate::kfib::{kfib, KFibWindow};

/// The root of `x^k - x^(k-1) - ... - 1` outside the unit circle, and the
/// coefficient `f_k(alpha)` of its power in the Binet-type formula.
#[derive(Clone, Debug)]
pub struct DominantRoot {
    pub k: u32,
    pub alpha: CertifiedReal,
    pub fk_alpha: CertifiedReal,
}

/// `f_k(x) = (x - 1) / (2 + (k + 1)(x - 2))`.
pub fn fk(k: u32, x: &CertifiedReal) -> Result<CertifiedReal> {
    let p = x.precision();
    let one = CertifiedReal::one(p);
    let two = CertifiedReal::exact_int(2, p);
    let den = &two + (x - &two).mul_int(&BigInt::from(k + 1));
    (x - &one).checked_div(&den)
}

/// Interval evaluation of the characteristic polynomial.
///
/// Away from `x = 1` this uses `(x^(k+1) - 2x^k + 1)/(x - 1)`, which needs only
/// `O(log k)` multiplications; near 1 it falls back to Horner's rule.
pub fn psi_k(k: u32, x: &CertifiedReal) -> CertifiedReal {
    let p = x.precision();
    let one = CertifiedReal::one(p);
    let xm1 = x - &one;
    let near_one = xm1.abs().cmp_ratio(&BigInt::one(), &BigInt::from(256)) != Some(Ordering::Greater);
    if near_one {
        let mut acc = one.clone();
        for _ in 0..k {
            acc = &(&acc * x) - &one;
        }
        acc
    } else {
        let xk = x.powu(k as u64);
        let num = &(&(&xk * x) - &xk.mul_int(&BigInt::from(2))) + &one;
        num.checked_div(&xm1).expect("x - 1 bounded away from zero")
    }
}

/// Exact sign of `x^(k+1) - 2x^k + 1` at `x = a / 2^p`.
fn sign_shifted(k: u32, a: &BigInt, p: u32) -> Ordering {
    let ak = num_traits::pow(a.clone(), k as usize);
    let v = &ak * a - (&ak << (p + 1)) + (BigInt::one() << (p as usize * (k as usize + 1)));
    v.sign().cmp_zero()
}

trait CmpZero {
    fn cmp_zero(self) -> Ordering;
}

impl CmpZero for num_bigint::Sign {
    fn cmp_zero(self) -> Ordering {
        match self {
            num_bigint::Sign::Minus => Ordering::Less,
            num_bigint::Sign::NoSign => Ordering::Equal,
            num_bigint::Sign::Plus => Ordering::Greater,
        }
    }
}

fn fixed_pow(x: &BigInt, e: u32, w: u32) -> BigInt {
    let mut result = BigInt::one() << w;
    let mut b = x.clone();
    let mut e = e;
    while e > 0 {
        if e & 1 == 1 {
            result = (&result * &b) >> w;
        }
        e >>= 1;
        if e > 0 {
            b = (&b * &b) >> w;
        }
    }
    result
}

/// Certified dominant root with radius at most `2^-target_bits`.
///
/// Newton's method from `x = 2` (the polynomial times `x - 1` is convex and
/// increasing there) polishes a fixed-point approximation; the final bracket is
/// certified by exact sign evaluation at both dyadic endpoints.
pub fn dominant_root(k: u32, target_bits: u32) -> Result<DominantRoot> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("k must be at least 2, got {k}")));
    }
    // 2 - alpha is about 2^-k, so the bracket must resolve that scale
    let target_bits = target_bits.max(k + 32);
    let w = target_bits + 64;
    let one = BigInt::one() << w;
    let mut x = BigInt::from(2) << w;
    let kb = BigInt::from(k);
    let mut converged = false;
    for _ in 0..(4 * w as usize + 64) {
        let xkm1 = fixed_pow(&x, k - 1, w);
        let xk: BigInt = (&xkm1 * &x) >> w;
        let xk1: BigInt = (&xk * &x) >> w;
        let g: BigInt = &xk1 - (&xk << 1) + &one;
        let gp: BigInt = &xk * (&kb + 1) - ((&xkm1 * &kb) << 1);
        if !gp.is_positive() {
            break;
        }
        let dx = (&g << w) / &gp;
        x -= &dx;
        if dx.abs() <= BigInt::from(4) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::PrecisionExhausted { what: format!("Newton iteration for alpha({k})"), bits: w });
    }
    let p = target_bits + 8;
    let centre = &x >> (w - p);
    // lower edge of the admissible region: 2(1 - 2^-k)
    let floor_num = (BigInt::one() << k) - 1;
    for half_width in [2u32, 8, 32, 128] {
        let lo: BigInt = &centre - half_width;
        let hi: BigInt = &centre + half_width;
        if sign_shifted(k, &lo, p) == Ordering::Less && sign_shifted(k, &hi, p) == Ordering::Greater {
            let above_floor = (&lo << (k - 1)) > (&floor_num << p);
            let below_two = hi < (BigInt::from(2) << p);
            if !(above_floor && below_two) {
                return Err(Error::Mismatch(format!("alpha({k}) bracket escapes (2(1-2^-k), 2)")));
            }
            let alpha = CertifiedReal::from_endpoints(lo, hi, p);
            let fk_alpha = fk(k, &alpha)?;
            return Ok(DominantRoot { k, alpha, fk_alpha });
        }
    }
    Err(Error::PrecisionExhausted { what: format!("certifying the bracket of alpha({k})"), bits: p })
}

/// `e_k(n) = F_n - f_k(alpha) alpha^(n-1)` for `n = 1..=n_max`.
pub fn dd_errors(k: u32, n_max: u64) -> Result<Vec<CertifiedReal>> {
    if n_max == 0 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    let prec = (n_max as u32).saturating_add(128).max(256);
    let root = dominant_root(k, prec)?;
    let mut gen = KFibWindow::new(k)?;
    let mut power = CertifiedReal::one(root.alpha.precision());
    let mut out = Vec::with_capacity(n_max as usize);
    for n in 1..=n_max {
        if n > 1 {
            power = &power * &root.alpha;
            gen.advance();
        }
        debug_assert_eq!(gen.index(), n as i64);
        let f = CertifiedReal::exact_int(BigInt::from(gen.current().clone()), root.alpha.precision());
        out.push(&f - &(&root.fk_alpha * &power));
    }
    Ok(out)
}

pub fn dd_error(k: u32, n: u64) -> Result<CertifiedReal> {
    Ok(dd_errors(k, n)?.pop().expect("n >= 1"))
}

fn check_zeta_domain(k: u32, n: u64) -> Result<()> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("k must be at least 2, got {k}")));
    }
    // n < 2^(k/2)  <=>  n^2 < 2^k
    if n < 2 || BigInt::from(n) * BigInt::from(n) >= BigInt::one() << k {
        return Err(Error::InvalidArgument(format!("zeta expansion needs 2 <= n < 2^(k/2), got k={k}, n={n}")));
    }
    Ok(())
}

/// `zeta(n, k) = F_n / 2^(n-2) - 1`, exact (the quotient is dyadic).
pub fn zeta_expansion(k: u32, n: u64) -> Result<CertifiedReal> {
    check_zeta_domain(k, n)?;
    let f = BigInt::from(kfib(k, n as i64)?);
    let shift = (n - 2) as u32;
    Ok(CertifiedReal::dyadic(f - (BigInt::one() << shift), shift))
}

/// Exact check of `|zeta(n, k)| < 2 / 2^(k/2)`.
pub fn zeta_within_bound(k: u32, n: u64) -> Result<bool> {
    check_zeta_domain(k, n)?;
    let shift = (n - 2) as usize;
    let d = BigInt::from(kfib(k, n as i64)?) - (BigInt::one() << shift);
    // (d / 2^s)^2 < 4 / 2^k  <=>  d^2 2^k < 2^(2s+2)
    let lhs: BigInt = (&d * &d) << (k as usize);
    Ok(lhs < (BigInt::one() << (2 * shift + 2)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_ratio() {
        let r = dominant_root(2, 200).unwrap();
        // (1 + sqrt 5) / 2, enclosed independently
        let five = CertifiedReal::exact_int(5, 260);
        let phi = (&CertifiedReal::one(260) + &five.sqrt().unwrap()).div_int(&BigInt::from(2)).unwrap();
        assert!(r.alpha.intersect(&phi).is_some());
        assert!(r.alpha.width_log2().unwrap() <= -200);
        assert!(r.alpha.to_decimal_string(10).starts_with("1.6180339887"));
    }

    #[test]
    fn tribonacci_constant() {
        let r = dominant_root(3, 128).unwrap();
        assert!(r.alpha.to_decimal_string(10).starts_with("1.8392867552"));
        let v = psi_k(3, &r.alpha);
        assert_eq!(v.sign(), None, "psi must straddle zero");
    }

    #[test]
    fn fk_exceeds_half() {
        for k in [2u32, 3, 4, 10, 50, 200] {
            let r = dominant_root(k, 128).unwrap();
            assert_eq!(r.fk_alpha.cmp_ratio(&BigInt::one(), &BigInt::from(2)), Some(Ordering::Greater), "k={k}");
        }
    }

    #[test]
    fn psi_paths_agree() {
        let x = CertifiedReal::ratio(3, 2, 200);
        let fast = psi_k(7, &x);
        let mut horner = CertifiedReal::one(200);
        for _ in 0..7 {
            horner = &(&horner * &x) - &CertifiedReal::one(200);
        }
        assert!(fast.intersect(&horner).is_some());
        let near = CertifiedReal::ratio(1001, 1000, 100);
        assert!(psi_k(5, &near).is_negative());
    }

    #[test]
    fn rejects_small_k() {
        assert!(dominant_root(1, 64).is_err());
    }

    #[test]
    fn zeta_domain() {
        assert!(zeta_expansion(10, 1).is_err());
        assert!(zeta_expansion(10, 32).is_err());
        assert!(zeta_expansion(10, 31).is_ok());
        let z = zeta_expansion(10, 11).unwrap();
        assert_eq!(z.sign(), Some(Ordering::Equal));
    }
}
