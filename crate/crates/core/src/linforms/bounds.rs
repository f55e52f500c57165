use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use super::{lit, ln_int, matveev_constant, MatveevInstance, LF_BITS};
use crate::error::{Error, Result};
use crate::realnum::{log2_of_10, CertifiedReal};

/// One link of the bound chain: a certified quantity and the constant it must
/// not exceed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageBound {
    pub name: String,
    pub formula: String,
    pub inputs: BTreeMap<String, String>,
    /// Certified enclosure, `midpoint±radius`.
    pub computed: String,
    /// The constant being checked against, as a decimal literal.
    pub printed: String,
    /// Ceiling of the computed upper endpoint.
    #[serde(with = "crate::dec")]
    pub value: BigInt,
    /// `computed <= printed` with certainty.
    pub holds: bool,
}

impl StageBound {
    fn check(name: &str, formula: &str, inputs: &[(&str, String)], computed: &CertifiedReal, printed: &str) -> Self {
        let p = lit(printed);
        StageBound {
            name: name.into(),
            formula: formula.into(),
            inputs: inputs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
            computed: computed.to_sci_string(8),
            printed: printed.into(),
            value: computed.ceil_upper(),
            holds: computed.certainly_le(&p),
        }
    }
}

fn powk(k: &BigInt, e: usize) -> BigInt {
    num_traits::pow(k.clone(), e)
}

fn ln_big(k: &BigInt) -> CertifiedReal {
    ln_int(k.clone())
}

/// `c * k^8 * log^5 k`.
fn lemma_form(c: &CertifiedReal, k: &BigInt) -> CertifiedReal {
    let lk = ln_big(k);
    &c.mul_int(&powk(k, 8)) * &lk.powu(5)
}

/// `3e28 k^8 log^5 k`, the bound on `m + ell` for a given `k`.
pub fn ml_bound_at(k: &BigInt) -> CertifiedReal {
    lemma_form(&lit("3e28"), k)
}

fn floor_of(x: impl Fn(u32) -> CertifiedReal) -> BigInt {
    let mut p = LF_BITS;
    loop {
        let v = x(p);
        if let Some(f) = v.floor() {
            return f;
        }
        if p > 8192 {
            // an exact integer value would need this; fall back to the safe side
            return v.ceil_upper();
        }
        p *= 2;
    }
}

/// `c_k = 1.4 * 30^6 * 3^4.5 * k^2 (1 + log k) (4 k log k) (log 2) (k log 10)`.
pub fn c_k(k: u32) -> CertifiedReal {
    let kb = BigInt::from(k);
    let lk = ln_int(k);
    let a1 = lk.mul_int(&(BigInt::from(4) * &kb));
    let a2 = ln_int(2);
    let a3 = ln_int(10).mul_int(&kb);
    let inst = MatveevInstance::new(format!("FL1 k={k}"), k, BigInt::from(3), vec![a1, a2, a3]).expect("positive A_i");
    // the instance coefficient already carries k^2 (1 + log k)
    inst.coefficient()
}

/// `y / log^2 y < C` implies `y < 4 C log^2 C`.
///
/// At `y0 = 4 C log^2 C` the claim `y0 / log^2 y0 >= C` reduces to
/// `log C >= log 4 + 2 log log C`; `y / log^2 y` is increasing past `e^2`, so
/// the implication follows. Returns whether the reduced inequality is certified
/// at `C` (which must be at least 100).
pub fn check_log_square_inversion(c: &CertifiedReal) -> Result<bool> {
    if !lit("100").certainly_le(c) {
        return Err(Error::InvalidArgument(format!("C must be at least 100, got {c}")));
    }
    let lc = c.ln()?;
    let rhs = &ln_int(4) + &lc.ln()?.mul_int(&BigInt::from(2));
    let y0 = &c.mul_int(&BigInt::from(4)) * &(&lc * &lc);
    let e2 = CertifiedReal::exact_int(2, c.precision()).exp();
    Ok(rhs.certainly_le(&lc) && e2.certainly_lt(&y0))
}

/// Least integer `K` (found by the iteration `k <- ceil(c log^j k)` from
/// `k = c`) such that every real `k` with `k < c log^j k` has `k < K`.
///
/// The returned `K` is verified: `K >= c log^j K` and `K > c j log^(j-1) K`,
/// so `k - c log^j k` is increasing and nonnegative on `[K, inf)`.
pub fn solve_below(c: &CertifiedReal, j: u32) -> Result<BigInt> {
    if j == 0 || !lit("3").certainly_le(c) {
        return Err(Error::InvalidArgument("solve_below needs j >= 1 and c >= 3".into()));
    }
    let rhs = |k: &BigInt| c * &ln_big(k).powu(j as u64);
    let mut k = c.ceil_upper();
    for _ in 0..500 {
        let next = rhs(&k).ceil_upper();
        if next <= k {
            let slope = &c.mul_int(&BigInt::from(j)) * &ln_big(&k).powu(j as u64 - 1);
            let kk = CertifiedReal::exact_int(k.clone(), LF_BITS);
            if rhs(&k).certainly_le(&kk) && slope.certainly_lt(&kk) {
                return Ok(k);
            }
            return Err(Error::Mismatch(format!("fixed point {k} of k < c log^{j} k failed verification")));
        }
        k = next;
    }
    Err(Error::PrecisionExhausted { what: format!("iterating k < c log^{j} k"), bits: LF_BITS })
}

/// Per-`k` bounds for `k` in the small range.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SmallKBounds {
    pub k: u32,
    pub c_k: String,
    /// `floor(9e28 k^8 log^5 k)`, the bound on `n`.
    #[serde(with = "crate::dec")]
    pub n_bound: BigInt,
    /// `floor(3e28 k^8 log^5 k)`, the bound on `m + ell`.
    #[serde(with = "crate::dec")]
    pub ml_bound: BigInt,
    pub stages: Vec<StageBound>,
}

impl SmallKBounds {
    pub fn all_hold(&self) -> bool {
        self.stages.iter().all(|s| s.holds)
    }
}

/// The bounds leading to `m + ell < 3e28 k^8 log^5 k` and `n < 9e28 k^8 log^5 k`
/// for a fixed `k >= 4`.
pub fn stage_bounds_small_k(k: u32) -> Result<SmallKBounds> {
    if k < 4 {
        return Err(Error::InvalidArgument(format!("small-k bounds need k >= 4, got {k}")));
    }
    let kb = BigInt::from(k);
    let inputs = [("k", k.to_string())];
    let lk = ln_int(k);
    let lk2 = &lk * &lk;
    let lk3 = &lk2 * &lk;
    let ln_min = ln_int(k + 2); // n >= k + 2
    let ck = c_k(k);
    let k4 = powk(&kb, 4);
    let k8 = powk(&kb, 8);
    let mut stages = Vec::new();

    // m log 10 < log 11 + c_k (1 + log n) <= (2 c_k + log 11 / log n) log n
    let cotam = (&ck.mul_int(&BigInt::from(2)) + &ln_int(11).checked_div(&ln_min)?).checked_div(&lk2.mul_int(&k4))?;
    stages.push(StageBound::check(
        "cotam",
        "m log 10 < C k^4 log^2 k log n, C = (2 c_k + log 11 / log n) / (k^4 log^2 k)",
        &inputs,
        &cotam,
        "3.7e12",
    ));

    // 4 log k + (m + 1) log 10 < 3.8e12 k^4 log^2 k log n
    let h_slack = (&lk.mul_int(&BigInt::from(4)) + &ln_int(10)).checked_div(&(&lk2.mul_int(&k4) * &ln_min))?;
    let h2 = &lit("3.7e12") + &h_slack;
    stages.push(StageBound::check(
        "height-FL2",
        "h(eta_1) < 4 log k + (m + 1) log 10 < C k^4 log^2 k log n",
        &inputs,
        &h2,
        "3.8e12",
    ));

    // second application: A_1 = 3.8e12 k^5 log^2 k log n, (1 + log n) <= 2 log n
    let base = matveev_constant(3, k);
    // base carries k^2 (1 + log k); A_1 A_3 contribute k^6 log^2 k log n
    let m2 = (&(&(&base * &lit("3.8e12")) * &ln_int(2)) * &ln_int(10))
        .mul_int(&BigInt::from(2))
        .checked_div(&lk.mul_int(&(&kb * &kb)))?;
    stages.push(StageBound::check("matveev-FL2", "log|Lambda_2| > -C k^8 log^3 k log^2 n", &inputs, &m2, "3.5e24"));

    // n log alpha < 3.5e24 k^8 log^3 k log^2 n + log 6, log alpha > log(2 (1 - 2^-k))
    let alpha_floor = CertifiedReal::from_ratio(&((BigInt::one() << (k + 1)) - 2), &(BigInt::one() << k), LF_BITS)?;
    let log_alpha = alpha_floor.ln()?;
    let tail = ln_int(6).checked_div(&(&(&lk3.mul_int(&k8) * &ln_min) * &ln_min))?;
    let cotan = (&lit("3.5e24") + &tail).checked_div(&log_alpha)?;
    stages.push(StageBound::check("cotan-1", "n / log^2 n < C k^8 log^3 k", &inputs, &cotan, "6e24"));

    let big_c = &lit("6e24").mul_int(&k8) * &lk3;
    let inversion_ok = check_log_square_inversion(&big_c)?;
    let lc = big_c.ln()?;
    let inv = (&big_c.mul_int(&BigInt::from(4)) * &(&lc * &lc)).checked_div(&lk.powu(5).mul_int(&k8))?;
    let mut inv_stage = StageBound::check(
        "log-square-inversion",
        "n < 4 C log^2 C <= B k^8 log^5 k, C = 6e24 k^8 log^3 k",
        &inputs,
        &inv,
        "9e28",
    );
    inv_stage.holds &= inversion_ok;
    stages.push(inv_stage);

    // m + ell < (n - 2) log 2 / log 10 + 1
    let ratio = ln_int(2).checked_div(&ln_int(10))?;
    let ml = &(&lit("9e28") * &ratio) + &CertifiedReal::one(LF_BITS).checked_div(&lk.powu(5).mul_int(&k8))?;
    stages.push(StageBound::check(
        "cotasml-m+l",
        "m + ell < (n - 2) log 2 / log 10 + 1 < B k^8 log^5 k",
        &inputs,
        &ml,
        "3e28",
    ));

    let n_bound = floor_of(|p| {
        let lk = CertifiedReal::exact_int(kb.clone(), p).ln().expect("k > 0");
        &CertifiedReal::parse_decimal("9e28", p).expect("literal").mul_int(&k8) * &lk.powu(5)
    });
    let ml_bound = floor_of(|p| {
        let lk = CertifiedReal::exact_int(kb.clone(), p).ln().expect("k > 0");
        &CertifiedReal::parse_decimal("3e28", p).expect("literal").mul_int(&k8) * &lk.powu(5)
    });
    Ok(SmallKBounds { k, c_k: ck.to_sci_string(8), n_bound, ml_bound, stages })
}

trait IntoReal {
    fn into_real(self) -> CertifiedReal;
}

impl IntoReal for BigInt {
    fn into_real(self) -> CertifiedReal {
        CertifiedReal::exact_int(self, LF_BITS)
    }
}

/// The chain for `k > 500`, ending in `k < 3.6e30`, `m + ell < 1.5e282`,
/// `n < 4.5e282`.
pub fn stage_bounds_large_k() -> Result<Vec<StageBound>> {
    let mut out = Vec::new();
    let none: [(&str, String); 0] = [];
    let l2 = ln_int(2);
    let l10 = ln_int(10);
    let theta = log2_of_10(LF_BITS);
    let ln_n_min = ln_int(503); // n >= k + 2 > 502

    for k in ["501", "1000", "1e4", "1e6", "1e10", "1e20", "3.6e30"] {
        let kb = lit(k).floor().expect("integer literal");
        let lhs = lemma_form(&lit("9e28"), &kb).ln()?.checked_div(&l2)?;
        let half = lit(k).div_int(&BigInt::from(2))?;
        let mut s =
            StageBound::check("n-below-2^(k/2)", "log2(9e28 k^8 log^5 k) < k/2", &[("k", k.to_string())], &lhs, "0");
        s.printed = half.to_sci_string(6);
        s.holds = lhs.certainly_lt(&half);
        out.push(s);
    }

    let fl3 = MatveevInstance::new("FL3", 1, BigInt::from(3), vec![ln_int(9), l10.clone(), l2.clone()])?;
    let fl3_c = fl3.coefficient().mul_int(&BigInt::from(2));
    out.push(StageBound::check(
        "matveev-FL3",
        "log|Lambda_1| > -C log n, t=3, d=1, A=(log 9, log 10, log 2), 1 + log n <= 2 log n",
        &none,
        &fl3_c,
        "1.1e12",
    ));

    let cotaga = (&lit("1.1e12") + &ln_int(13).checked_div(&ln_n_min)?).checked_div(&l2)?;
    out.push(StageBound::check("cotaga", "lambda < C log n", &none, &cotaga, "1.6e12"));

    let k333 = BigInt::from(333);
    let r21 = lemma_form(&lit("9e28"), &k333).ln()?.checked_div(&ln_big(&k333))?;
    out.push(StageBound::check(
        "log-n-vs-log-k",
        "log(9e28 k^8 log^5 k) <= C log k at k = 333 (the ratio decreases in k)",
        &[("k", "333".into())],
        &r21,
        "21",
    ));

    let half_coeff = lit("1.6e12").mul_int(&BigInt::from(2 * 21));
    out.push(StageBound::check("case-k/2-coefficient", "k < 2 * 1.6e12 * 21 log k", &none, &half_coeff, "7e13"));

    let k_half = solve_below(&lit("7e13"), 1)?;
    out.push(StageBound::check(
        "case-k/2-k",
        "k < 7e13 log k implies k < K",
        &[("c", "7e13".into())],
        &k_half.clone().into_real(),
        "3e15",
    ));
    let k3e15 = lit("3e15").floor().expect("integer");
    out.push(StageBound::check(
        "case-k/2-m+l",
        "m + ell < 3e28 k^8 log^5 k at k = 3e15",
        &[("k", "3e15".into())],
        &lemma_form(&lit("3e28"), &k3e15),
        "2e160",
    ));
    out.push(StageBound::check(
        "case-k/2-n",
        "n < 9e28 k^8 log^5 k at k = 3e15",
        &[("k", "3e15".into())],
        &lemma_form(&lit("9e28"), &k3e15),
        "4e160",
    ));

    let e5 = lit("1.6e12").checked_div(&theta)?;
    out.push(StageBound::check("E5", "m < (1.6e12 / theta) log n", &none, &e5, "4.9e11"));

    let h4 = &lit("4.9e11").mul_int(&BigInt::one()) * &l10;
    let h4 = &h4 + &(&ln_int(9) + &l10).checked_div(&ln_n_min)?;
    out.push(StageBound::check("height-FL4", "h(eta_1) < log 9 + (m + 1) log 10 < C log n", &none, &h4, "1.2e12"));

    let fl4 = MatveevInstance::new("FL4", 1, BigInt::from(3), vec![lit("1.2e12"), l10.clone(), l2.clone()])?;
    let fl4_c = fl4.coefficient().mul_int(&BigInt::from(2));
    out.push(StageBound::check(
        "matveev-FL4",
        "log|Lambda_2| > -C log^2 n, A_1 = 1.2e12 log n, 1 + log n <= 2 log n",
        &none,
        &fl4_c,
        "5.5e23",
    ));

    // (k/2) log 2 < 5.5e23 log^2 n + log 3, log n < 21 log k
    let ln_n_min2 = &ln_n_min * &ln_n_min;
    let theta_coeff =
        (&lit("5.5e23") + &ln_int(3).checked_div(&ln_n_min2)?).mul_int(&BigInt::from(2 * 441)).checked_div(&l2)?;
    out.push(StageBound::check(
        "case-theta-m-coefficient",
        "k < (2 / log 2)(5.5e23 + log 3 / log^2 n) 21^2 log^2 k",
        &none,
        &theta_coeff,
        "7.1e26",
    ));

    let k_theta = solve_below(&lit("7.1e26"), 2)?;
    out.push(StageBound::check(
        "case-theta-m-k",
        "k < 7.1e26 log^2 k implies k < K",
        &[("c", "7.1e26".into())],
        &k_theta.clone().into_real(),
        "3.6e30",
    ));

    let k_abs = lit("3.6e30").floor().expect("integer");
    out.push(StageBound::check(
        "absolute-m+l",
        "m + ell < 3e28 k^8 log^5 k at k = 3.6e30",
        &[("k", "3.6e30".into())],
        &lemma_form(&lit("3e28"), &k_abs),
        "1.5e282",
    ));
    out.push(StageBound::check(
        "absolute-n",
        "n < 9e28 k^8 log^5 k at k = 3.6e30",
        &[("k", "3.6e30".into())],
        &lemma_form(&lit("9e28"), &k_abs),
        "4.5e282",
    ));
    debug_assert!(out.iter().all(|s| !s.value.is_negative()));
    Ok(out)
}
