use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::cf::ContinuedFraction;
use crate::error::{Error, Result};
use crate::realnum::{CertifiedReal, PrecisionPolicy, SharedSource};

/// Extra convergents tried after the first one with `q > 6M`.
pub const EXTRA_CONVERGENTS: usize = 32;

const W_FRAC_BITS: u32 = 32;

/// `0 < |r gamma - s + mu| < A B^-w` with `r <= M`.
#[derive(Clone)]
pub struct ReductionInstance {
    pub label: String,
    pub gamma: SharedSource,
    pub mu: SharedSource,
    pub a: SharedSource,
    pub b: SharedSource,
    pub m: BigInt,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReductionOutcome {
    /// No solution has `w >= w_bound`; `w_max` is its ceiling.
    ReducedBound {
        w_max: u64,
        /// `log(A q / epsilon) / log B`, `midpoint±radius`.
        w_bound: String,
        /// Upper endpoint of `w_bound` times `2^32`, rounded up.
        #[serde(with = "crate::dec")]
        w_upper_scaled: BigInt,
        index: usize,
        #[serde(with = "crate::dec")]
        q_used: BigInt,
        epsilon: String,
        precision_bits: u32,
    },
    /// Every convergent tried gave a certified `epsilon <= 0`.
    EpsilonNonpositive {
        first_index: usize,
        tried: usize,
        #[serde(with = "crate::dec")]
        q_used: BigInt,
    },
    /// Some `epsilon` could not be signed within the precision budget.
    Inconclusive { index: usize, precision_bits: u32 },
}

impl ReductionOutcome {
    pub fn w_max(&self) -> Option<u64> {
        match self {
            ReductionOutcome::ReducedBound { w_max, .. } => Some(*w_max),
            _ => None,
        }
    }

    /// Certified upper bound on `log(A q / epsilon) / log B`.
    pub fn w_upper(&self) -> Option<CertifiedReal> {
        match self {
            ReductionOutcome::ReducedBound { w_upper_scaled, .. } => {
                Some(CertifiedReal::dyadic(w_upper_scaled.clone(), W_FRAC_BITS))
            }
            _ => None,
        }
    }

    /// `w_upper < bound`, exactly.
    pub fn w_below(&self, bound: i64) -> bool {
        match self {
            ReductionOutcome::ReducedBound { w_upper_scaled, .. } => {
                *w_upper_scaled < BigInt::from(bound) << W_FRAC_BITS
            }
            _ => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReductionReport {
    pub label: String,
    #[serde(with = "crate::dec")]
    pub m: BigInt,
    pub outcome: ReductionOutcome,
}

enum EpsSign {
    Positive(CertifiedReal, u32),
    Nonpositive,
    Unknown(u32),
}

fn epsilon(inst: &ReductionInstance, q: &BigInt, policy: &PrecisionPolicy) -> Result<EpsSign> {
    let floor = (inst.m.bits() + q.bits() + 64) as u32;
    let mut last = floor;
    for p in policy.ladder(floor) {
        last = p;
        let g = inst.gamma.eval(p)?;
        let mu = inst.mu.eval(p)?;
        let eps = &mu.mul_int(q).dist_to_nearest_int() - &g.mul_int(q).dist_to_nearest_int().mul_int(&inst.m);
        if eps.is_positive() {
            return Ok(EpsSign::Positive(eps, p));
        }
        if eps.certainly_le(&CertifiedReal::zero(p)) {
            return Ok(EpsSign::Nonpositive);
        }
    }
    Ok(EpsSign::Unknown(last))
}

/// Applies the Dujella–Pethő lemma along the convergents of `cf`, starting
/// at the first with `q > 6M` and trying up to [`EXTRA_CONVERGENTS`] more.
pub fn dujella_petho(
    inst: &ReductionInstance,
    cf: &ContinuedFraction,
    policy: &PrecisionPolicy,
) -> Result<ReductionReport> {
    dujella_petho_walk(inst, cf, policy, EXTRA_CONVERGENTS)
}

/// [`dujella_petho`] with `extra` further convergents. When `mu` lies within
/// `delta` of `Z + Z gamma`, `epsilon` turns positive only once `q^2 > M / delta`.
pub fn dujella_petho_walk(
    inst: &ReductionInstance,
    cf: &ContinuedFraction,
    policy: &PrecisionPolicy,
    extra: usize,
) -> Result<ReductionReport> {
    if !inst.m.is_positive() {
        return Err(Error::InvalidArgument(format!("M must be positive, got {}", inst.m)));
    }
    let a0 = inst.a.eval(64)?;
    let b0 = inst.b.eval(64)?;
    if !a0.is_positive() {
        return Err(Error::InvalidArgument(format!("A must be positive, got {a0}")));
    }
    if b0.cmp_int(&BigInt::from(1)) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::InvalidArgument(format!("B must exceed 1, got {b0}")));
    }
    let six_m = &inst.m * 6;
    let first = cf.index_beyond(&six_m).ok_or_else(|| Error::ExpansionExhausted {
        label: cf.label.clone(),
        have: cf.len(),
        need: cf.len() + 1,
    })?;
    let mut unknown = None;
    let mut tried = 0;
    let mut last_q = cf.q[first].clone();
    for i in first..cf.len().min(first + extra + 1) {
        let q = &cf.q[i];
        last_q = q.clone();
        tried += 1;
        match epsilon(inst, q, policy)? {
            EpsSign::Positive(eps, p) => {
                let a = inst.a.eval(p)?;
                let b = inst.b.eval(p)?;
                let w = a.mul_int(q).checked_div(&eps)?.ln()?.checked_div(&b.ln()?)?;
                let w_max = w
                    .ceil_upper()
                    .to_u64()
                    .ok_or_else(|| Error::InvalidArgument(format!("reduced bound {w} out of range")))?;
                let w_upper_scaled = w.to_precision(W_FRAC_BITS).scaled_endpoints().1.clone();
                return Ok(ReductionReport {
                    label: inst.label.clone(),
                    m: inst.m.clone(),
                    outcome: ReductionOutcome::ReducedBound {
                        w_max,
                        w_bound: w.to_sci_string(10),
                        w_upper_scaled,
                        index: i,
                        q_used: q.clone(),
                        epsilon: eps.to_sci_string(10),
                        precision_bits: p,
                    },
                });
            }
            EpsSign::Nonpositive => {}
            EpsSign::Unknown(p) => {
                unknown.get_or_insert((i, p));
            }
        }
    }
    let outcome = match unknown {
        Some((index, precision_bits)) => ReductionOutcome::Inconclusive { index, precision_bits },
        None => ReductionOutcome::EpsilonNonpositive { first_index: first, tried, q_used: last_q },
    };
    Ok(ReductionReport { label: inst.label.clone(), m: inst.m.clone(), outcome })
}

/// `|x gamma - y| > 1 / ((a_M + 2) x)` for `0 < x < M`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LegendreBound {
    pub label: String,
    #[serde(with = "crate::dec")]
    pub m: BigInt,
    /// `N` with `q_N <= M < q_(N+1)`.
    pub n_index: usize,
    #[serde(with = "crate::dec")]
    pub a_m: BigInt,
    /// Smallest `i <= N + 1` with `a_i = a_M`.
    pub argmax: usize,
    /// `a_M + 2`.
    #[serde(with = "crate::dec")]
    pub factor: BigInt,
}

pub fn legendre_lower(cf: &ContinuedFraction, m: &BigInt) -> Result<LegendreBound> {
    if !m.is_positive() {
        return Err(Error::InvalidArgument(format!("M must be positive, got {m}")));
    }
    let j = cf.index_beyond(m).ok_or_else(|| Error::ExpansionExhausted {
        label: cf.label.clone(),
        have: cf.len(),
        need: cf.len() + 1,
    })?;
    // q_0 = 1 <= M, so j >= 1
    let n_index = j - 1;
    let (argmax, a_m) =
        cf.quotients[..=j]
            .iter()
            .enumerate()
            .fold((0, &cf.quotients[0]), |best, (i, a)| if a > best.1 { (i, a) } else { best });
    Ok(LegendreBound { label: cf.label.clone(), m: m.clone(), n_index, a_m: a_m.clone(), argmax, factor: a_m + 2 })
}

/// From `|x gamma - y| < A B^-w` and the Legendre bound with `x < M`:
/// `B^w < A (a_M + 2) M`, so `w < log(A (a_M + 2) M) / log B`.
pub fn legendre_exponent_bound(lb: &LegendreBound, a: &CertifiedReal, b: &CertifiedReal) -> Result<CertifiedReal> {
    let prod = a.mul_int(&(&lb.factor * &lb.m));
    prod.ln()?.checked_div(&b.ln()?)
}

/// `mu(m, d1, d2) = 2 + log(N / 9) / log 2` with `N = d1 10^m - (d1 - d2)` is
/// `c0 + c1 log 10 / log 2` exactly when `N = 9 2^x 5^y`; then
/// `c0 = 2 + x - y` and `c1 = y`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegenerateMu {
    pub m: u32,
    pub d1: u8,
    pub d2: u8,
    pub twos: u32,
    pub fives: u32,
    pub c0: i64,
    pub c1: i64,
}

pub fn block_value(m: u32, d1: u8, d2: u8) -> BigInt {
    BigInt::from(d1) * num_traits::pow(BigInt::from(10), m as usize) - (i64::from(d1) - i64::from(d2))
}

pub fn degenerate_mu(m: u32, d1: u8, d2: u8) -> Option<DegenerateMu> {
    let n = block_value(m, d1, d2);
    if !n.is_positive() {
        return None;
    }
    let (mut r, rem) = n.div_rem(&BigInt::from(9));
    if !rem.is_zero() {
        return None;
    }
    let mut strip = |base: u32| {
        let mut c = 0;
        let b = BigInt::from(base);
        loop {
            let (q, rr) = r.div_rem(&b);
            if !rr.is_zero() {
                return c;
            }
            r = q;
            c += 1;
        }
    };
    let twos = strip(2);
    let fives = strip(5);
    (r == BigInt::from(1)).then(|| DegenerateMu {
        m,
        d1,
        d2,
        twos,
        fives,
        c0: 2 + twos as i64 - fives as i64,
        c1: fives as i64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::realnum::{log2_of_10, FnSource};
    use crate::reduction::cf::cf_expand;

    fn theta() -> SharedSource {
        FnSource::shared("log(10)/log(2)", |p| Ok(log2_of_10(p)))
    }

    fn constant(label: &str, n: i64) -> SharedSource {
        FnSource::shared(label.to_string(), move |p| Ok(CertifiedReal::exact_int(n, p)))
    }

    #[test]
    fn mu_equal_to_gamma_never_reduces() {
        let policy = PrecisionPolicy::default();
        let cf = cf_expand(theta(), 80, &policy).unwrap();
        let inst = ReductionInstance {
            label: "mu = gamma".into(),
            gamma: theta(),
            mu: theta(),
            a: constant("A", 10),
            b: constant("B", 2),
            m: BigInt::from(10).pow(10),
        };
        let r = dujella_petho(&inst, &cf, &policy).unwrap();
        assert!(matches!(r.outcome, ReductionOutcome::EpsilonNonpositive { tried, .. } if tried >= 2), "{r:?}");
    }

    #[test]
    fn rejects_bad_parameters() {
        let policy = PrecisionPolicy::default();
        let cf = cf_expand(theta(), 40, &policy).unwrap();
        let mut inst = ReductionInstance {
            label: "bad".into(),
            gamma: theta(),
            mu: constant("half", 0),
            a: constant("A", 1),
            b: constant("B", 1),
            m: BigInt::from(5),
        };
        assert!(dujella_petho(&inst, &cf, &policy).is_err());
        inst.b = constant("B", 2);
        inst.m = BigInt::zero();
        assert!(dujella_petho(&inst, &cf, &policy).is_err());
        inst.m = BigInt::from(10).pow(200);
        assert!(matches!(dujella_petho(&inst, &cf, &policy), Err(Error::ExpansionExhausted { .. })));
    }

    #[test]
    fn printed_degenerate_list() {
        let mut found: Vec<(u32, u8, u8)> = Vec::new();
        for m in 1..=40 {
            for d1 in 1..=9 {
                for d2 in 0..=9 {
                    if let Some(d) = degenerate_mu(m, d1, d2) {
                        found.push((d.m, d.d1, d.d2));
                    }
                }
            }
        }
        let mut expect =
            vec![(1, 1, 0), (1, 1, 9), (1, 2, 0), (1, 3, 9), (1, 4, 0), (1, 7, 9), (1, 8, 0), (1, 4, 9), (1, 5, 0)];
        expect.extend((1..=40).map(|m| (m, 9, 9)));
        expect.sort();
        found.sort();
        assert_eq!(found, expect);
        let d = degenerate_mu(1, 4, 9).unwrap();
        assert_eq!((d.c0, d.c1), (1, 1));
        let d = degenerate_mu(7, 9, 9).unwrap();
        assert_eq!((d.c0, d.c1), (2, 7));
        assert_eq!(degenerate_mu(1, 7, 9).unwrap().c0, 5);
    }

    #[test]
    fn legendre_on_small_threshold() {
        let cf = cf_expand(theta(), 20, &PrecisionPolicy::default()).unwrap();
        let lb = legendre_lower(&cf, &BigInt::from(2)).unwrap();
        // q_0 = 1 <= 2 < q_1 = 3
        assert_eq!(lb.n_index, 0);
        assert_eq!(lb.a_m, BigInt::from(3));
        assert_eq!(lb.factor, BigInt::from(5));
        assert!(legendre_lower(&cf, &BigInt::zero()).is_err());
    }
}
