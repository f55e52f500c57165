//! Exact k-Fibonacci numbers and their two-block repdigit decompositions.

use std::collections::VecDeque;
use std::io::Write;
use std::ops::RangeInclusive;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sliding window over `F^(k)`: holds `F_(n-k+1) .. F_n` and their sum.
///
/// Seeded at `n = 1` with `F_(2-k) = ... = F_0 = 0` and `F_1 = 1`.
#[derive(Clone, Debug)]
pub struct KFibWindow {
    k: u32,
    index: i64,
    window: VecDeque<BigUint>,
    sum: BigUint,
}

impl KFibWindow {
    pub fn new(k: u32) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidArgument(format!("k must be at least 2, got {k}")));
        }
        let mut window: VecDeque<BigUint> = std::iter::repeat_n(BigUint::zero(), k as usize - 1).collect();
        window.push_back(BigUint::one());
        Ok(KFibWindow { k, index: 1, window, sum: BigUint::one() })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn index(&self) -> i64 {
        self.index
    }

    pub fn current(&self) -> &BigUint {
        self.window.back().expect("window is never empty")
    }

    /// Step to `F_(n+1)`: the new term is the window sum, and the sum is
    /// updated by adding the new term and dropping the oldest.
    pub fn advance(&mut self) -> &BigUint {
        let next = self.sum.clone();
        let oldest = self.window.pop_front().expect("window is never empty");
        self.sum = &self.sum + &next - oldest;
        self.window.push_back(next);
        self.index += 1;
        debug_assert!(self.power_of_two_regime_holds());
        self.current()
    }

    fn power_of_two_regime_holds(&self) -> bool {
        let n = self.index;
        if n < 2 {
            return true;
        }
        let pow = BigUint::one() << (n as usize - 2);
        if n <= self.k as i64 + 1 {
            *self.current() == pow
        } else {
            *self.current() < pow
        }
    }
}

impl Iterator for KFibWindow {
    type Item = (i64, BigUint);

    /// Yields `(n, F_n)` starting from the current position.
    fn next(&mut self) -> Option<Self::Item> {
        let item = (self.index, self.current().clone());
        self.advance();
        Some(item)
    }
}

/// `F_n^(k)` for `n >= 2 - k`.
pub fn kfib(k: u32, n: i64) -> Result<BigUint> {
    let mut w = KFibWindow::new(k)?;
    if n < 2 - k as i64 {
        return Err(Error::InvalidArgument(format!("index {n} is below the seed range for k={k}")));
    }
    if n <= 0 {
        return Ok(BigUint::zero());
    }
    while w.index() < n {
        w.advance();
    }
    Ok(w.current().clone())
}

/// `d1` repeated `m` times followed by `d2` repeated `ell` times.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TwoBlockDecomposition {
    pub d1: u8,
    pub d2: u8,
    pub m: u32,
    pub ell: u32,
}

impl TwoBlockDecomposition {
    pub fn new(d1: u8, d2: u8, m: u32, ell: u32) -> Result<Self> {
        if !(1..=9).contains(&d1) || d2 > 9 || m == 0 || ell == 0 {
            return Err(Error::InvalidArgument(format!("not a two-block shape: d1={d1} d2={d2} m={m} ell={ell}")));
        }
        Ok(TwoBlockDecomposition { d1, d2, m, ell })
    }

    /// `(d1 10^(m+ell) - (d1 - d2) 10^ell - d2) / 9`.
    pub fn value(&self) -> BigUint {
        let ten = BigInt::from(10);
        let d1 = BigInt::from(self.d1);
        let d2 = BigInt::from(self.d2);
        let num = &d1 * num_traits::pow(ten.clone(), (self.m + self.ell) as usize)
            - (&d1 - &d2) * num_traits::pow(ten, self.ell as usize)
            - &d2;
        let (q, r) = num_integer::Integer::div_rem(&num, &BigInt::from(9));
        debug_assert!(r.is_zero());
        q.to_biguint().expect("positive")
    }

    pub fn digit_string(&self) -> String {
        let a = char::from(b'0' + self.d1).to_string().repeat(self.m as usize);
        let b = char::from(b'0' + self.d2).to_string().repeat(self.ell as usize);
        a + &b
    }
}

/// Every way to read `n` as `d1^m d2^ell` with `m, ell >= 1`.
///
/// A repdigit with `L` digits splits at each of its `L - 1` interior positions;
/// two maximal runs give exactly one decomposition; three or more give none.
pub fn two_block_decompose(n: &BigUint) -> Result<Vec<TwoBlockDecomposition>> {
    if *n < BigUint::from(10u32) {
        return Err(Error::InvalidArgument(format!("{n} has fewer than two digits")));
    }
    let digits = n.to_str_radix(10);
    Ok(decompose_digits(digits.as_bytes()))
}

fn decompose_digits(digits: &[u8]) -> Vec<TwoBlockDecomposition> {
    let mut runs: Vec<(u8, u32)> = Vec::with_capacity(3);
    for &c in digits {
        let d = c - b'0';
        match runs.last_mut() {
            Some((prev, len)) if *prev == d => *len += 1,
            _ => {
                if runs.len() == 2 {
                    return Vec::new();
                }
                runs.push((d, 1));
            }
        }
    }
    match runs.as_slice() {
        [(d, len)] => (1..*len).map(|m| TwoBlockDecomposition { d1: *d, d2: *d, m, ell: len - m }).collect(),
        [(d1, m), (d2, ell)] => vec![TwoBlockDecomposition { d1: *d1, d2: *d2, m: *m, ell: *ell }],
        _ => Vec::new(),
    }
}

/// One instance `F_n^(k) = d1^m d2^ell`, reported with the decomposition of
/// largest `m` when the value is a repdigit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Solution {
    pub k: u32,
    pub n: u64,
    #[serde(with = "crate::dec")]
    pub value: BigUint,
    pub decomposition: TwoBlockDecomposition,
}

impl Solution {
    /// Recomputes both sides with big integers.
    pub fn verify(&self) -> bool {
        self.decomposition.value() == self.value
            && kfib(self.k, self.n as i64).map(|f| f == self.value).unwrap_or(false)
    }
}

/// A value that is `F_n^(k)` for every `k >= k_min` (the power-of-two regime).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolutionFamily {
    #[serde(with = "crate::dec")]
    pub value: BigUint,
    pub n: u64,
    pub k_min: u32,
    pub decomposition: TwoBlockDecomposition,
}

fn canonical(value: &BigUint) -> Option<TwoBlockDecomposition> {
    let mut all = decompose_digits(value.to_str_radix(10).as_bytes());
    all.sort_by_key(|d| d.m);
    all.pop()
}

fn sweep_k(k: u32, n_max: u64) -> Vec<Solution> {
    let mut out = Vec::new();
    let mut w = KFibWindow::new(k).expect("k >= 2");
    let ten = BigUint::from(10u32);
    while (w.index() as u64) <= n_max {
        if *w.current() >= ten {
            if let Some(decomposition) = canonical(w.current()) {
                out.push(Solution { k, n: w.index() as u64, value: w.current().clone(), decomposition });
            }
        }
        w.advance();
    }
    out
}

/// Direct sweep of `F_n^(k)` for `k` in `k_range` and `1 <= n <= n_max`,
/// ordered by `(k, n)`.
pub fn enumerate_solutions(k_range: RangeInclusive<u32>, n_max: u64) -> Result<Vec<Solution>> {
    if *k_range.start() < 2 {
        return Err(Error::InvalidArgument("k range must start at 2 or more".into()));
    }
    if n_max < 1 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    let ks: Vec<u32> = k_range.collect();
    let mut all: Vec<Solution> = crate::par::map_collect(ks, |k| sweep_k(k, n_max)).into_iter().flatten().collect();
    all.sort_by_key(|s| (s.k, s.n));
    Ok(all)
}

/// Outcome of the `2 <= n <= k + 1` analysis, where `F_n = 2^(n-2)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SmallNReport {
    /// From the 2-adic valuation of the trailing block.
    pub ell_bound: u32,
    /// Range of `(d1 - d2) 10^ell + d2` over admissible digits and `ell`.
    pub residual_range: (i64, i64),
    /// From the largest power of two inside `residual_range`.
    pub block_sum_bound: u32,
    pub families: Vec<SolutionFamily>,
    /// Concrete members with `k <= k_probe`.
    pub instances: Vec<Solution>,
}

/// Solves the power-of-two regime symbolically.
///
/// `2^(n-2) = d1^m d2^ell` forces `2^ell | d2` (the trailing block is
/// `d2 (10^ell - 1)/9` and `10^ell - 1` is odd; `d2 = 0` would make 5 divide
/// a power of two), so `ell <= max v2(d2) = 3`. Then `d1 10^(m+ell) - 9 2^(n-2)`
/// equals a residual in a short range and is divisible by `2^min(m+ell, n-2)`,
/// which bounds `m + ell`. A finite search finishes the job.
pub fn solve_small_n(k_probe: u32) -> SmallNReport {
    let ell_bound = (1u32..=9).map(|d| d.trailing_zeros()).max().unwrap_or(0);
    let mut lo = i64::MAX;
    let mut hi = i64::MIN;
    for d1 in 1i64..=9 {
        for d2 in 0i64..=9 {
            for ell in 1..=ell_bound {
                let r = (d1 - d2) * 10i64.pow(ell) + d2;
                lo = lo.min(r);
                hi = hi.max(r);
            }
        }
    }
    let reach = lo.unsigned_abs().max(hi.unsigned_abs());
    let block_sum_bound = 63 - reach.leading_zeros();

    let mut families = Vec::new();
    for d1 in 1u8..=9 {
        for d2 in 0u8..=9 {
            for ell in 1..=ell_bound {
                for m in 1..=block_sum_bound.saturating_sub(ell) {
                    let dec = TwoBlockDecomposition { d1, d2, m, ell };
                    let v = dec.value();
                    if v.count_ones() != 1 {
                        continue;
                    }
                    let n = v.trailing_zeros().unwrap_or(0) + 2;
                    let k_min = (n as u32 - 1).max(2);
                    if canonical(&v) == Some(dec) {
                        families.push(SolutionFamily { value: v, n, k_min, decomposition: dec });
                    }
                }
            }
        }
    }
    families.sort_by_key(|f| f.n);
    let instances = families
        .iter()
        .flat_map(|f| {
            (f.k_min..=k_probe).map(move |k| Solution {
                k,
                n: f.n,
                value: f.value.clone(),
                decomposition: f.decomposition,
            })
        })
        .collect();
    SmallNReport { ell_bound, residual_range: (lo, hi), block_sum_bound, families, instances }
}

/// Writes `k,n,value,d1,d2,m,ell` rows with a header.
pub fn write_csv<W: Write>(solutions: &[Solution], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["k", "n", "value", "d1", "d2", "m", "ell"])?;
    for s in solutions {
        w.write_record([
            s.k.to_string(),
            s.n.to_string(),
            s.value.to_str_radix(10),
            s.decomposition.d1.to_string(),
            s.decomposition.d2.to_string(),
            s.decomposition.m.to_string(),
            s.decomposition.ell.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads rows written by [`write_csv`].
pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<Solution>> {
    let mut r = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let field = |i: usize| rec.get(i).unwrap_or_default().to_string();
        let parse_err = |what: &str| Error::InvalidArgument(format!("bad CSV field {what}"));
        let num = |i: usize, what: &str| field(i).parse::<u64>().map_err(|_| parse_err(what));
        let dec = TwoBlockDecomposition::new(
            num(3, "d1")? as u8,
            num(4, "d2")? as u8,
            num(5, "m")? as u32,
            num(6, "ell")? as u32,
        )?;
        out.push(Solution {
            k: num(0, "k")? as u32,
            n: num(1, "n")?,
            value: field(2).parse().map_err(|_| parse_err("value"))?,
            decomposition: dec,
        });
    }
    Ok(out)
}

/// Bound `m + ell < (n - 2) log 2 / log 10 + 1`, checked exactly as
/// `10^(m+ell-1) < 2^(n-2)`.
pub fn digit_count_bound_holds(s: &Solution) -> bool {
    if s.n < 4 {
        return true;
    }
    let lhs = num_traits::pow(BigUint::from(10u32), (s.decomposition.m + s.decomposition.ell - 1) as usize);
    lhs < BigUint::one() << (s.n as usize - 2)
}

/// Number of decimal digits.
pub fn decimal_len(n: &BigUint) -> usize {
    n.to_str_radix(10).len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    fn b(n: u64) -> BigUint {
        BigUint::from(n)
    }

    #[test]
    fn kfib_examples() {
        assert_eq!(kfib(2, 10).unwrap(), b(55));
        assert_eq!(kfib(4, 5).unwrap(), b(8));
        assert_eq!(kfib(7, 13).unwrap(), b(2000));
        assert_eq!(kfib(9, 11).unwrap(), b(511));
        assert_eq!(kfib(5, -3).unwrap(), b(0));
        assert_eq!(kfib(3, 1).unwrap(), b(1));
    }

    #[test]
    fn kfib_rejects_bad_input() {
        assert!(kfib(1, 5).is_err());
        assert!(kfib(3, -2).is_err());
        assert!(kfib(3, -1).is_ok());
    }

    #[test]
    fn window_matches_naive_recurrence() {
        for k in 2..8u32 {
            let mut naive: Vec<BigUint> = vec![BigUint::zero(); k as usize - 1];
            naive.push(BigUint::one());
            for _ in 0..60 {
                let s: BigUint = naive[naive.len() - k as usize..].iter().sum();
                naive.push(s);
            }
            let got: Vec<BigUint> = KFibWindow::new(k).unwrap().take(61).map(|(_, v)| v).collect();
            assert_eq!(got, naive[k as usize - 1..].to_vec(), "k={k}");
        }
    }

    #[test]
    fn decompose_examples() {
        let d = |v: u64| two_block_decompose(&b(v)).unwrap();
        assert_eq!(d(2000), vec![TwoBlockDecomposition { d1: 2, d2: 0, m: 1, ell: 3 }]);
        assert_eq!(
            d(777),
            vec![
                TwoBlockDecomposition { d1: 7, d2: 7, m: 1, ell: 2 },
                TwoBlockDecomposition { d1: 7, d2: 7, m: 2, ell: 1 }
            ]
        );
        assert!(d(123).is_empty());
        assert_eq!(d(13), vec![TwoBlockDecomposition { d1: 1, d2: 3, m: 1, ell: 1 }]);
        assert!(two_block_decompose(&b(9)).is_err());
    }

    #[test]
    fn decomposition_value_formula() {
        let d = TwoBlockDecomposition::new(7, 3, 2, 3).unwrap();
        assert_eq!(d.value(), b(77333));
        assert_eq!(d.digit_string(), "77333");
        assert!(TwoBlockDecomposition::new(0, 3, 1, 1).is_err());
    }

    #[test]
    fn small_n_families() {
        let r = solve_small_n(10);
        assert_eq!(r.ell_bound, 3);
        assert_eq!(r.residual_range, (-7991, 9000));
        assert_eq!(r.block_sum_bound, 13);
        let vals: Vec<u64> = r.families.iter().map(|f| f.value.to_u64().unwrap()).collect();
        assert_eq!(vals, vec![16, 32, 64]);
        let kmins: Vec<u32> = r.families.iter().map(|f| f.k_min).collect();
        assert_eq!(kmins, vec![5, 6, 7]);
        assert!(r.instances.iter().any(|s| s.k == 5 && s.n == 6 && s.value == b(16)));
        assert!(r.instances.iter().all(|s| s.verify()));
    }

    #[test]
    fn no_power_of_two_128_in_search_space() {
        // independent brute force over the same digit/length box
        for d1 in 1u8..=9 {
            for d2 in 0u8..=9 {
                for ell in 1..=3u32 {
                    for m in 1..=(13 - ell) {
                        let v = TwoBlockDecomposition { d1, d2, m, ell }.value();
                        assert_ne!(v, b(128));
                    }
                }
            }
        }
        assert!(solve_small_n(10).families.iter().all(|f| f.value != b(128)));
    }

    #[test]
    fn tribonacci_solutions() {
        let s = enumerate_solutions(3..=3, 9).unwrap();
        let vals: Vec<u64> = s.iter().map(|s| s.value.to_u64().unwrap()).collect();
        assert_eq!(vals, vec![13, 24, 44, 81]);
        assert!(enumerate_solutions(2..=2, 4).unwrap().is_empty());
    }

    #[test]
    fn csv_roundtrip() {
        let s = enumerate_solutions(2..=4, 30).unwrap();
        let mut buf = Vec::new();
        write_csv(&s, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("k,n,value,d1,d2,m,ell\n2,7,13,1,3,1,1\n"));
        assert_eq!(read_csv(&buf[..]).unwrap(), s);
    }

    #[test]
    fn json_uses_decimal_strings() {
        let s = enumerate_solutions(7..=7, 13).unwrap();
        let j = serde_json::to_string(&s.last().unwrap()).unwrap();
        assert!(j.contains("\"value\":\"2000\""), "{j}");
    }
}
