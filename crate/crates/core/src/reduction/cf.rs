use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::realnum::{CertifiedReal, PrecisionPolicy, SharedSource};

/// Certified partial quotients `a_i` and convergents `p_i / q_i` of a real
/// number.
#[derive(Clone, Serialize, Deserialize)]
pub struct ContinuedFraction {
    pub label: String,
    #[serde(with = "crate::dec::vec")]
    pub quotients: Vec<BigInt>,
    #[serde(with = "crate::dec::vec")]
    pub p: Vec<BigInt>,
    #[serde(with = "crate::dec::vec")]
    pub q: Vec<BigInt>,
    /// Fractional bits of the enclosure that certified the quotients.
    pub precision: u32,
    #[serde(skip)]
    source: Option<SharedSource>,
    #[serde(skip)]
    policy: PrecisionPolicy,
}

impl fmt::Debug for ContinuedFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let head: Vec<String> = self.quotients.iter().take(12).map(|a| a.to_string()).collect();
        write!(
            f,
            "ContinuedFraction({} = [{}{}], {} terms @ {} bits)",
            self.label,
            head.join(","),
            if self.len() > 12 { ",..." } else { "" },
            self.len(),
            self.precision
        )
    }
}

impl PartialEq for ContinuedFraction {
    fn eq(&self, other: &Self) -> bool {
        self.label == other.label && self.quotients == other.quotients
    }
}

impl ContinuedFraction {
    /// Builds convergents from known quotients (`a_i >= 1` for `i >= 1`).
    pub fn from_quotients(label: impl Into<String>, quotients: Vec<BigInt>, precision: u32) -> Result<Self> {
        if quotients.iter().skip(1).any(|a| !a.is_positive()) {
            return Err(Error::InvalidArgument("partial quotients past a_0 must be positive".into()));
        }
        let (mut p, mut q) = (Vec::with_capacity(quotients.len()), Vec::with_capacity(quotients.len()));
        let (mut p1, mut p2) = (BigInt::one(), BigInt::zero());
        let (mut q1, mut q2) = (BigInt::zero(), BigInt::one());
        for a in &quotients {
            let pn = a * &p1 + &p2;
            let qn = a * &q1 + &q2;
            p2 = std::mem::replace(&mut p1, pn.clone());
            q2 = std::mem::replace(&mut q1, qn.clone());
            p.push(pn);
            q.push(qn);
        }
        Ok(ContinuedFraction {
            label: label.into(),
            quotients,
            p,
            q,
            precision,
            source: None,
            policy: PrecisionPolicy::default(),
        })
    }

    pub fn len(&self) -> usize {
        self.quotients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quotients.is_empty()
    }

    pub fn source(&self) -> Option<&SharedSource> {
        self.source.as_ref()
    }

    /// Least `i` with `q_i > bound`, if already expanded that far.
    pub fn index_beyond(&self, bound: &BigInt) -> Option<usize> {
        self.q.iter().position(|q| q > bound)
    }

    /// Re-expands from the source until at least `count` quotients are known.
    pub fn extend_to(&mut self, count: usize) -> Result<()> {
        if self.len() >= count {
            return Ok(());
        }
        let src = self.source.clone().ok_or_else(|| Error::ExpansionExhausted {
            label: self.label.clone(),
            have: self.len(),
            need: count,
        })?;
        *self = cf_expand(src, count, &self.policy)?;
        Ok(())
    }

    /// Expands until some `q_i > bound` and `extra` further quotients exist;
    /// returns that `i`.
    pub fn extend_beyond_denominator(&mut self, bound: &BigInt, extra: usize) -> Result<usize> {
        loop {
            if let Some(i) = self.index_beyond(bound) {
                if self.len() > i + extra {
                    return Ok(i);
                }
                self.extend_to(i + extra + 1)?;
                continue;
            }
            let guess = estimate_terms(bound) + extra + 8;
            let next = guess.max(self.len() + self.len() / 2 + 8);
            self.extend_to(next)?;
        }
    }
}

/// Terms needed to reach a denominator of `bound`, from Levy's constant
/// (`log q_n ~ 1.19 n`), padded.
fn estimate_terms(bound: &BigInt) -> usize {
    (bound.bits() as f64 * std::f64::consts::LN_2 / 1.1) as usize + 4
}

/// Least `i` with `q_i > bound`, expanding `cf` as needed.
pub fn first_convergent_beyond(cf: &mut ContinuedFraction, bound: &BigInt) -> Result<(usize, BigInt, BigInt)> {
    let i = cf.extend_beyond_denominator(bound, 0)?;
    Ok((i, cf.p[i].clone(), cf.q[i].clone()))
}

fn rational_cf(mut num: BigInt, mut den: BigInt, limit: usize) -> Vec<BigInt> {
    let mut out = Vec::new();
    while !den.is_zero() && out.len() < limit {
        let (a, r) = num.div_mod_floor(&den);
        out.push(a);
        num = std::mem::replace(&mut den, r);
    }
    out
}

/// Quotients shared by every real in the enclosure, at most `limit` of them.
///
/// A quotient `a_j` is kept when both endpoint expansions agree through index
/// `j` and both continue past it, so each endpoint sits strictly inside the
/// cylinder set of the common prefix.
pub fn certified_prefix(x: &CertifiedReal, limit: usize) -> Vec<BigInt> {
    let (lo, hi) = x.scaled_endpoints();
    let den = BigInt::one() << x.precision();
    let a = rational_cf(lo.clone(), den.clone(), limit + 1);
    let b = rational_cf(hi.clone(), den, limit + 1);
    let j = a.iter().zip(&b).take_while(|(u, v)| u == v).count();
    let cert = if a.len() > j && b.len() > j { j } else { j.saturating_sub(1) };
    a[..cert.min(limit)].to_vec()
}

/// Expands `source` to `count` certified quotients, raising precision along
/// `policy`, and cross-checks the result at twice the precision.
pub fn cf_expand(source: SharedSource, count: usize, policy: &PrecisionPolicy) -> Result<ContinuedFraction> {
    let label = source.label();
    let floor = (4 * count as u64 + 64).min(u32::MAX as u64) as u32;
    let mut best = 0;
    for p in policy.ladder(floor) {
        let x = source.eval(p)?;
        let prefix = certified_prefix(&x, count);
        best = best.max(prefix.len());
        if prefix.len() < count {
            continue;
        }
        let twice = certified_prefix(&source.eval(p.saturating_mul(2))?, count);
        if twice.len() < count || twice != prefix {
            return Err(Error::Mismatch(format!("quotients of {label} changed between {p} and {} bits", 2 * p)));
        }
        let mut cf = ContinuedFraction::from_quotients(label, prefix, p)?;
        cf.source = Some(source);
        cf.policy = *policy;
        return Ok(cf);
    }
    Err(Error::ExpansionExhausted { label, have: best, need: count })
}

/// Shared expansions keyed by source label, optionally persisted as JSON.
pub struct CfCache {
    dir: Option<PathBuf>,
    policy: PrecisionPolicy,
    mem: Mutex<HashMap<String, Arc<ContinuedFraction>>>,
}

impl CfCache {
    pub fn in_memory(policy: PrecisionPolicy) -> Self {
        CfCache { dir: None, policy, mem: Mutex::new(HashMap::new()) }
    }

    pub fn with_dir(dir: impl AsRef<Path>, policy: PrecisionPolicy) -> Result<Self> {
        std::fs::create_dir_all(dir.as_ref())?;
        Ok(CfCache { dir: Some(dir.as_ref().to_path_buf()), policy, mem: Mutex::new(HashMap::new()) })
    }

    fn slug(label: &str) -> String {
        label.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect()
    }

    fn path_for(&self, label: &str, precision: u32) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("cf-{}-{precision}.json", Self::slug(label))))
    }

    fn load_from_disk(&self, source: &SharedSource) -> Option<ContinuedFraction> {
        let dir = self.dir.as_ref()?;
        let label = source.label();
        let prefix = format!("cf-{}-", Self::slug(&label));
        let mut found: Vec<ContinuedFraction> = std::fs::read_dir(dir)
            .ok()?
            .filter_map(|e| e.ok())
            .filter(|e| e.file_name().to_string_lossy().starts_with(&prefix))
            .filter_map(|e| std::fs::read(e.path()).ok())
            .filter_map(|bytes| serde_json::from_slice::<ContinuedFraction>(&bytes).ok())
            .filter(|cf| cf.label == label)
            .collect();
        found.sort_by_key(|cf| std::cmp::Reverse(cf.len()));
        let cf = found.into_iter().next()?;
        // recertify the stored quotients at their own precision
        let x = source.eval(cf.precision).ok()?;
        if certified_prefix(&x, cf.len()) != cf.quotients {
            log::warn!("discarding stale expansion of {label}");
            return None;
        }
        let mut cf = ContinuedFraction::from_quotients(cf.label, cf.quotients, cf.precision).ok()?;
        cf.source = Some(source.clone());
        cf.policy = self.policy;
        Some(cf)
    }

    fn store(&self, cf: &ContinuedFraction) -> Result<()> {
        if let Some(path) = self.path_for(&cf.label, cf.precision) {
            std::fs::write(path, serde_json::to_vec(cf)?)?;
        }
        Ok(())
    }

    fn lookup(&self, source: &SharedSource) -> Option<ContinuedFraction> {
        let label = source.label();
        if let Some(cf) = self.mem.lock().unwrap().get(&label) {
            return Some((**cf).clone());
        }
        self.load_from_disk(source)
    }

    fn remember(&self, cf: ContinuedFraction, changed: bool) -> Result<Arc<ContinuedFraction>> {
        if changed {
            self.store(&cf)?;
        }
        let arc = Arc::new(cf);
        self.mem.lock().unwrap().insert(arc.label.clone(), arc.clone());
        Ok(arc)
    }

    /// At least `count` quotients.
    pub fn get(&self, source: &SharedSource, count: usize) -> Result<Arc<ContinuedFraction>> {
        match self.lookup(source) {
            Some(cf) if cf.len() >= count => self.remember(cf, false),
            _ => self.remember(cf_expand(source.clone(), count, &self.policy)?, true),
        }
    }

    /// Enough quotients to pass denominator `bound` and then `extra` more.
    pub fn get_beyond(&self, source: &SharedSource, bound: &BigInt, extra: usize) -> Result<Arc<ContinuedFraction>> {
        let mut cf = match self.lookup(source) {
            Some(cf) => cf,
            None => cf_expand(source.clone(), estimate_terms(bound) + extra, &self.policy)?,
        };
        let before = cf.len();
        cf.extend_beyond_denominator(bound, extra)?;
        let changed = cf.len() != before || self.mem.lock().unwrap().get(&cf.label).is_none();
        self.remember(cf, changed)
    }
}
