//! Certified real arithmetic and the transcendental constants of the problem.

mod certified;
pub mod elementary;
mod root;
mod source;

pub use certified::{big, CertifiedReal};
pub use elementary::ln2;
pub use root::{dd_error, dd_errors, dominant_root, fk, psi_k, zeta_expansion, zeta_within_bound, DominantRoot};
pub use source::{CachedSource, FnSource, RealSource, SharedSource};

#[allow(unused_imports)]
pub(crate) use certified::{ceil_shr, floor_shr};

use serde::{Deserialize, Serialize};

/// Working-precision ladder: start at `start_bits`, double on undecided
/// comparisons, give up past `max_bits`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrecisionPolicy {
    pub start_bits: u32,
    pub max_bits: u32,
}

impl Default for PrecisionPolicy {
    fn default() -> Self {
        PrecisionPolicy { start_bits: 512, max_bits: 65536 }
    }
}

impl PrecisionPolicy {
    pub fn new(start_bits: u32, max_bits: u32) -> Self {
        PrecisionPolicy { start_bits: start_bits.max(32), max_bits: max_bits.max(start_bits) }
    }

    /// Successive precisions, each double the previous, starting at
    /// `max(start_bits, floor)` and never exceeding `max_bits`.
    pub fn ladder(&self, floor: u32) -> impl Iterator<Item = u32> {
        let max = self.max_bits;
        let first = self.start_bits.max(floor);
        std::iter::successors(Some(first).filter(|&f| f <= max), move |&p| p.checked_mul(2).filter(|&q| q <= max))
    }
}

/// `ln 10` at `p` fractional bits.
pub fn ln10(p: u32) -> CertifiedReal {
    CertifiedReal::exact_int(10, p).ln().expect("positive")
}

/// `log 10 / log 2`.
pub fn log2_of_10(p: u32) -> CertifiedReal {
    let w = p + 16;
    ln10(w).checked_div(&ln2(w)).expect("ln 2 > 0").to_precision(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder_doubles_until_cap() {
        let pol = PrecisionPolicy::new(512, 4096);
        let v: Vec<u32> = pol.ladder(0).collect();
        assert_eq!(v, vec![512, 1024, 2048, 4096]);
        let v: Vec<u32> = pol.ladder(3000).collect();
        assert_eq!(v, vec![3000]);
        assert_eq!(pol.ladder(5000).count(), 0);
    }

    #[test]
    fn theta_value() {
        let t = log2_of_10(128);
        assert!((t.midpoint_f64() - 10f64.log2()).abs() < 1e-15);
    }
}
