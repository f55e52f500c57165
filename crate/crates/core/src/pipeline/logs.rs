use std::collections::HashMap;
use std::sync::Mutex;

use num_bigint::BigInt;

use crate::realnum::{ln10, CachedSource, CertifiedReal, FnSource, SharedSource};
use crate::reduction::block_value;

/// Shared logarithms: `log 10`, `log d` for digits and `log N` for the block
/// values `N = d1 10^m - (d1 - d2)`, each memoized at the best precision seen.
pub struct LogTable {
    ln10: SharedSource,
    digits: Vec<SharedSource>,
    blocks: Mutex<HashMap<(u32, u8, u8), SharedSource>>,
}

impl Default for LogTable {
    fn default() -> Self {
        Self::new()
    }
}

impl LogTable {
    pub fn new() -> Self {
        let ln10 = CachedSource::shared(FnSource::shared("log(10)", |p| Ok(ln10(p))));
        let digits = (1..=9i64)
            .map(|d| {
                CachedSource::shared(FnSource::shared(format!("log({d})"), move |p| {
                    CertifiedReal::exact_int(d, p).ln()
                }))
            })
            .collect();
        LogTable { ln10, digits, blocks: Mutex::new(HashMap::new()) }
    }

    pub fn ln10(&self) -> SharedSource {
        self.ln10.clone()
    }

    /// `log d` for `d` in `1..=9`.
    pub fn ln_digit(&self, d: u8) -> SharedSource {
        assert!((1..=9).contains(&d), "digit {d} out of range");
        self.digits[usize::from(d) - 1].clone()
    }

    /// `log(d1 10^m - (d1 - d2))`, split as
    /// `log d1 + m log 10 + log(N / (d1 10^m))` so the series runs on a ratio
    /// close to 1.
    pub fn ln_block(&self, m: u32, d1: u8, d2: u8) -> SharedSource {
        let mut map = self.blocks.lock().unwrap();
        map.entry((m, d1, d2))
            .or_insert_with(|| {
                let ld1 = self.ln_digit(d1);
                let l10 = self.ln10.clone();
                let n = block_value(m, d1, d2);
                let base = BigInt::from(d1) * num_traits::pow(BigInt::from(10), m as usize);
                let label = format!("log({d1}*10^{m}-({d1}-{d2}))");
                CachedSource::shared(FnSource::shared(label, move |p| {
                    let w = p + 16 + (32 - m.leading_zeros());
                    let ratio = CertifiedReal::from_ratio(&n, &base, w)?.ln()?;
                    let sum = &(&ld1.eval(w)? + &l10.eval(w)?.mul_int(&BigInt::from(m))) + &ratio;
                    Ok(sum.to_precision(p))
                }))
            })
            .clone()
    }
}
