use std::fmt;
use std::sync::{Arc, Mutex};

use super::CertifiedReal;
use crate::error::Result;

/// A real number that can be enclosed to any requested precision.
pub trait RealSource: Send + Sync {
    /// Stable description, used as a cache key.
    fn label(&self) -> String;

    /// Enclosure whose width is roughly `2^-prec` (a few ulps of slack is fine).
    fn eval(&self, prec: u32) -> Result<CertifiedReal>;
}

pub type SharedSource = Arc<dyn RealSource>;

/// A [`RealSource`] backed by a closure.
pub struct FnSource<F> {
    label: String,
    f: F,
}

impl<F> FnSource<F>
where
    F: Fn(u32) -> Result<CertifiedReal> + Send + Sync + 'static,
{
    pub fn new(label: impl Into<String>, f: F) -> Self {
        FnSource { label: label.into(), f }
    }

    pub fn shared(label: impl Into<String>, f: F) -> SharedSource {
        Arc::new(Self::new(label, f))
    }
}

impl<F> RealSource for FnSource<F>
where
    F: Fn(u32) -> Result<CertifiedReal> + Send + Sync,
{
    fn label(&self) -> String {
        self.label.clone()
    }

    fn eval(&self, prec: u32) -> Result<CertifiedReal> {
        (self.f)(prec)
    }
}

impl<F> fmt::Debug for FnSource<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FnSource({})", self.label)
    }
}

/// Memoizes the highest-precision enclosure computed so far.
pub struct CachedSource {
    inner: SharedSource,
    best: Mutex<Option<CertifiedReal>>,
}

impl CachedSource {
    pub fn new(inner: SharedSource) -> Self {
        CachedSource { inner, best: Mutex::new(None) }
    }

    pub fn shared(inner: SharedSource) -> SharedSource {
        Arc::new(Self::new(inner))
    }
}

impl RealSource for CachedSource {
    fn label(&self) -> String {
        self.inner.label()
    }

    fn eval(&self, prec: u32) -> Result<CertifiedReal> {
        if let Some(v) = self.best.lock().unwrap().as_ref() {
            if v.precision() >= prec {
                return Ok(v.to_precision(prec));
            }
        }
        let v = self.inner.eval(prec)?;
        let mut slot = self.best.lock().unwrap();
        if slot.as_ref().is_none_or(|b| b.precision() < v.precision()) {
            *slot = Some(v.clone());
        }
        Ok(v)
    }
}
