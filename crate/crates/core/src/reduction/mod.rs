//! Continued fractions, the Dujella–Pethő reduction and the Legendre-type
//! lower bound.

mod cf;
mod dp;

pub use cf::{certified_prefix, cf_expand, first_convergent_beyond, CfCache, ContinuedFraction};
pub use dp::{
    block_value, degenerate_mu, dujella_petho, dujella_petho_walk, legendre_exponent_bound, legendre_lower,
    DegenerateMu, LegendreBound, ReductionInstance, ReductionOutcome, ReductionReport, EXTRA_CONVERGENTS,
};

use crate::realnum::{log2_of_10, CertifiedReal, FnSource, SharedSource};

/// `theta = log 10 / log 2`.
pub fn theta_source() -> SharedSource {
    FnSource::shared("log(10)/log(2)", |p| Ok(log2_of_10(p)))
}

/// An exact integer as a source.
pub fn int_source(n: i64) -> SharedSource {
    FnSource::shared(n.to_string(), move |p| Ok(CertifiedReal::exact_int(n, p)))
}
