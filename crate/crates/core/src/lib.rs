//! Solves `F_n^(k) = d1...d1 d2...d2` (a k-generalized Fibonacci number that is
//! the decimal concatenation of two repdigits) and replays every numerical step
//! needed to show that the list of solutions is complete.
//!
//! * [`kfib`]: exact k-Fibonacci generation, two-block recognition, enumeration.
//! * [`realnum`]: certified interval reals, the dominant root of the
//!   characteristic polynomial and the Binet-type approximation error.
//! * [`linforms`]: Matveev lower bounds and the explicit bound chain.
//! * [`reduction`]: continued fractions, Dujella–Pethő reduction and the
//!   Legendre-type lower bound.
//! * [`pipeline`]: orchestration of all stages into a persisted proof ledger.

pub mod error;
pub mod kfib;
pub mod linforms;
pub mod pipeline;
pub mod realnum;
pub mod reduction;

mod dec;
mod par;

pub use error::{Error, Result};
pub use kfib::{
    enumerate_solutions, kfib, solve_small_n, two_block_decompose, KFibWindow, Solution, SolutionFamily,
    TwoBlockDecomposition,
};
pub use realnum::{CertifiedReal, DominantRoot, PrecisionPolicy};
pub use reduction::{ContinuedFraction, ReductionOutcome};
