//! Generic optimizers shared by every coding scheme.

mod quasi_newton;
mod sebo;

pub use quasi_newton::{bfgs_ascent, quasi_newton_maximize, QnOutcome, QnRun, QuasiNewtonConfig};
pub use sebo::{block_ranges, bits_to_string, sebo_maximize, SeboConfig, SeboOutcome};
