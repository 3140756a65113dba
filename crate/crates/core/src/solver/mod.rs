//! Damped Newton, Zarantonello reference iteration and the inner CG solver.

mod cg;
mod newton;
mod tail;
mod zarantonello;

pub use cg::{solve_cg, CgConfig, CgOutcome};
pub use newton::{newton_solve, IterationRecord, RESIDUAL_NOISE_FACTOR, NewtonConfig, NewtonReport, Termination, TheoryConstants};
pub use tail::{quadratic_tail_diagnostic, TailSummary, TAIL_NOISE_FLOOR, TAIL_STABILITY_FACTOR};
pub use zarantonello::{zarantonello_contraction, zarantonello_solve};
