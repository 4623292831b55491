//! Certified bounds on normalized gaps between consecutive Riemann zeta zeros.
//!
//! The crate evaluates the sinc-kernel gap functionals h⁺/h⁻ in integral and
//! discrete (prime-power) form, assembles the closed-form chord/tail lower
//! bounds and their optimized constants, handles the large-multiplicity
//! asymptotic regime, and computes normalized gap statistics over ingested
//! tables of zero ordinates.

#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::manual_is_multiple_of)]
#![allow(clippy::needless_range_loop)]

pub mod arithmetic;
pub mod asymptotic;
pub mod bounds;
pub mod hfun;
pub mod numerics;
pub mod zeros;

pub use arithmetic::{CoeffSign, DiscreteParams, SieveTables};
pub use asymptotic::AsympParams;
pub use bounds::{BoundMode, BoundScheme, ThetaResult};
pub use hfun::{BuiltTable, HParams, TableKind, TableRow};
pub use numerics::{Boundary, OptResult, QuadSpec};
pub use zeros::{CountingCheck, GapReport, ZeroTable};
