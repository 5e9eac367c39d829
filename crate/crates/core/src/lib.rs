//! Numerical laboratory for the long-wave unstable thin film equation
//!
//! ```text
//! h_t = -a0 (h^n h_xxx)_x - a1 (h^m h_x)_x     on (-a, a), periodic
//! ```
//!
//! The fourth-order term stabilizes short waves, the second-order term
//! destabilizes long ones. The crate integrates the eps/delta-regularized
//! problem with an implicit conservative scheme and turns the known a priori
//! machinery for this equation family into runtime diagnostics:
//!
//! * [`model`] — parameters, sub/super-critical regime classification,
//!   theorem-region flags, and the linear dispersion relation;
//! * [`field`] — periodic grid fields and difference operators;
//! * [`functionals`] — entropies, energies, regularized mobilities, and
//!   weighted time accumulators;
//! * [`solver`] — lifting of initial data, backward-Euler stepping with a
//!   cyclic pentadiagonal solve, segment runs, global continuation, and the
//!   blow-up continuation loop;
//! * [`analysis`] — interpolation constants, local existence-time estimates,
//!   the nonlinear Gronwall (Bihari) bound, exponential-weighted inequality
//!   checks, the second-moment blow-up certificate, support tracking with
//!   spreading-exponent fits, localized integrals, and the Stampacchia
//!   system evaluator.

// Validation sites use `!(x > 0.0)` so that NaN inputs fail the check too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod field;
pub mod functionals;
pub mod linsolve;
pub mod model;
pub mod rational;
pub mod solver;

pub use field::Field;
pub use model::{ProblemParams, Regime, RegimeReport};
pub use solver::{RunLedger, RunState, SolverConfig};
