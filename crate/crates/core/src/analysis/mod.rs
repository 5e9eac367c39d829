//! Quantitative apparatus: interpolation constants, existence-time
//! estimates, nonlinear Gronwall bounds, exponential-weighted inequality
//! checks, the second-moment blow-up certificate, support tracking, and the
//! Stampacchia-system evaluator.

pub mod bihari;
pub mod certificate;
pub mod constants;
pub mod stampacchia;
pub mod support;
pub mod weighted;

pub use bihari::{comparison_ode_rk4, BihariBound};
pub use certificate::{
    moment_certificate, BlowupCertificate, CertVerdict, CertificateError, MomentRow,
};
pub use constants::{
    constants_chain, entropy_growth_beta, interpolation_bound, subcritical_bounds,
    tloc_estimate, ConstantsLedger, SubcriticalBounds,
};
pub use stampacchia::{stampacchia_s0, StampacchiaError, StampacchiaSystem};
pub use support::{
    fit_spreading_exponent, localized_integrals, support_edges, SpreadingFit, SupportError,
    SupportSpan, SupportTrace,
};
pub use weighted::{check_exp_weighted_bounds, WeightedBoundsReport, WeightedRow};

/// Default multiplicative slack for continuum-inequality checks on discrete
/// data; quadrature and discretization defects mean the exact inequalities
/// only hold in the limit.
pub const TOL_INEQ: f64 = 0.05;
