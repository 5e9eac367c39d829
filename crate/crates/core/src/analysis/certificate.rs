//! Second-moment blow-up certificate.
//!
//! For 0 < n < 2 and interior support, the weighted moment
//! e^-Btilde(t) int x^2 G~0(h) is bounded by
//! V(0) + int_0^t e^-Btilde (k1 E0(0) + k2 int x^2 h_xx^2) ds
//! with k1 = 2(4-n) and k2 = 3 a0 (n-1)/2. Negative initial energy drives
//! the right side below zero in finite time, so a consistent run must stop
//! existing before the predicted bound.

use crate::model::ProblemParams;
use crate::solver::RunLedger;
use serde::{Deserialize, Serialize};

use super::support::SupportSpan;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CertificateError {
    #[error("second-moment certificate needs 0 < n < 2, got {0}")]
    ExponentOutOfRange(f64),
    #[error("support reached the domain boundary; boundary flux unknown")]
    BoundaryContact,
    #[error("ledger holds no samples")]
    EmptyLedger,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CertVerdict {
    CertifiedConsistent,
    InequalityViolated,
    NoBlowup,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupCertificate {
    /// 2 (4 - n).
    pub k1: f64,
    /// 3 a0 (n - 1) / 2; zero at n = 1.
    pub k2: f64,
    /// Initial energy of the run (its own first sample).
    pub e0: f64,
    /// Initial weighted moment.
    pub v0: f64,
    /// Predicted upper bound on the existence time (n <= 1, E0 < 0).
    pub t_ub: Option<f64>,
    /// Detected singularity time (threshold event), filled by the solver.
    pub t_star: Option<f64>,
    /// Worst additive defect lhs - rhs over the samples.
    pub margin: f64,
    /// Worst defect relative to |rhs|.
    pub rel_margin: f64,
    pub verdict: CertVerdict,
    pub tol: f64,
    pub h1_cap_crossed: bool,
    pub collapsed: bool,
    pub rows: Vec<MomentRow>,
}

/// Evaluate the certificate over a recorded run. The verdict covers
/// consistency of the inequality; detection (t_star) is the caller's.
pub fn moment_certificate(
    ledger: &RunLedger,
    p: &ProblemParams,
    tol: f64,
) -> Result<BlowupCertificate, CertificateError> {
    if !(p.n > 0.0 && p.n < 2.0) {
        return Err(CertificateError::ExponentOutOfRange(p.n));
    }
    let first = ledger.samples.first().ok_or(CertificateError::EmptyLedger)?;
    let guard = 2.0 * p.dx();
    for span in &ledger.support {
        match span {
            SupportSpan::Full => return Err(CertificateError::BoundaryContact),
            SupportSpan::Interval { left, right } => {
                if *left <= -p.a + guard || *right >= p.a - guard {
                    return Err(CertificateError::BoundaryContact);
                }
            }
            SupportSpan::Empty => {}
        }
    }

    let k1 = 2.0 * (4.0 - p.n);
    let k2 = 3.0 * p.a0 * (p.n - 1.0) / 2.0;
    let e0 = first.energy;
    let v0 = first.moment;

    let mut rows = Vec::with_capacity(ledger.samples.len());
    let mut margin = f64::NEG_INFINITY;
    let mut rel_margin = f64::NEG_INFINITY;
    let mut consistent = true;
    for (s, aux) in ledger.samples.iter().zip(&ledger.aux) {
        let lhs = (-s.btilde).exp() * s.moment;
        let rhs = v0 + k1 * e0 * aux.int_exp_mbtilde + k2 * aux.int_exp_mbtilde_x2hxx;
        let m = lhs - rhs;
        let scale = rhs.abs().max(1e-12 * v0.abs().max(1.0));
        margin = margin.max(m);
        rel_margin = rel_margin.max(m / scale);
        if m > tol * scale {
            consistent = false;
        }
        rows.push(MomentRow { t: s.t, lhs, rhs, margin: m });
    }

    let t_ub = if e0 < 0.0 && p.n <= 1.0 {
        let target = v0 / (k1 * (-e0));
        if p.n == 1.0 {
            // Btilde vanishes identically: the weight integral is t itself.
            Some(target)
        } else {
            root_of_weight_integral(ledger, target)
        }
    } else {
        None
    };

    Ok(BlowupCertificate {
        k1,
        k2,
        e0,
        v0,
        t_ub,
        t_star: None,
        margin,
        rel_margin,
        verdict: if consistent {
            CertVerdict::CertifiedConsistent
        } else {
            CertVerdict::InequalityViolated
        },
        tol,
        h1_cap_crossed: false,
        collapsed: false,
        rows,
    })
}

/// Solve int_0^t e^-Btilde ds = target on the recorded accumulator; linear
/// interpolation inside the run, continuation with the final weight past its
/// end (the weight is nonincreasing, so this under-predicts the root).
fn root_of_weight_integral(ledger: &RunLedger, target: f64) -> Option<f64> {
    let mut prev_t = 0.0;
    let mut prev_g = 0.0;
    for (s, aux) in ledger.samples.iter().zip(&ledger.aux) {
        let g = aux.int_exp_mbtilde;
        if g >= target {
            if g == prev_g {
                return Some(s.t);
            }
            let w = (target - prev_g) / (g - prev_g);
            return Some(prev_t + w * (s.t - prev_t));
        }
        prev_t = s.t;
        prev_g = g;
    }
    let last = ledger.samples.last()?;
    let weight = (-last.btilde).exp();
    if weight <= 0.0 {
        return None;
    }
    Some(prev_t + (target - prev_g) / weight)
}
