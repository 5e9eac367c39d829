//! Exponential-weighted a priori inequality checks on recorded runs:
//! int h_x^2 (T) <= e^B1(T) int h0x^2 and
//! int (h_x^2 + G0(h))(T) <= e^B2(T) int (h0x^2 + G0(h0)).

use crate::model::ProblemParams;
use crate::solver::RunLedger;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedRow {
    pub t: f64,
    pub lhs_b1: f64,
    pub rhs_b1: f64,
    pub lhs_b2: f64,
    pub rhs_b2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedBoundsReport {
    pub rows: Vec<WeightedRow>,
    /// Worst additive margin lhs - (1 + tol) rhs over both inequalities.
    pub worst_margin: f64,
    /// Worst multiplicative ratio lhs/rhs (1 when both sides vanish).
    pub worst_ratio: f64,
    pub tol: f64,
    pub pass: bool,
}

pub fn check_exp_weighted_bounds(
    ledger: &RunLedger,
    _p: &ProblemParams,
    tol: f64,
) -> WeightedBoundsReport {
    let mut rows = Vec::with_capacity(ledger.samples.len());
    let mut worst_margin = f64::NEG_INFINITY;
    let mut worst_ratio: f64 = 0.0;
    let (hx0, mix0) = match ledger.samples.first() {
        Some(s) => (s.hx_sq, s.hx_sq + s.entropy),
        None => {
            return WeightedBoundsReport {
                rows,
                worst_margin: 0.0,
                worst_ratio: 1.0,
                tol,
                pass: true,
            }
        }
    };
    for s in &ledger.samples {
        let rhs1 = s.b1.exp() * hx0;
        let lhs1 = s.hx_sq;
        let rhs2 = s.b2.exp() * mix0;
        let lhs2 = s.hx_sq + s.entropy;
        for (lhs, rhs) in [(lhs1, rhs1), (lhs2, rhs2)] {
            worst_margin = worst_margin.max(lhs - (1.0 + tol) * rhs);
            let ratio = if rhs == 0.0 {
                if lhs.abs() == 0.0 {
                    1.0
                } else {
                    f64::INFINITY
                }
            } else {
                lhs / rhs
            };
            worst_ratio = worst_ratio.max(ratio);
        }
        rows.push(WeightedRow { t: s.t, lhs_b1: lhs1, rhs_b1: rhs1, lhs_b2: lhs2, rhs_b2: rhs2 });
    }
    let pass = worst_margin <= 1e-12 * mix0.abs().max(1.0);
    WeightedBoundsReport { rows, worst_margin, worst_ratio, tol, pass }
}
