//! Support tracking: edge detection with sub-cell interpolation, spreading
//! traces with power-law fits, and localized integrals over the exterior
//! regions Omega(s).

use crate::field::Field;
use crate::solver::RunLedger;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SupportSpan {
    /// No node exceeds the threshold.
    Empty,
    /// Outermost interval where h > threshold, edges interpolated.
    Interval { left: f64, right: f64 },
    /// Every node exceeds the threshold (e.g. lifted fields with a
    /// threshold below the lift).
    Full,
}

/// Outermost interval where h > supp_tol with linear sub-cell interpolation
/// of the crossings. Edges clamp to the domain boundary when the first or
/// last node is already above the threshold.
pub fn support_edges(h: &Field, supp_tol: f64) -> SupportSpan {
    let v = h.values();
    let n = v.len();
    let above: Vec<bool> = v.iter().map(|&x| x > supp_tol).collect();
    let count = above.iter().filter(|&&b| b).count();
    if count == 0 {
        return SupportSpan::Empty;
    }
    if count == n {
        return SupportSpan::Full;
    }
    let i_min = above.iter().position(|&b| b).unwrap();
    let i_max = n - 1 - above.iter().rev().position(|&b| b).unwrap();
    let dx = h.dx();
    let left = if i_min == 0 {
        h.x(0)
    } else {
        let (lo, hi) = (v[i_min - 1], v[i_min]);
        h.x(i_min - 1) + dx * (supp_tol - lo) / (hi - lo)
    };
    let right = if i_max == n - 1 {
        h.x(n - 1)
    } else {
        let (hi, lo) = (v[i_max], v[i_max + 1]);
        h.x(i_max) + dx * (hi - supp_tol) / (hi - lo)
    };
    SupportSpan::Interval { left, right }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SupportError {
    #[error("not enough spread for a fit: {have} usable samples, need {need}")]
    InsufficientSpread { have: usize, need: usize },
}

/// Support-radius history. Gamma is the growth of the symmetric envelope
/// radius max(|left|, |right|) over the initial radius, post-processed to a
/// nondecreasing envelope (raw edges jitter by a cell).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportTrace {
    pub times: Vec<f64>,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
    pub gamma: Vec<f64>,
    pub r0: f64,
    pub dx: f64,
}

impl SupportTrace {
    /// Build from a recorded run; `r0` is the support radius of the
    /// unlifted initial data.
    pub fn from_ledger(ledger: &RunLedger, r0: f64, dx: f64) -> Self {
        let mut times = Vec::new();
        let mut left = Vec::new();
        let mut right = Vec::new();
        let mut gamma = Vec::new();
        let mut envelope = 0.0f64;
        for (s, span) in ledger.samples.iter().zip(&ledger.support) {
            if let SupportSpan::Interval { left: l, right: r } = span {
                let radius = l.abs().max(r.abs());
                envelope = envelope.max((radius - r0).max(0.0));
                times.push(s.t);
                left.push(*l);
                right.push(*r);
                gamma.push(envelope);
            }
        }
        SupportTrace { times, left, right, gamma, r0, dx }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpreadingFit {
    pub exponent: f64,
    pub prefactor: f64,
    /// RMS residual of the least-squares line in log-log space.
    pub residual: f64,
    pub samples_used: usize,
}

/// Least-squares slope of log Gamma against log t over the window,
/// using samples with Gamma > 2 dx.
pub fn fit_spreading_exponent(
    trace: &SupportTrace,
    window: (f64, f64),
) -> Result<SpreadingFit, SupportError> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (i, &t) in trace.times.iter().enumerate() {
        if t >= window.0 && t <= window.1 && t > 0.0 && trace.gamma[i] > 2.0 * trace.dx {
            xs.push(t.ln());
            ys.push(trace.gamma[i].ln());
        }
    }
    let need = 10;
    if xs.len() < need {
        return Err(SupportError::InsufficientSpread { have: xs.len(), need });
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(SpreadingFit {
        exponent: slope,
        prefactor: intercept.exp(),
        residual,
        samples_used: xs.len(),
    })
}

/// Localized space-time integrals G_i(s) = int_QT(s) h^xi_i over
/// Omega(s) = Omega \ (-r0-s, r0+s), trapezoid in time, rectangle in space.
/// Tables are nonincreasing in s by set inclusion.
pub fn localized_integrals(
    snapshots: &[(f64, Field)],
    r0: f64,
    s_grid: &[f64],
    exponents: &[f64],
) -> Vec<Vec<f64>> {
    // The domain is the open interval (-a, a); once r0 + s reaches a, the
    // exterior region is empty even though the grid carries the identified
    // endpoint node.
    let a_half = snapshots
        .first()
        .map(|(_, h)| -h.origin())
        .unwrap_or(f64::INFINITY);
    let spatial = |h: &Field, s: f64, xi: f64| -> f64 {
        if r0 + s >= a_half - 1e-14 * a_half.abs() {
            return 0.0;
        }
        h.integral_with_x(|x, v| if x.abs() >= r0 + s { v.powf(xi) } else { 0.0 })
    };
    exponents
        .iter()
        .map(|&xi| {
            s_grid
                .iter()
                .map(|&s| {
                    let mut acc = 0.0;
                    for w in snapshots.windows(2) {
                        let dt = w[1].0 - w[0].0;
                        acc += 0.5 * dt * (spatial(&w[0].1, s, xi) + spatial(&w[1].1, s, xi));
                    }
                    acc
                })
                .collect()
        })
        .collect()
}
