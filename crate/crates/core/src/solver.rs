//! Time integration of the regularized problem on the periodic grid.
//!
//! The equation is advanced by backward Euler in conservative flux form:
//! face fluxes F_{i+1/2} = f_de(h) (a0 Dxxx h + a1 D''_e(h) Dx h) with
//! harmonic-mean mobilities at faces (they degenerate when either side
//! dries, keeping the flow positive at contact lines), and nodal updates by
//! the flux divergence. Mobilities are frozen at the previous state (lagged
//! mode, default) or resolved by Newton iteration. The linear systems are
//! cyclic pentadiagonal.

use crate::analysis::support::{support_edges, SupportSpan};
use crate::analysis::{
    constants_chain, moment_certificate, tloc_estimate, BlowupCertificate, CertificateError,
};
use crate::field::{neumaier_sum, Field};
use crate::functionals::{
    btilde_coefficient, energy, entropy_value, mobility, mobility_deriv, pressure_coupling,
    pressure_coupling_deriv, second_moment_entropy, EntropySpec, FunctionalError,
    FunctionalSample, RegularizedPotential,
};
use crate::linsolve::{CyclicPenta, LinSolveError};
use crate::model::{classify_regime, critical_mass, theorem_applicability, ModelError, ProblemParams, Regime, DEFAULT_EPS_INTERP};
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};

#[derive(Debug, thiserror::Error)]
pub enum SolverError {
    #[error("initial data has zero mass")]
    EmptyData,
    #[error("initial data must be strictly positive for a regularized run: {0}")]
    NotPositive(String),
    #[error("regime precondition failed: {0}")]
    Region(String),
    #[error("initial energy must be negative for the blow-up loop, got {e0}")]
    NotNegativeEnergy { e0: f64 },
    #[error("support too close to the domain boundary at t = {t}")]
    DomainTooSmall { t: f64 },
    #[error("no blow-up within the horizon (reached t = {t_reached})")]
    NoBlowupWithinHorizon { t_reached: f64, ledger: Box<RunLedger> },
    #[error("invalid solver configuration: {0}")]
    BadConfig(String),
    #[error(transparent)]
    LinearSolve(#[from] LinSolveError),
    #[error(transparent)]
    Functional(#[from] FunctionalError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Certificate(#[from] CertificateError),
    #[error("snapshot io: {0}")]
    SnapshotIo(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StepperKind {
    /// Mobilities frozen at the previous time level; one linear solve.
    Lagged,
    /// Full Newton on the nonlinear backward-Euler residual.
    Newton,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FaceMobility {
    /// Harmonic mean: degenerates when either side dries, which starves the
    /// flux at contact lines and keeps the semidiscrete flow positive.
    Harmonic,
    /// Arithmetic mean: the wet neighbor dominates a dry face, so troughs
    /// can drain through zero at any dt. Kept for comparisons on strictly
    /// positive resolved states.
    Arithmetic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub eps: f64,
    pub delta: f64,
    /// Lift exponent: initial data is raised by eps^theta, 0 < theta < 2/5.
    pub theta: f64,
    pub dt_init: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub t_end: f64,
    pub newton_tol: f64,
    pub newton_max: usize,
    /// Blow-up detection threshold on the squared H1 functional
    /// int (h^2 + h_x^2) dx.
    pub h1_cap: f64,
    /// Support detection threshold; 0 selects 10 eps^theta.
    pub supp_tol: f64,
    /// Exponent of the alpha-entropy recorded in the ledger.
    pub alpha: f64,
    /// Record one ledger row every this many accepted steps.
    pub sample_every: usize,
    pub stepper: StepperKind,
    pub face_mobility: FaceMobility,
    pub smooth_initial: bool,
    /// Skip the region/energy guards of the blow-up loop.
    pub force_blowup_preconditions: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            eps: 1e-6,
            delta: 0.0,
            theta: 0.3,
            dt_init: 1e-6,
            dt_min: 1e-14,
            dt_max: f64::INFINITY,
            t_end: 1.0,
            newton_tol: 1e-9,
            newton_max: 12,
            h1_cap: 1e12,
            supp_tol: 0.0,
            alpha: 0.5,
            sample_every: 8,
            stepper: StepperKind::Lagged,
            face_mobility: FaceMobility::Harmonic,
            smooth_initial: false,
            force_blowup_preconditions: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |msg: String| Err(SolverError::BadConfig(msg));
        if !(self.eps > 0.0) {
            return bad(format!("eps must be > 0, got {}", self.eps));
        }
        if !(self.delta >= 0.0) {
            return bad(format!("delta must be >= 0, got {}", self.delta));
        }
        if !(self.theta > 0.0 && self.theta < 0.4) {
            return bad(format!("theta must lie in (0, 2/5), got {}", self.theta));
        }
        if !(self.dt_min > 0.0 && self.dt_min < self.dt_init) {
            return bad(format!(
                "need 0 < dt_min < dt_init, got {} and {}",
                self.dt_min, self.dt_init
            ));
        }
        if !(self.newton_tol > 0.0) || self.newton_max == 0 {
            return bad("newton tolerance/iterations must be positive".into());
        }
        if !(self.h1_cap > 0.0) || !(self.t_end >= 0.0) {
            return bad("h1_cap and t_end must be positive".into());
        }
        if self.alpha != 0.0 && !(self.alpha > -0.5 && self.alpha < 1.0) {
            return bad(format!("alpha must be 0 or in (-1/2, 1), got {}", self.alpha));
        }
        if self.sample_every == 0 {
            return bad("sample_every must be >= 1".into());
        }
        Ok(())
    }

    pub fn lift_height(&self) -> f64 {
        self.eps.powf(self.theta)
    }

    pub fn effective_supp_tol(&self) -> f64 {
        if self.supp_tol > 0.0 {
            self.supp_tol
        } else {
            10.0 * self.lift_height()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RejectCause {
    Positivity,
    Residual,
    NonFinite,
    LinearSolve,
    NewtonStall,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RunEvent {
    SmoothingApplied,
    Rejected { t: f64, dt: f64, cause: RejectCause },
    DtGrew { t: f64, dt: f64 },
    SegmentScheduled { t: f64, t_loc: f64 },
    StepCollapse { t: f64 },
    H1CapCrossed { t: f64, h1_sq: f64 },
}

/// Per-sample diagnostics beyond the main functional row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuxSample {
    /// int x^2 h_xx^2 dx.
    pub x2_hxx_sq: f64,
    /// int_0^t exp(-Btilde(s)) ds.
    pub int_exp_mbtilde: f64,
    /// int_0^t exp(-Btilde(s)) int x^2 h_xx^2 dx ds.
    pub int_exp_mbtilde_x2hxx: f64,
    /// Energy with the regularized potential.
    pub energy_eps: f64,
    /// Accumulated dissipation integral of f (a0 h_xxx + a1 D'' h_x)^2.
    pub dissipation: f64,
    /// Squared H1 functional int (h^2 + h_x^2).
    pub h1_sq: f64,
    pub dt: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RunLedger {
    pub samples: Vec<FunctionalSample>,
    pub support: Vec<SupportSpan>,
    pub aux: Vec<AuxSample>,
    pub events: Vec<RunEvent>,
    pub collapsed: bool,
}

impl RunLedger {
    pub fn mass_drift(&self) -> f64 {
        let m0 = match self.samples.first() {
            Some(s) => s.mass,
            None => return 0.0,
        };
        self.samples
            .iter()
            .map(|s| (s.mass - m0).abs() / m0.abs().max(1e-300))
            .fold(0.0, f64::max)
    }

    pub fn final_time(&self) -> f64 {
        self.samples.last().map(|s| s.t).unwrap_or(0.0)
    }
}

#[derive(Debug, Clone)]
struct Accumulators {
    sup_lo_int: f64,
    sup_hi_int: f64,
    exp_mbt_int: f64,
    exp_mbt_x2hxx_int: f64,
    dissipation: f64,
    last_sup_lo: f64,
    last_sup_hi: f64,
    last_x2hxx: f64,
    btilde_coef: f64,
    max_mass_defect: f64,
}

/// Integration state; survives across chained segments so that the weighted
/// time accumulators stay exact.
#[derive(Debug, Clone)]
pub struct RunState {
    pub h: Field,
    pub t: f64,
    pub dt: f64,
    pub step_count: u64,
    accepts_in_row: u32,
    acc: Accumulators,
    pot: Option<(f64, RegularizedPotential)>,
    plain_spec: Option<EntropySpec>,
    alpha_spec: Option<EntropySpec>,
}

impl RunState {
    pub fn new(h: Field, t0: f64, p: &ProblemParams, cfg: &SolverConfig) -> Self {
        let sup = h.max();
        let acc = Accumulators {
            sup_lo_int: 0.0,
            sup_hi_int: 0.0,
            exp_mbt_int: 0.0,
            exp_mbt_x2hxx_int: 0.0,
            dissipation: 0.0,
            last_sup_lo: sup.powf(2.0 * p.m - p.n),
            last_sup_hi: sup.powf(4.0 * p.m - p.n),
            last_x2hxx: h.x2_hxx_sq(),
            btilde_coef: btilde_coefficient(p),
            max_mass_defect: 0.0,
        };
        RunState {
            h,
            t: t0,
            dt: cfg.dt_init,
            step_count: 0,
            accepts_in_row: 0,
            acc,
            pot: None,
            plain_spec: EntropySpec::plain(p.n, 0.0).ok(),
            alpha_spec: if cfg.alpha == 0.0 {
                None
            } else {
                EntropySpec::new(p.n, cfg.alpha, 0.0).ok()
            },
        }
    }

    pub fn btilde(&self) -> f64 {
        self.acc.btilde_coef * self.acc.sup_lo_int
    }

    pub fn max_mass_defect(&self) -> f64 {
        self.acc.max_mass_defect
    }

    fn energy_eps(&mut self, p: &ProblemParams, eps: f64) -> Result<f64, FunctionalError> {
        let grad = 0.5 * p.a0 * self.h.hx_sq();
        if p.a1 == 0.0 {
            return Ok(grad);
        }
        let hmax = self.h.max();
        let need_rebuild = match &self.pot {
            Some((zmax, _)) => hmax > 0.9 * zmax,
            None => true,
        };
        if need_rebuild {
            let zmax = 4.0 * hmax + 2.0;
            self.pot = Some((zmax, RegularizedPotential::build(p, eps, zmax)?));
        }
        let pot = &self.pot.as_ref().unwrap().1;
        Ok(grad - p.a1 * self.h.integral_of(|v| pot.value(v)))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct StepReport {
    pub accepted: bool,
    pub dt_used: f64,
    pub newton_iters: usize,
    pub residual: f64,
    pub min_h: f64,
    pub cause: Option<RejectCause>,
}

/// Raise nonnegative initial data by eps^theta (after an optional spectral
/// low-pass when the data has kinks). Returns the lifted field and whether
/// smoothing ran.
pub fn lift_initial_data(h0: &Field, cfg: &SolverConfig) -> Result<(Field, bool), SolverError> {
    if !(h0.mass() > 0.0) {
        return Err(SolverError::EmptyData);
    }
    if h0.min() < 0.0 {
        return Err(SolverError::NotPositive("negative initial data".into()));
    }
    let mut h = h0.clone();
    let mut smoothed = false;
    if cfg.smooth_initial {
        h.low_pass(h.len() / 3);
        for v in h.values_mut() {
            *v = v.max(0.0);
        }
        smoothed = true;
    }
    let lift = cfg.lift_height();
    for v in h.values_mut() {
        *v += lift;
    }
    Ok((h, smoothed))
}

struct FaceCoeffs {
    /// Face mobility (f at the two adjacent nodes, arithmetic mean) + delta.
    fp: Vec<f64>,
    /// Face pressure coupling, arithmetic mean.
    dp: Vec<f64>,
}

fn face_coeffs(h: &Field, p: &ProblemParams, cfg: &SolverConfig) -> Result<FaceCoeffs, SolverError> {
    let n = h.len();
    let v = h.values();
    let mut fnode = Vec::with_capacity(n);
    let mut dnode = Vec::with_capacity(n);
    for &z in v {
        fnode.push(mobility(z, p.n, cfg.eps, cfg.delta)?);
        dnode.push(pressure_coupling(z, p.n, p.m, cfg.eps)?);
    }
    let mut fp = Vec::with_capacity(n);
    let mut dp = Vec::with_capacity(n);
    for i in 0..n {
        let j = (i + 1) % n;
        let face = match cfg.face_mobility {
            FaceMobility::Arithmetic => 0.5 * (fnode[i] + fnode[j]),
            FaceMobility::Harmonic => {
                let s = fnode[i] + fnode[j];
                if s > 0.0 {
                    2.0 * fnode[i] * fnode[j] / s
                } else {
                    0.0
                }
            }
        };
        fp.push(face);
        dp.push(0.5 * (dnode[i] + dnode[j]));
    }
    Ok(FaceCoeffs { fp, dp })
}

/// Face fluxes F_{i+1/2} for the given coefficients and field.
fn fluxes(h: &[f64], faces: &FaceCoeffs, p: &ProblemParams, dx: f64) -> Vec<f64> {
    let n = h.len();
    let dx3 = dx * dx * dx;
    (0..n)
        .map(|i| {
            let im1 = (i + n - 1) % n;
            let ip1 = (i + 1) % n;
            let ip2 = (i + 2) % n;
            let d3 = ((h[ip2] - h[im1]) - 3.0 * (h[ip1] - h[i])) / dx3;
            let d1 = (h[ip1] - h[i]) / dx;
            faces.fp[i] * (p.a0 * d3 + p.a1 * faces.dp[i] * d1)
        })
        .collect()
}

/// Assemble I + dt * div F with mobilities frozen at `faces`.
fn assemble(faces: &FaceCoeffs, p: &ProblemParams, dt: f64, dx: f64, n: usize) -> CyclicPenta {
    let mut m = CyclicPenta::zeros(n);
    let ca = dt * p.a0 / (dx * dx * dx * dx);
    let cb = dt * p.a1 / (dx * dx);
    for i in 0..n {
        let im1 = (i + n - 1) % n;
        let ai = ca * faces.fp[i];
        let aim1 = ca * faces.fp[im1];
        let bi = cb * faces.fp[i] * faces.dp[i];
        let bim1 = cb * faces.fp[im1] * faces.dp[im1];
        m.l2[i] = aim1;
        m.l1[i] = -ai - 3.0 * aim1 + bim1;
        m.d0[i] = 1.0 + 3.0 * ai + 3.0 * aim1 - bi - bim1;
        m.u1[i] = -3.0 * ai - aim1 + bi;
        m.u2[i] = ai;
    }
    m
}

fn matrix_scale(m: &CyclicPenta) -> f64 {
    (0..m.len())
        .map(|i| {
            m.l2[i].abs() + m.l1[i].abs() + m.d0[i].abs() + m.u1[i].abs() + m.u2[i].abs()
        })
        .fold(0.0, f64::max)
}

/// One backward-Euler attempt at the given dt. On acceptance the state is
/// advanced and the running accumulators updated; a rejection leaves the
/// state untouched (the caller controls the dt policy).
pub fn implicit_step(
    state: &mut RunState,
    p: &ProblemParams,
    cfg: &SolverConfig,
    dt: f64,
) -> Result<StepReport, SolverError> {
    let reject = |cause: RejectCause, residual: f64, min_h: f64, iters: usize| StepReport {
        accepted: false,
        dt_used: dt,
        newton_iters: iters,
        residual,
        min_h,
        cause: Some(cause),
    };

    let dx = state.h.dx();
    let n = state.h.len();
    let h_old = state.h.values().to_vec();
    let mass_old = neumaier_sum(h_old.iter().cloned());

    let (mut h_new, residual, iters) = match cfg.stepper {
        StepperKind::Lagged => {
            // Solve for the increment: A e = -dt div F(h_old). Constants have
            // exactly zero fluxes and stay bit-exact fixed points, and the
            // solver noise scales with the increment, not the state.
            let faces = face_coeffs(&state.h, p, cfg)?;
            let a = assemble(&faces, p, dt, dx, n);
            let fl = fluxes(&h_old, &faces, p, dx);
            let rhs: Vec<f64> = (0..n)
                .map(|i| {
                    let im1 = (i + n - 1) % n;
                    -dt / dx * (fl[i] - fl[im1])
                })
                .collect();
            match a.solve(&rhs) {
                Ok((e, res)) => {
                    let scale = matrix_scale(&a)
                        * e.iter().cloned().fold(0.0f64, |m, v| m.max(v.abs()))
                        + rhs.iter().cloned().fold(0.0f64, |m, v| m.max(v.abs()));
                    let rel = res / scale.max(1e-300);
                    if rel > cfg.newton_tol {
                        return Ok(reject(RejectCause::Residual, rel, f64::NAN, 1));
                    }
                    let x: Vec<f64> = h_old.iter().zip(&e).map(|(h, d)| h + d).collect();
                    (x, rel, 1)
                }
                Err(LinSolveError::TooSmall(k)) => return Err(LinSolveError::TooSmall(k).into()),
                Err(_) => return Ok(reject(RejectCause::LinearSolve, f64::NAN, f64::NAN, 1)),
            }
        }
        StepperKind::Newton => {
            let mut iterate = h_old.clone();
            let mut iters = 0;
            let scale = h_old.iter().cloned().fold(1.0f64, |m, v| m.max(v.abs()));
            // R_i = h_i - h_old_i + dt/dx (F_{i+1/2} - F_{i-1/2})
            let residual_of = |vals: &[f64]| -> Result<(Vec<f64>, f64), SolverError> {
                let trial = Field::new(vals.to_vec(), dx, state.h.origin());
                let faces = face_coeffs(&trial, p, cfg)?;
                let fl = fluxes(vals, &faces, p, dx);
                let mut resid = vec![0.0; n];
                let mut rmax = 0.0f64;
                for i in 0..n {
                    let im1 = (i + n - 1) % n;
                    let r = vals[i] - h_old[i] + dt / dx * (fl[i] - fl[im1]);
                    resid[i] = r;
                    rmax = rmax.max(r.abs());
                }
                Ok((resid, rmax))
            };
            let (mut resid, mut rmax) = residual_of(&iterate)?;
            loop {
                iters += 1;
                if rmax <= cfg.newton_tol * scale {
                    break (iterate, rmax / scale, iters);
                }
                if iters > cfg.newton_max {
                    return Ok(reject(RejectCause::NewtonStall, rmax, f64::NAN, iters));
                }
                let trial = Field::new(iterate.clone(), dx, state.h.origin());
                let faces = face_coeffs(&trial, p, cfg)?;
                let j = newton_jacobian(&iterate, &faces, p, cfg, dt, dx);
                let rhs: Vec<f64> = resid.iter().map(|r| -r).collect();
                let delta = match j.solve(&rhs) {
                    Ok((v, _)) => v,
                    Err(_) => return Ok(reject(RejectCause::LinearSolve, rmax, f64::NAN, iters)),
                };
                // Backtracking: the degenerate mobilities make full steps
                // overshoot near dry regions.
                let mut lambda = 1.0;
                let mut advanced = false;
                for _ in 0..8 {
                    let candidate: Vec<f64> = iterate
                        .iter()
                        .zip(&delta)
                        .map(|(h, d)| h + lambda * d)
                        .collect();
                    if candidate.iter().all(|v| v.is_finite() && *v > 0.0) {
                        let (r_new, rmax_new) = residual_of(&candidate)?;
                        if rmax_new < rmax {
                            iterate = candidate;
                            resid = r_new;
                            rmax = rmax_new;
                            advanced = true;
                            break;
                        }
                    }
                    lambda *= 0.5;
                }
                if !advanced {
                    return Ok(reject(RejectCause::NewtonStall, rmax, f64::NAN, iters));
                }
            }
        }
    };

    if h_new.iter().any(|v| !v.is_finite()) {
        return Ok(reject(RejectCause::NonFinite, residual, f64::NAN, iters));
    }

    // Project onto the exact mass shell; the solve keeps the defect at the
    // level of the linear residual, the shift removes the accumulation.
    let mass_new = neumaier_sum(h_new.iter().cloned());
    let defect = (mass_new - mass_old) / n as f64;
    for v in h_new.iter_mut() {
        *v -= defect;
    }

    let min_h = h_new.iter().cloned().fold(f64::INFINITY, f64::min);
    if min_h <= 0.0 {
        return Ok(reject(RejectCause::Positivity, residual, min_h, iters));
    }

    let h_new = Field::new(h_new, dx, state.h.origin());
    state.acc.max_mass_defect = state.acc.max_mass_defect.max(defect.abs() * n as f64);
    update_accumulators(state, &h_new, p, cfg, dt)?;
    state.h = h_new;
    state.t += dt;
    state.step_count += 1;
    Ok(StepReport {
        accepted: true,
        dt_used: dt,
        newton_iters: iters,
        residual,
        min_h,
        cause: None,
    })
}

/// Jacobian of the nonlinear backward-Euler residual; pentadiagonal cyclic.
fn newton_jacobian(
    h: &[f64],
    faces: &FaceCoeffs,
    p: &ProblemParams,
    cfg: &SolverConfig,
    dt: f64,
    dx: f64,
) -> CyclicPenta {
    let n = h.len();
    // Linear part: identical structure to the lagged assembly.
    let mut m = assemble(faces, p, dt, dx, n);
    // Mobility sensitivity: d fp_i / dh_j and d dp_i / dh_j for j = i, i+1.
    let dx3 = dx * dx * dx;
    let mut w = vec![0.0; n]; // flux gradient factor per face
    for i in 0..n {
        let im1 = (i + n - 1) % n;
        let ip1 = (i + 1) % n;
        let ip2 = (i + 2) % n;
        let d3 = ((h[ip2] - h[im1]) - 3.0 * (h[ip1] - h[i])) / dx3;
        let d1 = (h[ip1] - h[i]) / dx;
        w[i] = p.a0 * d3 + p.a1 * faces.dp[i] * d1;
    }
    let fprime: Vec<f64> = h.iter().map(|&z| mobility_deriv(z, p.n, cfg.eps)).collect();
    let fnode: Vec<f64> = h
        .iter()
        .map(|&z| mobility(z, p.n, cfg.eps, cfg.delta).unwrap_or(cfg.delta))
        .collect();
    let dprime: Vec<f64> = h
        .iter()
        .map(|&z| pressure_coupling_deriv(z, p.n, p.m, cfg.eps))
        .collect();
    let c = dt / dx;
    for i in 0..n {
        let ip1 = (i + 1) % n;
        let d1 = (h[ip1] - h[i]) / dx;
        // d fp / d f at the two nodes of the face.
        let (wt_lo, wt_hi) = match cfg.face_mobility {
            FaceMobility::Arithmetic => (0.5, 0.5),
            FaceMobility::Harmonic => {
                let s = fnode[i] + fnode[ip1];
                if s > 0.0 {
                    let s2 = s * s;
                    (
                        2.0 * fnode[ip1] * fnode[ip1] / s2,
                        2.0 * fnode[i] * fnode[i] / s2,
                    )
                } else {
                    (0.0, 0.0)
                }
            }
        };
        // dF_{i+1/2}/dh_i and dh_{i+1} from the coefficient dependence.
        let e_lo = wt_lo * fprime[i] * w[i] + faces.fp[i] * p.a1 * 0.5 * dprime[i] * d1;
        let e_hi = wt_hi * fprime[ip1] * w[i] + faces.fp[i] * p.a1 * 0.5 * dprime[ip1] * d1;
        // Row i gains +c * dF_{i+1/2}; row i+1 gains -c * dF_{i+1/2}.
        m.d0[i] += c * e_lo;
        m.u1[i] += c * e_hi;
        m.l1[ip1] -= c * e_lo;
        m.d0[ip1] -= c * e_hi;
    }
    m
}

fn update_accumulators(
    state: &mut RunState,
    h_new: &Field,
    p: &ProblemParams,
    cfg: &SolverConfig,
    dt: f64,
) -> Result<(), SolverError> {
    let sup = h_new.max();
    let lo = sup.powf(2.0 * p.m - p.n);
    let hi = sup.powf(4.0 * p.m - p.n);
    let x2hxx = h_new.x2_hxx_sq();

    let bt_before = state.btilde();
    let acc = &mut state.acc;
    acc.sup_lo_int += 0.5 * dt * (acc.last_sup_lo + lo);
    acc.sup_hi_int += 0.5 * dt * (acc.last_sup_hi + hi);
    let bt_after = acc.btilde_coef * acc.sup_lo_int;
    let (eb, ea) = ((-bt_before).exp(), (-bt_after).exp());
    acc.exp_mbt_int += 0.5 * dt * (eb + ea);
    acc.exp_mbt_x2hxx_int += 0.5 * dt * (eb * acc.last_x2hxx + ea * x2hxx);
    acc.last_sup_lo = lo;
    acc.last_sup_hi = hi;
    acc.last_x2hxx = x2hxx;

    // Dissipation of the energy identity, evaluated at the accepted state.
    let faces = face_coeffs(h_new, p, cfg)?;
    let fl = fluxes(h_new.values(), &faces, p, h_new.dx());
    let mut diss = 0.0;
    for (i, f) in fl.iter().enumerate() {
        // F = fp * (...), so F^2 / fp recovers fp * (...)^2.
        if faces.fp[i] > 0.0 {
            diss += f * f / faces.fp[i];
        }
    }
    state.acc.dissipation += dt * diss * h_new.dx();
    Ok(())
}

fn record_sample(
    state: &mut RunState,
    ledger: &mut RunLedger,
    p: &ProblemParams,
    cfg: &SolverConfig,
) -> Result<(), SolverError> {
    let h = &state.h;
    let plain = match &state.plain_spec {
        Some(s) => s.clone(),
        None => EntropySpec::plain(p.n, 0.0)?,
    };
    let entropy = entropy_value(h, &plain)?;
    let alpha_entropy = match &state.alpha_spec {
        Some(spec) => entropy_value(h, spec)?,
        None => entropy,
    };
    let moment = if p.n < 2.0 {
        second_moment_entropy(h, p.n)?
    } else {
        0.0
    };
    let b1 = p.a1 * p.a1 / p.a0 * state.acc.sup_lo_int;
    let b2 = p.a1.powi(4) / (2.0 * p.a0.powi(3) * (2.0 * p.m - p.n + 1.0).powi(2))
        * state.acc.sup_hi_int
        + p.a1 * p.a1 / (2.0 * p.a0 * (p.m - p.n + 1.0).powi(2)) * state.acc.sup_lo_int;
    let sample = FunctionalSample {
        t: state.t,
        mass: h.mass(),
        energy: energy(h, p)?,
        entropy,
        alpha_entropy,
        hx_sq: h.hx_sq(),
        sup: h.max(),
        moment,
        b1,
        b2,
        btilde: state.btilde(),
    };
    let aux = AuxSample {
        x2_hxx_sq: h.x2_hxx_sq(),
        int_exp_mbtilde: state.acc.exp_mbt_int,
        int_exp_mbtilde_x2hxx: state.acc.exp_mbt_x2hxx_int,
        energy_eps: state.energy_eps(p, cfg.eps)?,
        dissipation: state.acc.dissipation,
        h1_sq: state.h.h1_sq(),
        dt: state.dt,
    };
    ledger.support.push(support_edges(&state.h, cfg.effective_supp_tol()));
    ledger.samples.push(sample);
    ledger.aux.push(aux);
    Ok(())
}

enum Monitor<'a> {
    None,
    Blowup {
        h1_cap: f64,
        crossed: &'a mut bool,
        boundary_guard: bool,
        supp_tol: f64,
    },
}

/// Arrival test shared by the stepping loop and the segment schedulers, so
/// a run landing a few ulps shy of its target cannot spin.
fn reached(t: f64, target: f64) -> bool {
    t >= target - 1e-12 * target.abs().max(1.0)
}

/// Advance `state` to `t1`, appending to `ledger`. Returns false when the
/// run collapsed (dt < dt_min) or a monitor tripped.
fn advance(
    state: &mut RunState,
    ledger: &mut RunLedger,
    p: &ProblemParams,
    cfg: &SolverConfig,
    t1: f64,
    monitor: &mut Monitor,
) -> Result<bool, SolverError> {
    if ledger.samples.is_empty() {
        record_sample(state, ledger, p, cfg)?;
    }
    let mut since_sample = 0usize;
    while !reached(state.t, t1) {
        let dt_try = state.dt.min(t1 - state.t);
        let report = implicit_step(state, p, cfg, dt_try)?;
        if report.accepted {
            state.accepts_in_row += 1;
            since_sample += 1;
            if state.accepts_in_row >= 5 && state.dt < cfg.dt_max {
                state.dt = (state.dt * 1.2).min(cfg.dt_max);
                state.accepts_in_row = 0;
                ledger.events.push(RunEvent::DtGrew { t: state.t, dt: state.dt });
            }
            if since_sample >= cfg.sample_every {
                record_sample(state, ledger, p, cfg)?;
                since_sample = 0;
            }
            if let Monitor::Blowup { h1_cap, crossed, boundary_guard, supp_tol } = monitor {
                let h1 = state.h.h1_sq();
                if h1 > *h1_cap {
                    ledger.events.push(RunEvent::H1CapCrossed { t: state.t, h1_sq: h1 });
                    **crossed = true;
                    if since_sample > 0 {
                        record_sample(state, ledger, p, cfg)?;
                    }
                    return Ok(false);
                }
                if *boundary_guard {
                    let span = support_edges(&state.h, *supp_tol);
                    let margin = 2.0 * state.h.dx();
                    let touches = match span {
                        SupportSpan::Full => true,
                        SupportSpan::Interval { left, right } => {
                            left <= -p.a + margin || right >= p.a - margin
                        }
                        SupportSpan::Empty => false,
                    };
                    if touches {
                        if since_sample > 0 {
                            record_sample(state, ledger, p, cfg)?;
                        }
                        return Err(SolverError::DomainTooSmall { t: state.t });
                    }
                }
            }
        } else {
            ledger.events.push(RunEvent::Rejected {
                t: state.t,
                dt: dt_try,
                cause: report.cause.unwrap_or(RejectCause::Residual),
            });
            state.accepts_in_row = 0;
            state.dt *= 0.5;
            if state.dt < cfg.dt_min {
                ledger.events.push(RunEvent::StepCollapse { t: state.t });
                ledger.collapsed = true;
                if since_sample > 0 {
                    record_sample(state, ledger, p, cfg)?;
                }
                return Ok(false);
            }
        }
    }
    if since_sample > 0 || ledger.samples.is_empty() {
        record_sample(state, ledger, p, cfg)?;
    }
    Ok(true)
}

/// Integrate positive initial data over a time span, recording the ledger.
/// A dt collapse terminates the run and is recorded, not raised.
pub fn run_segment(
    h0: &Field,
    p: &ProblemParams,
    cfg: &SolverConfig,
    t_span: (f64, f64),
) -> Result<(RunState, RunLedger), SolverError> {
    cfg.validate()?;
    if h0.min() <= 0.0 {
        return Err(SolverError::NotPositive(format!("min h0 = {}", h0.min())));
    }
    let mut state = RunState::new(h0.clone(), t_span.0, p, cfg);
    let mut ledger = RunLedger::default();
    advance(&mut state, &mut ledger, p, cfg, t_span.1, &mut Monitor::None)?;
    Ok((state, ledger))
}

/// Resume an existing run up to `t1`, appending to its ledger; the weighted
/// accumulators carry across calls. Returns false on a dt collapse.
pub fn continue_segment(
    state: &mut RunState,
    ledger: &mut RunLedger,
    p: &ProblemParams,
    cfg: &SolverConfig,
    t1: f64,
) -> Result<bool, SolverError> {
    advance(state, ledger, p, cfg, t1, &mut Monitor::None)
}

/// Iterate local-existence segments until `t_goal`, re-estimating the
/// segment length from the current state. Requires the subcritical regime or
/// the critical one below the critical mass.
pub fn continue_global(
    h0: &Field,
    p: &ProblemParams,
    cfg: &SolverConfig,
    t_goal: f64,
) -> Result<RunLedger, SolverError> {
    continue_global_state(h0, p, cfg, t_goal).map(|(_, ledger)| ledger)
}

/// As [`continue_global`], additionally handing back the final state.
pub fn continue_global_state(
    h0: &Field,
    p: &ProblemParams,
    cfg: &SolverConfig,
    t_goal: f64,
) -> Result<(RunState, RunLedger), SolverError> {
    cfg.validate()?;
    let regime = classify_regime(p);
    match regime {
        Regime::Subcritical => {}
        Regime::Critical => {
            let mc = critical_mass(p, DEFAULT_EPS_INTERP)?;
            let m = h0.mass();
            if m >= mc {
                return Err(SolverError::Region(format!(
                    "critical regime needs mass < {mc}, got {m}"
                )));
            }
        }
        Regime::Supercritical => {
            return Err(SolverError::Region(
                "global continuation needs m < n + 2 (or critical with small mass)".into(),
            ));
        }
    }
    let (lifted, smoothed) = lift_initial_data(h0, cfg)?;
    let mut state = RunState::new(lifted, 0.0, p, cfg);
    let mut ledger = RunLedger::default();
    if smoothed {
        ledger.events.push(RunEvent::SmoothingApplied);
    }
    if t_goal <= 0.0 {
        record_sample(&mut state, &mut ledger, p, cfg)?;
        return Ok((state, ledger));
    }
    let mass = state.h.mass();
    let plain = EntropySpec::plain(p.n, 0.0)?;
    // The schedule follows the printed estimate; the floor keeps runs with
    // absurdly conservative constants from degenerating into millions of
    // zero-length segments (the estimate is still recorded per segment).
    let seg_floor = t_goal / 4096.0;
    while !reached(state.t, t_goal) {
        let entropy_now = entropy_value(&state.h, &plain)?;
        let hx_now = state.h.hx_sq();
        let constants = constants_chain(p, cfg, mass, entropy_now, hx_now);
        let t_loc = tloc_estimate(&constants, &state.h, p)?;
        ledger.events.push(RunEvent::SegmentScheduled { t: state.t, t_loc });
        let t1 = (state.t + t_loc.max(seg_floor)).min(t_goal);
        if !advance(&mut state, &mut ledger, p, cfg, t1, &mut Monitor::None)? {
            break;
        }
    }
    Ok((state, ledger))
}

/// Blow-up continuation loop: run segments until the squared H1 functional
/// crosses `h1_cap` or the time step collapses, then certify the run against
/// the second-moment inequality.
pub fn continue_to_blowup(
    h0: &Field,
    p: &ProblemParams,
    cfg: &SolverConfig,
) -> Result<(RunLedger, BlowupCertificate), SolverError> {
    cfg.validate()?;
    if !cfg.force_blowup_preconditions {
        let report = theorem_applicability(p);
        if !report.blowup_ok {
            return Err(SolverError::Region(format!(
                "(n, m) = ({}, {}) is outside the blow-up region",
                p.n, p.m
            )));
        }
        let e0 = energy(h0, p)?;
        if e0 >= 0.0 {
            return Err(SolverError::NotNegativeEnergy { e0 });
        }
    }
    // Compact support with a 20% margin on each side, line-problem proxy.
    let tol = cfg.effective_supp_tol();
    match support_edges(h0, tol) {
        SupportSpan::Interval { left, right } => {
            let margin = 0.2 * p.domain_len();
            if left - (-p.a) < margin || p.a - right < margin {
                return Err(SolverError::DomainTooSmall { t: 0.0 });
            }
        }
        SupportSpan::Full => return Err(SolverError::DomainTooSmall { t: 0.0 }),
        SupportSpan::Empty => return Err(SolverError::EmptyData),
    }

    let (lifted, smoothed) = lift_initial_data(h0, cfg)?;
    let mut state = RunState::new(lifted, 0.0, p, cfg);
    let mut ledger = RunLedger::default();
    if smoothed {
        ledger.events.push(RunEvent::SmoothingApplied);
    }
    let mass = state.h.mass();
    let plain = EntropySpec::plain(p.n, 0.0)?;
    let mut crossed = false;
    let mut running = true;
    let seg_floor = cfg.t_end / 1024.0;
    while running && !reached(state.t, cfg.t_end) && !ledger.collapsed {
        let entropy_now = entropy_value(&state.h, &plain)?;
        let hx_now = state.h.hx_sq();
        let constants = constants_chain(p, cfg, mass, entropy_now, hx_now);
        let t_loc = tloc_estimate(&constants, &state.h, p)?;
        ledger.events.push(RunEvent::SegmentScheduled { t: state.t, t_loc });
        let t1 = (state.t + t_loc.max(seg_floor)).min(cfg.t_end);
        let mut monitor = Monitor::Blowup {
            h1_cap: cfg.h1_cap,
            crossed: &mut crossed,
            boundary_guard: true,
            supp_tol: tol,
        };
        running = advance(&mut state, &mut ledger, p, cfg, t1, &mut monitor)?;
    }

    let detected = crossed || ledger.collapsed;
    if !detected {
        let t_reached = state.t;
        return Err(SolverError::NoBlowupWithinHorizon {
            t_reached,
            ledger: Box::new(ledger),
        });
    }
    let mut certificate = moment_certificate(&ledger, p, crate::analysis::TOL_INEQ)?;
    certificate.t_star = Some(state.t);
    certificate.h1_cap_crossed = crossed;
    certificate.collapsed = ledger.collapsed;
    Ok((ledger, certificate))
}

/// Text snapshot: '#'-prefixed header with n, m, a0, a1, t, dx followed by
/// whitespace-separated x/h pairs.
pub fn write_snapshot(
    h: &Field,
    p: &ProblemParams,
    t: f64,
    w: &mut impl Write,
) -> std::io::Result<()> {
    writeln!(
        w,
        "# n={} m={} a0={} a1={} t={} dx={}",
        p.n,
        p.m,
        p.a0,
        p.a1,
        t,
        h.dx()
    )?;
    for (i, v) in h.values().iter().enumerate() {
        writeln!(w, "{} {}", h.x(i), v)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotMeta {
    pub n: f64,
    pub m: f64,
    pub a0: f64,
    pub a1: f64,
    pub t: f64,
    pub dx: f64,
}

pub fn read_snapshot(r: impl BufRead) -> Result<(Field, SnapshotMeta), SolverError> {
    let bad = |msg: &str| SolverError::SnapshotIo(msg.to_string());
    let mut meta: Option<SnapshotMeta> = None;
    let mut xs = Vec::new();
    let mut vs = Vec::new();
    for line in r.lines() {
        let line = line.map_err(|e| SolverError::SnapshotIo(e.to_string()))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let mut fields = std::collections::HashMap::new();
            for kv in rest.split_whitespace() {
                if let Some((k, v)) = kv.split_once('=') {
                    let v: f64 = v.parse().map_err(|_| bad("bad header value"))?;
                    fields.insert(k.to_string(), v);
                }
            }
            let get = |k: &str| fields.get(k).copied().ok_or_else(|| bad("missing header key"));
            meta = Some(SnapshotMeta {
                n: get("n")?,
                m: get("m")?,
                a0: get("a0")?,
                a1: get("a1")?,
                t: get("t")?,
                dx: get("dx")?,
            });
        } else {
            let mut it = line.split_whitespace();
            let x: f64 = it
                .next()
                .ok_or_else(|| bad("missing x column"))?
                .parse()
                .map_err(|_| bad("bad x value"))?;
            let v: f64 = it
                .next()
                .ok_or_else(|| bad("missing h column"))?
                .parse()
                .map_err(|_| bad("bad h value"))?;
            xs.push(x);
            vs.push(v);
        }
    }
    let meta = meta.ok_or_else(|| bad("missing snapshot header"))?;
    if vs.len() < 8 {
        return Err(bad("snapshot too short"));
    }
    Ok((Field::new(vs, meta.dx, xs[0]), meta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn quiet_cfg() -> SolverConfig {
        SolverConfig {
            eps: 1e-6,
            dt_init: 1e-4,
            ..SolverConfig::default()
        }
    }

    #[test]
    fn lift_examples() {
        let cfg = SolverConfig { eps: 1e-6, theta: 0.3, ..SolverConfig::default() };
        let h0 = Field::cosine_bump(2.0 * PI, 128, 1.0, PI);
        let (lifted, smoothed) = lift_initial_data(&h0, &cfg).unwrap();
        assert!(!smoothed);
        let lift = cfg.lift_height();
        assert!((lift - 1.5848931924611134e-2).abs() < 1e-16);
        assert!(lifted.min() >= lift);
        let expect = h0.mass() + 4.0 * PI * lift;
        assert!((lifted.mass() - expect).abs() < 1e-12);

        let zero = Field::constant(1.0, 64, 0.0);
        assert!(matches!(lift_initial_data(&zero, &cfg), Err(SolverError::EmptyData)));
    }

    #[test]
    fn constant_state_is_fixed_point() {
        let p = ProblemParams::new(1.0, 1.0, 1.0, 0.5, 0.5, 64).unwrap();
        let cfg = quiet_cfg();
        let h0 = Field::constant(0.5, 64, 1.0);
        let mut state = RunState::new(h0, 0.0, &p, &cfg);
        for _ in 0..100 {
            let rep = implicit_step(&mut state, &p, &cfg, 1e-4).unwrap();
            assert!(rep.accepted);
        }
        let drift = state
            .h
            .values()
            .iter()
            .map(|v| (v - 1.0).abs())
            .fold(0.0, f64::max);
        assert!(drift < 1e-13, "drift = {drift:e}");
    }

    #[test]
    fn mass_is_conserved_per_step() {
        let p = ProblemParams::new(1.0, 3.0, 1.0, 1.0, PI, 128).unwrap();
        let cfg = quiet_cfg();
        let h0 = Field::from_fn(PI, 128, |x| 1.0 + 0.4 * x.cos());
        let mut state = RunState::new(h0, 0.0, &p, &cfg);
        let m0 = state.h.mass();
        for _ in 0..200 {
            assert!(implicit_step(&mut state, &p, &cfg, 1e-4).unwrap().accepted);
        }
        assert!((state.h.mass() - m0).abs() / m0 < 1e-12);
    }

    #[test]
    fn sine_decay_matches_discrete_symbol() {
        // a1 = 0, tiny perturbation: one lagged BE step damps the mode by
        // 1/(1 + dt lambda) with lambda the discrete biharmonic symbol.
        let nx = 128;
        let p = ProblemParams::new(1.0, 1.0, 1.0, 0.0, PI, nx).unwrap();
        let cfg = SolverConfig { eps: 1e-8, ..quiet_cfg() };
        let xi = 2.0;
        let amp = 1e-8;
        let h0 = Field::from_fn(PI, nx, |x| 1.0 + amp * (xi * x).cos());
        let dx = h0.dx();
        let dt = 1e-3;
        let mut state = RunState::new(h0.clone(), 0.0, &p, &cfg);
        assert!(implicit_step(&mut state, &p, &cfg, dt).unwrap().accepted);
        let ratio = state.h.mode_amplitude(xi) / h0.mode_amplitude(xi);
        let fbar = mobility(1.0, p.n, cfg.eps, 0.0).unwrap();
        let lambda = p.a0 * fbar * 16.0 / dx.powi(4) * (xi * dx / 2.0).sin().powi(4);
        let predicted = 1.0 / (1.0 + dt * lambda);
        assert!(
            (ratio - predicted).abs() < 1e-6 * predicted,
            "ratio {ratio} vs {predicted}"
        );
        // The symbol itself approximates a0 xi^4 to second order in dx.
        let rel = (lambda / (p.a0 * fbar) - xi.powi(4)).abs() / xi.powi(4);
        assert!(rel < xi * xi * dx * dx / 2.0, "symbol error {rel}");
    }

    #[test]
    fn newton_agrees_with_lagged_at_small_dt() {
        let p = ProblemParams::new(1.0, 3.0, 1.0, 1.0, PI, 64).unwrap();
        let h0 = Field::from_fn(PI, 64, |x| 1.0 + 0.3 * x.cos());
        let dt = 1e-6;
        let cfg_l = quiet_cfg();
        let cfg_n = SolverConfig { stepper: StepperKind::Newton, ..quiet_cfg() };
        let mut sl = RunState::new(h0.clone(), 0.0, &p, &cfg_l);
        let mut sn = RunState::new(h0, 0.0, &p, &cfg_n);
        assert!(implicit_step(&mut sl, &p, &cfg_l, dt).unwrap().accepted);
        let rep = implicit_step(&mut sn, &p, &cfg_n, dt).unwrap();
        assert!(rep.accepted, "newton rejected: {:?}", rep.cause);
        for (a, b) in sl.h.values().iter().zip(sn.h.values()) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn positivity_violation_rejects_instead_of_clipping() {
        // A steep droplet at an oversized dt drives nodes negative; the step
        // must come back rejected with the state untouched.
        let p = ProblemParams::new(1.0, 1.0, 1.0, 0.0, 4.0, 128).unwrap();
        let cfg = SolverConfig { eps: 1e-10, ..SolverConfig::default() };
        let raw = Field::parabolic_droplet(4.0, 128, 2.0, 1.0);
        let (h0, _) = lift_initial_data(&raw, &cfg).unwrap();
        let mut state = RunState::new(h0.clone(), 0.0, &p, &cfg);
        let rep = implicit_step(&mut state, &p, &cfg, 10.0).unwrap();
        assert!(!rep.accepted);
        assert_eq!(rep.cause, Some(RejectCause::Positivity));
        assert_eq!(state.h.values(), h0.values());
        assert_eq!(state.t, 0.0);
    }

    #[test]
    fn zero_length_span_returns_initial_sample() {
        let p = ProblemParams::new(1.0, 1.0, 1.0, 0.0, PI, 64).unwrap();
        let cfg = quiet_cfg();
        let h0 = Field::constant(PI, 64, 1.0);
        let (state, ledger) = run_segment(&h0, &p, &cfg, (0.0, 0.0)).unwrap();
        assert_eq!(ledger.samples.len(), 1);
        assert_eq!(state.t, 0.0);
    }

    #[test]
    fn energy_dissipates_without_destabilization() {
        let p = ProblemParams::new(1.0, 1.0, 1.0, 0.0, PI, 128).unwrap();
        let cfg = quiet_cfg();
        let h0raw = Field::from_fn(PI, 128, |x| 1.0 + 0.3 * x.cos());
        let (h0, _) = lift_initial_data(&h0raw, &cfg).unwrap();
        let (_, ledger) = run_segment(&h0, &p, &cfg, (0.0, 0.02)).unwrap();
        assert!(!ledger.collapsed);
        for w in ledger.samples.windows(2) {
            assert!(w[1].energy <= w[0].energy + 1e-10, "{} -> {}", w[0].energy, w[1].energy);
        }
    }

    #[test]
    fn snapshot_roundtrip() {
        let p = ProblemParams::new(1.5, 2.5, 1.0, 0.5, 2.0, 64).unwrap();
        let h = Field::from_fn(2.0, 64, |x| 1.0 + 0.2 * (PI * x / 2.0).sin());
        let mut buf = Vec::new();
        write_snapshot(&h, &p, 0.75, &mut buf).unwrap();
        let (h2, meta) = read_snapshot(std::io::Cursor::new(buf)).unwrap();
        assert_eq!(meta.t, 0.75);
        assert_eq!(meta.n, 1.5);
        assert_eq!(h.values(), h2.values());
        assert_eq!(h.dx(), h2.dx());
        assert_eq!(h.origin(), h2.origin());
    }

    #[test]
    fn eps_refinement_is_monotone() {
        // Fixed smooth positive data; runs at eps and eps/2 differ, and the
        // difference shrinks with eps.
        let p = ProblemParams::new(1.0, 1.0, 1.0, 1.0, PI, 64).unwrap();
        let h0 = Field::from_fn(PI, 64, |x| 1.0 + 0.3 * x.cos());
        let horizon = 5e-3;
        let run = |eps: f64| {
            let cfg = SolverConfig { eps, dt_init: 1e-5, dt_max: 1e-4, ..SolverConfig::default() };
            let (state, ledger) = run_segment(&h0, &p, &cfg, (0.0, horizon)).unwrap();
            assert!(!ledger.collapsed);
            state.h
        };
        let h1 = run(1e-3);
        let h2 = run(5e-4);
        let h3 = run(2.5e-4);
        let dist = |a: &Field, b: &Field| {
            a.values()
                .iter()
                .zip(b.values())
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max)
        };
        let d12 = dist(&h1, &h2);
        let d23 = dist(&h2, &h3);
        assert!(d12 > 0.0 && d23 > 0.0);
        assert!(d23 < d12, "refinement not monotone: {d12} vs {d23}");
    }
}
