//! Experiment subcommands. Every command reads one configuration, writes
//! deterministic outputs into the output directory, and reports through
//! exit codes: 1 config error, 2 solver failure, 3 inequality violation
//! beyond the configured slack.

use crate::config::{ExperimentConfig, InitialKind, SimulateMode};
use crate::output::{
    dispersion_csv, ledger_csv, moment_csv, support_csv, weighted_csv, write_atomic,
};
use crate::report::{
    ConstancyCheck, DispersionRow, EnergyChecks, EventSummary, RunReport, SpreadingSummary,
    WeightedSummary,
};
use std::path::{Path, PathBuf};
use thinfilm::analysis::{
    check_exp_weighted_bounds, constants_chain, fit_spreading_exponent, moment_certificate,
    CertVerdict, SupportTrace,
};
use thinfilm::model::growth_rate;
use thinfilm::solver::{
    continue_global_state, continue_segment, continue_to_blowup, lift_initial_data, write_snapshot,
    RunLedger, RunState, SolverError,
};
use thinfilm::Field;

#[derive(Debug)]
pub enum CmdError {
    Config(String),
    Solver(String),
    Violation(String),
}

impl CmdError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CmdError::Config(_) => 1,
            CmdError::Solver(_) => 2,
            CmdError::Violation(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CmdError::Config(m) | CmdError::Solver(m) | CmdError::Violation(m) => m,
        }
    }
}

fn io_err(e: std::io::Error) -> CmdError {
    CmdError::Config(format!("io error: {e}"))
}

fn solver_err(e: SolverError) -> CmdError {
    CmdError::Solver(e.to_string())
}

fn snapshot_path(dir: &Path, index: usize) -> PathBuf {
    dir.join(format!("snapshot_{index:04}.dat"))
}

fn write_snapshot_file(
    dir: &Path,
    index: usize,
    h: &Field,
    p: &thinfilm::ProblemParams,
    t: f64,
) -> Result<(), CmdError> {
    let mut buf = Vec::new();
    write_snapshot(h, p, t, &mut buf).map_err(io_err)?;
    write_atomic(&snapshot_path(dir, index), &buf).map_err(io_err)
}

fn energy_checks(ledger: &RunLedger, p: &thinfilm::ProblemParams, tol: f64) -> Option<EnergyChecks> {
    let first = ledger.aux.first()?;
    let last = ledger.aux.last()?;
    let defect = (last.energy_eps + last.dissipation - first.energy_eps).abs();
    let scale = first
        .energy_eps
        .abs()
        .max(last.energy_eps.abs())
        .max(last.dissipation)
        .max(1e-300);
    let identity_defect_rel = defect / scale;
    let (monotone_worst_increase, monotone_pass) = if p.a1 == 0.0 {
        let mut worst = f64::NEG_INFINITY;
        for w in ledger.samples.windows(2) {
            worst = worst.max(w[1].energy - w[0].energy);
        }
        let slack = 1e-10 * ledger.samples[0].energy.abs().max(1.0);
        (Some(worst), Some(worst <= slack))
    } else {
        (None, None)
    };
    Some(EnergyChecks {
        identity_defect_rel,
        identity_pass: identity_defect_rel <= tol,
        monotone_worst_increase,
        monotone_pass,
    })
}

fn finish_ledger_outputs(
    out: &Path,
    cfg: &ExperimentConfig,
    ledger: &RunLedger,
    report: &mut RunReport,
) -> Result<(), CmdError> {
    report.mass_drift = Some(ledger.mass_drift());
    report.final_time = Some(ledger.final_time());
    report.samples = Some(ledger.samples.len());
    report.events = Some(EventSummary::from_ledger(ledger));
    if let Some(first) = ledger.samples.first() {
        report.constants = Some(constants_chain(
            &cfg.problem,
            &cfg.solver,
            first.mass,
            first.entropy,
            first.hx_sq,
        ));
    }
    write_atomic(&out.join("ledger.csv"), ledger_csv(ledger, cfg.problem.a).as_bytes())
        .map_err(io_err)
}

pub fn cmd_simulate(cfg: &ExperimentConfig, out: &Path) -> Result<(), CmdError> {
    let p = &cfg.problem;
    let h0 = cfg.build_initial_field().map_err(|e| CmdError::Config(e.to_string()))?;
    let mut report = RunReport::new("simulate", cfg.seed, p, &cfg.text);

    let (state, ledger) = match cfg.simulate_mode {
        SimulateMode::Segment => {
            let (lifted, smoothed) = lift_initial_data(&h0, &cfg.solver).map_err(solver_err)?;
            let mut state = RunState::new(lifted, 0.0, p, &cfg.solver);
            let mut ledger = RunLedger::default();
            if smoothed {
                ledger.events.push(thinfilm::solver::RunEvent::SmoothingApplied);
            }
            write_snapshot_file(out, 0, &state.h, p, 0.0)?;
            let pieces = cfg.snapshots.max(2) - 1;
            for k in 1..=pieces {
                let t1 = cfg.solver.t_end * k as f64 / pieces as f64;
                let alive = continue_segment(&mut state, &mut ledger, p, &cfg.solver, t1)
                    .map_err(solver_err)?;
                write_snapshot_file(out, k, &state.h, p, state.t)?;
                if !alive {
                    break;
                }
            }
            (state, ledger)
        }
        SimulateMode::Global => {
            write_snapshot_file(out, 0, &h0, p, 0.0)?;
            let (state, ledger) =
                continue_global_state(&h0, p, &cfg.solver, cfg.solver.t_end).map_err(solver_err)?;
            write_snapshot_file(out, 1, &state.h, p, state.t)?;
            (state, ledger)
        }
    };

    if let InitialKind::Constant { value } = cfg.initial {
        let reference = value + cfg.solver.lift_height();
        let max_drift = state
            .h
            .values()
            .iter()
            .map(|v| (v - reference).abs())
            .fold(0.0, f64::max);
        report.constancy = Some(ConstancyCheck {
            reference,
            max_drift,
            pass: max_drift < 1e-12,
        });
    }
    report.energy = energy_checks(&ledger, p, cfg.tol_ineq);
    let weighted = check_exp_weighted_bounds(&ledger, p, cfg.tol_ineq);
    write_atomic(&out.join("weighted.csv"), weighted_csv(&weighted.rows).as_bytes())
        .map_err(io_err)?;
    report.weighted = Some(WeightedSummary::from(&weighted));
    finish_ledger_outputs(out, cfg, &ledger, &mut report)?;
    write_atomic(&out.join("report.json"), report.to_json().as_bytes()).map_err(io_err)?;

    if ledger.collapsed {
        return Err(CmdError::Solver("time step collapsed".into()));
    }
    if cfg.strict && !report.all_checks_pass() {
        return Err(CmdError::Violation("inequality check beyond slack".into()));
    }
    Ok(())
}

pub fn cmd_dispersion(cfg: &ExperimentConfig, out: &Path) -> Result<(), CmdError> {
    let p = &cfg.problem;
    let hbar = match cfg.initial {
        InitialKind::Constant { value } => value,
        _ => 1.0,
    };
    let amp = cfg.dispersion_amplitude * hbar;
    let mut rows = Vec::new();
    let mut report = RunReport::new("dispersion", cfg.seed, p, &cfg.text);
    let mut any_ok = false;
    for k in 1..=cfg.dispersion_modes {
        let xi = k as f64 * std::f64::consts::PI / p.a;
        let sigma_formula = growth_rate(xi, hbar, p);
        // Horizon long enough to see an e-fold (or clear decay), short
        // enough to stay in the linear regime.
        let horizon = (1.0 / sigma_formula.abs().max(0.05)).min(20.0);
        let dt = cfg.solver.dt_init.min(0.05 / sigma_formula.abs().max(1.0));
        let h0 = Field::from_fn(p.a, p.nx, |x| hbar + amp * (xi * x).cos());
        let mut state = RunState::new(h0, 0.0, p, &cfg.solver);
        let mut ts = vec![0.0];
        let mut amps = vec![state.h.mode_amplitude(xi)];
        let mut failed = false;
        while state.t < horizon {
            let dt_try = dt.min(horizon - state.t);
            let step = thinfilm::solver::implicit_step(&mut state, p, &cfg.solver, dt_try)
                .map_err(solver_err)?;
            if !step.accepted {
                failed = true;
                break;
            }
            ts.push(state.t);
            amps.push(state.h.mode_amplitude(xi));
        }
        let row = if failed || amps.iter().any(|a| *a <= 0.0) {
            DispersionRow {
                mode: k,
                xi,
                sigma_measured: None,
                sigma_formula,
                rel_err: None,
                fit_residual: None,
            }
        } else {
            let logs: Vec<f64> = amps.iter().map(|a| a.ln()).collect();
            let nn = ts.len() as f64;
            let mx = ts.iter().sum::<f64>() / nn;
            let my = logs.iter().sum::<f64>() / nn;
            let sxx: f64 = ts.iter().map(|x| (x - mx).powi(2)).sum();
            let sxy: f64 = ts.iter().zip(&logs).map(|(x, y)| (x - mx) * (y - my)).sum();
            let slope = sxy / sxx;
            let intercept = my - slope * mx;
            let residual = (ts
                .iter()
                .zip(&logs)
                .map(|(x, y)| (y - slope * x - intercept).powi(2))
                .sum::<f64>()
                / nn)
                .sqrt();
            if residual > cfg.dispersion_fit_tol {
                DispersionRow {
                    mode: k,
                    xi,
                    sigma_measured: None,
                    sigma_formula,
                    rel_err: None,
                    fit_residual: Some(residual),
                }
            } else {
                any_ok = true;
                DispersionRow {
                    mode: k,
                    xi,
                    sigma_measured: Some(slope),
                    sigma_formula,
                    rel_err: Some(
                        (slope - sigma_formula).abs() / sigma_formula.abs().max(1e-12),
                    ),
                    fit_residual: Some(residual),
                }
            }
        };
        rows.push(row);
    }
    write_atomic(&out.join("dispersion.csv"), dispersion_csv(&rows).as_bytes()).map_err(io_err)?;
    report.dispersion = Some(rows);
    write_atomic(&out.join("report.json"), report.to_json().as_bytes()).map_err(io_err)?;
    if !any_ok {
        return Err(CmdError::Solver("every dispersion fit failed".into()));
    }
    Ok(())
}

pub fn cmd_certify_blowup(cfg: &ExperimentConfig, out: &Path, force: bool) -> Result<(), CmdError> {
    let p = &cfg.problem;
    let h0 = cfg.build_initial_field().map_err(|e| CmdError::Config(e.to_string()))?;
    let mut solver = cfg.solver.clone();
    solver.force_blowup_preconditions |= force;
    let mut report = RunReport::new("certify-blowup", cfg.seed, p, &cfg.text);

    match continue_to_blowup(&h0, p, &solver) {
        Ok((ledger, certificate)) => {
            write_atomic(&out.join("moment.csv"), moment_csv(&certificate.rows).as_bytes())
                .map_err(io_err)?;
            let violated = certificate.verdict == CertVerdict::InequalityViolated;
            report.certificate = Some(certificate);
            finish_ledger_outputs(out, cfg, &ledger, &mut report)?;
            write_atomic(&out.join("report.json"), report.to_json().as_bytes()).map_err(io_err)?;
            if cfg.strict && violated {
                return Err(CmdError::Violation(
                    "second-moment inequality violated beyond slack".into(),
                ));
            }
            Ok(())
        }
        Err(SolverError::NoBlowupWithinHorizon { t_reached, ledger }) => {
            // Expected outcome for stable configurations: report it and
            // surface the horizon exhaustion through the exit code.
            if let Ok(mut certificate) = moment_certificate(&ledger, p, cfg.tol_ineq) {
                certificate.verdict = CertVerdict::NoBlowup;
                write_atomic(&out.join("moment.csv"), moment_csv(&certificate.rows).as_bytes())
                    .map_err(io_err)?;
                report.certificate = Some(certificate);
            }
            finish_ledger_outputs(out, cfg, &ledger, &mut report)?;
            write_atomic(&out.join("report.json"), report.to_json().as_bytes()).map_err(io_err)?;
            Err(CmdError::Solver(format!(
                "no blow-up within the horizon (reached t = {t_reached})"
            )))
        }
        Err(e) => Err(solver_err(e)),
    }
}

pub fn cmd_spreading(cfg: &ExperimentConfig, out: &Path, force: bool) -> Result<(), CmdError> {
    let p = &cfg.problem;
    if p.a1 > 0.0 && !cfg.spreading_allow_a1 && !force {
        eprintln!(
            "warning: spreading fits assume a1 = 0; got a1 = {} (set spreading.allow_a1 = true or --force to silence)",
            p.a1
        );
    }
    let r0 = cfg
        .initial_radius()
        .ok_or_else(|| CmdError::Config("spreading needs a droplet initial kind".into()))?;
    let h0 = cfg.build_initial_field().map_err(|e| CmdError::Config(e.to_string()))?;
    let (lifted, smoothed) = lift_initial_data(&h0, &cfg.solver).map_err(solver_err)?;
    let mut state = RunState::new(lifted, 0.0, p, &cfg.solver);
    let mut ledger = RunLedger::default();
    if smoothed {
        ledger.events.push(thinfilm::solver::RunEvent::SmoothingApplied);
    }
    continue_segment(&mut state, &mut ledger, p, &cfg.solver, cfg.solver.t_end)
        .map_err(solver_err)?;

    let mut report = RunReport::new("spreading", cfg.seed, p, &cfg.text);
    write_atomic(&out.join("support.csv"), support_csv(&ledger, p.a).as_bytes())
        .map_err(io_err)?;
    let trace = SupportTrace::from_ledger(&ledger, r0, state.h.dx());
    let fit = fit_spreading_exponent(&trace, cfg.spreading_window);
    finish_ledger_outputs(out, cfg, &ledger, &mut report)?;
    match fit {
        Ok(fit) => {
            let expected = 1.0 / (p.n + 4.0);
            report.spreading = Some(SpreadingSummary::new(
                &fit,
                expected,
                cfg.spreading_exponent_tol,
            ));
            write_atomic(&out.join("report.json"), report.to_json().as_bytes()).map_err(io_err)?;
            if cfg.strict && !report.all_checks_pass() {
                return Err(CmdError::Violation("spreading exponent out of band".into()));
            }
            Ok(())
        }
        Err(e) => {
            write_atomic(&out.join("report.json"), report.to_json().as_bytes()).map_err(io_err)?;
            Err(CmdError::Solver(e.to_string()))
        }
    }
}

pub fn cmd_regime(cfg: &ExperimentConfig, out: &Path) -> Result<(), CmdError> {
    use thinfilm::rational::Rational;
    let (n_min, n_max, n_step) = cfg.regime_n;
    let (m_min, m_max, m_step) = cfg.regime_m;
    if !n_step.is_positive() || !m_step.is_positive() {
        return Err(CmdError::Config("regime sweep step must be positive".into()));
    }
    let mut ns = Vec::new();
    let mut v = n_min;
    while v <= n_max {
        ns.push(v);
        v = v.add(n_step);
    }
    let mut ms = Vec::new();
    let mut v = m_min;
    while v <= m_max {
        ms.push(v);
        v = v.add(m_step);
    }
    let cells: Vec<(Rational, Rational)> = ns
        .iter()
        .flat_map(|&n| ms.iter().map(move |&m| (n, m)))
        .collect();

    let workers: usize = std::env::var("THINFILM_THREADS")
        .ok()
        .and_then(|s| s.parse().ok())
        .filter(|&w| w > 0)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|p| p.get().min(8))
                .unwrap_or(1)
        });

    let p0 = cfg.problem.clone();
    let mut rows: Vec<Option<String>> = vec![None; cells.len()];
    let chunk = cells.len().div_ceil(workers.max(1)).max(1);
    std::thread::scope(|scope| {
        for (slot, work) in rows.chunks_mut(chunk).zip(cells.chunks(chunk)) {
            let p0 = p0.clone();
            scope.spawn(move || {
                for (dst, &(n, m)) in slot.iter_mut().zip(work) {
                    let row = match thinfilm::ProblemParams::from_rationals(
                        n, m, p0.a0, p0.a1, p0.a, p0.nx,
                    ) {
                        Ok(p) => {
                            let r = thinfilm::model::theorem_applicability(&p);
                            format!(
                                "{},{},{},{},{},{}",
                                p.n, p.m, r.regime, r.existence_ok, r.fsp_ok, r.blowup_ok
                            )
                        }
                        Err(e) => format!("{},{},invalid({e}),false,false,false", n, m),
                    };
                    *dst = Some(row);
                }
            });
        }
    });

    let mut csv = String::from("n,m,regime,existence_ok,fsp_ok,blowup_ok\n");
    for row in rows.into_iter().flatten() {
        csv.push_str(&row);
        csv.push('\n');
    }
    write_atomic(&out.join("regime_map.csv"), csv.as_bytes()).map_err(io_err)?;
    Ok(())
}
