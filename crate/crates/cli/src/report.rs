//! Structured run reports. Everything a command measures lands in one JSON
//! document; the ledger itself goes to CSV.

use serde::{Deserialize, Serialize};
use thinfilm::analysis::{
    BlowupCertificate, ConstantsLedger, SpreadingFit, WeightedBoundsReport,
};
use thinfilm::model::RegimeReport;
use thinfilm::solver::{RunEvent, RunLedger};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemEcho {
    pub n: f64,
    pub m: f64,
    pub a0: f64,
    pub a1: f64,
    pub a: f64,
    pub nx: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventSummary {
    pub rejections: usize,
    pub dt_growths: usize,
    pub segments: usize,
    pub collapsed: bool,
    pub smoothing_applied: bool,
}

impl EventSummary {
    pub fn from_ledger(ledger: &RunLedger) -> Self {
        let mut s = EventSummary {
            rejections: 0,
            dt_growths: 0,
            segments: 0,
            collapsed: ledger.collapsed,
            smoothing_applied: false,
        };
        for e in &ledger.events {
            match e {
                RunEvent::Rejected { .. } => s.rejections += 1,
                RunEvent::DtGrew { .. } => s.dt_growths += 1,
                RunEvent::SegmentScheduled { .. } => s.segments += 1,
                RunEvent::SmoothingApplied => s.smoothing_applied = true,
                _ => {}
            }
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstancyCheck {
    pub reference: f64,
    pub max_drift: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyChecks {
    /// Relative defect of E_eps(T) + dissipation = E_eps(0).
    pub identity_defect_rel: f64,
    pub identity_pass: bool,
    /// Worst sample-to-sample increase of E0 for a1 = 0 runs.
    pub monotone_worst_increase: Option<f64>,
    pub monotone_pass: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedSummary {
    pub worst_ratio: f64,
    pub worst_margin: f64,
    pub pass: bool,
}

impl From<&WeightedBoundsReport> for WeightedSummary {
    fn from(r: &WeightedBoundsReport) -> Self {
        WeightedSummary {
            worst_ratio: r.worst_ratio,
            worst_margin: r.worst_margin,
            pass: r.pass,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpreadingSummary {
    pub exponent: f64,
    pub prefactor: f64,
    pub residual: f64,
    pub samples_used: usize,
    pub expected_exponent: f64,
    pub tol: f64,
    pub pass: bool,
}

impl SpreadingSummary {
    pub fn new(fit: &SpreadingFit, expected: f64, tol: f64) -> Self {
        SpreadingSummary {
            exponent: fit.exponent,
            prefactor: fit.prefactor,
            residual: fit.residual,
            samples_used: fit.samples_used,
            expected_exponent: expected,
            tol,
            pass: (fit.exponent - expected).abs() <= tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersionRow {
    pub mode: usize,
    pub xi: f64,
    pub sigma_measured: Option<f64>,
    pub sigma_formula: f64,
    pub rel_err: Option<f64>,
    pub fit_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub seed: u64,
    pub problem: ProblemEcho,
    pub regime: RegimeReport,
    pub constants: Option<ConstantsLedger>,
    pub mass_drift: Option<f64>,
    pub final_time: Option<f64>,
    pub samples: Option<usize>,
    pub events: Option<EventSummary>,
    pub constancy: Option<ConstancyCheck>,
    pub energy: Option<EnergyChecks>,
    pub weighted: Option<WeightedSummary>,
    pub certificate: Option<BlowupCertificate>,
    pub spreading: Option<SpreadingSummary>,
    pub dispersion: Option<Vec<DispersionRow>>,
    pub config_text: String,
}

impl RunReport {
    pub fn new(command: &str, seed: u64, p: &thinfilm::ProblemParams, config_text: &str) -> Self {
        RunReport {
            command: command.to_string(),
            seed,
            problem: ProblemEcho {
                n: p.n,
                m: p.m,
                a0: p.a0,
                a1: p.a1,
                a: p.a,
                nx: p.nx,
            },
            regime: thinfilm::model::theorem_applicability(p),
            constants: None,
            mass_drift: None,
            final_time: None,
            samples: None,
            events: None,
            constancy: None,
            energy: None,
            weighted: None,
            certificate: None,
            spreading: None,
            dispersion: None,
            config_text: config_text.to_string(),
        }
    }

    /// True when every inequality-style check present in the report passed.
    pub fn all_checks_pass(&self) -> bool {
        let mut ok = true;
        if let Some(c) = &self.constancy {
            ok &= c.pass;
        }
        if let Some(e) = &self.energy {
            ok &= e.identity_pass && e.monotone_pass.unwrap_or(true);
        }
        if let Some(w) = &self.weighted {
            ok &= w.pass;
        }
        if let Some(c) = &self.certificate {
            ok &= c.verdict != thinfilm::analysis::CertVerdict::InequalityViolated;
        }
        if let Some(s) = &self.spreading {
            ok &= s.pass;
        }
        ok
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }
}
