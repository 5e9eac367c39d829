//! Deterministic file emission: fixed CSV columns, shortest round-trip
//! float formatting, atomic writes (temp + rename).

use std::io::Write;
use std::path::{Path, PathBuf};
use thinfilm::analysis::{MomentRow, SupportSpan, WeightedRow};
use thinfilm::solver::RunLedger;

pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(dir)?;
    let tmp: PathBuf = dir.join(format!(
        ".{}.tmp-{}",
        path.file_name().and_then(|s| s.to_str()).unwrap_or("out"),
        std::process::id()
    ));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)
}

fn span_columns(span: &SupportSpan, a: f64) -> (f64, f64) {
    match span {
        SupportSpan::Empty => (f64::NAN, f64::NAN),
        // No crossing: the support is the whole domain.
        SupportSpan::Full => (-a, a),
        SupportSpan::Interval { left, right } => (*left, *right),
    }
}

pub const LEDGER_HEADER: &str =
    "t,mass,energy,entropy,alpha_entropy,hx_sq,sup,moment,B1,B2,Btilde,x_left,x_right";

pub fn ledger_csv(ledger: &RunLedger, a: f64) -> String {
    let mut out = String::from(LEDGER_HEADER);
    out.push('\n');
    for (s, span) in ledger.samples.iter().zip(&ledger.support) {
        let (l, r) = span_columns(span, a);
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            s.t,
            s.mass,
            s.energy,
            s.entropy,
            s.alpha_entropy,
            s.hx_sq,
            s.sup,
            s.moment,
            s.b1,
            s.b2,
            s.btilde,
            l,
            r
        ));
    }
    out
}

pub fn moment_csv(rows: &[MomentRow]) -> String {
    let mut out = String::from("t,lhs,rhs,margin\n");
    for r in rows {
        out.push_str(&format!("{},{},{},{}\n", r.t, r.lhs, r.rhs, r.margin));
    }
    out
}

pub fn weighted_csv(rows: &[WeightedRow]) -> String {
    let mut out = String::from("t,lhs_b1,rhs_b1,lhs_b2,rhs_b2\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.t, r.lhs_b1, r.rhs_b1, r.lhs_b2, r.rhs_b2
        ));
    }
    out
}

pub fn support_csv(ledger: &RunLedger, a: f64) -> String {
    let mut out = String::from("t,x_left,x_right\n");
    for (s, span) in ledger.samples.iter().zip(&ledger.support) {
        let (l, r) = span_columns(span, a);
        out.push_str(&format!("{},{},{}\n", s.t, l, r));
    }
    out
}

pub fn dispersion_csv(rows: &[crate::report::DispersionRow]) -> String {
    let mut out = String::from("xi,sigma_measured,sigma_formula,rel_err\n");
    for r in rows {
        let measured = r
            .sigma_measured
            .map(|v| v.to_string())
            .unwrap_or_else(|| "NaN".into());
        let rel = r
            .rel_err
            .map(|v| v.to_string())
            .unwrap_or_else(|| "NaN".into());
        out.push_str(&format!("{},{},{},{}\n", r.xi, measured, r.sigma_formula, rel));
    }
    out
}
