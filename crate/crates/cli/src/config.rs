//! Flat key-value experiment configuration: `section.key = value` lines,
//! '#' comments. Unknown keys are hard errors; every field except the
//! exponents n and m has a default.

use std::collections::BTreeMap;
use std::fmt;
use thinfilm::model::ProblemParams;
use thinfilm::rational::Rational;
use thinfilm::solver::{FaceMobility, SolverConfig, StepperKind};

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialKind {
    Constant { value: f64 },
    CosineBump { amplitude: f64, r0: f64 },
    ParabolicDroplet { amplitude: f64, r0: f64 },
    SourceDroplet { amplitude: f64, r0: f64 },
    File { path: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimulateMode {
    Segment,
    Global,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub problem: ProblemParams,
    pub solver: SolverConfig,
    pub initial: InitialKind,
    pub output_dir: String,
    pub seed: u64,
    pub simulate_mode: SimulateMode,
    pub dispersion_modes: usize,
    pub dispersion_amplitude: f64,
    pub dispersion_fit_tol: f64,
    pub spreading_window: (f64, f64),
    pub spreading_allow_a1: bool,
    pub spreading_exponent_tol: f64,
    pub regime_n: (Rational, Rational, Rational),
    pub regime_m: (Rational, Rational, Rational),
    pub tol_ineq: f64,
    pub strict: bool,
    pub snapshots: usize,
    /// Original file text, echoed into reports for reproducibility.
    pub text: String,
}

struct Raw {
    map: BTreeMap<String, String>,
    used: std::cell::RefCell<std::collections::BTreeSet<String>>,
}

impl Raw {
    fn get(&self, key: &str) -> Option<&str> {
        let v = self.map.get(key).map(|s| s.as_str());
        if v.is_some() {
            self.used.borrow_mut().insert(key.to_string());
        }
        v
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some("inf") => Ok(f64::INFINITY),
            Some(v) => v
                .parse()
                .map_err(|_| ConfigError(format!("key `{key}`: cannot parse `{v}` as a number"))),
        }
    }

    fn usize_or(&self, key: &str, default: usize) -> Result<usize, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| ConfigError(format!("key `{key}`: cannot parse `{v}` as an integer"))),
        }
    }

    fn u64_or(&self, key: &str, default: u64) -> Result<u64, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| ConfigError(format!("key `{key}`: cannot parse `{v}` as an integer"))),
        }
    }

    fn bool_or(&self, key: &str, default: bool) -> Result<bool, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some("true") => Ok(true),
            Some("false") => Ok(false),
            Some(v) => Err(ConfigError(format!("key `{key}`: expected true/false, got `{v}`"))),
        }
    }

    fn string_or(&self, key: &str, default: &str) -> String {
        self.get(key).unwrap_or(default).to_string()
    }

    fn rational_or(&self, key: &str, default: &str) -> Result<Rational, ConfigError> {
        let s = self.get(key).unwrap_or(default);
        Rational::from_decimal_str(s)
            .map_err(|_| ConfigError(format!("key `{key}`: cannot parse `{s}` as a decimal")))
    }
}

pub fn parse(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut map = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| ConfigError(format!("line {}: expected `key = value`", lineno + 1)))?;
        let key = key.trim().to_string();
        if map.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(ConfigError(format!("duplicate key `{key}`")));
        }
    }
    let raw = Raw { map, used: Default::default() };

    let n_str = raw
        .get("problem.n")
        .ok_or_else(|| ConfigError("missing required key `problem.n`".into()))?
        .to_string();
    let m_str = raw
        .get("problem.m")
        .ok_or_else(|| ConfigError("missing required key `problem.m`".into()))?
        .to_string();
    let a0 = raw.f64_or("problem.a0", 1.0)?;
    let a1 = raw.f64_or("problem.a1", 1.0)?;
    let a = raw.f64_or("problem.a", std::f64::consts::PI)?;
    let nx = raw.usize_or("problem.nx", 256)?;
    let problem = ProblemParams::from_decimal_exponents(&n_str, &m_str, a0, a1, a, nx)
        .map_err(|e| ConfigError(e.to_string()))?;

    let stepper = match raw.string_or("solver.stepper", "lagged").as_str() {
        "lagged" => StepperKind::Lagged,
        "newton" => StepperKind::Newton,
        v => return Err(ConfigError(format!("key `solver.stepper`: unknown stepper `{v}`"))),
    };
    let face_mobility = match raw.string_or("solver.face_mobility", "harmonic").as_str() {
        "harmonic" => FaceMobility::Harmonic,
        "arithmetic" => FaceMobility::Arithmetic,
        v => {
            return Err(ConfigError(format!(
                "key `solver.face_mobility`: unknown mean `{v}`"
            )))
        }
    };
    let defaults = SolverConfig::default();
    let solver = SolverConfig {
        eps: raw.f64_or("solver.eps", defaults.eps)?,
        delta: raw.f64_or("solver.delta", defaults.delta)?,
        theta: raw.f64_or("solver.theta", defaults.theta)?,
        dt_init: raw.f64_or("solver.dt_init", defaults.dt_init)?,
        dt_min: raw.f64_or("solver.dt_min", defaults.dt_min)?,
        dt_max: raw.f64_or("solver.dt_max", defaults.dt_max)?,
        t_end: raw.f64_or("solver.t_end", defaults.t_end)?,
        newton_tol: raw.f64_or("solver.newton_tol", defaults.newton_tol)?,
        newton_max: raw.usize_or("solver.newton_max", defaults.newton_max)?,
        h1_cap: raw.f64_or("solver.h1_cap", defaults.h1_cap)?,
        supp_tol: raw.f64_or("solver.supp_tol", defaults.supp_tol)?,
        alpha: raw.f64_or("solver.alpha", defaults.alpha)?,
        sample_every: raw.usize_or("solver.sample_every", defaults.sample_every)?,
        stepper,
        face_mobility,
        smooth_initial: raw.bool_or("solver.smooth_initial", false)?,
        force_blowup_preconditions: raw.bool_or("solver.force", false)?,
    };
    solver.validate().map_err(|e| ConfigError(e.to_string()))?;

    let amplitude = raw.f64_or("initial.amplitude", 1.0)?;
    let r0 = raw.f64_or("initial.r0", 1.0)?;
    let initial = match raw.string_or("initial.kind", "cosine-bump").as_str() {
        "constant" => InitialKind::Constant { value: raw.f64_or("initial.constant", 1.0)? },
        "cosine-bump" => InitialKind::CosineBump { amplitude, r0 },
        "parabolic-droplet" => InitialKind::ParabolicDroplet { amplitude, r0 },
        "source-droplet" => InitialKind::SourceDroplet { amplitude, r0 },
        "file" => InitialKind::File { path: raw.string_or("initial.path", "") },
        v => return Err(ConfigError(format!("key `initial.kind`: unknown kind `{v}`"))),
    };
    // Touch alternate initial keys so a config that sets them for an unused
    // kind still validates.
    let _ = raw.get("initial.constant");
    let _ = raw.get("initial.path");

    let simulate_mode = match raw.string_or("simulate.mode", "segment").as_str() {
        "segment" => SimulateMode::Segment,
        "global" => SimulateMode::Global,
        v => return Err(ConfigError(format!("key `simulate.mode`: unknown mode `{v}`"))),
    };

    let t_end = solver.t_end;
    let win_lo = raw.f64_or("spreading.window_lo", 0.0)?;
    let win_hi = raw.f64_or("spreading.window_hi", 0.0)?;
    let spreading_window = (
        if win_lo > 0.0 { win_lo } else { t_end / 10.0 },
        if win_hi > 0.0 { win_hi } else { t_end },
    );

    let regime_n = (
        raw.rational_or("regime.n_min", "0.25")?,
        raw.rational_or("regime.n_max", "3")?,
        raw.rational_or("regime.n_step", "0.25")?,
    );
    let regime_m = (
        raw.rational_or("regime.m_min", "0.25")?,
        raw.rational_or("regime.m_max", "6")?,
        raw.rational_or("regime.m_step", "0.25")?,
    );

    let cfg = ExperimentConfig {
        problem,
        solver,
        initial,
        output_dir: raw.string_or("output.dir", "thinfilm-out"),
        seed: raw.u64_or("seed", 0)?,
        simulate_mode,
        dispersion_modes: raw.usize_or("dispersion.modes", 6)?,
        dispersion_amplitude: raw.f64_or("dispersion.amplitude", 1e-6)?,
        dispersion_fit_tol: raw.f64_or("dispersion.fit_tol", 0.05)?,
        spreading_window,
        spreading_allow_a1: raw.bool_or("spreading.allow_a1", false)?,
        spreading_exponent_tol: raw.f64_or("spreading.exponent_tol", 0.02)?,
        regime_n,
        regime_m,
        tol_ineq: raw.f64_or("report.tol_ineq", 0.05)?,
        strict: raw.bool_or("report.strict", true)?,
        snapshots: raw.usize_or("output.snapshots", 2)?,
        text: text.to_string(),
    };

    // Any key never consumed is unknown -- hard error.
    let used = raw.used.borrow();
    for key in raw.map.keys() {
        if !used.contains(key) {
            return Err(ConfigError(format!("unknown key `{key}`")));
        }
    }
    Ok(cfg)
}

impl ExperimentConfig {
    pub fn build_initial_field(&self) -> Result<thinfilm::Field, ConfigError> {
        let a = self.problem.a;
        let nx = self.problem.nx;
        Ok(match &self.initial {
            InitialKind::Constant { value } => thinfilm::Field::constant(a, nx, *value),
            InitialKind::CosineBump { amplitude, r0 } => {
                thinfilm::Field::cosine_bump(a, nx, *amplitude, *r0)
            }
            InitialKind::ParabolicDroplet { amplitude, r0 } => {
                thinfilm::Field::parabolic_droplet(a, nx, *amplitude, *r0)
            }
            InitialKind::SourceDroplet { amplitude, r0 } => {
                thinfilm::Field::source_droplet(a, nx, *amplitude, *r0, self.problem.n)
            }
            InitialKind::File { path } => {
                let file = std::fs::File::open(path)
                    .map_err(|e| ConfigError(format!("initial.path `{path}`: {e}")))?;
                let (field, _) = thinfilm::solver::read_snapshot(std::io::BufReader::new(file))
                    .map_err(|e| ConfigError(format!("initial.path `{path}`: {e}")))?;
                field
            }
        })
    }

    /// Nominal droplet radius of the configured initial data, used as the
    /// reference for spreading traces.
    pub fn initial_radius(&self) -> Option<f64> {
        match &self.initial {
            InitialKind::CosineBump { r0, .. }
            | InitialKind::ParabolicDroplet { r0, .. }
            | InitialKind::SourceDroplet { r0, .. } => Some(*r0),
            _ => None,
        }
    }
}
