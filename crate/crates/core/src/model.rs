//! Problem parameters, regime classification, and the linear dispersion
//! relation for `h_t = -a0 (h^n h_xxx)_x - a1 (h^m h_x)_x`.

use crate::rational::{Rational, RationalError};
use serde::{Deserialize, Serialize};

/// Interpolation parameter used when no explicit choice is made; the
/// sharp-constant lemma leaves it free in (0, 1).
pub const DEFAULT_EPS_INTERP: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("critical mass is only defined in the critical regime m = n + 2")]
    NotCritical,
    #[error("critical mass requires a1 > 0")]
    ZeroDestabilization,
    #[error(transparent)]
    Rational(#[from] RationalError),
}

/// Mass-conserving balance between the stabilizing fourth-order term and the
/// destabilizing second-order term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    Subcritical,
    Critical,
    Supercritical,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Regime::Subcritical => "Subcritical",
            Regime::Critical => "Critical",
            Regime::Supercritical => "Supercritical",
        };
        f.write_str(s)
    }
}

/// Exponents, coefficients, domain half-width and grid size.
///
/// `n` and `m` are carried both as f64 (for arithmetic) and as exact
/// rationals (for the regime trichotomy, which tests `m = n + 2` exactly).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    pub n: f64,
    pub m: f64,
    pub a0: f64,
    pub a1: f64,
    /// Domain half-width; the domain is (-a, a) with periodic wrap.
    pub a: f64,
    pub nx: usize,
    #[serde(skip, default = "unset_rational")]
    n_exact: Option<Rational>,
    #[serde(skip, default = "unset_rational")]
    m_exact: Option<Rational>,
}

fn unset_rational() -> Option<Rational> {
    None
}

impl ProblemParams {
    pub fn new(n: f64, m: f64, a0: f64, a1: f64, a: f64, nx: usize) -> Result<Self, ModelError> {
        let p = ProblemParams {
            n,
            m,
            a0,
            a1,
            a,
            nx,
            n_exact: Rational::from_f64_exact(n).ok(),
            m_exact: Rational::from_f64_exact(m).ok(),
        };
        p.validate()?;
        Ok(p)
    }

    /// Construct with exponents given as decimal text, parsed exactly. This
    /// is the path configuration files take, so that e.g. n = 0.1, m = 2.1
    /// lands exactly on the critical line.
    pub fn from_decimal_exponents(
        n: &str,
        m: &str,
        a0: f64,
        a1: f64,
        a: f64,
        nx: usize,
    ) -> Result<Self, ModelError> {
        let n_exact = Rational::from_decimal_str(n)?;
        let m_exact = Rational::from_decimal_str(m)?;
        Self::from_rationals(n_exact, m_exact, a0, a1, a, nx)
    }

    /// Construct with exact rational exponents (parameter sweeps step the
    /// grid in rational arithmetic so the critical line stays exact).
    pub fn from_rationals(
        n: Rational,
        m: Rational,
        a0: f64,
        a1: f64,
        a: f64,
        nx: usize,
    ) -> Result<Self, ModelError> {
        let p = ProblemParams {
            n: n.to_f64(),
            m: m.to_f64(),
            a0,
            a1,
            a,
            nx,
            n_exact: Some(n),
            m_exact: Some(m),
        };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<(), ModelError> {
        if !(self.n > 0.0) {
            return Err(ModelError::InvalidParam(format!("n must be > 0, got {}", self.n)));
        }
        if !(self.m > 0.0) {
            return Err(ModelError::InvalidParam(format!("m must be > 0, got {}", self.m)));
        }
        if !(self.a0 > 0.0) {
            return Err(ModelError::InvalidParam(format!("a0 must be > 0, got {}", self.a0)));
        }
        if !(self.a1 >= 0.0) {
            return Err(ModelError::InvalidParam(format!("a1 must be >= 0, got {}", self.a1)));
        }
        if !(self.a > 0.0) {
            return Err(ModelError::InvalidParam(format!("a must be > 0, got {}", self.a)));
        }
        if self.nx < 16 || !self.nx.is_multiple_of(2) {
            return Err(ModelError::InvalidParam(format!(
                "nx must be even and >= 16, got {}",
                self.nx
            )));
        }
        Ok(())
    }

    pub fn domain_len(&self) -> f64 {
        2.0 * self.a
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.a / self.nx as f64
    }

    /// m - (n + 2) decided exactly when both exponents are exactly known,
    /// with an f64 fallback otherwise.
    fn criticality(&self) -> std::cmp::Ordering {
        match (self.m_exact, self.n_exact) {
            (Some(m), Some(n)) => m.cmp(&n.add_int(2)),
            _ => self
                .m
                .partial_cmp(&(self.n + 2.0))
                .expect("exponents are finite"),
        }
    }
}

/// Regime plus the applicability of the three quantitative theorems
/// (short-time existence, finite speed of propagation, finite-time blow-up).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub regime: Regime,
    pub existence_ok: bool,
    pub fsp_ok: bool,
    pub blowup_ok: bool,
    /// Neutral-stability wavenumber for a constant state of height 1.
    pub unstable_band_edge: f64,
    /// Mass threshold below which the H1 norm stays bounded; only defined on
    /// the critical line with a1 > 0.
    pub critical_mass: Option<f64>,
}

pub fn classify_regime(p: &ProblemParams) -> Regime {
    match p.criticality() {
        std::cmp::Ordering::Less => Regime::Subcritical,
        std::cmp::Ordering::Equal => Regime::Critical,
        std::cmp::Ordering::Greater => Regime::Supercritical,
    }
}

/// Evaluates the printed theorem regions:
///
/// * existence: n > 0 and m >= n/2;
/// * finite speed: (0 < n <= 1/2 and n/2 < m < 6 - n) or (1/2 < n < 3 and m >= n/2);
/// * blow-up: (0 < n <= 1/2 and 4 - n <= m < 6 - n) or (1/2 < n <= 1 and m >= 4 - n)
///   or (1 < n < 2 and m >= n + 2).
pub fn theorem_applicability(p: &ProblemParams) -> RegimeReport {
    let (n, m) = (p.n, p.m);
    let existence_ok = n > 0.0 && m >= n / 2.0;
    let fsp_ok = (n > 0.0 && n <= 0.5 && m > n / 2.0 && m < 6.0 - n)
        || (n > 0.5 && n < 3.0 && m >= n / 2.0);
    let blowup_ok = (n > 0.0 && n <= 0.5 && m >= 4.0 - n && m < 6.0 - n)
        || (n > 0.5 && n <= 1.0 && m >= 4.0 - n)
        || (n > 1.0 && n < 2.0 && m >= n + 2.0);
    debug_assert!(!blowup_ok || existence_ok);
    let regime = classify_regime(p);
    let critical_mass = if regime == Regime::Critical && p.a1 > 0.0 {
        critical_mass(p, DEFAULT_EPS_INTERP).ok()
    } else {
        None
    };
    RegimeReport {
        regime,
        existence_ok,
        fsp_ok,
        blowup_ok,
        unstable_band_edge: band_edge(1.0, p),
        critical_mass,
    }
}

/// Growth rate of a perturbation `cos(xi x)` of the constant state `hbar`:
/// sigma = -a0 xi^2 hbar^n (xi^2 - (a1/a0) hbar^(m-n)).
pub fn growth_rate(xi: f64, hbar: f64, p: &ProblemParams) -> f64 {
    assert!(hbar > 0.0, "growth_rate needs a positive base state");
    let xi2 = xi * xi;
    -p.a0 * xi2 * hbar.powf(p.n) * (xi2 - p.a1 / p.a0 * hbar.powf(p.m - p.n))
}

/// Wavenumber where the growth rate changes sign for the given base state.
pub fn band_edge(hbar: f64, p: &ProblemParams) -> f64 {
    (p.a1 / p.a0 * hbar.powf(p.m - p.n)).sqrt()
}

/// Wavenumber maximizing the growth rate: xi*^2 = a1 hbar^(m-n) / (2 a0).
pub fn fastest_mode(hbar: f64, p: &ProblemParams) -> f64 {
    (p.a1 / (2.0 * p.a0) * hbar.powf(p.m - p.n)).sqrt()
}

/// Critical mass on the line m = n + 2:
/// M_c = sqrt(6 a0 / (a1 k1)) with k1 the interpolation constant at p = 4.
pub fn critical_mass(p: &ProblemParams, eps_interp: f64) -> Result<f64, ModelError> {
    if classify_regime(p) != Regime::Critical {
        return Err(ModelError::NotCritical);
    }
    if p.a1 <= 0.0 {
        return Err(ModelError::ZeroDestabilization);
    }
    if !(eps_interp > 0.0 && eps_interp < 1.0) {
        return Err(ModelError::InvalidParam(format!(
            "eps_interp must lie in (0,1), got {eps_interp}"
        )));
    }
    let k1 = interp_k1(4.0, eps_interp);
    Ok((6.0 * p.a0 / (p.a1 * k1)).sqrt())
}

/// k1 = 2^((4-p)/3) 3^(2(p-1)/3) / (1 - eps).
pub fn interp_k1(p_exp: f64, eps_interp: f64) -> f64 {
    2f64.powf((4.0 - p_exp) / 3.0) * 3f64.powf(2.0 * (p_exp - 1.0) / 3.0) / (1.0 - eps_interp)
}

/// k2 = |Omega|^(1-p) (1 - (1-eps)^(1/(p-1)))^(1-p).
pub fn interp_k2(p_exp: f64, eps_interp: f64, omega_len: f64) -> f64 {
    omega_len.powf(1.0 - p_exp)
        * (1.0 - (1.0 - eps_interp).powf(1.0 / (p_exp - 1.0))).powf(1.0 - p_exp)
}
