//! Interpolation constants and the a-priori constants chain feeding the
//! local existence-time estimate.

use crate::field::Field;
use crate::functionals::{entropy_value, EntropySpec, FunctionalError};
use crate::model::{interp_k1, interp_k2, ProblemParams};
use crate::solver::SolverConfig;
use serde::{Deserialize, Serialize};

/// Poincare constant b1 = |Omega|^p for zero-mean H1 functions.
pub fn b1(p_exp: f64, omega_len: f64) -> f64 {
    omega_len.powf(p_exp)
}

/// Interpolation constant b2 = (1 + r/2)^(a p), a = (1/r - 1/p)/(1/r + 1/2).
pub fn b2(p_exp: f64, r: f64) -> f64 {
    let a = (1.0 / r - 1.0 / p_exp) / (1.0 / r + 0.5);
    (1.0 + r / 2.0).powf(a * p_exp)
}

/// ||v||_p^p <= b3 ||v_x||_2^p for zero-mean v.
pub fn b3(p_exp: f64, omega_len: f64) -> f64 {
    if p_exp <= 2.0 {
        b1(p_exp, omega_len) * omega_len.powf((2.0 - p_exp) / p_exp)
    } else {
        b1(p_exp, omega_len).powf((p_exp + 2.0) / 2.0) * b2(p_exp, 2.0)
    }
}

pub fn b4(p_exp: f64, omega_len: f64) -> f64 {
    2f64.powf(p_exp - 1.0) * b3(p_exp, omega_len)
}

pub fn b5(p_exp: f64, omega_len: f64) -> f64 {
    (2.0 / omega_len).powf(p_exp - 1.0)
}

/// ||h||_p^p <= (coeff on ||h_x||_2^p, coeff on M^p); the 0 < p < 1 variant
/// switches to the tilde form.
pub fn lp_h1_coeffs(p_exp: f64, omega_len: f64) -> (f64, f64) {
    if p_exp >= 1.0 {
        (b4(p_exp, omega_len), b5(p_exp, omega_len))
    } else {
        let w = omega_len.powf(1.0 - p_exp / 2.0);
        (
            w * b4(p_exp, omega_len).powf(p_exp / 2.0),
            w * b5(p_exp, omega_len).powf(p_exp / 2.0),
        )
    }
}

/// Upper bound on ||h||_p^p for nonnegative h with mass M:
/// k1 M^((p+2)/3) (int h_x^2)^((p-1)/3) + k2 M^p. At p = 1 the norm is the
/// mass itself.
pub fn interpolation_bound(
    p_exp: f64,
    mass: f64,
    hx_sq: f64,
    eps_interp: f64,
    omega_len: f64,
) -> f64 {
    assert!(p_exp >= 1.0 && mass > 0.0 && hx_sq >= 0.0);
    assert!(eps_interp > 0.0 && eps_interp < 1.0);
    if p_exp == 1.0 {
        return mass;
    }
    let k1 = interp_k1(p_exp, eps_interp);
    let k2 = interp_k2(p_exp, eps_interp, omega_len);
    k1 * mass.powf((p_exp + 2.0) / 3.0) * hx_sq.powf((p_exp - 1.0) / 3.0) + k2 * mass.powf(p_exp)
}

/// The constants chain behind the H1+entropy Gronwall argument, evaluated
/// per the printed formulas. `p_exponent` records the dominant usage site
/// p = 2(2m - n); the c's use per-site exponents internally.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsLedger {
    pub p_exponent: f64,
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    pub b4: f64,
    pub b5: f64,
    pub b4_tilde: Option<f64>,
    pub b5_tilde: Option<f64>,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub c5: f64,
    pub c6: f64,
    pub c7: f64,
    pub c8: f64,
    pub c9: f64,
    pub c10: f64,
    pub c11: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
    /// Cap on int h_x^2 + (2 c2/a0) G0(h) over the local time interval:
    /// 2^(1/(gamma1-1)) max{1, initial value}.
    pub k_cap: f64,
}

pub fn constants_chain(
    p: &ProblemParams,
    cfg: &SolverConfig,
    mass: f64,
    entropy0: f64,
    hx0_sq: f64,
) -> ConstantsLedger {
    let omega = p.domain_len();
    let p4 = 2.0 * (2.0 * p.m - p.n);
    let p8 = 2.0 * (p.m - p.n + 1.0);
    let (b4_4, b5_4) = lp_h1_coeffs(p4, omega);
    let (b4_8, b5_8) = lp_h1_coeffs(p8, omega);
    let mn1 = p.m - p.n + 1.0;
    let a0 = p.a0;
    let a1 = p.a1;

    let c1 = mass.powf(p4) * b5_4 / 2.0;
    let c2 = a1 * a1 / (4.0 * a0);
    let c3 = a1 * a1 * b2(4.0, 2.0).powi(2) / (16.0 * a0);
    let c4 = a1 * a1 * b4_4 / (4.0 * a0);
    let c5 = a1 * a1 / (2.0 * a0) * cfg.delta / (cfg.eps * cfg.eps);
    let c6 = a1 * a1 / (2.0 * a0) * c1;
    let c7 = c3 + c4 + c5 + c6;
    let (c8, c9) = if mn1 != 0.0 {
        (
            a1 * a1 * b4_8 / (2.0 * a0 * mn1 * mn1),
            a1 * a1 * b5_8 * mass.powf(p8) / (2.0 * a0 * mn1 * mn1),
        )
    } else {
        (f64::INFINITY, f64::INFINITY)
    };
    let c10 = c8 + c9;
    // Absorbing (2 c2/a0) * c10 * int max{1, (int h_x^2)^gamma} gives the
    // coefficient 2 c2 c10 / a0; the local time below then stays bounded
    // away from zero as eps -> 0, which the continuation relies on.
    let c11 = 2.0 * c2 * c10 / a0 + 2.0 * c7;
    let gamma1 = 3f64.max(2.0 * p.m - p.n);
    let gamma2 = 3f64.max(p.m - p.n + 1.0);
    let alpha = cfg.alpha;
    let gamma3 = (alpha / 2.0 + p.m - p.n + 1.0).max(2.0 * p.m - p.n + 1.0 - alpha / 2.0);
    let v0 = hx0_sq + 2.0 * c2 / a0 * entropy0;
    let k_cap = 2f64.powf(1.0 / (gamma1 - 1.0)) * 1f64.max(v0);

    ConstantsLedger {
        p_exponent: p4,
        b1: b1(p4, omega),
        // The chain uses the (p, r) = (4, 2) instance in c3.
        b2: b2(4.0, 2.0),
        b3: b3(p4, omega),
        b4: b4(p4, omega),
        b5: b5(p4, omega),
        b4_tilde: (p4 < 1.0).then(|| lp_h1_coeffs(p4, omega).0),
        b5_tilde: (p4 < 1.0).then(|| lp_h1_coeffs(p4, omega).1),
        c1,
        c2,
        c3,
        c4,
        c5,
        c6,
        c7,
        c8,
        c9,
        c10,
        c11,
        gamma1,
        gamma2,
        gamma3,
        k_cap,
    }
}

/// Segment length of the continuation schedule:
/// (9/20) / (c11 (gamma1 - 1)) min{1, v^-(gamma1-1)} with
/// v = int h_x^2 + (2 c2/a0) G0(h).
pub fn tloc_estimate(
    ledger: &ConstantsLedger,
    h: &Field,
    p: &ProblemParams,
) -> Result<f64, FunctionalError> {
    let entropy_term = if ledger.c2 == 0.0 {
        0.0
    } else {
        let spec = EntropySpec::plain(p.n, 0.0)?;
        2.0 * ledger.c2 / p.a0 * entropy_value(h, &spec)?
    };
    let v = h.hx_sq() + entropy_term;
    let g1 = ledger.gamma1;
    Ok(0.45 / (ledger.c11 * (g1 - 1.0)) * 1f64.min(v.powf(-(g1 - 1.0))))
}

/// Constants of the subcritical H1 bound
/// a0/4 ||h||_H1^2 <= E0(0) + c1 M^((m-n+4)/(2-m+n)) + c2 M^(m-n+2) + c3 M^2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubcriticalBounds {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub m: f64,
    pub n: f64,
    pub a0: f64,
}

pub fn subcritical_bounds(p: &ProblemParams, eps_interp: f64) -> SubcriticalBounds {
    let q = p.m - p.n;
    let d = (q + 1.0) * (q + 2.0);
    let kk1 = interp_k1(q + 2.0, eps_interp);
    let kk2 = interp_k2(q + 2.0, eps_interp, p.domain_len());
    let two_minus = 2.0 - p.m + p.n;
    let c1 = (p.a1 * kk1 / d).powf(3.0 / two_minus)
        * (8.0 * (q + 1.0) / (3.0 * p.a0)).powf((q + 1.0) / two_minus)
        * two_minus
        / 3.0;
    let c2 = p.a1 * kk2 / d;
    let c3 = p.a0 / 2.0 * (8.0 * 3f64.sqrt() / 3.0 + 1.0 / p.domain_len());
    SubcriticalBounds { c1, c2, c3, m: p.m, n: p.n, a0: p.a0 }
}

impl SubcriticalBounds {
    /// The mass-only part of the bound.
    pub fn k_of_mass(&self, mass: f64) -> f64 {
        let q = self.m - self.n;
        self.c1 * mass.powf((q + 4.0) / (2.0 - q)) + self.c2 * mass.powf(q + 2.0)
            + self.c3 * mass * mass
    }

    /// Upper bound on ||h(T)||_H1^2 along the continuation.
    pub fn h1_sq_cap(&self, e0: f64, mass: f64) -> f64 {
        4.0 / self.a0 * (e0 + self.k_of_mass(mass))
    }
}

/// Linear growth rate of the entropy along the continuation schedule:
/// G0(h(T_k)) <= G0(h0) + beta T_k with
/// beta = c10 max{1, 4/a0 (E0 + K)}^gamma2.
pub fn entropy_growth_beta(
    ledger: &ConstantsLedger,
    sub: &SubcriticalBounds,
    e0: f64,
    mass: f64,
) -> f64 {
    let factor = (4.0 / sub.a0 * (e0 + sub.k_of_mass(mass))).max(1.0);
    ledger.c10 * factor.powf(ledger.gamma2)
}
