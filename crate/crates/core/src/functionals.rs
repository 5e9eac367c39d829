//! Continuum functionals evaluated on discrete fields: entropies and
//! alpha-entropies (with their regularized variants), the energy, second
//! moments, weighted time accumulators, and the regularized mobilities.

use crate::field::Field;
use crate::model::ProblemParams;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FunctionalError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("nonpositive field value {value} at node {index} under a singular branch")]
    NonpositiveField { index: usize, value: f64 },
    #[error("exponent out of range: {0}")]
    ExponentOutOfRange(String),
    #[error("sample times are not strictly increasing")]
    UnorderedSamples,
}

/// Regularized mobility f_de(z) = |z|^(4+n) / (|z|^4 + eps |z|^n) + delta.
///
/// eps > 0 steepens the degeneracy near zero from z^n to z^4; delta > 0
/// makes the operator uniformly parabolic.
pub fn mobility(z: f64, n: f64, eps: f64, delta: f64) -> Result<f64, FunctionalError> {
    if z == 0.0 {
        if eps > 0.0 {
            return Ok(delta);
        }
        return Err(FunctionalError::Domain(
            "mobility at z = 0 with eps = 0 is ill-posed".into(),
        ));
    }
    let az = z.abs();
    if eps == 0.0 {
        return Ok(az.powf(n) + delta);
    }
    Ok(az.powf(4.0 + n) / (az.powi(4) + eps * az.powf(n)) + delta)
}

/// d/dz of the eps-mobility for z > 0 (the delta offset has zero slope):
/// f_e'(z) = z^(3+n) (n z^4 + 4 eps z^n) / (z^4 + eps z^n)^2.
pub fn mobility_deriv(z: f64, n: f64, eps: f64) -> f64 {
    if z <= 0.0 {
        return 0.0;
    }
    if eps == 0.0 {
        return n * z.powf(n - 1.0);
    }
    let den = z.powi(4) + eps * z.powf(n);
    z.powf(3.0 + n) * (n * z.powi(4) + 4.0 * eps * z.powf(n)) / (den * den)
}

/// Regularized pressure coupling D''_e(z) = |z|^(m-n) / (1 + eps |z|^(m-n)).
pub fn pressure_coupling(z: f64, n: f64, m: f64, eps: f64) -> Result<f64, FunctionalError> {
    let q = m - n;
    if z == 0.0 {
        if q > 0.0 {
            return Ok(0.0);
        }
        if q == 0.0 {
            return Ok(1.0 / (1.0 + eps));
        }
        // q < 0: |z|^q blows up; saturates at 1/eps when regularized.
        if eps > 0.0 {
            return Ok(1.0 / eps);
        }
        return Err(FunctionalError::Domain(
            "pressure coupling at z = 0 with m < n and eps = 0".into(),
        ));
    }
    let w = z.abs().powf(q);
    Ok(w / (1.0 + eps * w))
}

/// d/dz of D''_e for z > 0.
pub fn pressure_coupling_deriv(z: f64, n: f64, m: f64, eps: f64) -> f64 {
    if z <= 0.0 {
        return 0.0;
    }
    let q = m - n;
    let w = z.abs().powf(q);
    let den = 1.0 + eps * w;
    q * z.powf(q - 1.0) / (den * den)
}

/// Selects one convex entropy density G with G''(z) = z^alpha / f_e(z),
/// i.e. G'' = z^(alpha-n) + eps z^(alpha-4). alpha = 0 selects the plain
/// entropy with G'' = 1/z^n (plus its eps correction).
///
/// The nonnegativity offset for the middle branch is computed numerically
/// per (n, alpha, eps): the un-offset density is convex, so golden-section
/// on a log-bracketed minimum is exact enough to pin the constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropySpec {
    pub n: f64,
    pub alpha: f64,
    pub eps: f64,
    pub offset: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum EntropyBranch {
    Power,          // alpha < n-2 or alpha > n-1
    PowerWithLift,  // n-2 < alpha < n-1: + z + offset
    LogUpper,       // alpha = n-1: z ln z - z + 1
    LogLower,       // alpha = n-2: -ln z + z/e
}

impl EntropySpec {
    pub fn new(n: f64, alpha: f64, eps: f64) -> Result<Self, FunctionalError> {
        if !(n > 0.0) {
            return Err(FunctionalError::Domain(format!("n must be > 0, got {n}")));
        }
        if alpha != 0.0 && !(alpha > -0.5 && alpha < 1.0) {
            return Err(FunctionalError::ExponentOutOfRange(format!(
                "alpha must be 0 or lie in (-1/2, 1), got {alpha}"
            )));
        }
        if !(eps >= 0.0) {
            return Err(FunctionalError::Domain(format!("eps must be >= 0, got {eps}")));
        }
        let mut spec = EntropySpec { n, alpha, eps, offset: 0.0 };
        if spec.branch() == EntropyBranch::PowerWithLift {
            let raw = |z: f64| spec.density_unoffset(z);
            let (_, min) = golden_min(raw, 1e-9, 1e6);
            // Pad by an ulp-scale margin so the offset density never dips
            // below zero to rounding.
            spec.offset = (-min + 1e-12 * min.abs().max(1.0)).max(0.0);
        }
        Ok(spec)
    }

    /// Plain (alpha = 0) entropy with G'' = 1/z^n + eps/z^4.
    pub fn plain(n: f64, eps: f64) -> Result<Self, FunctionalError> {
        EntropySpec::new(n, 0.0, eps)
    }

    fn branch(&self) -> EntropyBranch {
        let a = self.alpha;
        let n = self.n;
        if a == n - 1.0 {
            EntropyBranch::LogUpper
        } else if a == n - 2.0 {
            EntropyBranch::LogLower
        } else if a > n - 2.0 && a < n - 1.0 {
            EntropyBranch::PowerWithLift
        } else {
            EntropyBranch::Power
        }
    }

    fn eps_term(&self, z: f64) -> f64 {
        if self.eps == 0.0 {
            0.0
        } else {
            let a = self.alpha;
            self.eps * z.powf(a - 2.0) / ((a - 3.0) * (a - 2.0))
        }
    }

    fn density_unoffset(&self, z: f64) -> f64 {
        let (n, a) = (self.n, self.alpha);
        let body = match self.branch() {
            EntropyBranch::LogUpper => z * z.ln() - z + 1.0,
            EntropyBranch::LogLower => -z.ln() + z / std::f64::consts::E,
            EntropyBranch::Power => {
                let e = 2.0 - n + a;
                z.powf(e) / (e * (e - 1.0))
            }
            EntropyBranch::PowerWithLift => {
                let e = 2.0 - n + a;
                z.powf(e) / (e * (e - 1.0)) + z
            }
        };
        body + self.eps_term(z)
    }

    /// Entropy density at thickness z. Errors on z <= 0 when a singular
    /// branch is selected; at z = 0 returns the finite limit when one exists.
    pub fn density(&self, z: f64) -> Result<f64, FunctionalError> {
        if z < 0.0 {
            return Err(FunctionalError::NonpositiveField { index: 0, value: z });
        }
        if z == 0.0 {
            let singular = self.eps > 0.0
                || matches!(self.branch(), EntropyBranch::LogUpper | EntropyBranch::LogLower)
                || 2.0 - self.n + self.alpha < 0.0;
            if singular && self.branch() != EntropyBranch::LogUpper {
                return Err(FunctionalError::NonpositiveField { index: 0, value: z });
            }
            // z ln z -> 0, power branch with positive exponent -> 0.
            return Ok(match self.branch() {
                EntropyBranch::LogUpper if self.eps == 0.0 => 1.0,
                _ if self.eps == 0.0 => self.offset,
                _ => return Err(FunctionalError::NonpositiveField { index: 0, value: z }),
            });
        }
        Ok(self.density_unoffset(z) + self.offset)
    }

    /// Second derivative in closed form: z^alpha / f_e(z).
    pub fn density_dd(&self, z: f64) -> f64 {
        z.powf(self.alpha - self.n) + self.eps * z.powf(self.alpha - 4.0)
    }
}

/// Rectangle-rule integral of the selected entropy density.
pub fn entropy_value(h: &Field, spec: &EntropySpec) -> Result<f64, FunctionalError> {
    let mut acc = 0.0;
    let mut comp = 0.0;
    for (i, &v) in h.values().iter().enumerate() {
        let g = spec
            .density(v)
            .map_err(|_| FunctionalError::NonpositiveField { index: i, value: v })?;
        let t = acc + g;
        if acc.abs() >= g.abs() {
            comp += (acc - t) + g;
        } else {
            comp += (g - t) + acc;
        }
        acc = t;
    }
    Ok((acc + comp) * h.dx())
}

/// Unregularized potential D_0 with D_0''(z) = z^(m-n).
pub fn potential_d0(z: f64, n: f64, m: f64) -> Result<f64, FunctionalError> {
    let q = m - n;
    if z < 0.0 {
        return Err(FunctionalError::Domain(format!("negative thickness {z}")));
    }
    if q == -2.0 {
        if z == 0.0 {
            return Err(FunctionalError::Domain("-log(z) undefined at z = 0".into()));
        }
        Ok(-z.ln())
    } else if q == -1.0 {
        if z == 0.0 {
            return Err(FunctionalError::Domain("z log(z) branch rejects z = 0".into()));
        }
        Ok(z * z.ln())
    } else {
        if z == 0.0 && q + 2.0 < 0.0 {
            return Err(FunctionalError::Domain(
                "z^(m-n+2) with negative exponent undefined at z = 0".into(),
            ));
        }
        Ok(z.powf(q + 2.0) / ((q + 1.0) * (q + 2.0)))
    }
}

/// Energy E_0 = a0/2 int h_x^2 - a1 int D_0(h), centered differences and
/// rectangle quadrature with periodic wrap.
pub fn energy(h: &Field, p: &ProblemParams) -> Result<f64, FunctionalError> {
    let grad = 0.5 * p.a0 * h.hx_sq();
    if p.a1 == 0.0 {
        return Ok(grad);
    }
    let mut pot = 0.0;
    for &v in h.values() {
        pot += potential_d0(v, p.n, p.m)?;
    }
    Ok(grad - p.a1 * pot * h.dx())
}

/// Second-moment entropy int x^2 z^(2-n)/(2-n) dx; for n = 1 this is the
/// plain second moment of h. Defined for 0 < n < 2.
pub fn second_moment_entropy(h: &Field, n: f64) -> Result<f64, FunctionalError> {
    if !(n > 0.0 && n < 2.0) {
        return Err(FunctionalError::ExponentOutOfRange(format!(
            "second-moment entropy needs 0 < n < 2, got {n}"
        )));
    }
    Ok(h.integral_with_x(|x, v| x * x * v.powf(2.0 - n) / (2.0 - n)))
}

/// One row of the run ledger: every functional the diagnostics consume.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalSample {
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
    pub entropy: f64,
    pub alpha_entropy: f64,
    pub hx_sq: f64,
    pub sup: f64,
    pub moment: f64,
    pub b1: f64,
    pub b2: f64,
    pub btilde: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightMode {
    B1,
    B2,
    Btilde,
}

/// Coefficient in front of int ||h||_inf^(2m-n) dt in the Btilde weight:
/// a1^2 |(1-n)(2-n)| / (2 a0 (m-n+1)^2). Zero exactly at n = 1.
pub fn btilde_coefficient(p: &ProblemParams) -> f64 {
    let num = ((1.0 - p.n) * (2.0 - p.n)).abs();
    p.a1 * p.a1 * num / (2.0 * p.a0 * (p.m - p.n + 1.0).powi(2))
}

/// Trapezoid-in-time accumulation of the selected weight integrand over a
/// time-ordered sample sequence. Returns the accumulated value at the final
/// sample; a single sample yields 0.
pub fn weighted_history(
    samples: &[FunctionalSample],
    p: &ProblemParams,
    mode: WeightMode,
) -> Result<f64, FunctionalError> {
    Ok(*weighted_series(samples, p, mode)?.last().unwrap_or(&0.0))
}

/// Full accumulator series aligned with the samples.
pub fn weighted_series(
    samples: &[FunctionalSample],
    p: &ProblemParams,
    mode: WeightMode,
) -> Result<Vec<f64>, FunctionalError> {
    for w in samples.windows(2) {
        if !(w[1].t > w[0].t) {
            return Err(FunctionalError::UnorderedSamples);
        }
    }
    let integrand = |s: &FunctionalSample| -> (f64, f64) {
        let lo = s.sup.powf(2.0 * p.m - p.n);
        let hi = s.sup.powf(4.0 * p.m - p.n);
        (lo, hi)
    };
    let c_lo = match mode {
        WeightMode::B1 => p.a1 * p.a1 / p.a0,
        WeightMode::B2 => p.a1 * p.a1 / (2.0 * p.a0 * (p.m - p.n + 1.0).powi(2)),
        WeightMode::Btilde => btilde_coefficient(p),
    };
    let c_hi = match mode {
        WeightMode::B2 => p.a1.powi(4) / (2.0 * p.a0.powi(3) * (2.0 * p.m - p.n + 1.0).powi(2)),
        _ => 0.0,
    };
    if c_lo == 0.0 && c_hi == 0.0 {
        return Ok(vec![0.0; samples.len()]);
    }
    let mut acc_lo = 0.0;
    let mut acc_hi = 0.0;
    let mut out = Vec::with_capacity(samples.len());
    let mut prev: Option<(f64, f64, f64)> = None;
    for s in samples {
        let (lo, hi) = integrand(s);
        if let Some((tp, lp, hp)) = prev {
            let dt = s.t - tp;
            acc_lo += 0.5 * dt * (lp + lo);
            acc_hi += 0.5 * dt * (hp + hi);
        }
        out.push(c_lo * acc_lo + c_hi * acc_hi);
        prev = Some((s.t, lo, hi));
    }
    Ok(out)
}

/// Tabulated regularized potential: D_e with D_e''(z) = |z|^(m-n)/(1+eps|z|^(m-n)),
/// normalized so D_e(0) = D_e'(0) = 0. Used by the eps-level energy identity.
#[derive(Debug, Clone)]
pub struct RegularizedPotential {
    dz: f64,
    prime: Vec<f64>,
    val: Vec<f64>,
}

impl RegularizedPotential {
    pub fn build(p: &ProblemParams, eps: f64, z_max: f64) -> Result<Self, FunctionalError> {
        let steps = 20_000usize;
        let z_max = z_max.max(1.0);
        let dz = z_max / steps as f64;
        let mut prime = Vec::with_capacity(steps + 1);
        let mut val = Vec::with_capacity(steps + 1);
        let mut dp = 0.0;
        let mut dv = 0.0;
        let mut ddl = pressure_coupling(0.0, p.n, p.m, eps)?;
        let mut pl = 0.0;
        prime.push(0.0);
        val.push(0.0);
        for k in 1..=steps {
            let z = k as f64 * dz;
            let dd = pressure_coupling(z, p.n, p.m, eps)?;
            dp += 0.5 * dz * (ddl + dd);
            dv += 0.5 * dz * (pl + dp);
            prime.push(dp);
            val.push(dv);
            ddl = dd;
            pl = dp;
        }
        Ok(RegularizedPotential { dz, prime, val })
    }

    fn interp(&self, table: &[f64], z: f64) -> f64 {
        let zz = z.max(0.0);
        let idx = zz / self.dz;
        let i = (idx.floor() as usize).min(table.len() - 2);
        let w = (idx - i as f64).clamp(0.0, 1.0);
        table[i] * (1.0 - w) + table[i + 1] * w
    }

    pub fn value(&self, z: f64) -> f64 {
        self.interp(&self.val, z)
    }

    pub fn prime(&self, z: f64) -> f64 {
        self.interp(&self.prime, z)
    }
}

/// Eps-level energy a0/2 int h_x^2 - a1 int D_e(h).
pub fn energy_eps(h: &Field, p: &ProblemParams, eps: f64) -> Result<f64, FunctionalError> {
    let grad = 0.5 * p.a0 * h.hx_sq();
    if p.a1 == 0.0 {
        return Ok(grad);
    }
    let pot = RegularizedPotential::build(p, eps, 2.0 * h.max() + 1.0)?;
    Ok(grad - p.a1 * h.integral_of(|v| pot.value(v)))
}

/// Convex scalar minimization by log-bracketed golden section.
fn golden_min(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, f64) {
    // Coarse log-spaced scan to bracket the minimum.
    let samples = 600usize;
    let ratio = (hi / lo).ln() / (samples - 1) as f64;
    let mut best = (lo, f(lo));
    let mut best_i = 0usize;
    for i in 1..samples {
        let z = lo * (ratio * i as f64).exp();
        let v = f(z);
        if v < best.1 {
            best = (z, v);
            best_i = i;
        }
    }
    let za = lo * (ratio * best_i.saturating_sub(1) as f64).exp();
    let zb = lo * (ratio * ((best_i + 1).min(samples - 1)) as f64).exp();
    // Golden section on [za, zb].
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (za, zb);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if b - a < 1e-13 * b.abs().max(1.0) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    let z = 0.5 * (a + b);
    (z, f(z).min(best.1))
}
