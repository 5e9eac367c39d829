//! Extinction evaluator for systems of recursive functional inequalities
//! G_i(s + d) <= c_i (sum_j G_j(s)/d^alpha_j)^beta_i with beta_i > 1:
//! produces an s0 past which the alpha-positive components vanish.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StampacchiaError {
    #[error("hypothesis H(s1) = {h} >= 1; no extinction point follows")]
    HypothesisFailed { h: f64 },
    #[error("malformed system: {0}")]
    BadShape(String),
}

/// System data: constants, exponents, the count `ell` of components with
/// strictly positive alpha, sampled nonincreasing tables for the G_i, and
/// the undetermined ladder constant c (> 1) supplied by the user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StampacchiaSystem {
    pub c: Vec<f64>,
    pub beta: Vec<f64>,
    pub alpha: Vec<f64>,
    pub ell: usize,
    /// Sampled (s, G_i(s)) tables, s increasing, values nonincreasing.
    pub g_tables: Vec<Vec<(f64, f64)>>,
    pub c_user: f64,
}

impl StampacchiaSystem {
    fn validate(&self) -> Result<(), StampacchiaError> {
        let m = self.c.len();
        let bad = |msg: String| Err(StampacchiaError::BadShape(msg));
        if m == 0 || self.beta.len() != m || self.alpha.len() != m || self.g_tables.len() != m {
            return bad("mismatched component counts".into());
        }
        if self.ell > m {
            return bad(format!("ell = {} exceeds m = {m}", self.ell));
        }
        for (i, &b) in self.beta.iter().enumerate() {
            if !(b > 1.0) {
                return bad(format!("beta[{i}] = {b} must exceed 1"));
            }
        }
        for (i, &c) in self.c.iter().enumerate() {
            if !(c > 0.0) {
                return bad(format!("c[{i}] = {c} must be positive"));
            }
        }
        for (i, &a) in self.alpha.iter().enumerate() {
            if a < 0.0 || (i < self.ell && a == 0.0) {
                return bad(format!("alpha[{i}] = {a} invalid for ell = {}", self.ell));
            }
        }
        if !(self.c_user > 1.0) {
            return bad(format!(
                "the extinction ladder constant must exceed 1, got {}",
                self.c_user
            ));
        }
        Ok(())
    }

    /// G_i at s by linear interpolation on the sampled table (clamped).
    pub fn eval_g(&self, i: usize, s: f64) -> f64 {
        let table = &self.g_tables[i];
        if table.is_empty() {
            return 0.0;
        }
        if s <= table[0].0 {
            return table[0].1;
        }
        if s >= table[table.len() - 1].0 {
            return table[table.len() - 1].1;
        }
        let j = table.partition_point(|&(x, _)| x <= s) - 1;
        let (x0, y0) = table[j];
        let (x1, y1) = table[j + 1];
        if x1 == x0 {
            return y0;
        }
        y0 + (y1 - y0) * (s - x0) / (x1 - x0)
    }
}

/// Evaluate the printed extinction point:
/// s0 = s1 + c sum_{i<=ell} (A_i Abar_i^(1-beta_i) G(s1)^(beta_i-1))^(1/(alpha_i beta))
/// where A_i = c_i^(beta/beta_i), Abar_i = prod_{j != i} A_j,
/// G(s1) = sum_i Abar_i G_i(s1)^(beta/beta_i), and the hypothesis
/// H(s1) = m^beta sum_{i>ell} A_i Abar_i^(1-beta_i) G_i(s1)^(beta_i-1) < 1.
pub fn stampacchia_s0(sys: &StampacchiaSystem, s1: f64) -> Result<f64, StampacchiaError> {
    sys.validate()?;
    let m = sys.c.len();
    let beta: f64 = sys.beta.iter().product();
    let a: Vec<f64> = (0..m).map(|i| sys.c[i].powf(beta / sys.beta[i])).collect();
    let abar: Vec<f64> = (0..m)
        .map(|i| {
            (0..m)
                .filter(|&j| j != i)
                .map(|j| a[j])
                .product::<f64>()
        })
        .collect();
    let g_total: f64 = (0..m)
        .map(|i| abar[i] * sys.eval_g(i, s1).powf(beta / sys.beta[i]))
        .sum();
    let h: f64 = (m as f64).powf(beta)
        * (sys.ell..m)
            .map(|i| {
                a[i] * abar[i].powf(1.0 - sys.beta[i]) * sys.eval_g(i, s1).powf(sys.beta[i] - 1.0)
            })
            .sum::<f64>();
    if h >= 1.0 {
        return Err(StampacchiaError::HypothesisFailed { h });
    }
    let sum: f64 = (0..sys.ell)
        .map(|i| {
            (a[i] * abar[i].powf(1.0 - sys.beta[i]) * g_total.powf(sys.beta[i] - 1.0))
                .powf(1.0 / (sys.alpha[i] * beta))
        })
        .sum();
    Ok(s1 + sys.c_user * sum)
}
