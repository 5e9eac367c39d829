//! Nonlinear Gronwall comparison: closed-form bound for
//! v(T) <= v(0) + c int_0^T max{1, v^gamma} dt.

use serde::{Deserialize, Serialize};

/// Piecewise bound: linear while v < 1, then the power-law branch
/// (v^(1-gamma) - c (gamma-1) t)^(-1/(gamma-1)), diverging in finite time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BihariBound {
    pub v0: f64,
    pub c: f64,
    pub gamma: f64,
}

impl BihariBound {
    pub fn new(v0: f64, c: f64, gamma: f64) -> Self {
        assert!(v0 >= 0.0 && c > 0.0 && gamma > 1.0);
        BihariBound { v0, c, gamma }
    }

    /// Time at which the linear branch hands over to the power branch;
    /// zero when v0 >= 1.
    pub fn crossover_time(&self) -> f64 {
        if self.v0 < 1.0 {
            (1.0 - self.v0) / self.c
        } else {
            0.0
        }
    }

    /// Time where the bound diverges.
    pub fn blow_time(&self) -> f64 {
        let g1 = self.gamma - 1.0;
        if self.v0 < 1.0 {
            self.crossover_time() + 1.0 / (self.c * g1)
        } else {
            self.v0.powf(-g1) / (self.c * g1)
        }
    }

    /// Evaluate the bound; +inf at and past the divergence time.
    pub fn eval(&self, t: f64) -> f64 {
        assert!(t >= 0.0);
        let g1 = self.gamma - 1.0;
        if self.v0 < 1.0 {
            let t0 = self.crossover_time();
            if t < t0 {
                return self.v0 + self.c * t;
            }
            let base = 1.0 - self.c * g1 * (t - t0);
            if base <= 0.0 {
                return f64::INFINITY;
            }
            base.powf(-1.0 / g1)
        } else {
            let base = self.v0.powf(-g1) - self.c * g1 * t;
            if base <= 0.0 {
                return f64::INFINITY;
            }
            base.powf(-1.0 / g1)
        }
    }
}

/// RK4 integration of the comparison ODE v' = c max{1, v^gamma}; the test
/// oracle for the closed form.
pub fn comparison_ode_rk4(v0: f64, c: f64, gamma: f64, t: f64, steps: usize) -> f64 {
    let f = |v: f64| c * 1f64.max(v.powf(gamma));
    let dt = t / steps as f64;
    let mut v = v0;
    for _ in 0..steps {
        let k1 = f(v);
        let k2 = f(v + 0.5 * dt * k1);
        let k3 = f(v + 0.5 * dt * k2);
        let k4 = f(v + dt * k3);
        v += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if !v.is_finite() {
            return f64::INFINITY;
        }
    }
    v
}
