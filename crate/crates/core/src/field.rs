//! Grid functions on a uniform periodic 1-D mesh.

use serde::{Deserialize, Serialize};

/// Nonnegative film thickness h on the periodic grid x_i = origin + i dx.
///
/// The grid covers [origin, origin + n dx) and wraps; quadrature is the
/// rectangle rule, which on a periodic uniform mesh coincides with the
/// trapezoid rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Field {
    values: Vec<f64>,
    dx: f64,
    origin: f64,
}

impl Field {
    pub fn new(values: Vec<f64>, dx: f64, origin: f64) -> Self {
        assert!(dx > 0.0 && dx.is_finite());
        assert!(values.len() >= 8, "grid too small");
        assert!(values.iter().all(|v| v.is_finite()), "non-finite field value");
        Field { values, dx, origin }
    }

    /// Field sampled from a function of x on the domain (-a, a) with nx nodes.
    pub fn from_fn(a: f64, nx: usize, f: impl Fn(f64) -> f64) -> Self {
        let dx = 2.0 * a / nx as f64;
        let values = (0..nx).map(|i| f(-a + i as f64 * dx)).collect();
        Field::new(values, dx, -a)
    }

    pub fn constant(a: f64, nx: usize, c: f64) -> Self {
        Field::from_fn(a, nx, |_| c)
    }

    /// `amp * (1 + cos(pi x / r0))` on [-r0, r0], zero outside. C^1 at the
    /// contact points.
    pub fn cosine_bump(a: f64, nx: usize, amp: f64, r0: f64) -> Self {
        Field::from_fn(a, nx, |x| {
            if x.abs() < r0 {
                amp * (1.0 + (std::f64::consts::PI * x / r0).cos())
            } else {
                0.0
            }
        })
    }

    /// `amp * (1 - (x/r0)^2)` on [-r0, r0], zero outside. Kinked at the
    /// contact points.
    pub fn parabolic_droplet(a: f64, nx: usize, amp: f64, r0: f64) -> Self {
        Field::from_fn(a, nx, |x| (amp * (1.0 - (x / r0).powi(2))).max(0.0))
    }

    /// Droplet with the source-solution edge profile of the mobility
    /// exponent n: `amp * (1 - (x/r0)^2)^k` on [-r0, r0] with k = 2 for
    /// n < 3/2 (zero contact angle with quadratic touchdown) and k = 3/n
    /// beyond. Seeding this shape puts the dynamics on the self-similar
    /// spreading branch at once.
    pub fn source_droplet(a: f64, nx: usize, amp: f64, r0: f64, n: f64) -> Self {
        let k = if n < 1.5 { 2.0 } else { 3.0 / n };
        Field::from_fn(a, nx, |x| {
            let w = 1.0 - (x / r0).powi(2);
            if w > 0.0 {
                amp * w.powf(k)
            } else {
                0.0
            }
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn x(&self, i: usize) -> f64 {
        self.origin + i as f64 * self.dx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Rectangle-rule integral of the nodal values.
    pub fn integral(&self) -> f64 {
        neumaier_sum(self.values.iter().cloned()) * self.dx
    }

    pub fn mass(&self) -> f64 {
        self.integral()
    }

    /// Rectangle-rule integral of f(h_i).
    pub fn integral_of(&self, f: impl Fn(f64) -> f64) -> f64 {
        neumaier_sum(self.values.iter().map(|&v| f(v))) * self.dx
    }

    /// Rectangle-rule integral of f(x_i, h_i).
    pub fn integral_with_x(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        neumaier_sum(
            self.values
                .iter()
                .enumerate()
                .map(|(i, &v)| f(self.x(i), v)),
        ) * self.dx
    }

    /// Centered first difference with periodic wrap.
    pub fn deriv1(&self, i: usize) -> f64 {
        let n = self.values.len();
        (self.values[(i + 1) % n] - self.values[(i + n - 1) % n]) / (2.0 * self.dx)
    }

    /// Centered second difference with periodic wrap.
    pub fn deriv2(&self, i: usize) -> f64 {
        let n = self.values.len();
        (self.values[(i + 1) % n] - 2.0 * self.values[i] + self.values[(i + n - 1) % n])
            / (self.dx * self.dx)
    }

    /// Integral of h_x^2 with centered first differences.
    pub fn hx_sq(&self) -> f64 {
        neumaier_sum((0..self.values.len()).map(|i| self.deriv1(i).powi(2))) * self.dx
    }

    /// Integral of x^2 h_xx^2 with centered second differences, x measured
    /// from the domain layout (origin-based).
    pub fn x2_hxx_sq(&self) -> f64 {
        neumaier_sum((0..self.values.len()).map(|i| {
            let x = self.x(i);
            x * x * self.deriv2(i).powi(2)
        })) * self.dx
    }

    /// Squared H1 functional: integral of h^2 + h_x^2.
    pub fn h1_sq(&self) -> f64 {
        self.integral_of(|v| v * v) + self.hx_sq()
    }

    /// Spectral low-pass: zero all Fourier modes above `cutoff` (mode index).
    /// Plain O(N^2) DFT; used once per run on initial data.
    pub fn low_pass(&mut self, cutoff: usize) {
        let n = self.values.len();
        let mut re = vec![0.0; n];
        let mut im = vec![0.0; n];
        for k in 0..n {
            let w = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            for (j, &v) in self.values.iter().enumerate() {
                let ph = w * j as f64;
                re[k] += v * ph.cos();
                im[k] -= v * ph.sin();
            }
        }
        for k in 0..n {
            let mode = k.min(n - k);
            if mode > cutoff {
                re[k] = 0.0;
                im[k] = 0.0;
            }
        }
        for j in 0..n {
            let mut acc = 0.0;
            for k in 0..n {
                let ph = 2.0 * std::f64::consts::PI * k as f64 * j as f64 / n as f64;
                acc += re[k] * ph.cos() - im[k] * ph.sin();
            }
            self.values[j] = acc / n as f64;
        }
    }

    /// Amplitude of the cos/sin pair at wavenumber `xi` (discrete projection).
    pub fn mode_amplitude(&self, xi: f64) -> f64 {
        let n = self.values.len() as f64;
        let mut c = 0.0;
        let mut s = 0.0;
        for (i, &v) in self.values.iter().enumerate() {
            let x = self.x(i);
            c += v * (xi * x).cos();
            s += v * (xi * x).sin();
        }
        2.0 * (c * c + s * s).sqrt() / n
    }
}

/// Compensated summation; keeps long accumulations at O(eps) error.
pub fn neumaier_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn quadrature_and_derivatives() {
        let f = Field::from_fn(PI, 256, |x| 1.0 + 0.5 * x.cos());
        assert!((f.mass() - 2.0 * PI).abs() < 1e-12);
        // Integral of h_x^2 = 0.25 * pi for h = 1 + 0.5 cos x; centered
        // differences are second order.
        assert!((f.hx_sq() - 0.25 * PI).abs() < 1e-3);
        let f2 = Field::from_fn(PI, 512, |x| 1.0 + 0.5 * x.cos());
        let e1 = (f.hx_sq() - 0.25 * PI).abs();
        let e2 = (f2.hx_sq() - 0.25 * PI).abs();
        let ratio = e1 / e2;
        assert!((3.0..5.0).contains(&ratio), "ratio = {ratio}");
    }

    #[test]
    fn mode_amplitude_reads_back() {
        let f = Field::from_fn(PI, 128, |x| 1.0 + 1e-3 * (3.0 * x).cos());
        assert!((f.mode_amplitude(3.0) - 1e-3).abs() < 1e-9);
    }

    #[test]
    fn low_pass_kills_high_modes() {
        let mut f = Field::from_fn(PI, 64, |x| 1.0 + (2.0 * x).cos() + 0.5 * (30.0 * x).cos());
        f.low_pass(10);
        assert!((f.mode_amplitude(2.0) - 1.0).abs() < 1e-10);
        assert!(f.mode_amplitude(30.0) < 1e-10);
        // Mass is the k=0 mode and survives.
        assert!((f.mass() - 2.0 * PI).abs() < 1e-9);
    }

    #[test]
    fn droplet_and_bump_supports() {
        let d = Field::parabolic_droplet(4.0, 256, 1.0, 1.0);
        assert!(d.min() >= 0.0);
        assert!((d.mass() - 4.0 / 3.0).abs() < 1e-3);
        let b = Field::cosine_bump(3.0 * PI, 256, 1.5, PI);
        assert!((b.mass() - 1.5 * 2.0 * PI).abs() < 1e-2);
    }
}
