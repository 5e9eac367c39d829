//! Pentadiagonal linear solves with periodic wrap-around.
//!
//! The implicit step produces a cyclic pentadiagonal system. It is solved as
//! a banded core (single-pass elimination, no pivoting; the backward-Euler
//! matrix is strongly diagonally dominant) plus a rank-4 Woodbury correction
//! carrying the four wrap-around corners.

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinSolveError {
    #[error("pivot collapsed during banded elimination (row {0})")]
    ZeroPivot(usize),
    #[error("non-finite value produced by the linear solve")]
    NonFinite,
    #[error("system too small: n = {0}")]
    TooSmall(usize),
}

/// Cyclic pentadiagonal matrix in diagonal storage. `diag[k][i]` is the
/// entry A[i][(i + k - 2) mod n] for k = 0..5.
#[derive(Debug, Clone)]
pub struct CyclicPenta {
    pub l2: Vec<f64>,
    pub l1: Vec<f64>,
    pub d0: Vec<f64>,
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
}

impl CyclicPenta {
    pub fn zeros(n: usize) -> Self {
        CyclicPenta {
            l2: vec![0.0; n],
            l1: vec![0.0; n],
            d0: vec![0.0; n],
            u1: vec![0.0; n],
            u2: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.d0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d0.is_empty()
    }

    /// Matrix-vector product with periodic wrap.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                self.l2[i] * x[(i + n - 2) % n]
                    + self.l1[i] * x[(i + n - 1) % n]
                    + self.d0[i] * x[i]
                    + self.u1[i] * x[(i + 1) % n]
                    + self.u2[i] * x[(i + 2) % n]
            })
            .collect()
    }

    /// Solve A x = b. Returns the solution and the max-norm residual of the
    /// full cyclic system.
    pub fn solve(&self, b: &[f64]) -> Result<(Vec<f64>, f64), LinSolveError> {
        let n = self.len();
        if n < 6 {
            return Err(LinSolveError::TooSmall(n));
        }
        // Corner entries that wrap; the banded core drops them.
        let corners = [
            (0usize, n - 2, self.l2[0]),
            (0, n - 1, self.l1[0]),
            (1, n - 1, self.l2[1]),
            (n - 2, 0, self.u2[n - 2]),
            (n - 1, 0, self.u1[n - 1]),
            (n - 1, 1, self.u2[n - 1]),
        ];
        let band = BandFactors::factor(self, n)?;

        let mut y = b.to_vec();
        band.solve_in_place(&mut y)?;

        // Columns of B^-1 U for U = [e0, e1, e_{n-2}, e_{n-1}].
        let rows = [0usize, 1, n - 2, n - 1];
        let mut z = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        for (col, &r) in rows.iter().enumerate() {
            z[col][r] = 1.0;
            band.solve_in_place(&mut z[col])?;
        }

        // W^T v picks the wrapped entries: row r of A owns sum_j c_{r,j} v[j].
        let wt = |v: &[f64]| -> [f64; 4] {
            let mut out = [0.0; 4];
            for &(r, c, val) in &corners {
                let k = rows.iter().position(|&x| x == r).unwrap();
                out[k] += val * v[c];
            }
            out
        };

        // Small system (I + W^T Z) s = W^T y.
        let mut small = [[0.0f64; 5]; 4];
        for (col, zc) in z.iter().enumerate() {
            let wz = wt(zc);
            for row in 0..4 {
                small[row][col] = wz[row] + if row == col { 1.0 } else { 0.0 };
            }
        }
        let wy = wt(&y);
        for row in 0..4 {
            small[row][4] = wy[row];
        }
        let s = solve4(&mut small).ok_or(LinSolveError::ZeroPivot(usize::MAX))?;

        let mut x = y;
        for i in 0..n {
            x[i] -= s[0] * z[0][i] + s[1] * z[1][i] + s[2] * z[2][i] + s[3] * z[3][i];
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(LinSolveError::NonFinite);
        }
        let ax = self.apply(&x);
        let residual = ax
            .iter()
            .zip(b)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        Ok((x, residual))
    }
}

/// LU-style factorization of the non-cyclic pentadiagonal core.
struct BandFactors {
    al: Vec<f64>,
    be: Vec<f64>,
    ga: Vec<f64>,
    mu: Vec<f64>,
    l2: Vec<f64>,
}

impl BandFactors {
    fn factor(m: &CyclicPenta, n: usize) -> Result<Self, LinSolveError> {
        let mut al = vec![0.0; n];
        let mut be = vec![0.0; n];
        let mut ga = vec![0.0; n];
        let mut mu = vec![0.0; n];

        let piv = |v: f64, i: usize| -> Result<f64, LinSolveError> {
            if v.abs() < 1e-300 || !v.is_finite() {
                Err(LinSolveError::ZeroPivot(i))
            } else {
                Ok(v)
            }
        };

        mu[0] = piv(m.d0[0], 0)?;
        al[0] = m.u1[0] / mu[0];
        be[0] = m.u2[0] / mu[0];

        ga[1] = m.l1[1];
        mu[1] = piv(m.d0[1] - al[0] * ga[1], 1)?;
        al[1] = (m.u1[1] - be[0] * ga[1]) / mu[1];
        be[1] = m.u2[1] / mu[1];

        for i in 2..n {
            ga[i] = m.l1[i] - al[i - 2] * m.l2[i];
            mu[i] = piv(m.d0[i] - be[i - 2] * m.l2[i] - al[i - 1] * ga[i], i)?;
            if i < n - 1 {
                al[i] = (m.u1[i] - be[i - 1] * ga[i]) / mu[i];
            }
            if i < n - 2 {
                be[i] = m.u2[i] / mu[i];
            }
        }
        Ok(BandFactors { al, be, ga, mu, l2: m.l2.clone() })
    }

    fn solve_in_place(&self, rhs: &mut [f64]) -> Result<(), LinSolveError> {
        let n = rhs.len();
        rhs[0] /= self.mu[0];
        rhs[1] = (rhs[1] - rhs[0] * self.ga[1]) / self.mu[1];
        for i in 2..n {
            rhs[i] = (rhs[i] - rhs[i - 2] * self.l2[i] - rhs[i - 1] * self.ga[i]) / self.mu[i];
        }
        rhs[n - 2] -= rhs[n - 1] * self.al[n - 2];
        for i in (0..n - 2).rev() {
            rhs[i] -= rhs[i + 1] * self.al[i] + rhs[i + 2] * self.be[i];
        }
        if rhs.iter().any(|v| !v.is_finite()) {
            return Err(LinSolveError::NonFinite);
        }
        Ok(())
    }
}

/// Gaussian elimination with partial pivoting on a 4x5 augmented system.
#[allow(clippy::needless_range_loop)] // rows of `a` alias under elimination
fn solve4(a: &mut [[f64; 5]; 4]) -> Option<[f64; 4]> {
    for col in 0..4 {
        let piv = (col..4).max_by(|&i, &j| {
            a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap()
        })?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        for row in col + 1..4 {
            let f = a[row][col] / a[col][col];
            for k in col..5 {
                a[row][k] -= f * a[col][k];
            }
        }
    }
    let mut x = [0.0; 4];
    for row in (0..4).rev() {
        let mut acc = a[row][4];
        for k in row + 1..4 {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}
