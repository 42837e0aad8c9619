//! Tridiagonal linear solvers.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Pivots smaller than this in magnitude abort the Thomas sweep.
pub const PIVOT_FLOOR: f64 = 1e-300;

/// Thomas algorithm for a complex tridiagonal system, solved in place.
///
/// `lower[i]` multiplies x[i-1] in row i (lower[0] unused); `upper[i]`
/// multiplies x[i+1] (last entry unused). `scratch` must have the same length.
pub fn thomas_in_place(
    lower: &[Complex64],
    diag: &[Complex64],
    upper: &[Complex64],
    rhs: &mut [Complex64],
    scratch: &mut [Complex64],
) -> Result<()> {
    let n = diag.len();
    debug_assert!(lower.len() == n && upper.len() == n && rhs.len() == n && scratch.len() == n);
    if n == 0 {
        return Ok(());
    }
    let mut pivot = diag[0];
    if pivot.norm() < PIVOT_FLOOR {
        return Err(Error::SolverBreakdown { pivot: pivot.norm() });
    }
    scratch[0] = upper[0] / pivot;
    rhs[0] /= pivot;
    for i in 1..n {
        pivot = diag[i] - lower[i] * scratch[i - 1];
        if pivot.norm() < PIVOT_FLOOR {
            return Err(Error::SolverBreakdown { pivot: pivot.norm() });
        }
        scratch[i] = upper[i] / pivot;
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        let next = rhs[i + 1];
        rhs[i] -= scratch[i] * next;
    }
    Ok(())
}

/// LU factorization with partial pivoting of a real tridiagonal matrix.
///
/// Row swaps fill in a second superdiagonal, so U has bandwidth two. Used for
/// inverse iteration, where the shifted matrix is nearly singular and the
/// unpivoted Thomas sweep is unstable.
#[derive(Debug, Clone)]
pub struct PivotedTridiagLu {
    l: Vec<f64>,
    u0: Vec<f64>,
    u1: Vec<f64>,
    u2: Vec<f64>,
    swapped: Vec<bool>,
}

impl PivotedTridiagLu {
    pub fn factor(lower: &[f64], diag: &[f64], upper: &[f64]) -> Self {
        let n = diag.len();
        let mut u0 = diag.to_vec();
        let mut u1: Vec<f64> = (0..n).map(|i| if i + 1 < n { upper[i] } else { 0.0 }).collect();
        let mut u2 = vec![0.0; n];
        let mut l = vec![0.0; n];
        let mut swapped = vec![false; n];
        for i in 0..n.saturating_sub(1) {
            // Row i+1 currently reads: lower[i+1], diag[i+1], upper[i+1].
            let mut below = [lower[i + 1], u0[i + 1], if i + 2 < n { upper[i + 1] } else { 0.0 }];
            if below[0].abs() > u0[i].abs() {
                swapped[i] = true;
                let top = [u0[i], u1[i], u2[i]];
                u0[i] = below[0];
                u1[i] = below[1];
                u2[i] = below[2];
                below = top;
            }
            let pivot = if u0[i] == 0.0 { f64::MIN_POSITIVE } else { u0[i] };
            u0[i] = pivot;
            let m = below[0] / pivot;
            l[i] = m;
            u0[i + 1] = below[1] - m * u1[i];
            u1[i + 1] = below[2] - m * u2[i];
        }
        if n > 0 && u0[n - 1] == 0.0 {
            u0[n - 1] = f64::MIN_POSITIVE;
        }
        Self { l, u0, u1, u2, swapped }
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.u0.len();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                b.swap(i, i + 1);
            }
            b[i + 1] -= self.l[i] * b[i];
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            if i + 1 < n {
                s -= self.u1[i] * b[i + 1];
            }
            if i + 2 < n {
                s -= self.u2[i] * b[i + 2];
            }
            b[i] = s / self.u0[i];
        }
    }
}
