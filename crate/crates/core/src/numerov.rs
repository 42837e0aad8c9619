//! Fourth-order compact (Numerov) discretization of −(ħ²/2m)∂² + V on a
//! Dirichlet grid, and its lowest eigenpairs.
//!
//! With M = tridiag(1, 10, 1)/12 and K = κ·tridiag(−1, 2, −1), κ = ħ²/(2m dx²),
//! the discrete Hamiltonian is H = M⁻¹K + diag(V). M and K commute, so H is
//! real symmetric. Its eigenproblem is the pencil (K + M·V) f = E·M f.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::grid::{Grid, UnitSystem};
use crate::tridiag::PivotedTridiagLu;

/// Off-diagonal weight of the mass matrix.
pub const MASS_OFF: f64 = 1.0 / 12.0;
/// Diagonal weight of the mass matrix.
pub const MASS_DIAG: f64 = 10.0 / 12.0;

const BISECTION_ITERATIONS: usize = 200;
const INVERSE_ITERATIONS: usize = 3;

/// The compact operator restricted to interior grid points.
#[derive(Debug, Clone)]
pub struct NumerovOperator {
    kappa: f64,
    potential: Vec<f64>,
}

impl NumerovOperator {
    /// `potential` holds V on every grid point; the two endpoints are dropped.
    pub fn new(grid: &Grid, potential: &[f64], units: UnitSystem) -> Result<Self> {
        if potential.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        if !potential.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidSpec("potential samples must be finite".into()));
        }
        let kappa = units.kinetic_prefactor() / (grid.dx() * grid.dx());
        Ok(Self { kappa, potential: potential[1..potential.len() - 1].to_vec() })
    }

    /// Same as `new` but with κ scaled by `1 + stencil_error`; used to inject
    /// faults into self-checks.
    pub fn with_perturbed_stencil(grid: &Grid, potential: &[f64], units: UnitSystem, stencil_error: f64) -> Result<Self> {
        let mut op = Self::new(grid, potential, units)?;
        op.kappa *= 1.0 + stencil_error;
        Ok(op)
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Number of interior unknowns.
    pub fn dim(&self) -> usize {
        self.potential.len()
    }

    fn potential_span(&self) -> (f64, f64) {
        self.potential
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    /// Bisection needs every off-diagonal product of K + M(V − λ) to be
    /// positive, which holds when the potential varies by less than 12κ.
    fn check_resolution(&self) -> Result<()> {
        let (lo, hi) = self.potential_span();
        if hi - lo >= 12.0 * self.kappa {
            return Err(Error::UnderResolved(format!(
                "potential range {:.3e} exceeds 12ħ²/(2m dx²) = {:.3e}; refine the grid",
                hi - lo,
                12.0 * self.kappa
            )));
        }
        Ok(())
    }

    /// Rows of K + M(V − λ) as (lower, diag, upper).
    fn shifted_rows(&self, lambda: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let n = self.dim();
        let v = &self.potential;
        let lower = (0..n).map(|i| if i > 0 { -self.kappa + MASS_OFF * (v[i - 1] - lambda) } else { 0.0 }).collect();
        let diag = (0..n).map(|i| 2.0 * self.kappa + MASS_DIAG * (v[i] - lambda)).collect();
        let upper = (0..n)
            .map(|i| if i + 1 < n { -self.kappa + MASS_OFF * (v[i + 1] - lambda) } else { 0.0 })
            .collect();
        (lower, diag, upper)
    }

    /// Number of eigenvalues strictly below `lambda`.
    pub fn count_below(&self, lambda: f64) -> usize {
        let n = self.dim();
        let v = &self.potential;
        let k = self.kappa;
        let mut count = 0;
        let mut p = 2.0 * k + MASS_DIAG * (v[0] - lambda);
        if p < 0.0 {
            count += 1;
        }
        for i in 1..n {
            let b = -k + MASS_OFF * (v[i] - lambda);
            let c = -k + MASS_OFF * (v[i - 1] - lambda);
            if p == 0.0 {
                p = f64::EPSILON * k;
            }
            p = 2.0 * k + MASS_DIAG * (v[i] - lambda) - b * c / p;
            if p < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Lowest `k` eigenvalues by Sturm-sequence bisection.
    pub fn eigenvalues(&self, k: usize) -> Result<Vec<f64>> {
        self.check_resolution()?;
        if k == 0 {
            return Ok(Vec::new());
        }
        if k > self.dim() {
            return Err(Error::ConvergenceFailure(format!("requested {k} eigenvalues from a {}-point problem", self.dim())));
        }
        let (vmin, vmax) = self.potential_span();
        let lower = vmin;
        let upper = vmax + 6.0 * self.kappa;
        if self.count_below(upper) < k || self.count_below(lower) > 0 {
            return Err(Error::ConvergenceFailure("eigenvalue bracket does not enclose the requested states".into()));
        }
        let mut out = Vec::with_capacity(k);
        for j in 0..k {
            let mut lo = out.last().copied().unwrap_or(lower);
            let mut hi = upper;
            for _ in 0..BISECTION_ITERATIONS {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if self.count_below(mid) > j {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            out.push(0.5 * (lo + hi));
        }
        Ok(out)
    }

    /// Interior eigenvectors for the given eigenvalues, Euclidean-orthonormal.
    pub fn eigenvectors(&self, eigenvalues: &[f64]) -> Result<Vec<Vec<f64>>> {
        let n = self.dim();
        let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(eigenvalues.len());
        for (j, &lambda) in eigenvalues.iter().enumerate() {
            let shift = lambda - 1e-12 * lambda.abs().max(self.kappa * 1e-6);
            let (lo, di, up) = self.shifted_rows(shift);
            let lu = PivotedTridiagLu::factor(&lo, &di, &up);
            // Deterministic start vector with components along every mode.
            let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * ((i as f64 + 1.0) * 0.7 + j as f64).sin()).collect();
            for _ in 0..INVERSE_ITERATIONS {
                let mut y = mass_apply(&x);
                lu.solve_in_place(&mut y);
                for prev in &vectors {
                    let proj: f64 = prev.iter().zip(&y).map(|(a, b)| a * b).sum();
                    y.iter_mut().zip(prev).for_each(|(yi, pi)| *yi -= proj * pi);
                }
                let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
                if !(norm.is_finite() && norm > 0.0) {
                    return Err(Error::ConvergenceFailure(format!("inverse iteration collapsed for state {j}")));
                }
                x = y.into_iter().map(|v| v / norm).collect();
            }
            vectors.push(x);
        }
        Ok(vectors)
    }

    /// H·f for interior vectors, solving M z = K f.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut kf: Vec<f64> = (0..n)
            .map(|i| {
                let left = if i > 0 { f[i - 1] } else { 0.0 };
                let right = if i + 1 < n { f[i + 1] } else { 0.0 };
                self.kappa * (2.0 * f[i] - left - right)
            })
            .collect();
        let lo = vec![MASS_OFF; n];
        let di = vec![MASS_DIAG; n];
        PivotedTridiagLu::factor(&lo, &di, &lo).solve_in_place(&mut kf);
        kf.iter().zip(f).zip(&self.potential).map(|((a, fi), v)| a + v * fi).collect()
    }

    /// All eigenvalues from a dense symmetric solve; the reference oracle.
    ///
    /// Builds M^{-1/2}(K + M·V)M^{-1/2}, which is similar to H.
    pub fn dense_eigenvalues(&self) -> Vec<f64> {
        let n = self.dim();
        let mass = DMatrix::from_fn(n, n, |i, j| match i.abs_diff(j) {
            0 => MASS_DIAG,
            1 => MASS_OFF,
            _ => 0.0,
        });
        let m_eig = SymmetricEigen::new(mass);
        let inv_sqrt = DMatrix::from_diagonal(&m_eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
        let m_inv_sqrt = &m_eig.eigenvectors * inv_sqrt * m_eig.eigenvectors.transpose();
        let kinetic = DMatrix::from_fn(n, n, |i, j| match i.abs_diff(j) {
            0 => 2.0 * self.kappa,
            1 => -self.kappa,
            _ => 0.0,
        });
        let v = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.potential));
        // M^{-1/2} K M^{-1/2} = M^{-1}K because M and K commute.
        let h = &m_inv_sqrt * kinetic * &m_inv_sqrt + v;
        let h = (&h + h.transpose()) * 0.5;
        let mut vals: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
        vals.sort_by(f64::total_cmp);
        vals
    }
}

fn mass_apply(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|i| {
            let left = if i > 0 { x[i - 1] } else { 0.0 };
            let right = if i + 1 < n { x[i + 1] } else { 0.0 };
            MASS_DIAG * x[i] + MASS_OFF * (left + right)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sho(n: usize, l: f64) -> (Grid, NumerovOperator) {
        let g = Grid::new(-l, l, n).unwrap();
        let v: Vec<f64> = g.points().iter().map(|x| 0.5 * x * x).collect();
        let op = NumerovOperator::new(&g, &v, UnitSystem::natural()).unwrap();
        (g, op)
    }

    #[test]
    fn bisection_matches_dense_oracle() {
        let (_, op) = sho(256, 10.0);
        let dense = op.dense_eigenvalues();
        let fast = op.eigenvalues(8).unwrap();
        for (a, b) in fast.iter().zip(&dense) {
            assert!((a - b).abs() <= 1e-10 * b.abs(), "{a} vs {b}");
        }
    }

    #[test]
    fn sturm_count_is_monotone() {
        let (_, op) = sho(128, 8.0);
        let mut last = 0;
        for i in 0..200 {
            let c = op.count_below(-1.0 + i as f64 * 0.1);
            assert!(c >= last);
            last = c;
        }
        assert_eq!(op.count_below(1.0), 1);
        assert_eq!(op.count_below(2.0), 2);
    }

    #[test]
    fn eigenvectors_are_orthonormal_eigenpairs() {
        let (_, op) = sho(400, 10.0);
        let vals = op.eigenvalues(4).unwrap();
        let vecs = op.eigenvectors(&vals).unwrap();
        for (a, va) in vecs.iter().enumerate() {
            let hv = op.apply(va);
            let res = hv.iter().zip(va).map(|(h, v)| (h - vals[a] * v).powi(2)).sum::<f64>().sqrt();
            assert!(res < 1e-9, "residual {res:e}");
            for (b, vb) in vecs.iter().enumerate() {
                let dot: f64 = va.iter().zip(vb).map(|(x, y)| x * y).sum();
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn under_resolved_potential_is_rejected() {
        let g = Grid::new(-10.0, 10.0, 32).unwrap();
        let v: Vec<f64> = g.points().iter().map(|x| x.powi(4)).collect();
        let op = NumerovOperator::new(&g, &v, UnitSystem::natural()).unwrap();
        assert!(matches!(op.eigenvalues(1), Err(Error::UnderResolved(_))));
    }

    #[test]
    fn perturbed_stencil_moves_eigenvalues() {
        let g = Grid::new(-10.0, 10.0, 256).unwrap();
        let v: Vec<f64> = g.points().iter().map(|x| 0.5 * x * x).collect();
        let good = NumerovOperator::new(&g, &v, UnitSystem::natural()).unwrap();
        let bad = NumerovOperator::with_perturbed_stencil(&g, &v, UnitSystem::natural(), 1e-6).unwrap();
        let shift = (good.eigenvalues(1).unwrap()[0] - bad.eigenvalues(1).unwrap()[0]).abs();
        assert!(shift > 1e-8);
    }
}
