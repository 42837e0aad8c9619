use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::grid::{Grid, UnitSystem};
use crate::specs::{MotionSpec, PotentialSpec};

/// Default polynomial degree K of the V_eff fit.
pub const DEFAULT_FIT_DEGREE: usize = 8;

/// Relative size below which higher coefficients count as absent when
/// deciding that V_eff is linear.
pub const LINEAR_DETECTION_TOL: f64 = 1e-10;

/// V_eff(q) = V(q + d, t) − V(d, t) + m·d̈·q on a co-moving grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectivePotential {
    q_grid: Grid,
    samples: Vec<f64>,
    poly_coeffs: Vec<f64>,
    fit_residual: f64,
}

impl EffectivePotential {
    /// Wraps samples that were produced elsewhere and fits them.
    pub fn from_samples(q_grid: Grid, samples: Vec<f64>, degree: usize) -> Result<Self> {
        if samples.len() != q_grid.len() {
            return Err(Error::GridMismatch);
        }
        if !samples.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidSpec("effective potential samples must be finite".into()));
        }
        let (poly_coeffs, fit_residual) = polynomial_fit(&q_grid, &samples, degree);
        Ok(Self { q_grid, samples, poly_coeffs, fit_residual })
    }

    pub fn q_grid(&self) -> &Grid {
        &self.q_grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Monomial coefficients c₀..c_K in q.
    pub fn poly_coeffs(&self) -> &[f64] {
        &self.poly_coeffs
    }

    /// max |fit − samples| / max |samples|.
    pub fn fit_residual(&self) -> f64 {
        self.fit_residual
    }

    fn half_width(&self) -> f64 {
        self.q_grid.x_min().abs().max(self.q_grid.x_max().abs())
    }

    /// Slope c₁ when every higher coefficient is negligible on this domain.
    pub fn linear_slope(&self) -> Option<f64> {
        let c = &self.poly_coeffs;
        let l = self.half_width();
        let c1 = *c.get(1)?;
        if c1 == 0.0 || !c1.is_finite() {
            return None;
        }
        let scale = c1.abs() * l;
        let higher_ok = c
            .iter()
            .enumerate()
            .skip(2)
            .all(|(n, cn)| cn.abs() * l.powi(n as i32) < LINEAR_DETECTION_TOL * scale);
        higher_ok.then_some(c1)
    }

    /// Minimum strictly inside the grid with the potential rising to both ends.
    pub fn is_confining(&self) -> bool {
        let v = &self.samples;
        let (imin, vmin) = v
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::INFINITY), |(bi, bv), (i, x)| if x < bv { (i, x) } else { (bi, bv) });
        let last = v.len() - 1;
        imin > 0 && imin < last && v[0] > vmin && v[last] > vmin
    }
}

/// Samples V_eff at time t and attaches a degree-K polynomial fit.
pub fn effective_potential(
    pot: &PotentialSpec,
    motion: &MotionSpec,
    q_grid: &Grid,
    t: f64,
    units: UnitSystem,
) -> Result<EffectivePotential> {
    effective_potential_with_degree(pot, motion, q_grid, t, units, DEFAULT_FIT_DEGREE)
}

pub fn effective_potential_with_degree(
    pot: &PotentialSpec,
    motion: &MotionSpec,
    q_grid: &Grid,
    t: f64,
    units: UnitSystem,
    degree: usize,
) -> Result<EffectivePotential> {
    let samples = effective_samples(pot, motion, q_grid, t, units)?;
    EffectivePotential::from_samples(*q_grid, samples, degree)
}

pub(crate) fn effective_samples(
    pot: &PotentialSpec,
    motion: &MotionSpec,
    q_grid: &Grid,
    t: f64,
    units: UnitSystem,
) -> Result<Vec<f64>> {
    if !pot.is_real() {
        return Err(Error::ComplexPotential);
    }
    let k = motion.eval(t)?;
    let v_center = pot.real_value(k.d, t, units)?;
    let shifted = Grid::new(q_grid.x_min() + k.d, q_grid.x_max() + k.d, q_grid.len())?;
    let v = pot.sample_real(&shifted, t, units)?;
    Ok(q_grid
        .points()
        .iter()
        .zip(v)
        .map(|(q, vx)| vx - v_center + units.mass() * k.d_ddot * q)
        .collect())
}

/// Least-squares fit in a Legendre basis on s = q/L, returned as monomial
/// coefficients in q, together with the relative max-norm residual.
pub fn polynomial_fit(grid: &Grid, samples: &[f64], degree: usize) -> (Vec<f64>, f64) {
    let l = grid.x_min().abs().max(grid.x_max().abs());
    let n = grid.len();
    let cols = degree + 1;
    let design = DMatrix::from_fn(n, cols, |i, k| legendre(k, grid.x(i) / l));
    let rhs = DVector::from_column_slice(samples);
    let legendre_coeffs = design
        .clone()
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .unwrap_or_else(|_| DVector::zeros(cols));
    let fitted = &design * &legendre_coeffs;
    let max_err = fitted.iter().zip(samples).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let max_v = samples.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let residual = if max_v > 0.0 { max_err / max_v } else { max_err };

    let table = legendre_monomials(degree);
    let coeffs = (0..cols)
        .map(|j| {
            let in_s: f64 = (j..cols).map(|k| legendre_coeffs[k] * table[k][j]).sum();
            in_s / l.powi(j as i32)
        })
        .collect();
    (coeffs, residual)
}

fn legendre(k: usize, s: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, s);
    match k {
        0 => p0,
        1 => p1,
        _ => {
            for j in 1..k {
                let jf = j as f64;
                let p2 = ((2.0 * jf + 1.0) * s * p1 - jf * p0) / (jf + 1.0);
                p0 = p1;
                p1 = p2;
            }
            p1
        }
    }
}

/// Row k holds the monomial coefficients of P_k.
fn legendre_monomials(degree: usize) -> Vec<Vec<f64>> {
    let mut t = vec![vec![0.0; degree + 1]; degree + 1];
    t[0][0] = 1.0;
    if degree >= 1 {
        t[1][1] = 1.0;
    }
    for k in 1..degree {
        let kf = k as f64;
        for j in 0..=degree {
            let shifted = if j > 0 { t[k][j - 1] } else { 0.0 };
            t[k + 1][j] = ((2.0 * kf + 1.0) * shifted - kf * t[k - 1][j]) / (kf + 1.0);
        }
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_space_with_constant_acceleration_is_linear() {
        let g = Grid::new(-20.0, 20.0, 401).unwrap();
        let motion = MotionSpec::constant_accel(1.0, 1.0).unwrap();
        let v = effective_potential(&PotentialSpec::FreeSpace, &motion, &g, 1.3, UnitSystem::natural()).unwrap();
        for (q, s) in g.points().iter().zip(v.samples()) {
            assert!((s - 0.5 * q).abs() < 1e-14);
        }
        assert!((v.linear_slope().unwrap() - 0.5).abs() < 1e-12);
        assert!(!v.is_confining());
    }

    #[test]
    fn shm_cancels_linear_term() {
        let g = Grid::new(-8.0, 8.0, 321).unwrap();
        let motion = MotionSpec::sinusoid(1.0, 1.0, 0.0).unwrap();
        let pot = PotentialSpec::Harmonic { omega0: 1.0, omega_ramp: 0.0 };
        for t in [0.0, 0.4, 2.0] {
            let v = effective_potential(&pot, &motion, &g, t, UnitSystem::natural()).unwrap();
            for (q, s) in g.points().iter().zip(v.samples()) {
                assert!((s - 0.5 * q * q).abs() < 1e-12);
            }
            let c = v.poly_coeffs();
            assert!((c[2] - 0.5).abs() < 1e-12 && c[1].abs() < 1e-12);
            assert!(v.is_confining());
            assert!(v.linear_slope().is_none());
        }
    }

    #[test]
    fn rest_motion_subtracts_center_value() {
        let g = Grid::new(-3.0, 3.0, 61).unwrap();
        let pot = PotentialSpec::PowerLaw { lambda: 2.0, n: 3 };
        let v = effective_potential(&pot, &MotionSpec::rest(), &g, 0.5, UnitSystem::natural()).unwrap();
        for (q, s) in g.points().iter().zip(v.samples()) {
            assert!((s - 2.0 * q.powi(3)).abs() < 1e-12);
        }
    }

    #[test]
    fn complex_potential_rejected() {
        let g = Grid::new(-3.0, 3.0, 61).unwrap();
        let pot = PotentialSpec::ComplexAbsorber { base: Box::new(PotentialSpec::FreeSpace), gamma: 0.1 };
        let err = effective_potential(&pot, &MotionSpec::rest(), &g, 0.0, UnitSystem::natural()).unwrap_err();
        assert_eq!(err, Error::ComplexPotential);
    }

    #[test]
    fn fit_recovers_polynomial_coefficients() {
        let g = Grid::new(-10.0, 10.0, 4096).unwrap();
        let want = [0.3, -1.0, 0.25, 0.0, 1.0];
        let s: Vec<f64> = g.points().iter().map(|q| want.iter().rev().fold(0.0, |a, c| a * q + c)).collect();
        let (c, res) = polynomial_fit(&g, &s, 8);
        for (k, w) in want.iter().enumerate() {
            assert!((c[k] - w).abs() < 1e-9, "c{k} = {}", c[k]);
        }
        for ck in &c[5..] {
            assert!(ck.abs() < 1e-12);
        }
        assert!(res < 1e-12);
    }
}
