//! Units, the uniform spatial grid, wavefunction samples and the small amount
//! of discrete calculus every other module builds on.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest grid accepted by [`Grid::new`].
pub const MIN_POINTS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct UnitsDef {
    hbar: f64,
    mass: f64,
}

/// Reduced Planck constant and particle mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "UnitsDef", into = "UnitsDef")]
pub struct UnitSystem {
    hbar: f64,
    mass: f64,
}

impl UnitSystem {
    pub fn new(hbar: f64, mass: f64) -> Result<Self> {
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::InvalidUnits(format!("hbar must be positive, got {hbar}")));
        }
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::InvalidUnits(format!("mass must be positive, got {mass}")));
        }
        Ok(Self { hbar, mass })
    }

    /// ħ = m = 1.
    pub fn natural() -> Self {
        Self { hbar: 1.0, mass: 1.0 }
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// ħ²/2m, the prefactor of the kinetic operator.
    pub fn kinetic_prefactor(&self) -> f64 {
        self.hbar * self.hbar / (2.0 * self.mass)
    }
}

impl Default for UnitSystem {
    fn default() -> Self {
        Self::natural()
    }
}

impl TryFrom<UnitsDef> for UnitSystem {
    type Error = Error;

    fn try_from(def: UnitsDef) -> Result<Self> {
        Self::new(def.hbar, def.mass)
    }
}

impl From<UnitSystem> for UnitsDef {
    fn from(u: UnitSystem) -> Self {
        Self { hbar: u.hbar, mass: u.mass }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct GridDef {
    x_min: f64,
    x_max: f64,
    n_points: usize,
}

/// Uniform grid `x_i = x_min + i·dx`, `i = 0..n_points`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridDef", into = "GridDef")]
pub struct Grid {
    x_min: f64,
    x_max: f64,
    n_points: usize,
    dx: f64,
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite()) {
            return Err(Error::InvalidGrid("bounds must be finite".into()));
        }
        if x_min >= x_max {
            return Err(Error::InvalidGrid(format!("x_min {x_min} must be below x_max {x_max}")));
        }
        if n_points < MIN_POINTS {
            return Err(Error::InvalidGrid(format!(
                "n_points = {n_points}, at least {MIN_POINTS} required"
            )));
        }
        let dx = (x_max - x_min) / (n_points - 1) as f64;
        Ok(Self { x_min, x_max, n_points, dx })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.n_points {
            self.x_max
        } else {
            self.x_min + i as f64 * self.dx
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.x(i)).collect()
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.x_min && x <= self.x_max
    }

    /// Trapezoidal weights (dx/2 at both ends, dx elsewhere).
    pub fn trapezoid_weight(&self, i: usize) -> f64 {
        if i == 0 || i + 1 == self.n_points {
            0.5 * self.dx
        } else {
            self.dx
        }
    }

    /// Trapezoidal integral of real samples.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.n_points);
        values.iter().enumerate().map(|(i, v)| v * self.trapezoid_weight(i)).sum()
    }

    /// Four-point Lagrange interpolation of `values` at `x`; `None` outside the grid.
    pub fn interpolate(&self, values: &[f64], x: f64) -> Option<f64> {
        if !self.contains(x) {
            return None;
        }
        let s = (x - self.x_min) / self.dx;
        let n = self.n_points;
        let base = (s.floor() as isize - 1).clamp(0, n as isize - 4) as usize;
        let u = s - base as f64;
        let (v0, v1, v2, v3) = (values[base], values[base + 1], values[base + 2], values[base + 3]);
        // Lagrange basis on nodes 0,1,2,3.
        let l0 = -(u - 1.0) * (u - 2.0) * (u - 3.0) / 6.0;
        let l1 = u * (u - 2.0) * (u - 3.0) / 2.0;
        let l2 = -u * (u - 1.0) * (u - 3.0) / 2.0;
        let l3 = u * (u - 1.0) * (u - 2.0) / 6.0;
        Some(v0 * l0 + v1 * l1 + v2 * l2 + v3 * l3)
    }
}

impl TryFrom<GridDef> for Grid {
    type Error = Error;

    fn try_from(def: GridDef) -> Result<Self> {
        Self::new(def.x_min, def.x_max, def.n_points)
    }
}

impl From<Grid> for GridDef {
    fn from(g: Grid) -> Self {
        Self { x_min: g.x_min, x_max: g.x_max, n_points: g.n_points }
    }
}

pub fn make_grid(x_min: f64, x_max: f64, n_points: usize) -> Result<Grid> {
    Grid::new(x_min, x_max, n_points)
}

/// Uniform time lattice `t_i = i·dt`, `i = 0..=n_steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeLattice {
    dt: f64,
    n_steps: usize,
}

impl TimeLattice {
    pub fn new(t_final: f64, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidSpec(format!("time step must be positive, got {dt}")));
        }
        if !(t_final.is_finite() && t_final >= 0.0) {
            return Err(Error::InvalidSpec(format!("final time must be >= 0, got {t_final}")));
        }
        let steps = (t_final / dt).round();
        if (steps * dt - t_final).abs() > 1e-9 * t_final.max(1.0) {
            return Err(Error::InvalidSpec(format!(
                "t_final {t_final} is not an integer multiple of dt {dt}"
            )));
        }
        Ok(Self { dt, n_steps: steps as usize })
    }

    pub fn with_steps(dt: f64, n_steps: usize) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidSpec(format!("time step must be positive, got {dt}")));
        }
        Ok(Self { dt, n_steps })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    /// Number of lattice points (`n_steps + 1`).
    pub fn len(&self) -> usize {
        self.n_steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn t(&self, i: usize) -> f64 {
        i as f64 * self.dt
    }

    pub fn t_final(&self) -> f64 {
        self.t(self.n_steps)
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.t(i)).collect()
    }

    /// Evenly spaced subset of `count` lattice times including both ends.
    pub fn sample_times(&self, count: usize) -> Vec<f64> {
        let count = count.max(2);
        (0..count)
            .map(|k| {
                let i = (k as f64 * self.n_steps as f64 / (count - 1) as f64).round() as usize;
                self.t(i)
            })
            .collect()
    }
}

/// Complex samples Ψ(x_i, t) on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    grid: Grid,
    values: Vec<Complex64>,
    time: f64,
}

impl WaveFunction {
    pub fn new(grid: Grid, values: Vec<Complex64>, time: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidSpec(format!(
                "{} samples for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        if !values.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::InvalidSpec("wavefunction samples must be finite".into()));
        }
        Ok(Self { grid, values, time })
    }

    pub fn from_fn(grid: Grid, time: f64, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let values = grid.points().into_iter().map(f).collect();
        Self::new(grid, values, time)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn density(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    /// ∫|Ψ|² dx by the trapezoid rule.
    pub fn norm_squared(&self) -> f64 {
        self.grid.integrate(&self.density())
    }
}

/// Trapezoidal ∫ conj(a)·b dx.
pub fn inner_product(a: &WaveFunction, b: &WaveFunction) -> Result<Complex64> {
    if a.grid != b.grid {
        return Err(Error::GridMismatch);
    }
    let g = &a.grid;
    Ok(a.values
        .iter()
        .zip(&b.values)
        .enumerate()
        .map(|(i, (x, y))| x.conj() * y * g.trapezoid_weight(i))
        .sum())
}

/// Three-point second difference; second-order one-sided formulas at the ends.
pub fn second_derivative_samples<T>(values: &[T], dx: f64) -> Vec<T>
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
{
    let n = values.len();
    assert!(n >= 4, "second derivative needs at least 4 samples");
    let inv = 1.0 / (dx * dx);
    let mut out = Vec::with_capacity(n);
    let v = values;
    out.push((v[0] * 2.0 - v[1] * 5.0 + v[2] * 4.0 - v[3]) * inv);
    for i in 1..n - 1 {
        out.push((v[i - 1] - v[i] * 2.0 + v[i + 1]) * inv);
    }
    out.push((v[n - 1] * 2.0 - v[n - 2] * 5.0 + v[n - 3] * 4.0 - v[n - 4]) * inv);
    out
}

/// Five-point fourth-order second difference in the interior. The two points
/// nearest each end fall back to the three-point formulas.
pub fn second_derivative_samples_4th<T>(values: &[T], dx: f64) -> Vec<T>
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
{
    let n = values.len();
    let mut out = second_derivative_samples(values, dx);
    let inv = 1.0 / (12.0 * dx * dx);
    let v = values;
    for i in 2..n.saturating_sub(2) {
        out[i] = ((v[i - 1] + v[i + 1]) * 16.0 - (v[i - 2] + v[i + 2]) - v[i] * 30.0) * inv;
    }
    out
}

pub fn second_derivative(psi: &WaveFunction) -> Vec<Complex64> {
    second_derivative_samples(psi.values(), psi.grid.dx())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn spacing_follows_from_bounds() {
        let g = Grid::new(0.0, 15.0, 16).unwrap();
        assert_eq!(g.dx(), 1.0);
        assert_eq!(g.points(), (0..16).map(f64::from).collect::<Vec<_>>());
        let g = Grid::new(-1.0, 1.0, 21).unwrap();
        assert!((g.dx() - 0.1).abs() < 1e-15);
        assert_eq!(g.x(10), 0.0);
        assert_eq!(g.x(20), 1.0);
    }

    #[test]
    fn rejects_small_or_inverted_grids() {
        assert!(matches!(Grid::new(0.0, 1.0, 2), Err(Error::InvalidGrid(_))));
        assert!(matches!(Grid::new(-1.0, 1.0, 3), Err(Error::InvalidGrid(_))));
        assert!(matches!(Grid::new(1.0, 0.0, 64), Err(Error::InvalidGrid(_))));
        assert!(matches!(Grid::new(f64::NAN, 0.0, 64), Err(Error::InvalidGrid(_))));
    }

    #[test]
    fn units_must_be_positive() {
        assert!(UnitSystem::new(0.0, 1.0).is_err());
        assert!(UnitSystem::new(1.0, -2.0).is_err());
        let u: UnitSystem = serde_json::from_str(r#"{"hbar":2.0,"mass":0.5}"#).unwrap();
        assert_eq!(u.kinetic_prefactor(), 4.0);
        assert!(serde_json::from_str::<UnitSystem>(r#"{"hbar":-1.0,"mass":1.0}"#).is_err());
    }

    #[test]
    fn time_lattice_requires_whole_steps() {
        let l = TimeLattice::new(2.0, 1e-3).unwrap();
        assert_eq!(l.n_steps(), 2000);
        assert_eq!(l.t_final(), 2.0);
        assert!(TimeLattice::new(1.0, 0.3).is_err());
        assert_eq!(TimeLattice::new(0.0, 0.1).unwrap().len(), 1);
    }

    #[test]
    fn unit_integrand() {
        let g = Grid::new(0.0, 1.0, 101).unwrap();
        let one = WaveFunction::from_fn(g, 0.0, |_| Complex64::new(1.0, 0.0)).unwrap();
        let ip = inner_product(&one, &one).unwrap();
        assert!((ip.re - 1.0).abs() < 1e-14 && ip.im == 0.0);
    }

    #[test]
    fn parity_pair_is_orthogonal() {
        let g = Grid::new(-5.0, 5.0, 201).unwrap();
        let even = WaveFunction::from_fn(g, 0.0, |x| Complex64::new((-x * x).exp(), 0.0)).unwrap();
        let odd = WaveFunction::from_fn(g, 0.0, |x| Complex64::new(x * (-x * x).exp(), 0.0)).unwrap();
        assert!(inner_product(&even, &odd).unwrap().norm() < 1e-12);
    }

    #[test]
    fn grid_mismatch_is_reported() {
        let a = WaveFunction::from_fn(Grid::new(0.0, 1.0, 32).unwrap(), 0.0, |_| 1.0.into()).unwrap();
        let b = WaveFunction::from_fn(Grid::new(0.0, 2.0, 32).unwrap(), 0.0, |_| 1.0.into()).unwrap();
        assert_eq!(inner_product(&a, &b), Err(Error::GridMismatch));
    }

    fn sho_ground(n: usize) -> f64 {
        let g = Grid::new(-12.0, 12.0, n).unwrap();
        let norm = std::f64::consts::PI.powf(-0.25);
        let psi = WaveFunction::from_fn(g, 0.0, |x| Complex64::new(norm * (-0.5 * x * x).exp(), 0.0))
            .unwrap();
        inner_product(&psi, &psi).unwrap().re
    }

    #[test]
    fn trapezoid_norm_of_gaussian() {
        // The Gaussian's trapezoid sum is spectrally accurate; the tail beyond ±12 is ~e^-144.
        assert!((sho_ground(2048) - 1.0).abs() < 1e-8);
        // On a coarse grid, error still vanishes at least as fast as dx².
        let e1 = (sho_ground(17) - 1.0).abs();
        let e2 = (sho_ground(33) - 1.0).abs();
        assert!(e2 <= e1 / 4.0 + 1e-15, "e1={e1:e} e2={e2:e}");
    }

    #[test]
    fn stencil_exact_on_quadratics_and_constants() {
        let g = Grid::new(-3.0, 2.0, 41).unwrap();
        let quad: Vec<f64> = g.points().iter().map(|x| x * x - 3.0 * x + 1.0).collect();
        for d in second_derivative_samples(&quad, g.dx()) {
            assert!((d - 2.0).abs() < 1e-10);
        }
        let constant = vec![Complex64::new(0.7, -0.2); 41];
        for d in second_derivative_samples_4th(&quad, g.dx()) {
            assert!((d - 2.0).abs() < 1e-9);
        }
        let quartic: Vec<f64> = g.points().iter().map(|x| x.powi(4)).collect();
        let d4 = second_derivative_samples_4th(&quartic, g.dx());
        for i in 2..g.len() - 2 {
            assert!((d4[i] - 12.0 * g.x(i).powi(2)).abs() < 1e-7);
        }
        for d in second_derivative_samples(&constant, g.dx()) {
            assert!(d.norm() < 1e-12);
        }
    }

    #[test]
    fn stencil_error_on_sine_is_second_order() {
        let k = 2.0;
        let g = Grid::new(0.0, 3.0, 301).unwrap();
        let psi = WaveFunction::from_fn(g, 0.0, |x| Complex64::new((k * x).sin(), 0.0)).unwrap();
        let d2 = second_derivative(&psi);
        let bound = k.powi(4) * g.dx().powi(2) / 12.0;
        for i in 1..g.len() - 1 {
            let exact = -k * k * (k * g.x(i)).sin();
            assert!((d2[i].re - exact).abs() <= bound * 1.0001 + 1e-9);
        }
    }

    #[test]
    fn interpolation_reproduces_cubics() {
        let g = Grid::new(-1.0, 1.0, 33).unwrap();
        let f = |x: f64| 2.0 * x * x * x - x + 0.5;
        let vals: Vec<f64> = g.points().iter().map(|&x| f(x)).collect();
        for &x in &[-1.0, -0.99, -0.3337, 0.0, 0.51, 0.999, 1.0] {
            assert!((g.interpolate(&vals, x).unwrap() - f(x)).abs() < 1e-13);
        }
        assert!(g.interpolate(&vals, 1.0001).is_none());
    }

    proptest! {
        #[test]
        fn second_derivative_is_linear(a in -3.0f64..3.0, b in -3.0f64..3.0, k in 0.1f64..4.0) {
            let g = Grid::new(-2.0, 2.0, 64).unwrap();
            let p: Vec<Complex64> = g.points().iter().map(|x| Complex64::new((k * x).sin(), x * x)).collect();
            let q: Vec<Complex64> = g.points().iter().map(|x| Complex64::new(x.exp(), -(k * x).cos())).collect();
            let combo: Vec<Complex64> = p.iter().zip(&q).map(|(u, v)| u * a + v * b).collect();
            let lhs = second_derivative_samples(&combo, g.dx());
            let dp = second_derivative_samples(&p, g.dx());
            let dq = second_derivative_samples(&q, g.dx());
            let scale = g.dx().powi(-2);
            for i in 0..g.len() {
                let rhs = dp[i] * a + dq[i] * b;
                prop_assert!((lhs[i] - rhs).norm() <= 1e-13 * scale * (1.0 + rhs.norm() / scale));
            }
        }
    }
}
