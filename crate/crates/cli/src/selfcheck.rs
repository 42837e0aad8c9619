//! Embedded property suite run by `nonspread selfcheck`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use nonspread_core::constructor::{solve_shape_with, EffectivePotential, DEFAULT_FIT_DEGREE};
use nonspread_core::grid::inner_product;
use nonspread_core::numerov::NumerovOperator;
use nonspread_core::propagator::{Boundary, Propagator};
use nonspread_core::quadrature::cumulative_simpson;
use nonspread_core::specfun::{airy_ai, airy_ai_with, sho_eigenfunction, SpecFunAccuracy};
use nonspread_core::specs::PotentialSpec;
use nonspread_core::{Grid, Result, UnitSystem, WaveFunction};

/// Deliberate defects for negative-control runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Fault {
    #[default]
    None,
    /// Scales the kinetic stencil by 1 + 1e-3.
    Stencil,
}

impl Fault {
    fn stencil_error(self) -> f64 {
        match self {
            Fault::None => 0.0,
            Fault::Stencil => 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.value.is_finite() && self.value <= self.tolerance
    }
}

fn check(name: &'static str, tolerance: f64, value: Result<f64>) -> Check {
    Check { name, value: value.unwrap_or(f64::INFINITY), tolerance }
}

pub fn run_checks(fault: Fault) -> Vec<Check> {
    let eps = fault.stencil_error();
    vec![
        check("airy_ai(0) vs 3^(-2/3)/Gamma(2/3)", 1e-12, airy_ai(0.0).map(|v| (v - 0.355_028_053_887_817_2).abs())),
        check("airy_ai at first zero", 1e-10, airy_ai(-2.338_107_410_459_767).map(f64::abs)),
        check("airy_ai(20) decay", 1e-10, airy_ai(20.0).map(f64::abs)),
        check("airy series/asymptotic continuity", 1e-10, airy_continuity()),
        check("sho eigenfunctions orthonormal", 1e-8, sho_orthonormality()),
        check("cumulative simpson of sin on [0, pi]", 1e-10, simpson_sine()),
        check("CN norm drift over 1000 steps", 1e-12, cn_unitarity()),
        check("CN stationary phase -E0 dt", 1e-9, cn_stationary_phase(eps)),
        check("bisection vs dense oracle, SHO 256 pts", 1e-10, oracle_agreement(|q| 0.5 * q * q, 10.0, eps)),
        check("bisection vs dense oracle, quartic 256 pts", 1e-10, oracle_agreement(|q| q.powi(4), 5.0, eps)),
        check("SHO spectrum hbar*omega*(n+1/2), n<=5", 1e-6, sho_spectrum(eps)),
    ]
}

pub fn render(checks: &[Check]) -> String {
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    let mut s = String::new();
    let _ = writeln!(s, "{:<width$}  {:>10}  {:>10}  result", "check", "value", "tolerance");
    for c in checks {
        let verdict = if c.passed() { "PASS" } else { "FAIL" };
        let _ = writeln!(s, "{:<width$}  {:>10.3e}  {:>10.1e}  {verdict}", c.name, c.value, c.tolerance);
    }
    let failed = checks.iter().filter(|c| !c.passed()).count();
    let _ = writeln!(s, "{} checks, {} failed", checks.len(), failed);
    s
}

/// Series and asymptotic branches evaluated at the same switch points.
fn airy_continuity() -> Result<f64> {
    let default = SpecFunAccuracy::default();
    let later = SpecFunAccuracy { series_asymptotic_switch: 1.2 * default.series_asymptotic_switch, ..default };
    let mut worst = 0.0f64;
    for x in [-1.5 * default.series_asymptotic_switch, default.series_asymptotic_switch] {
        worst = worst.max((airy_ai_with(x, &default)? - airy_ai_with(x, &later)?).abs());
    }
    Ok(worst)
}

fn sho_orthonormality() -> Result<f64> {
    let g = Grid::new(-12.0, 12.0, 2048)?;
    let u = UnitSystem::natural();
    let states: Vec<WaveFunction> = (0..6)
        .map(|n| WaveFunction::from_fn(g, 0.0, |x| Complex64::new(sho_eigenfunction(n, x, u, 1.0).unwrap_or(f64::NAN), 0.0)))
        .collect::<Result<_>>()?;
    let mut worst = 0.0f64;
    for (i, a) in states.iter().enumerate() {
        for (j, b) in states.iter().enumerate() {
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((inner_product(a, b)? - want).norm());
        }
    }
    Ok(worst)
}

fn simpson_sine() -> Result<f64> {
    let n = 2001;
    let h = PI / (n - 1) as f64;
    let f: Vec<f64> = (0..n).map(|i| (i as f64 * h).sin()).collect();
    Ok((cumulative_simpson(&f, h)[n - 1] - 2.0).abs())
}

fn cn_unitarity() -> Result<f64> {
    let g = Grid::new(-12.0, 12.0, 1024)?;
    let psi = WaveFunction::from_fn(g, 0.0, |x| Complex64::from_polar((-(x - 1.0).powi(2) / 2.0).exp(), 1.5 * x))?;
    let n0 = psi.norm_squared();
    let pot = PotentialSpec::Harmonic { omega0: 1.0, omega_ramp: 0.0 };
    let mut p = Propagator::new(&psi, pot, UnitSystem::natural(), 1e-3, Boundary::Dirichlet)?;
    for _ in 0..1000 {
        p.step()?;
    }
    Ok((p.state()?.norm_squared() - n0).abs())
}

/// One step of the discrete ground state must only rotate its phase by −E₀dt/ħ.
fn cn_stationary_phase(eps: f64) -> Result<f64> {
    let u = UnitSystem::natural();
    let g = Grid::new(-10.0, 10.0, 1024)?;
    let veff = EffectivePotential::from_samples(g, g.points().iter().map(|q| 0.5 * q * q).collect(), DEFAULT_FIT_DEGREE)?;
    let shape = solve_shape_with(&veff, 1, u, eps)?.remove(0);
    let psi = WaveFunction::new(g, shape.f().iter().map(|&v| Complex64::new(v, 0.0)).collect(), 0.0)?;
    let dt = 1e-3;
    let pot = PotentialSpec::Harmonic { omega0: 1.0, omega_ramp: 0.0 };
    let mut p = Propagator::new(&psi, pot, u, dt, Boundary::Dirichlet)?;
    p.step()?;
    let overlap = inner_product(&psi, &p.state()?)?;
    Ok((overlap.arg() + 0.5 * dt).abs())
}

fn oracle_agreement(v: impl Fn(f64) -> f64, l: f64, eps: f64) -> Result<f64> {
    let g = Grid::new(-l, l, 256)?;
    let samples: Vec<f64> = g.points().into_iter().map(v).collect();
    let fast = NumerovOperator::with_perturbed_stencil(&g, &samples, UnitSystem::natural(), eps)?.eigenvalues(10)?;
    let dense = NumerovOperator::new(&g, &samples, UnitSystem::natural())?.dense_eigenvalues();
    Ok(fast.iter().zip(&dense).map(|(a, b)| ((a - b) / b).abs()).fold(0.0, f64::max))
}

fn sho_spectrum(eps: f64) -> Result<f64> {
    let g = Grid::new(-12.0, 12.0, 2048)?;
    let veff = EffectivePotential::from_samples(g, g.points().iter().map(|q| 0.5 * q * q).collect(), DEFAULT_FIT_DEGREE)?;
    let shapes = solve_shape_with(&veff, 6, UnitSystem::natural(), eps)?;
    Ok(shapes.iter().enumerate().map(|(n, s)| (s.e_eff() - (n as f64 + 0.5)).abs()).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_build_passes_and_fault_is_caught() {
        let clean = run_checks(Fault::None);
        assert!(clean.iter().all(Check::passed), "{}", render(&clean));
        let faulty = run_checks(Fault::Stencil);
        assert!(faulty.iter().any(|c| !c.passed()));
        assert_eq!(render(&clean), render(&run_checks(Fault::None)));
    }
}
