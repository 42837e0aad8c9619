use num_complex::Complex64;

use crate::error::Result;
use crate::grid::{Grid, UnitSystem, WaveFunction};
use crate::specfun::{airy_ai, sho_eigenfunction, sho_energy};

/// Ψ = Ai[(B/ħ^{2/3})(x − B³t²/4m²)]·exp{i(B³t/2mħ)(x − B³t²/6m²)}.
pub fn airy_reference(b: f64, grid: &Grid, t: f64, units: UnitSystem) -> Result<WaveFunction> {
    let (m, hbar) = (units.mass(), units.hbar());
    let b3 = b.powi(3);
    let scale = b / hbar.powf(2.0 / 3.0);
    let shift = b3 * t * t / (4.0 * m * m);
    let k = b3 * t / (2.0 * m * hbar);
    let phase_shift = b3 * t * t / (6.0 * m * m);
    let values = grid
        .points()
        .into_iter()
        .map(|x| Ok(Complex64::from_polar(airy_ai(scale * (x - shift))?, k * (x - phase_shift))))
        .collect::<Result<Vec<_>>>()?;
    WaveFunction::new(*grid, values, t)
}

/// Displaced oscillator eigenstate ψₙ(x − x₀ sin ωt) with
/// φ₁ = (mωx₀/ħ)cos ωt and φ₀ = −(mωx₀²/4ħ)sin 2ωt − Eₙt/ħ.
pub fn sho_reference(n: usize, x0: f64, omega: f64, grid: &Grid, t: f64, units: UnitSystem) -> Result<WaveFunction> {
    let (m, hbar) = (units.mass(), units.hbar());
    let d = x0 * (omega * t).sin();
    let phi1 = m * omega * x0 / hbar * (omega * t).cos();
    let phi0 = -m * omega * x0 * x0 / (4.0 * hbar) * (2.0 * omega * t).sin() - sho_energy(n, units, omega) * t / hbar;
    let values = grid
        .points()
        .into_iter()
        .map(|x| Ok(Complex64::from_polar(sho_eigenfunction(n, x - d, units, omega)?, phi1 * x + phi0)))
        .collect::<Result<Vec<_>>>()?;
    WaveFunction::new(*grid, values, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use std::f64::consts::PI;

    const AI0: f64 = 0.355_028_053_887_817_2;

    #[test]
    fn airy_reference_values() {
        let g = Grid::new(-4.0, 4.0, 17).unwrap();
        let psi = airy_reference(1.0, &g, 0.0, UnitSystem::natural()).unwrap();
        assert!((psi.values()[8] - Complex64::new(AI0, 0.0)).norm() < 1e-15);
        assert!(psi.values().iter().all(|v| v.im == 0.0));
        let g = Grid::new(-3.0, 5.0, 17).unwrap();
        let psi = airy_reference(1.0, &g, 2.0, UnitSystem::natural()).unwrap();
        // x = 1 = t²/4 sits on the moving Ai(0) point.
        assert!((psi.values()[8].norm() - AI0).abs() < 1e-15);
    }

    #[test]
    fn sho_reference_cases() {
        let u = UnitSystem::natural();
        let g = Grid::new(-6.0, 6.0, 121).unwrap();
        let still = sho_reference(0, 0.0, 1.0, &g, 0.7, u).unwrap();
        for (i, v) in still.values().iter().enumerate() {
            let want = Complex64::from_polar(sho_eigenfunction(0, g.x(i), u, 1.0).unwrap(), -0.35);
            assert!((v - want).norm() < 1e-14);
        }
        let moved = sho_reference(0, 1.0, 1.0, &g, PI / 2.0, u).unwrap();
        let rho = moved.density();
        let xs: Vec<f64> = rho.iter().zip(g.points()).map(|(r, x)| r * x).collect();
        assert!((g.integrate(&xs) / g.integrate(&rho) - 1.0).abs() < 1e-10);
        let start = sho_reference(2, 1.0, 1.0, &g, 0.0, u).unwrap();
        for (i, v) in start.values().iter().enumerate() {
            let x = g.x(i);
            let want = Complex64::from_polar(sho_eigenfunction(2, x, u, 1.0).unwrap(), x);
            assert!((v - want).norm() < 1e-14);
        }
        assert!(matches!(sho_reference(51, 0.0, 1.0, &g, 0.0, u), Err(Error::IndexTooLarge { .. })));
    }
}
