use num_complex::Complex64;

use super::phase::PhaseTrack;
use super::shape::ShapeSolution;
use crate::error::{Error, Result};
use crate::grid::{Grid, WaveFunction};
use crate::specs::MotionSpec;

/// Relative density that marks the edge of a shape's support.
pub const SUPPORT_FLOOR: f64 = 1e-6;

/// Ψ(x,t) = f(x − d(t))·exp(i(φ₁(t)x + φ₀(t))) on `grid`.
pub fn assemble_packet(
    shape: &ShapeSolution,
    motion: &MotionSpec,
    phase: &PhaseTrack,
    grid: &Grid,
    t: f64,
) -> Result<WaveFunction> {
    let d = motion.eval(t)?.d;
    let p = phase.at(t)?;
    if shape.normalizable() {
        let (lo, hi) = shape.support(SUPPORT_FLOOR);
        if lo + d <= grid.x_min() || hi + d >= grid.x_max() {
            return Err(Error::SupportEscape(format!(
                "packet support [{:.4}, {:.4}] at t = {t} leaves the grid [{}, {}]",
                lo + d,
                hi + d,
                grid.x_min(),
                grid.x_max()
            )));
        }
    }
    WaveFunction::from_fn(*grid, t, |x| {
        Complex64::from_polar(shape.value_at(x - d), p.phi1 * x + p.phi0)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructor::phase::build_phase;
    use crate::grid::{TimeLattice, UnitSystem};
    use crate::specs::PotentialSpec;
    use crate::specfun::sho_eigenfunction;
    use std::f64::consts::PI;

    fn coherent(t_final: f64) -> (ShapeSolution, MotionSpec, PhaseTrack, Grid) {
        let g = Grid::new(-12.0, 12.0, 2049).unwrap();
        let u = UnitSystem::natural();
        let f = g.points().iter().map(|&x| sho_eigenfunction(0, x, u, 1.0)).collect::<Result<Vec<_>>>().unwrap();
        let shape = ShapeSolution::sampled(g, f, 0.5).unwrap();
        let motion = MotionSpec::sinusoid(1.0, 1.0, 0.0).unwrap();
        let lat = TimeLattice::with_steps(t_final / 1000.0, 1000).unwrap();
        let pot = PotentialSpec::Harmonic { omega0: 1.0, omega_ramp: 0.0 };
        let phase = build_phase(&pot, &motion, 0.5, &lat, u).unwrap();
        (shape, motion, phase, g)
    }

    #[test]
    fn density_is_a_rigid_translate() {
        let (shape, motion, phase, g) = coherent(PI);
        let psi = assemble_packet(&shape, &motion, &phase, &g, PI).unwrap();
        let rho = psi.density();
        let peak = rho.iter().copied().fold(0.0, f64::max);
        assert!((peak - PI.powf(-0.5)).abs() < 1e-12);
        let i = rho.iter().position(|&r| r == peak).unwrap();
        assert!(g.x(i).abs() < g.dx());
    }

    #[test]
    fn initial_phase_is_linear() {
        let (shape, motion, phase, g) = coherent(1.0);
        let psi = assemble_packet(&shape, &motion, &phase, &g, 0.0).unwrap();
        for (i, v) in psi.values().iter().enumerate() {
            if v.norm() > 1e-6 {
                let expected = Complex64::from_polar(1.0, g.x(i));
                assert!((v / v.norm() - expected).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn escaping_support_is_reported() {
        let g = Grid::new(-12.0, 12.0, 2049).unwrap();
        let (shape, _, _, _) = coherent(1.0);
        let motion = MotionSpec::polynomial(vec![0.0, 10.0]).unwrap();
        let lat = TimeLattice::new(1.0, 1e-2).unwrap();
        let phase = build_phase(&PotentialSpec::FreeSpace, &motion, 0.0, &lat, UnitSystem::natural()).unwrap();
        assert!(matches!(assemble_packet(&shape, &motion, &phase, &g, 1.0), Err(Error::SupportEscape(_))));
    }
}
