use std::f64::consts::PI;

use num_complex::Complex64;
use nonspread_core::analysis::{
    energy_expectation, invariance_metrics, phase_linearity, probability_current, schrodinger_residual, snapshot_metrics,
    AnalysisWindow,
};
use nonspread_core::constructor::{airy_reference, assemble_packet, build_phase, sho_reference, ShapeSolution};
use nonspread_core::propagator::Snapshot;
use nonspread_core::specfun::sho_eigenfunction;
use nonspread_core::specs::{MotionSpec, PotentialSpec};
use nonspread_core::{Grid, TimeLattice, UnitSystem, WaveFunction};

fn airy_snaps(n: usize, dt: f64) -> Vec<Snapshot> {
    let g = Grid::new(-60.0, 40.0, n).unwrap();
    (0..3)
        .map(|k| Snapshot {
            wavefunction: airy_reference(1.0, &g, 1.0 + k as f64 * dt, UnitSystem::natural()).unwrap(),
            step_index: k,
        })
        .collect()
}

#[test]
fn airy_reference_solves_the_equation() {
    let w = AnalysisWindow::default();
    let u = UnitSystem::natural();
    // dx = 0.01 and its half.
    let r1 = schrodinger_residual(&airy_snaps(10_001, 1e-3), &PotentialSpec::FreeSpace, u, &w).unwrap();
    let r2 = schrodinger_residual(&airy_snaps(20_001, 5e-4), &PotentialSpec::FreeSpace, u, &w).unwrap();
    assert!(r1 < 1e-3, "{r1:e}");
    assert!((3.5..=4.5).contains(&(r1 / r2)), "{r1:e} {r2:e}");
}

#[test]
fn frozen_gaussian_is_not_a_solution() {
    let g = Grid::new(-20.0, 20.0, 1024).unwrap();
    let snaps: Vec<Snapshot> = (0..3)
        .map(|k| Snapshot {
            wavefunction: WaveFunction::from_fn(g, k as f64 * 1e-3, |x| Complex64::new((-x * x / 4.0).exp(), 0.0)).unwrap(),
            step_index: k,
        })
        .collect();
    let r = schrodinger_residual(&snaps, &PotentialSpec::FreeSpace, UnitSystem::natural(), &AnalysisWindow::default()).unwrap();
    assert!(r > 0.5, "{r}");
}

fn coherent_packet(n: usize, t: f64) -> (WaveFunction, ShapeSolution, MotionSpec) {
    let g = Grid::new(-12.0, 12.0, n).unwrap();
    let u = UnitSystem::natural();
    let f = g.points().iter().map(|&x| sho_eigenfunction(0, x, u, 1.0).unwrap()).collect();
    let shape = ShapeSolution::sampled(g, f, 0.5).unwrap();
    let motion = MotionSpec::sinusoid(1.0, 1.0, 0.0).unwrap();
    let lat = TimeLattice::new(2.0, 1e-3).unwrap();
    let pot = PotentialSpec::Harmonic { omega0: 1.0, omega_ramp: 0.0 };
    let phase = build_phase(&pot, &motion, 0.5, &lat, u).unwrap();
    (assemble_packet(&shape, &motion, &phase, &g, t).unwrap(), shape, motion)
}

#[test]
fn assembled_snapshots_score_zero() {
    let snaps: Vec<Snapshot> = [0.0, 0.5, 1.25]
        .iter()
        .enumerate()
        .map(|(k, &t)| Snapshot { wavefunction: coherent_packet(1024, t).0, step_index: k })
        .collect();
    let (_, shape, motion) = coherent_packet(1024, 0.0);
    let m = invariance_metrics(&snaps, &shape, &motion, &AnalysisWindow::default(), UnitSystem::natural()).unwrap();
    for i in 0..m.len() {
        assert!(m.shape_err_linf[i] < 1e-12 && m.shape_err_l2[i] < 1e-12);
        assert!(m.centroid_err[i].abs() < 1e-8);
        assert!(m.flux_residual[i] < 1e-6);
        assert!(m.phase_residual[i] < 1e-10);
    }
}

#[test]
fn flux_identity_scales_as_dx_squared() {
    let w = AnalysisWindow::default();
    let u = UnitSystem::natural();
    let flux = |n: usize| {
        let (psi, shape, motion) = coherent_packet(n, 0.3);
        snapshot_metrics(&psi, &shape, &motion, &w, u).unwrap().flux_residual
    };
    let (a, b) = (flux(513), flux(1025));
    assert!(a > 0.0 && flux(4096) < 1e-8, "{a:e} {b:e}");
    // Fourth-order current: at least the dx² gain.
    assert!(a / b > 3.5, "{a:e} {b:e}");
}

#[test]
fn plane_wave_current() {
    let g = Grid::new(-10.0, 10.0, 2001).unwrap();
    let psi = WaveFunction::from_fn(g, 0.0, |x| Complex64::from_polar((-x * x / 50.0).exp(), 2.0 * x)).unwrap();
    let j = probability_current(&psi, UnitSystem::natural());
    let rho = psi.density();
    for i in 500..1500 {
        assert!((j[i] - 2.0 * rho[i]).abs() < 1e-6 * rho[i].max(1e-3));
    }
    let real = WaveFunction::from_fn(g, 0.0, |x| Complex64::new((-x * x).exp(), 0.0)).unwrap();
    assert!(probability_current(&real, UnitSystem::natural()).iter().all(|v| v.abs() < 1e-14));
}

#[test]
fn senitzky_energies() {
    let g = Grid::new(-12.0, 12.0, 4096).unwrap();
    let u = UnitSystem::natural();
    let pot = PotentialSpec::Harmonic { omega0: 1.0, omega_ramp: 0.0 };
    for (n, want) in [(0usize, 1.0), (2, 3.0)] {
        for t in [0.0, 0.7, PI] {
            let psi = sho_reference(n, 1.0, 1.0, &g, t, u).unwrap();
            let e = energy_expectation(&psi, &pot, t, u).unwrap();
            assert!((e.total - want).abs() < 1e-5, "n={n} t={t}: {}", e.total);
            assert!((e.kinetic + e.potential - e.total).abs() <= 1e-12 * e.total.abs());
        }
    }
    let psi = sho_reference(0, 0.0, 1.0, &g, 0.0, u).unwrap();
    assert!((energy_expectation(&psi, &pot, 0.0, u).unwrap().total - 0.5).abs() < 1e-6);
}

#[test]
fn phase_fit_recovers_slope() {
    let g = Grid::new(-12.0, 12.0, 2048).unwrap();
    let psi = WaveFunction::from_fn(g, 0.0, |x| Complex64::from_polar((-(x - 0.5).powi(2)).exp(), 0.5 * x + 0.2)).unwrap();
    let fit = phase_linearity(&psi, &AnalysisWindow::default()).unwrap();
    assert!((fit.slope - 0.5).abs() < 1e-10 && fit.rms_residual < 1e-10);
    assert!((fit.intercept - 0.2).abs() < 1e-10);
    let chirp = WaveFunction::from_fn(g, 0.0, |x| Complex64::from_polar((-x * x / 8.0).exp(), 0.3 * x * x)).unwrap();
    assert!(phase_linearity(&chirp, &AnalysisWindow::default()).unwrap().rms_residual > 1e-2);
}
