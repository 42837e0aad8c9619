use nonspread_core::constructor::{effective_potential, solve_shape, EffectivePotential, DEFAULT_FIT_DEGREE};
use nonspread_core::grid::second_derivative_samples_4th;
use nonspread_core::numerov::NumerovOperator;
use nonspread_core::specs::{MotionSpec, PotentialSpec};
use nonspread_core::{Grid, UnitSystem};

/// Ground state of −f″ + x⁴f on the line (ħ²/2m = 1).
const QUARTIC_E0_UNIT_PREFACTOR: f64 = 1.060_362_090_484_182_9;
/// Ground state of −½f″ + x⁴f, ħ = m = 1, from the dense oracle at 4096 points on [−8, 8].
const QUARTIC_E0_NATURAL: f64 = 0.667_986_259_170_321_2;

fn sampled(l: f64, n: usize, v: impl Fn(f64) -> f64) -> EffectivePotential {
    let g = Grid::new(-l, l, n).unwrap();
    let s = g.points().into_iter().map(v).collect();
    EffectivePotential::from_samples(g, s, DEFAULT_FIT_DEGREE).unwrap()
}

#[test]
fn harmonic_spectrum_at_4096_points() {
    let v = sampled(12.0, 4096, |q| 0.5 * q * q);
    let shapes = solve_shape(&v, 6, UnitSystem::natural()).unwrap();
    for (n, s) in shapes.iter().enumerate() {
        assert!((s.e_eff() - (n as f64 + 0.5)).abs() < 1e-6, "E{n} = {}", s.e_eff());
        assert_eq!(s.node_count(), n);
    }
}

#[test]
fn quartic_ground_state_matches_oracle() {
    let v = sampled(8.0, 4096, |q| q.powi(4));
    let e = solve_shape(&v, 1, UnitSystem::new(1.0, 0.5).unwrap()).unwrap()[0].e_eff();
    assert!((e - QUARTIC_E0_UNIT_PREFACTOR).abs() < 1e-6, "{e}");
    let e = solve_shape(&v, 1, UnitSystem::natural()).unwrap()[0].e_eff();
    assert!((e - QUARTIC_E0_NATURAL).abs() < 1e-6, "{e}");
}

#[test]
fn bisection_agrees_with_dense_oracle_on_256_points() {
    for (l, pot) in [(10.0, 0usize), (5.0, 1)] {
        let g = Grid::new(-l, l, 256).unwrap();
        let v: Vec<f64> = g.points().iter().map(|&q| if pot == 0 { 0.5 * q * q } else { q.powi(4) }).collect();
        let op = NumerovOperator::new(&g, &v, UnitSystem::natural()).unwrap();
        let dense = op.dense_eigenvalues();
        let fast = op.eigenvalues(10).unwrap();
        for (a, b) in fast.iter().zip(&dense) {
            assert!((a - b).abs() <= 1e-10 * b.abs(), "{a} vs {b}");
        }
    }
}

#[test]
fn eigen_residual_and_node_counts() {
    let units = UnitSystem::new(1.0, 1.0).unwrap();
    for (l, f) in [(12.0, 0usize), (6.0, 1)] {
        let v = sampled(l, 4096, |q| if f == 0 { 0.5 * q * q } else { q.powi(4) + 0.3 * q });
        let g = *v.q_grid();
        for (k, s) in solve_shape(&v, 5, units).unwrap().iter().enumerate() {
            assert_eq!(s.node_count(), k);
            let d2 = second_derivative_samples_4th(s.f(), g.dx());
            let res: Vec<f64> = (0..g.len())
                .map(|i| (-units.kinetic_prefactor() * d2[i] + (v.samples()[i] - s.e_eff()) * s.f()[i]).powi(2))
                .collect();
            let norm: Vec<f64> = s.f().iter().map(|x| x * x).collect();
            let rel = (g.integrate(&res) / g.integrate(&norm)).sqrt();
            assert!(rel < 1e-6, "state {k}: residual {rel:e}");
        }
    }
}

#[test]
fn moving_quartic_effective_potential_is_pure_quartic() {
    let g = Grid::new(-10.0, 10.0, 4096).unwrap();
    let motion = MotionSpec::polynomial(vec![0.0, 0.0, 0.2]).unwrap();
    let pot = PotentialSpec::MovingQuarticDriven { lambda: 1.0, motion: motion.clone() };
    for t in [0.0, 0.7, 2.0] {
        let v = effective_potential(&pot, &motion, &g, t, UnitSystem::natural()).unwrap();
        let c = v.poly_coeffs();
        assert!(c[1].abs() < 1e-8 && c[2].abs() < 1e-8 && c[3].abs() < 1e-8, "{c:?}");
        assert!((c[4] - 1.0).abs() < 1e-8);
    }
}

#[test]
fn power_law_at_rest_gives_stationary_shapes() {
    let g = Grid::new(-6.0, 6.0, 2048).unwrap();
    let pot = PotentialSpec::PowerLaw { lambda: 1.0, n: 4 };
    let v0 = effective_potential(&pot, &MotionSpec::rest(), &g, 0.0, UnitSystem::natural()).unwrap();
    let v1 = effective_potential(&pot, &MotionSpec::rest(), &g, 3.0, UnitSystem::natural()).unwrap();
    assert_eq!(v0.samples(), v1.samples());
    let s = solve_shape(&v0, 2, UnitSystem::natural()).unwrap();
    assert!(s[1].e_eff() > s[0].e_eff());
}
