use serde::{Deserialize, Serialize};

use super::effective::{effective_samples, polynomial_fit};
use crate::error::{Error, Result};
use crate::grid::{Grid, UnitSystem};
use crate::specs::{MotionSpec, PotentialSpec};

/// Default tolerance on coefficient drift, in natural units.
pub const DEFAULT_CONSISTENCY_TOL: f64 = 1e-8;
/// Fewest time samples the check accepts.
pub const MIN_TIME_SAMPLES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Consistent,
    Inconsistent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    /// Highest power examined; powers 0..=K were fitted.
    pub powers_checked: usize,
    /// max_t |Cₙ(t) − Cₙ(t₀)| for n = 0..=K.
    pub max_time_variation: Vec<f64>,
    /// max_t max_q |V_eff(q;t) − V_eff(q;t₀)|.
    pub samplewise_variation: f64,
    pub verdict: Verdict,
    pub offending_powers: Vec<usize>,
    pub tolerance_used: f64,
}

impl ConsistencyReport {
    pub fn is_consistent(&self) -> bool {
        self.verdict == Verdict::Consistent
    }
}

/// Checks that every q-power of V_eff stays constant over the sampled times.
pub fn consistency_check(
    pot: &PotentialSpec,
    motion: &MotionSpec,
    q_grid: &Grid,
    times: &[f64],
    max_degree: usize,
    tol: f64,
    units: UnitSystem,
) -> Result<ConsistencyReport> {
    if !pot.is_real() {
        return Err(Error::ComplexPotential);
    }
    if times.len() < MIN_TIME_SAMPLES {
        return Err(Error::InsufficientSnapshots { found: times.len(), required: MIN_TIME_SAMPLES });
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidSpec("consistency tolerance must be positive".into()));
    }
    let reference = effective_samples(pot, motion, q_grid, times[0], units)?;
    let (c_ref, _) = polynomial_fit(q_grid, &reference, max_degree);
    let mut variation = vec![0.0f64; max_degree + 1];
    let mut samplewise = 0.0f64;
    for &t in &times[1..] {
        let s = effective_samples(pot, motion, q_grid, t, units)?;
        let (c, _) = polynomial_fit(q_grid, &s, max_degree);
        for (n, v) in variation.iter_mut().enumerate() {
            *v = v.max((c[n] - c_ref[n]).abs());
        }
        let dv = s.iter().zip(&reference).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        samplewise = samplewise.max(dv);
    }
    let mut offending: Vec<usize> = (0..=max_degree).filter(|&n| variation[n] > tol).collect();
    if offending.is_empty() && samplewise > tol {
        // Non-polynomial drift the fit cannot attribute; blame the largest mover.
        let worst = (0..=max_degree).max_by(|&a, &b| variation[a].total_cmp(&variation[b])).unwrap_or(0);
        offending.push(worst);
    }
    let verdict = if offending.is_empty() { Verdict::Consistent } else { Verdict::Inconsistent };
    Ok(ConsistencyReport {
        powers_checked: max_degree,
        max_time_variation: variation,
        samplewise_variation: samplewise,
        verdict,
        offending_powers: offending,
        tolerance_used: tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn times() -> Vec<f64> {
        (0..16).map(|i| i as f64 * 0.2).collect()
    }

    #[test]
    fn shm_in_static_trap_is_consistent() {
        let g = Grid::new(-8.0, 8.0, 401).unwrap();
        let pot = PotentialSpec::Harmonic { omega0: 1.0, omega_ramp: 0.0 };
        let motion = MotionSpec::sinusoid(1.0, 1.0, 0.0).unwrap();
        let r = consistency_check(&pot, &motion, &g, &times(), 8, DEFAULT_CONSISTENCY_TOL, UnitSystem::natural()).unwrap();
        assert!(r.is_consistent(), "{r:?}");
        assert!(r.offending_powers.is_empty());
    }

    #[test]
    fn ramped_frequency_flags_quadratic_power() {
        let g = Grid::new(-8.0, 8.0, 401).unwrap();
        let pot = PotentialSpec::Harmonic { omega0: 1.0, omega_ramp: 0.1 };
        let motion = MotionSpec::sinusoid(1.0, 1.0, 0.0).unwrap();
        let r = consistency_check(&pot, &motion, &g, &times(), 8, DEFAULT_CONSISTENCY_TOL, UnitSystem::natural()).unwrap();
        assert_eq!(r.verdict, Verdict::Inconsistent);
        assert!(r.offending_powers.contains(&2));
    }

    #[test]
    fn moving_quartic_flags_cubic_power() {
        let g = Grid::new(-5.0, 5.0, 401).unwrap();
        let pot = PotentialSpec::PowerLaw { lambda: 1.0, n: 4 };
        let motion = MotionSpec::polynomial(vec![0.0, 1.0]).unwrap();
        let r = consistency_check(&pot, &motion, &g, &times(), 8, DEFAULT_CONSISTENCY_TOL, UnitSystem::natural()).unwrap();
        assert!(r.offending_powers.contains(&3));
        assert!(!r.offending_powers.contains(&4));
    }

    #[test]
    fn too_few_samples() {
        let g = Grid::new(-5.0, 5.0, 64).unwrap();
        let err = consistency_check(&PotentialSpec::FreeSpace, &MotionSpec::rest(), &g, &[0.0, 1.0], 8, 1e-8, UnitSystem::natural());
        assert!(matches!(err, Err(Error::InsufficientSnapshots { .. })));
    }
}
