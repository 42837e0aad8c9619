//! Construction stage shared by `construct` and `verify`.

use nonspread_core::constructor::{
    build_phase, consistency_check, effective_potential, motion_from_constraint, solve_shape, uniform_force_track,
    ConsistencyReport, PhaseTrack, ShapeSolution,
};
use nonspread_core::specs::{ForceSpec, MotionSpec, PotentialSpec};
use nonspread_core::{Error, Grid, TimeLattice, UnitSystem};
use serde::Serialize;

use crate::config::{MotionConfig, NamedShape, ScenarioConfig, ShapeConfig};
use crate::error::CliError;
use crate::output::{num, Csv};

/// Nested-integral and identity forms of the uniform-force trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UniformForceCheck {
    /// max |d_nested − d_identity| over the time lattice.
    pub identity_gap: f64,
    /// max |d_nested − d_motion| against the trajectory actually used.
    pub motion_gap: f64,
}

#[derive(Debug, Clone)]
pub struct Construction {
    pub units: UnitSystem,
    pub grid: Grid,
    pub lattice: TimeLattice,
    pub motion: MotionSpec,
    pub consistency: ConsistencyReport,
    /// Present only for a consistent pair.
    pub packet: Option<(ShapeSolution, PhaseTrack)>,
    pub uniform_force: Option<UniformForceCheck>,
}

impl Construction {
    pub fn is_consistent(&self) -> bool {
        self.consistency.is_consistent()
    }
}

/// Resolves motion, checks consistency, then solves for shape and phase.
///
/// Complex potentials are constructed from their real part; the imaginary
/// part only enters propagation.
pub fn construct(cfg: &ScenarioConfig, lattice: &TimeLattice) -> Result<Construction, CliError> {
    let units = cfg.units;
    let grid = cfg.grid;
    let real = cfg.potential.real_part();
    let motion = match &cfg.motion {
        MotionConfig::Explicit(m) => m.clone(),
        MotionConfig::FromConstraint(fc) => motion_from_constraint(real, fc.params(), lattice, units)?,
    };
    let times = lattice.sample_times(cfg.consistency.samples);
    let consistency =
        consistency_check(real, &motion, &grid, &times, cfg.consistency.max_degree, cfg.consistency.tolerance, units)?;

    let uniform_force = match (real, cfg.constraint_params()) {
        (PotentialSpec::UniformForce { force }, Some(p)) => Some(uniform_check(force, p.b, &motion, lattice, units)?),
        _ => None,
    };
    if !consistency.is_consistent() {
        return Ok(Construction { units, grid, lattice: *lattice, motion, consistency, packet: None, uniform_force });
    }

    let shape = match cfg.shape {
        ShapeConfig::Gaussian { gaussian } => {
            let s = gaussian.sigma;
            let a = (2.0 * std::f64::consts::PI * s * s).powf(-0.25);
            let f = grid.points().iter().map(|q| a * (-q * q / (4.0 * s * s)).exp()).collect();
            ShapeSolution::sampled(grid, f, 0.0)?
        }
        ShapeConfig::Named(NamedShape::Airy) => {
            let veff = effective_potential(real, &motion, &grid, 0.0, units)?;
            let s = solve_shape(&veff, 1, units)?.remove(0);
            if s.normalizable() {
                return Err(CliError::Config("shape \"airy\" needs a linear effective potential".into()));
            }
            s
        }
        ShapeConfig::Eigen { eigen_index } => {
            let veff = effective_potential(real, &motion, &grid, 0.0, units)?;
            let mut shapes = solve_shape(&veff, eigen_index + 1, units).map_err(|e| match e {
                Error::NotConfining => CliError::Config("eigen_index needs a confining effective potential".into()),
                other => other.into(),
            })?;
            if !shapes[0].normalizable() {
                return Err(CliError::Config(
                    "effective potential is linear; use shape \"airy\" instead of eigen_index".into(),
                ));
            }
            shapes.swap_remove(eigen_index)
        }
    };
    let phase = build_phase(real, &motion, shape.e_eff(), lattice, units)?;
    Ok(Construction { units, grid, lattice: *lattice, motion, consistency, packet: Some((shape, phase)), uniform_force })
}

fn uniform_check(
    force: &ForceSpec,
    b: f64,
    motion: &MotionSpec,
    lattice: &TimeLattice,
    units: UnitSystem,
) -> Result<UniformForceCheck, CliError> {
    let track = uniform_force_track(force, b, lattice, units)?;
    let mut motion_gap = 0.0f64;
    for (t, d) in track.track.times.iter().zip(&track.track.d) {
        motion_gap = motion_gap.max((motion.eval(*t)?.d - d).abs());
    }
    Ok(UniformForceCheck { identity_gap: track.identity_gap, motion_gap })
}

pub fn shape_csv(shape: &ShapeSolution) -> Csv {
    let mut csv = Csv::new(&["q", "f", "E_eff", "node_count"]);
    let (e, nodes) = (num(shape.e_eff()), shape.node_count().to_string());
    for (q, f) in shape.q_grid().points().iter().zip(shape.f()) {
        csv.row(&[num(*q), num(*f), e.clone(), nodes.clone()]);
    }
    csv
}

pub fn phase_csv(track: &PhaseTrack) -> Csv {
    let mut csv = Csv::new(&["t", "d", "d_dot", "phi1", "phi0"]);
    for i in 0..track.times.len() {
        csv.row(&[num(track.times[i]), num(track.d[i]), num(track.d_dot[i]), num(track.phi1[i]), num(track.phi0[i])]);
    }
    csv
}

pub fn consistency_csv(report: &ConsistencyReport) -> Csv {
    let mut csv = Csv::new(&["power", "max_variation", "offending"]);
    for (n, v) in report.max_time_variation.iter().enumerate() {
        let flagged = report.offending_powers.contains(&n);
        csv.row(&[n.to_string(), num(*v), u8::from(flagged).to_string()]);
    }
    csv
}
