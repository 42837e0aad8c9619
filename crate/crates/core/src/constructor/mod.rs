//! Construction of nonspreading packets: effective potential, consistency,
//! shape equation, motion, phase and assembly, plus closed-form references.

mod consistency;
mod effective;
mod motion;
mod packet;
mod phase;
mod reference;
mod shape;

pub use consistency::{consistency_check, ConsistencyReport, Verdict, DEFAULT_CONSISTENCY_TOL, MIN_TIME_SAMPLES};
pub use effective::{
    effective_potential, effective_potential_with_degree, polynomial_fit, EffectivePotential, DEFAULT_FIT_DEGREE,
    LINEAR_DETECTION_TOL,
};
pub use motion::{motion_from_constraint, ConstraintParams};
pub use packet::{assemble_packet, SUPPORT_FLOOR};
pub use phase::{build_phase, uniform_force_track, PhaseSample, PhaseTrack, UniformForceTrack};
pub use reference::{airy_reference, sho_reference};
pub use shape::{parabolic_peak, solve_shape, solve_shape_with, ShapeSolution, AIRY_PEAK_ARGUMENT};
