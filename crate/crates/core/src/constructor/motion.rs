use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{TimeLattice, UnitSystem};
use crate::specs::{ForceSpec, MotionSpec, PotentialSpec};

/// Free parameters of the motion constraints.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ConstraintParams {
    /// Airy constant B; the free and uniform-force constraints add B³/(2m²) to d̈.
    pub b: f64,
    /// Initial velocity ḋ(0).
    pub v0: f64,
    /// Constant on the right of d̈ + ω²d = const in a harmonic trap.
    pub accel_offset: f64,
}

/// Packet trajectory implied by the consistency constraint of `pot`, with d(0) = 0.
pub fn motion_from_constraint(
    pot: &PotentialSpec,
    params: ConstraintParams,
    times: &TimeLattice,
    units: UnitSystem,
) -> Result<MotionSpec> {
    let m = units.mass();
    let airy_accel = params.b.powi(3) / (2.0 * m * m);
    match pot {
        PotentialSpec::FreeSpace => {
            let accel = airy_accel + params.accel_offset;
            if params.v0 == 0.0 && params.accel_offset == 0.0 {
                MotionSpec::constant_accel(params.b, m)
            } else {
                MotionSpec::polynomial(vec![0.0, params.v0, 0.5 * accel])
            }
        }
        PotentialSpec::UniformForce { force } => {
            if let ForceSpec::Constant { f0 } = force {
                let accel = f0 / m + airy_accel + params.accel_offset;
                return MotionSpec::polynomial(vec![0.0, params.v0, 0.5 * accel]);
            }
            integrate_rk4(times, params.v0, |t| Ok(force.value(t)? / m + airy_accel + params.accel_offset))
        }
        PotentialSpec::Harmonic { omega0, omega_ramp } => {
            if *omega_ramp != 0.0 {
                return Err(Error::UnsupportedPotential(
                    "a time-dependent trap frequency admits no nonspreading motion".into(),
                ));
            }
            let w = *omega0;
            if w == 0.0 {
                return MotionSpec::polynomial(vec![0.0, params.v0, 0.5 * params.accel_offset]);
            }
            // d = c/ω² + A sin(ωt + φ) with A sin φ = −c/ω² so that d(0) = 0.
            let s = -params.accel_offset / (w * w);
            let c = params.v0 / w;
            let amplitude = s.hypot(c);
            let phase = s.atan2(c);
            MotionSpec::sinusoid(amplitude, w, phase)
        }
        other => Err(Error::UnsupportedPotential(format!(
            "no motion constraint is available for {}",
            potential_name(other)
        ))),
    }
}

fn potential_name(p: &PotentialSpec) -> &'static str {
    match p {
        PotentialSpec::FreeSpace => "free space",
        PotentialSpec::UniformForce { .. } => "a uniform force",
        PotentialSpec::Harmonic { .. } => "a harmonic trap",
        PotentialSpec::PowerLaw { .. } => "a power-law potential",
        PotentialSpec::MovingHarmonicDriven { .. } => "a driven moving harmonic trap",
        PotentialSpec::MovingQuarticDriven { .. } => "a driven moving quartic trap",
        PotentialSpec::ComplexAbsorber { .. } => "a complex absorber",
    }
}

/// Classical RK4 for d̈ = a(t), sampled on the lattice.
fn integrate_rk4(times: &TimeLattice, v0: f64, accel: impl Fn(f64) -> Result<f64>) -> Result<MotionSpec> {
    let h = times.dt();
    let n = times.len().max(4);
    let (mut d, mut v) = (0.0, v0);
    let mut ds = Vec::with_capacity(n);
    let mut vs = Vec::with_capacity(n);
    let mut acc = Vec::with_capacity(n);
    for i in 0..n {
        let t = i as f64 * h;
        let a0 = accel(t)?;
        ds.push(d);
        vs.push(v);
        acc.push(a0);
        if i + 1 == n {
            break;
        }
        let a_mid = accel(t + 0.5 * h)?;
        let a1 = accel(t + h)?;
        // RK4 stages for (d, v) with acceleration depending on t only.
        let k1d = v;
        let k2d = v + 0.5 * h * a0;
        let k3d = v + 0.5 * h * a_mid;
        let k4d = v + h * a_mid;
        d += h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
        v += h / 6.0 * (a0 + 4.0 * a_mid + a1);
    }
    MotionSpec::numeric(h, ds, vs, acc)
}
