//! Closed-form potential families V(x,t) and packet motions d(t).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, UnitSystem};

/// Relative slack when testing whether a time lies on a tabulated range.
const RANGE_SLACK: f64 = 1e-9;

fn check_range(t: f64, start: f64, end: f64, step: f64) -> Result<()> {
    let slack = RANGE_SLACK * step;
    if t.is_nan() || t < start - slack || t > end + slack {
        return Err(Error::TimeOutOfRange { t, start, end });
    }
    Ok(())
}

/// Cubic Lagrange interpolation on the uniform lattice `start + i·step`.
fn lattice_interpolate(values: &[f64], start: f64, step: f64, t: f64) -> f64 {
    let n = values.len();
    let s = ((t - start) / step).clamp(0.0, (n - 1) as f64);
    if n < 4 {
        let i = (s.floor() as usize).min(n - 2);
        let u = s - i as f64;
        return values[i] * (1.0 - u) + values[i + 1] * u;
    }
    let base = (s.floor() as isize - 1).clamp(0, n as isize - 4) as usize;
    let u = s - base as f64;
    let v = &values[base..base + 4];
    -v[0] * (u - 1.0) * (u - 2.0) * (u - 3.0) / 6.0 + v[1] * u * (u - 2.0) * (u - 3.0) / 2.0
        - v[2] * u * (u - 1.0) * (u - 3.0) / 2.0
        + v[3] * u * (u - 1.0) * (u - 2.0) / 6.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct TabulatedDef {
    times: Vec<f64>,
    values: Vec<f64>,
}

/// Force samples on a uniform, strictly increasing time lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TabulatedDef", into = "TabulatedDef")]
pub struct TabulatedForce {
    start: f64,
    step: f64,
    values: Vec<f64>,
}

impl TabulatedForce {
    pub fn new(times: &[f64], values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() || times.len() < 2 {
            return Err(Error::InvalidSpec(
                "tabulated force needs at least two (time, value) pairs of equal length".into(),
            ));
        }
        if !times.iter().chain(&values).all(|v| v.is_finite()) {
            return Err(Error::InvalidSpec("tabulated force must be finite".into()));
        }
        let step = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
        if step <= 0.0 {
            return Err(Error::InvalidSpec("tabulated times must increase".into()));
        }
        for (i, w) in times.windows(2).enumerate() {
            if w[1] <= w[0] || ((w[1] - w[0]) - step).abs() > 1e-9 * step.max(times[i].abs() * 1e-6) {
                return Err(Error::InvalidSpec("tabulated times must be uniformly spaced".into()));
            }
        }
        Ok(Self { start: times[0], step, values })
    }

    pub fn end(&self) -> f64 {
        self.start + self.step * (self.values.len() - 1) as f64
    }

    fn value(&self, t: f64) -> Result<f64> {
        check_range(t, self.start, self.end(), self.step)?;
        Ok(lattice_interpolate(&self.values, self.start, self.step, t))
    }
}

impl TryFrom<TabulatedDef> for TabulatedForce {
    type Error = Error;

    fn try_from(def: TabulatedDef) -> Result<Self> {
        Self::new(&def.times, def.values)
    }
}

impl From<TabulatedForce> for TabulatedDef {
    fn from(f: TabulatedForce) -> Self {
        let times = (0..f.values.len()).map(|i| f.start + i as f64 * f.step).collect();
        Self { times, values: f.values }
    }
}

/// Time-dependent uniform force F(t).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ForceSpec {
    Constant { f0: f64 },
    /// F₀·sin(νt + phase).
    Sinusoid {
        f0: f64,
        nu: f64,
        #[serde(default)]
        phase: f64,
    },
    Tabulated(TabulatedForce),
}

impl ForceSpec {
    pub fn value(&self, t: f64) -> Result<f64> {
        match self {
            ForceSpec::Constant { f0 } => Ok(*f0),
            ForceSpec::Sinusoid { f0, nu, phase } => Ok(f0 * (nu * t + phase).sin()),
            ForceSpec::Tabulated(tab) => tab.value(t),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            ForceSpec::Constant { f0 } => f0.is_finite(),
            ForceSpec::Sinusoid { f0, nu, phase } => f0.is_finite() && nu.is_finite() && phase.is_finite(),
            ForceSpec::Tabulated(_) => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidSpec("force parameters must be finite".into()))
        }
    }
}

/// d(t) with its first two derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kinematics {
    pub d: f64,
    pub d_dot: f64,
    pub d_ddot: f64,
}

/// The raw motion families, before the d(0) = 0 shift is applied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MotionKind {
    Rest,
    /// Σ cₖ tᵏ.
    Polynomial { coeffs: Vec<f64> },
    /// x₀·sin(ωt + phase).
    Sinusoid {
        x0: f64,
        omega: f64,
        #[serde(default)]
        phase: f64,
    },
    /// Uniform acceleration B³/(2m²) from rest.
    ConstantAccel { b: f64, mass: f64 },
    /// Samples on the lattice t_i = i·dt starting at t = 0.
    Numeric { dt: f64, d: Vec<f64>, d_dot: Vec<f64>, d_ddot: Vec<f64> },
}

/// Packet trajectory d(t), normalized so that d(0) = 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MotionKind", into = "MotionKind")]
pub struct MotionSpec {
    kind: MotionKind,
    origin: f64,
}

impl MotionSpec {
    pub fn new(kind: MotionKind) -> Result<Self> {
        validate_motion(&kind)?;
        let mut spec = Self { kind, origin: 0.0 };
        spec.origin = spec.raw(0.0)?.d;
        Ok(spec)
    }

    pub fn rest() -> Self {
        Self { kind: MotionKind::Rest, origin: 0.0 }
    }

    pub fn polynomial(coeffs: Vec<f64>) -> Result<Self> {
        Self::new(MotionKind::Polynomial { coeffs })
    }

    pub fn sinusoid(x0: f64, omega: f64, phase: f64) -> Result<Self> {
        Self::new(MotionKind::Sinusoid { x0, omega, phase })
    }

    pub fn constant_accel(b: f64, mass: f64) -> Result<Self> {
        Self::new(MotionKind::ConstantAccel { b, mass })
    }

    pub fn numeric(dt: f64, d: Vec<f64>, d_dot: Vec<f64>, d_ddot: Vec<f64>) -> Result<Self> {
        Self::new(MotionKind::Numeric { dt, d, d_dot, d_ddot })
    }

    pub fn kind(&self) -> &MotionKind {
        &self.kind
    }

    pub fn is_rest(&self) -> bool {
        matches!(self.kind, MotionKind::Rest)
    }

    /// d, ḋ, d̈ at time t, with d(0) = 0.
    pub fn eval(&self, t: f64) -> Result<Kinematics> {
        let mut k = self.raw(t)?;
        k.d -= self.origin;
        Ok(k)
    }

    fn raw(&self, t: f64) -> Result<Kinematics> {
        Ok(match &self.kind {
            MotionKind::Rest => Kinematics { d: 0.0, d_dot: 0.0, d_ddot: 0.0 },
            MotionKind::Polynomial { coeffs } => {
                let d = poly_derivative(coeffs, 0, t);
                let v = poly_derivative(coeffs, 1, t);
                let a = poly_derivative(coeffs, 2, t);
                Kinematics { d, d_dot: v, d_ddot: a }
            }
            MotionKind::Sinusoid { x0, omega, phase } => {
                let arg = omega * t + phase;
                Kinematics {
                    d: x0 * arg.sin(),
                    d_dot: x0 * omega * arg.cos(),
                    d_ddot: -x0 * omega * omega * arg.sin(),
                }
            }
            MotionKind::ConstantAccel { b, mass } => {
                let accel = b.powi(3) / (2.0 * mass * mass);
                Kinematics { d: 0.5 * accel * t * t, d_dot: accel * t, d_ddot: accel }
            }
            MotionKind::Numeric { dt, d, d_dot, d_ddot } => {
                let end = dt * (d.len() - 1) as f64;
                check_range(t, 0.0, end, *dt)?;
                let s = (t / dt).clamp(0.0, (d.len() - 1) as f64);
                let i = (s.floor() as usize).min(d.len() - 2);
                let u = s - i as f64;
                Kinematics {
                    d: hermite(d[i], d[i + 1], d_dot[i], d_dot[i + 1], *dt, u),
                    d_dot: hermite(d_dot[i], d_dot[i + 1], d_ddot[i], d_ddot[i + 1], *dt, u),
                    d_ddot: lattice_interpolate(d_ddot, 0.0, *dt, t),
                }
            }
        })
    }
}

fn poly_derivative(coeffs: &[f64], order: usize, t: f64) -> f64 {
    let mut acc = 0.0;
    for k in (order..coeffs.len()).rev() {
        let mut factor = 1.0;
        for j in 0..order {
            factor *= (k - j) as f64;
        }
        acc = acc * t + coeffs[k] * factor;
    }
    acc
}

/// Cubic Hermite interpolation on one lattice interval, u ∈ [0, 1].
fn hermite(y0: f64, y1: f64, m0: f64, m1: f64, h: f64, u: f64) -> f64 {
    let u2 = u * u;
    let u3 = u2 * u;
    (2.0 * u3 - 3.0 * u2 + 1.0) * y0
        + (u3 - 2.0 * u2 + u) * h * m0
        + (-2.0 * u3 + 3.0 * u2) * y1
        + (u3 - u2) * h * m1
}

fn validate_motion(kind: &MotionKind) -> Result<()> {
    let finite = |vals: &[f64]| vals.iter().all(|v| v.is_finite());
    match kind {
        MotionKind::Rest => Ok(()),
        MotionKind::Polynomial { coeffs } => {
            if finite(coeffs) {
                Ok(())
            } else {
                Err(Error::InvalidSpec("polynomial coefficients must be finite".into()))
            }
        }
        MotionKind::Sinusoid { x0, omega, phase } => {
            if finite(&[*x0, *omega, *phase]) {
                Ok(())
            } else {
                Err(Error::InvalidSpec("sinusoid parameters must be finite".into()))
            }
        }
        MotionKind::ConstantAccel { b, mass } => {
            if b.is_finite() && mass.is_finite() && *mass > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidSpec("constant acceleration needs finite B and positive mass".into()))
            }
        }
        MotionKind::Numeric { dt, d, d_dot, d_ddot } => {
            if !(dt.is_finite() && *dt > 0.0) {
                return Err(Error::InvalidSpec("numeric motion needs a positive step".into()));
            }
            if d.len() < 4 || d.len() != d_dot.len() || d.len() != d_ddot.len() {
                return Err(Error::InvalidSpec(
                    "numeric motion needs at least 4 samples of d, d_dot, d_ddot with equal lengths".into(),
                ));
            }
            if !(finite(d) && finite(d_dot) && finite(d_ddot)) {
                return Err(Error::InvalidSpec("numeric motion samples must be finite".into()));
            }
            let span = dt * (d.len() - 1) as f64;
            let max_abs = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let scale = max_abs(d_ddot).max(max_abs(d_dot) / span).max(max_abs(d) / (span * span));
            for i in 1..d.len() - 1 {
                let second = (d[i + 1] - 2.0 * d[i] + d[i - 1]) / (dt * dt);
                // The second difference carries a dt²d⁗/12 truncation term.
                let truncation = (d_ddot[i + 1] - 2.0 * d_ddot[i] + d_ddot[i - 1]).abs() / 6.0;
                if (second - d_ddot[i]).abs() > 1e-6 * scale.max(f64::MIN_POSITIVE) + truncation {
                    return Err(Error::InvalidSpec(format!(
                        "d_ddot[{i}] = {} disagrees with the second difference of d ({second})",
                        d_ddot[i]
                    )));
                }
            }
            Ok(())
        }
    }
}

impl TryFrom<MotionKind> for MotionSpec {
    type Error = Error;

    fn try_from(kind: MotionKind) -> Result<Self> {
        Self::new(kind)
    }
}

impl From<MotionSpec> for MotionKind {
    fn from(m: MotionSpec) -> Self {
        m.kind
    }
}

pub fn motion_eval(spec: &MotionSpec, t: f64) -> Result<Kinematics> {
    spec.eval(t)
}

/// Potential families. Every variant is real except `ComplexAbsorber`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialSpec {
    FreeSpace,
    /// V = −F(t)·x.
    UniformForce { force: ForceSpec },
    /// V = ½ m ω(t)² x² with ω(t) = ω₀(1 + ramp·t).
    Harmonic {
        omega0: f64,
        #[serde(default)]
        omega_ramp: f64,
    },
    /// V = λ xⁿ, n ≥ 3.
    PowerLaw { lambda: f64, n: u32 },
    /// V = ½mω²(x − d)² − m x d̈ − ½mω²x₀² sin²(ωt).
    MovingHarmonicDriven {
        omega: f64,
        motion: MotionSpec,
        #[serde(default)]
        offset_amplitude: f64,
    },
    /// V = λ(x − d)⁴ − m x d̈.
    MovingQuarticDriven { lambda: f64, motion: MotionSpec },
    /// base + i·(−γ).
    ComplexAbsorber { base: Box<PotentialSpec>, gamma: f64 },
}

impl PotentialSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidSpec(msg.to_string()));
        match self {
            PotentialSpec::FreeSpace => Ok(()),
            PotentialSpec::UniformForce { force } => force.validate(),
            PotentialSpec::Harmonic { omega0, omega_ramp } => {
                if omega0.is_finite() && omega_ramp.is_finite() {
                    Ok(())
                } else {
                    bad("harmonic parameters must be finite")
                }
            }
            PotentialSpec::PowerLaw { lambda, n } => {
                if *n < 3 {
                    bad("power-law exponent must be at least 3")
                } else if !lambda.is_finite() {
                    bad("power-law strength must be finite")
                } else {
                    Ok(())
                }
            }
            PotentialSpec::MovingHarmonicDriven { omega, offset_amplitude, .. } => {
                if omega.is_finite() && offset_amplitude.is_finite() {
                    Ok(())
                } else {
                    bad("moving harmonic parameters must be finite")
                }
            }
            PotentialSpec::MovingQuarticDriven { lambda, .. } => {
                if lambda.is_finite() {
                    Ok(())
                } else {
                    bad("moving quartic strength must be finite")
                }
            }
            PotentialSpec::ComplexAbsorber { base, gamma } => {
                if !(gamma.is_finite() && *gamma >= 0.0) {
                    return bad("absorber strength must be finite and non-negative");
                }
                base.validate()
            }
        }
    }

    pub fn is_real(&self) -> bool {
        match self {
            PotentialSpec::ComplexAbsorber { gamma, base } => *gamma == 0.0 && base.is_real(),
            _ => true,
        }
    }

    /// The potential with every imaginary part removed.
    pub fn real_part(&self) -> &PotentialSpec {
        match self {
            PotentialSpec::ComplexAbsorber { base, .. } => base.real_part(),
            other => other,
        }
    }

    /// Imaginary part, which is spatially uniform for every family.
    pub fn imaginary_part(&self) -> f64 {
        match self {
            PotentialSpec::ComplexAbsorber { base, gamma } => base.imaginary_part() - gamma,
            _ => 0.0,
        }
    }

    pub fn value(&self, x: f64, t: f64, units: UnitSystem) -> Result<Complex64> {
        let re = self.real_part().prepare(t, units)?.eval(x);
        Ok(Complex64::new(re, self.imaginary_part()))
    }

    /// Real potential value; fails for potentials with an imaginary part.
    pub fn real_value(&self, x: f64, t: f64, units: UnitSystem) -> Result<f64> {
        if !self.is_real() {
            return Err(Error::ComplexPotential);
        }
        Ok(self.real_part().prepare(t, units)?.eval(x))
    }

    /// Real part of V(x_i, t) on every grid point.
    pub fn sample_real(&self, grid: &Grid, t: f64, units: UnitSystem) -> Result<Vec<f64>> {
        let frozen = self.real_part().prepare(t, units)?;
        Ok(grid.points().into_iter().map(|x| frozen.eval(x)).collect())
    }

    /// Evaluates everything that depends only on t once.
    fn prepare(&self, t: f64, units: UnitSystem) -> Result<FrozenPotential> {
        let m = units.mass();
        Ok(match self {
            PotentialSpec::FreeSpace => FrozenPotential::Polynomial { center: 0.0, coeffs: [0.0; 5], linear: 0.0, constant: 0.0 },
            PotentialSpec::UniformForce { force } => FrozenPotential::Polynomial {
                center: 0.0,
                coeffs: [0.0; 5],
                linear: -force.value(t)?,
                constant: 0.0,
            },
            PotentialSpec::Harmonic { omega0, omega_ramp } => {
                let w = omega0 * (1.0 + omega_ramp * t);
                FrozenPotential::Polynomial {
                    center: 0.0,
                    coeffs: [0.0, 0.0, 0.5 * m * w * w, 0.0, 0.0],
                    linear: 0.0,
                    constant: 0.0,
                }
            }
            PotentialSpec::PowerLaw { lambda, n } => FrozenPotential::Power { lambda: *lambda, n: *n as i32 },
            PotentialSpec::MovingHarmonicDriven { omega, motion, offset_amplitude } => {
                let k = motion.eval(t)?;
                let s = (omega * t).sin();
                FrozenPotential::Polynomial {
                    center: k.d,
                    coeffs: [0.0, 0.0, 0.5 * m * omega * omega, 0.0, 0.0],
                    linear: -m * k.d_ddot,
                    constant: -0.5 * m * omega * omega * offset_amplitude * offset_amplitude * s * s,
                }
            }
            PotentialSpec::MovingQuarticDriven { lambda, motion } => {
                let k = motion.eval(t)?;
                FrozenPotential::Polynomial {
                    center: k.d,
                    coeffs: [0.0, 0.0, 0.0, 0.0, *lambda],
                    linear: -m * k.d_ddot,
                    constant: 0.0,
                }
            }
            PotentialSpec::ComplexAbsorber { base, .. } => base.prepare(t, units)?,
        })
    }
}

/// A real potential at a fixed time.
enum FrozenPotential {
    /// Σ cₖ (x − center)ᵏ + linear·x + constant.
    Polynomial { center: f64, coeffs: [f64; 5], linear: f64, constant: f64 },
    Power { lambda: f64, n: i32 },
}

impl FrozenPotential {
    fn eval(&self, x: f64) -> f64 {
        match self {
            FrozenPotential::Polynomial { center, coeffs, linear, constant } => {
                let y = x - center;
                let shape = coeffs.iter().rev().fold(0.0, |acc, c| acc * y + c);
                shape + linear * x + constant
            }
            FrozenPotential::Power { lambda, n } => lambda * x.powi(*n),
        }
    }
}

pub fn potential_value(spec: &PotentialSpec, x: f64, t: f64, units: UnitSystem) -> Result<Complex64> {
    spec.value(x, t, units)
}
