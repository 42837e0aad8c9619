use crate::error::{Error, Result};
use crate::grid::{TimeLattice, UnitSystem};
use crate::quadrature::cumulative_simpson;
use crate::specs::{ForceSpec, MotionSpec, PotentialSpec};

/// Packet kinematics and the phase coefficients φ₁(t), φ₀(t) on a uniform lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseTrack {
    pub times: Vec<f64>,
    pub d: Vec<f64>,
    pub d_dot: Vec<f64>,
    pub d_ddot: Vec<f64>,
    pub phi1: Vec<f64>,
    pub phi0: Vec<f64>,
    /// dφ₀/dt, kept for Hermite interpolation between lattice points.
    pub phi0_dot: Vec<f64>,
    pub e_eff_used: f64,
    dt: f64,
    mass_over_hbar: f64,
}

/// One point of a phase track.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSample {
    pub d: f64,
    pub d_dot: f64,
    pub phi1: f64,
    pub phi0: f64,
}

impl PhaseTrack {
    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t_final(&self) -> f64 {
        *self.times.last().unwrap_or(&0.0)
    }

    /// Values at t; exact on lattice points, cubic Hermite in between.
    pub fn at(&self, t: f64) -> Result<PhaseSample> {
        let end = self.t_final();
        let slack = 1e-9 * self.dt;
        if t.is_nan() || t < -slack || t > end + slack {
            return Err(Error::TimeOutOfRange { t, start: 0.0, end });
        }
        let n = self.times.len();
        let s = (t / self.dt).clamp(0.0, (n - 1) as f64);
        let nearest = s.round();
        if (s - nearest).abs() < 1e-9 || n == 1 {
            let i = nearest as usize;
            return Ok(PhaseSample { d: self.d[i], d_dot: self.d_dot[i], phi1: self.phi1[i], phi0: self.phi0[i] });
        }
        let i = (s.floor() as usize).min(n - 2);
        let u = s - i as f64;
        let h = self.dt;
        let d = hermite(self.d[i], self.d[i + 1], self.d_dot[i], self.d_dot[i + 1], h, u);
        let d_dot = hermite(self.d_dot[i], self.d_dot[i + 1], self.d_ddot[i], self.d_ddot[i + 1], h, u);
        let phi0 = hermite(self.phi0[i], self.phi0[i + 1], self.phi0_dot[i], self.phi0_dot[i + 1], h, u);
        Ok(PhaseSample { d, d_dot, phi1: self.mass_over_hbar * d_dot, phi0 })
    }
}

fn hermite(y0: f64, y1: f64, m0: f64, m1: f64, h: f64, u: f64) -> f64 {
    let u2 = u * u;
    let u3 = u2 * u;
    (2.0 * u3 - 3.0 * u2 + 1.0) * y0 + (u3 - 2.0 * u2 + u) * h * m0 + (-2.0 * u3 + 3.0 * u2) * y1 + (u3 - u2) * h * m1
}

/// Integrates ħφ̇₀ = −E_eff − V(d,t) − mḋ²/2 − m·d·d̈ from φ₀(0) = 0.
fn track_from_kinematics(
    times: &TimeLattice,
    d: Vec<f64>,
    d_dot: Vec<f64>,
    d_ddot: Vec<f64>,
    v_at_center: &[f64],
    e_eff: f64,
    units: UnitSystem,
) -> PhaseTrack {
    let (m, hbar) = (units.mass(), units.hbar());
    let phi0_dot: Vec<f64> = (0..d.len())
        .map(|i| -(e_eff + v_at_center[i] + 0.5 * m * d_dot[i] * d_dot[i] + m * d[i] * d_ddot[i]) / hbar)
        .collect();
    let phi0 = cumulative_simpson(&phi0_dot, times.dt());
    let phi1 = d_dot.iter().map(|v| m * v / hbar).collect();
    PhaseTrack {
        times: times.times(),
        d,
        d_dot,
        d_ddot,
        phi1,
        phi0,
        phi0_dot,
        e_eff_used: e_eff,
        dt: times.dt(),
        mass_over_hbar: m / hbar,
    }
}

/// Phase track for a packet following `motion` in `pot` with shape energy `e_eff`.
pub fn build_phase(
    pot: &PotentialSpec,
    motion: &MotionSpec,
    e_eff: f64,
    times: &TimeLattice,
    units: UnitSystem,
) -> Result<PhaseTrack> {
    if !pot.is_real() {
        return Err(Error::ComplexPotential);
    }
    let n = times.len();
    let (mut d, mut v, mut a, mut vc) =
        (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for t in times.times() {
        let k = motion.eval(t)?;
        vc.push(pot.real_value(k.d, t, units)?);
        d.push(k.d);
        v.push(k.d_dot);
        a.push(k.d_ddot);
    }
    Ok(track_from_kinematics(times, d, v, a, &vc, e_eff, units))
}

/// Uniform-force track with the nested-integral motion and its cross-check.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformForceTrack {
    pub track: PhaseTrack,
    /// d(t) from the single-integral form (1/m)∫₀ᵗ(t − τ)F(τ)dτ + B³t²/4m².
    pub d_identity: Vec<f64>,
    /// max |d_nested − d_identity| over the lattice.
    pub identity_gap: f64,
}

/// Motion and phase for V = −F(t)x with Airy constant B, starting from rest at 0.
pub fn uniform_force_track(force: &ForceSpec, b: f64, times: &TimeLattice, units: UnitSystem) -> Result<UniformForceTrack> {
    let (m, h) = (units.mass(), times.dt());
    let ts = times.times();
    let f: Vec<f64> = ts.iter().map(|&t| force.value(t)).collect::<Result<_>>()?;
    let airy = b.powi(3) / (2.0 * m);
    let i1 = cumulative_simpson(&f, h);
    let i2 = cumulative_simpson(&i1, h);
    let tf: Vec<f64> = ts.iter().zip(&f).map(|(t, fv)| t * fv).collect();
    let j = cumulative_simpson(&tf, h);

    let d: Vec<f64> = ts.iter().zip(&i2).map(|(t, s)| s / m + airy * t * t / (2.0 * m)).collect();
    let d_identity: Vec<f64> =
        (0..ts.len()).map(|k| (ts[k] * i1[k] - j[k]) / m + airy * ts[k] * ts[k] / (2.0 * m)).collect();
    let d_dot: Vec<f64> = ts.iter().zip(&i1).map(|(t, s)| (s + airy * t) / m).collect();
    let d_ddot: Vec<f64> = f.iter().map(|fv| (fv + airy) / m).collect();
    let v_center: Vec<f64> = f.iter().zip(&d).map(|(fv, dv)| -fv * dv).collect();
    let identity_gap = d.iter().zip(&d_identity).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let track = track_from_kinematics(times, d, d_dot, d_ddot, &v_center, 0.0, units);
    Ok(UniformForceTrack { track, d_identity, identity_gap })
}
