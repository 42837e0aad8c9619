//! Crank–Nicolson time stepping with the compact fourth-order kinetic operator.
//!
//! Each step solves (M + a·H)ψ' = (M − a·H)ψ with H = K + M·V(t + dt/2) and
//! a = i·dt/2ħ, where M and K are the tridiagonal matrices of the compact
//! scheme. The real part of V enters the matrix. The imaginary part is
//! uniform for every supported family, so it is applied as the exact factor
//! exp(Im V·dt/ħ).

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Grid, TimeLattice, UnitSystem, WaveFunction};
use crate::numerov::{MASS_DIAG, MASS_OFF};
use crate::specs::PotentialSpec;
use crate::tridiag::thomas_in_place;

/// Endpoint amplitude, relative to the peak, tolerated under hard Dirichlet walls.
pub const DIRICHLET_TOLERANCE: f64 = 1e-8;

/// Endpoint values (left, right) as a function of time.
pub type BoundaryValues = Arc<dyn Fn(f64) -> Result<(Complex64, Complex64)> + Send + Sync>;

/// How the two endpoint values are set.
#[derive(Clone, Default)]
pub enum Boundary {
    /// ψ = 0 at both ends; the initial state must already vanish there.
    #[default]
    Dirichlet,
    /// ψ = 0 at both ends without checking the initial state.
    Waived,
    /// Endpoints follow a prescribed function of time.
    Driven(BoundaryValues),
}

impl fmt::Debug for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Boundary::Dirichlet => f.write_str("Dirichlet"),
            Boundary::Waived => f.write_str("Waived"),
            Boundary::Driven(_) => f.write_str("Driven(..)"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PropagationPlan {
    pub lattice: TimeLattice,
    pub snapshot_stride: usize,
    pub potential: PotentialSpec,
    pub units: UnitSystem,
    pub boundary: Boundary,
}

impl PropagationPlan {
    pub fn new(dt: f64, t_final: f64, snapshot_stride: usize, potential: PotentialSpec, units: UnitSystem) -> Result<Self> {
        if snapshot_stride == 0 {
            return Err(Error::InvalidSpec("snapshot stride must be at least 1".into()));
        }
        potential.validate()?;
        Ok(Self { lattice: TimeLattice::new(t_final, dt)?, snapshot_stride, potential, units, boundary: Boundary::Dirichlet })
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn dt(&self) -> f64 {
        self.lattice.dt()
    }

    pub fn t_final(&self) -> f64 {
        self.lattice.t_final()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub wavefunction: WaveFunction,
    pub step_index: usize,
}

impl Snapshot {
    pub fn time(&self) -> f64 {
        self.wavefunction.time()
    }
}

/// Stateful stepper holding the evolving wavefunction and solver buffers.
pub struct Propagator {
    grid: Grid,
    potential: PotentialSpec,
    units: UnitSystem,
    dt: f64,
    boundary: Boundary,
    t0: f64,
    steps: usize,
    psi: Vec<Complex64>,
    kappa: f64,
    lower: Vec<Complex64>,
    diag: Vec<Complex64>,
    upper: Vec<Complex64>,
    rhs: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl fmt::Debug for Propagator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Propagator")
            .field("grid", &self.grid)
            .field("dt", &self.dt)
            .field("boundary", &self.boundary)
            .field("time", &self.time())
            .finish()
    }
}

impl Propagator {
    pub fn new(psi0: &WaveFunction, potential: PotentialSpec, units: UnitSystem, dt: f64, boundary: Boundary) -> Result<Self> {
        if !(dt.is_finite() && dt != 0.0) {
            return Err(Error::InvalidSpec(format!("time step must be finite and nonzero, got {dt}")));
        }
        potential.validate()?;
        let grid = *psi0.grid();
        let n = grid.len() - 2;
        let psi = psi0.values().to_vec();
        if let Boundary::Dirichlet = boundary {
            let ratio = endpoint_ratio(&psi);
            if ratio > DIRICHLET_TOLERANCE {
                return Err(Error::DirichletViolation { ratio });
            }
        }
        let zero = Complex64::new(0.0, 0.0);
        Ok(Self {
            grid,
            potential,
            units,
            dt,
            boundary,
            t0: psi0.time(),
            steps: 0,
            psi,
            kappa: units.kinetic_prefactor() / (grid.dx() * grid.dx()),
            lower: vec![zero; n],
            diag: vec![zero; n],
            upper: vec![zero; n],
            rhs: vec![zero; n],
            scratch: vec![zero; n],
        })
    }

    pub fn time(&self) -> f64 {
        self.t0 + self.steps as f64 * self.dt
    }

    pub fn step_index(&self) -> usize {
        self.steps
    }

    pub fn values(&self) -> &[Complex64] {
        &self.psi
    }

    pub fn state(&self) -> Result<WaveFunction> {
        WaveFunction::new(self.grid, self.psi.clone(), self.time())
    }

    /// Advances by one time step.
    pub fn step(&mut self) -> Result<()> {
        let t = self.time();
        let dt = self.dt;
        let hbar = self.units.hbar();
        let v = self.potential.sample_real(&self.grid, t + 0.5 * dt, self.units)?;
        let decay = (self.potential.imaginary_part() * dt / hbar).exp();
        let a = Complex64::new(0.0, dt / (2.0 * hbar));
        let k = self.kappa;
        let npts = self.grid.len();
        let n = npts - 2;
        let psi = &self.psi;

        for r in 0..n {
            let i = r + 1;
            let off_l = a * (-k + MASS_OFF * v[i - 1]);
            let off_r = a * (-k + MASS_OFF * v[i + 1]);
            let dia = a * (2.0 * k + MASS_DIAG * v[i]);
            self.lower[r] = MASS_OFF + off_l;
            self.upper[r] = MASS_OFF + off_r;
            self.diag[r] = MASS_DIAG + dia;
            self.rhs[r] = (MASS_OFF - off_l) * psi[i - 1] + (MASS_DIAG - dia) * psi[i] + (MASS_OFF - off_r) * psi[i + 1];
        }
        let (left, right) = match &self.boundary {
            Boundary::Driven(f) => f(t + dt)?,
            _ => (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)),
        };
        self.rhs[0] -= self.lower[0] * left;
        self.rhs[n - 1] -= self.upper[n - 1] * right;
        thomas_in_place(&self.lower, &self.diag, &self.upper, &mut self.rhs, &mut self.scratch)?;

        self.psi[0] = left;
        self.psi[npts - 1] = right;
        for r in 0..n {
            self.psi[r + 1] = self.rhs[r] * decay;
        }
        self.steps += 1;
        Ok(())
    }
}

fn endpoint_ratio(psi: &[Complex64]) -> f64 {
    let peak = psi.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return 0.0;
    }
    psi[0].norm().max(psi[psi.len() - 1].norm()) / peak
}

/// One Dirichlet Crank–Nicolson step from time t. A negative dt steps backward.
pub fn cn_step(psi: &WaveFunction, pot: &PotentialSpec, t: f64, dt: f64, units: UnitSystem) -> Result<WaveFunction> {
    let start = WaveFunction::new(*psi.grid(), psi.values().to_vec(), t)?;
    let mut p = Propagator::new(&start, pot.clone(), units, dt, Boundary::Waived)?;
    p.step()?;
    p.state()
}

/// Runs the plan from psi0, recording snapshots at step 0, every stride, and
/// the final step. `on_snapshot` sees each snapshot as it is taken.
pub fn propagate(psi0: &WaveFunction, plan: &PropagationPlan, mut on_snapshot: impl FnMut(&Snapshot)) -> Result<Vec<Snapshot>> {
    let n_steps = plan.lattice.n_steps();
    let mut stepper = Propagator::new(psi0, plan.potential.clone(), plan.units, plan.dt(), plan.boundary.clone())?;
    let mut out = Vec::new();
    let mut record = |stepper: &Propagator, out: &mut Vec<Snapshot>| -> Result<()> {
        let snap = Snapshot { wavefunction: stepper.state()?, step_index: stepper.step_index() };
        on_snapshot(&snap);
        out.push(snap);
        Ok(())
    };
    record(&stepper, &mut out)?;
    for s in 1..=n_steps {
        stepper.step()?;
        if s % plan.snapshot_stride == 0 || s == n_steps {
            record(&stepper, &mut out)?;
        }
    }
    Ok(out)
}
