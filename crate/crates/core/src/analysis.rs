//! Diagnostics that compare propagated wavefunctions with the constructed
//! nonspreading packet.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constructor::{parabolic_peak, ShapeSolution};
use crate::error::{Error, Result};
use crate::grid::{second_derivative_samples, second_derivative_samples_4th, Grid, UnitSystem, WaveFunction};
use crate::propagator::Snapshot;
use crate::specs::{MotionSpec, PotentialSpec};

/// Density at the window edge, relative to the peak, above which metrics
/// would be polluted by the boundary.
pub const WINDOW_EDGE_LIMIT: f64 = 1e-4;
/// Fewest points a phase fit accepts.
pub const MIN_PHASE_POINTS: usize = 8;

/// Central portion of the grid used for scoring.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisWindow {
    pub fraction: f64,
    /// Relative density below which phase samples are ignored.
    pub density_floor: f64,
}

impl Default for AnalysisWindow {
    fn default() -> Self {
        Self { fraction: 0.6, density_floor: 1e-6 }
    }
}

impl AnalysisWindow {
    pub fn new(fraction: f64, density_floor: f64) -> Result<Self> {
        let w = Self { fraction, density_floor };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fraction > 0.0 && self.fraction <= 1.0) {
            return Err(Error::InvalidSpec(format!("window fraction must lie in (0, 1], got {}", self.fraction)));
        }
        if !(self.density_floor.is_finite() && self.density_floor >= 0.0 && self.density_floor < 1.0) {
            return Err(Error::InvalidSpec(format!("density floor must lie in [0, 1), got {}", self.density_floor)));
        }
        Ok(())
    }

    /// Inclusive index range of the window, always strictly inside the grid.
    pub fn indices(&self, grid: &Grid) -> (usize, usize) {
        let n = grid.len();
        let half = 0.5 * self.fraction * (n - 1) as f64;
        let mid = 0.5 * (n - 1) as f64;
        let lo = ((mid - half).ceil() as usize).max(1);
        let hi = ((mid + half).floor() as usize).min(n - 2);
        (lo, hi.max(lo))
    }

    pub fn bounds(&self, grid: &Grid) -> (f64, f64) {
        let (lo, hi) = self.indices(grid);
        (grid.x(lo), grid.x(hi))
    }
}

/// Per-snapshot diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnapshotMetrics {
    pub t: f64,
    pub shape_err_l2: f64,
    pub shape_err_linf: f64,
    /// ⟨x⟩ − d − ⟨q⟩_f for normalizable shapes, peak offset otherwise.
    pub centroid_err: f64,
    pub norm: f64,
    pub flux_residual: f64,
    pub phase_residual: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InvarianceMetrics {
    pub t: Vec<f64>,
    pub shape_err_l2: Vec<f64>,
    pub shape_err_linf: Vec<f64>,
    pub centroid_err: Vec<f64>,
    pub norm: Vec<f64>,
    pub flux_residual: Vec<f64>,
    pub phase_residual: Vec<f64>,
}

impl InvarianceMetrics {
    pub fn push(&mut self, m: SnapshotMetrics) {
        self.t.push(m.t);
        self.shape_err_l2.push(m.shape_err_l2);
        self.shape_err_linf.push(m.shape_err_linf);
        self.centroid_err.push(m.centroid_err);
        self.norm.push(m.norm);
        self.flux_residual.push(m.flux_residual);
        self.phase_residual.push(m.phase_residual);
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub kinetic: f64,
    pub potential: f64,
    pub total: f64,
    pub e_n_reference: Option<f64>,
    pub e_cl_reference: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseFit {
    pub slope: f64,
    /// Wrapped to (−π, π].
    pub intercept: f64,
    pub rms_residual: f64,
}

/// Fourth-order central first derivative; lower order near the ends.
fn first_derivative(v: &[Complex64], dx: f64) -> Vec<Complex64> {
    let n = v.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    if n < 3 {
        return out;
    }
    out[0] = (v[1] - v[0]) / dx;
    out[n - 1] = (v[n - 1] - v[n - 2]) / dx;
    for i in 1..n - 1 {
        out[i] = if i >= 2 && i + 2 < n {
            (8.0 * (v[i + 1] - v[i - 1]) - (v[i + 2] - v[i - 2])) / (12.0 * dx)
        } else {
            (v[i + 1] - v[i - 1]) / (2.0 * dx)
        };
    }
    out
}

/// j = (ħ/m)·Im(ψ*∂ₓψ).
pub fn probability_current(psi: &WaveFunction, units: UnitSystem) -> Vec<f64> {
    let d = first_derivative(psi.values(), psi.grid().dx());
    let c = units.hbar() / units.mass();
    psi.values().iter().zip(d).map(|(p, dp)| c * (p.conj() * dp).im).collect()
}

fn peak(values: &[f64]) -> f64 {
    values.iter().copied().fold(0.0, f64::max)
}

/// Shape, centroid, norm, flux and phase diagnostics for one wavefunction.
pub fn snapshot_metrics(
    psi: &WaveFunction,
    shape: &ShapeSolution,
    motion: &MotionSpec,
    window: &AnalysisWindow,
    units: UnitSystem,
) -> Result<SnapshotMetrics> {
    let grid = psi.grid();
    let t = psi.time();
    let k = motion.eval(t)?;
    let rho = psi.density();
    let (lo, hi) = window.indices(grid);

    let reference: Vec<f64> = (lo..=hi).map(|i| shape.value_at(grid.x(i) - k.d).powi(2)).collect();
    let ref_peak = peak(&reference);
    if ref_peak <= 0.0 {
        return Err(Error::SupportEscape(format!("reference packet has no weight inside the window at t = {t}")));
    }
    if shape.normalizable() {
        let rho_peak = peak(&rho);
        let edge = rho[lo].max(rho[hi]);
        if edge > WINDOW_EDGE_LIMIT * rho_peak {
            return Err(Error::SupportEscape(format!(
                "density at the window edge is {:.3e} of the peak at t = {t}",
                edge / rho_peak
            )));
        }
    }
    let mut sq = 0.0;
    let mut linf = 0.0f64;
    for (j, i) in (lo..=hi).enumerate() {
        let e = (rho[i] - reference[j]).abs();
        sq += e * e;
        linf = linf.max(e);
    }
    let shape_err_l2 = (sq / (hi - lo + 1) as f64).sqrt() / ref_peak;
    let shape_err_linf = linf / ref_peak;

    let norm = grid.integrate(&rho);
    let centroid_err = match shape.mean_position() {
        Some(q_mean) => {
            let xrho: Vec<f64> = rho.iter().zip(grid.points()).map(|(r, x)| r * x).collect();
            grid.integrate(&xrho) / norm - k.d - q_mean
        }
        None => {
            let sub = Grid::new(grid.x(lo), grid.x(hi), hi - lo + 1)?;
            parabolic_peak(&sub, &rho[lo..=hi]) - k.d - shape.peak_position()
        }
    };

    let j = probability_current(psi, units);
    let flux_residual = (lo..=hi).map(|i| (j[i] - k.d_dot * rho[i]).abs()).fold(0.0, f64::max);
    let phase_residual = phase_linearity(psi, window)?.rms_residual;
    Ok(SnapshotMetrics { t, shape_err_l2, shape_err_linf, centroid_err, norm, flux_residual, phase_residual })
}

/// Diagnostics for every snapshot, in order.
pub fn invariance_metrics(
    snapshots: &[Snapshot],
    shape: &ShapeSolution,
    motion: &MotionSpec,
    window: &AnalysisWindow,
    units: UnitSystem,
) -> Result<InvarianceMetrics> {
    if snapshots.is_empty() {
        return Err(Error::InsufficientSnapshots { found: 0, required: 1 });
    }
    let grid = snapshots[0].wavefunction.grid();
    let mut out = InvarianceMetrics::default();
    for s in snapshots {
        if s.wavefunction.grid() != grid {
            return Err(Error::GridMismatch);
        }
        out.push(snapshot_metrics(&s.wavefunction, shape, motion, window, units)?);
    }
    Ok(out)
}

/// ⟨H⟩ split into kinetic and potential parts, normalized by ⟨ψ|ψ⟩.
pub fn energy_expectation(psi: &WaveFunction, pot: &PotentialSpec, t: f64, units: UnitSystem) -> Result<EnergyReport> {
    if !pot.is_real() {
        return Err(Error::ComplexPotential);
    }
    let grid = psi.grid();
    let v = pot.sample_real(grid, t, units)?;
    let d2 = second_derivative_samples_4th(psi.values(), grid.dx());
    let c = units.kinetic_prefactor();
    let rho = psi.density();
    let norm = grid.integrate(&rho);
    if !(norm > 0.0) {
        return Err(Error::InvalidSpec("wavefunction has zero norm".into()));
    }
    let kin: Vec<f64> = psi.values().iter().zip(&d2).map(|(p, d)| -c * (p.conj() * d).re).collect();
    let pe: Vec<f64> = rho.iter().zip(&v).map(|(r, vv)| r * vv).collect();
    let kinetic = grid.integrate(&kin) / norm;
    let potential = grid.integrate(&pe) / norm;
    Ok(EnergyReport { kinetic, potential, total: kinetic + potential, e_n_reference: None, e_cl_reference: None })
}

/// Weighted straight-line fit of arg ψ over the window.
///
/// The phase is read from ψ², which is blind to the sign changes of a real
/// profile at its nodes, then halved. Samples with density below the floor are
/// skipped and increments are taken between consecutive retained samples.
pub fn phase_linearity(psi: &WaveFunction, window: &AnalysisWindow) -> Result<PhaseFit> {
    let grid = psi.grid();
    let vals = psi.values();
    let (lo, hi) = window.indices(grid);
    let rho = psi.density();
    let rho_peak = rho[lo..=hi].iter().copied().fold(0.0, f64::max);
    let keep: Vec<usize> = (lo..=hi).filter(|&i| rho[i] > window.density_floor * rho_peak && rho[i] > 0.0).collect();
    if keep.len() < MIN_PHASE_POINTS {
        return Err(Error::InsufficientSupport { found: keep.len(), required: MIN_PHASE_POINTS });
    }
    let mut doubled = Vec::with_capacity(keep.len());
    let mut acc = (vals[keep[0]] * vals[keep[0]]).arg();
    doubled.push(acc);
    for w in keep.windows(2) {
        let a = vals[w[0]] * vals[w[0]];
        let b = vals[w[1]] * vals[w[1]];
        acc += (b * a.conj()).arg();
        doubled.push(acc);
    }
    let (mut sw, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (k, &i) in keep.iter().enumerate() {
        let (w, x, y) = (rho[i], grid.x(i), 0.5 * doubled[k]);
        sw += w;
        sx += w * x;
        sy += w * y;
        sxx += w * x * x;
        sxy += w * x * y;
    }
    let (mx, my) = (sx / sw, sy / sw);
    let var = sxx / sw - mx * mx;
    let slope = if var > 0.0 { (sxy / sw - mx * my) / var } else { 0.0 };
    let mut intercept = my - slope * mx;
    let ss: f64 = keep
        .iter()
        .enumerate()
        .map(|(k, &i)| {
            let r = 0.5 * doubled[k] - (slope * grid.x(i) + intercept);
            rho[i] * r * r
        })
        .sum();
    let rms_residual = (ss / sw).sqrt();

    // Halving leaves the intercept ambiguous by π; pin it with the phase at the peak.
    let ipk = *keep.iter().max_by(|&&a, &&b| rho[a].total_cmp(&rho[b])).unwrap_or(&keep[0]);
    let predicted = slope * grid.x(ipk) + intercept;
    intercept += std::f64::consts::PI * ((vals[ipk].arg() - predicted) / std::f64::consts::PI).round();
    Ok(PhaseFit { slope, intercept: wrap_angle(intercept), rms_residual })
}

fn wrap_angle(a: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let r = a.rem_euclid(two_pi);
    if r > std::f64::consts::PI {
        r - two_pi
    } else {
        r
    }
}

/// Windowed, normalized residual of iħ∂ₜΨ + (ħ²/2m)∂ₓ²Ψ − VΨ at the middle
/// of three equally spaced states.
pub fn residual_at(
    prev: &WaveFunction,
    cur: &WaveFunction,
    next: &WaveFunction,
    pot: &PotentialSpec,
    units: UnitSystem,
    window: &AnalysisWindow,
) -> Result<f64> {
    let grid = cur.grid();
    if prev.grid() != grid || next.grid() != grid {
        return Err(Error::GridMismatch);
    }
    let h1 = cur.time() - prev.time();
    let h2 = next.time() - cur.time();
    if !(h1 > 0.0) || (h1 - h2).abs() > 1e-9 * h1 {
        return Err(Error::InvalidSpec("residual needs equally spaced, increasing times".into()));
    }
    let t = cur.time();
    let v = pot.sample_real(grid, t, units)?;
    let vi = pot.imaginary_part();
    let d2 = second_derivative_samples(cur.values(), grid.dx());
    let c = units.kinetic_prefactor();
    let ih = Complex64::new(0.0, units.hbar());
    let (lo, hi) = window.indices(grid);
    let (mut res, mut kin, mut pe) = (0.0, 0.0, 0.0);
    for i in lo..=hi {
        let dt_psi = (next.values()[i] - prev.values()[i]) / (2.0 * h1);
        let k = d2[i] * c;
        let vp = Complex64::new(v[i], vi) * cur.values()[i];
        res += (ih * dt_psi + k - vp).norm_sqr();
        kin += k.norm_sqr();
        pe += vp.norm_sqr();
    }
    let scale = kin.sqrt() + pe.sqrt();
    if scale == 0.0 {
        return Ok(if res == 0.0 { 0.0 } else { f64::INFINITY });
    }
    Ok(res.sqrt() / scale)
}

/// Largest `residual_at` over consecutive snapshot triples.
pub fn schrodinger_residual(snapshots: &[Snapshot], pot: &PotentialSpec, units: UnitSystem, window: &AnalysisWindow) -> Result<f64> {
    if snapshots.len() < 3 {
        return Err(Error::InsufficientSnapshots { found: snapshots.len(), required: 3 });
    }
    let mut worst = 0.0f64;
    for w in snapshots.windows(3) {
        let r = residual_at(&w[0].wavefunction, &w[1].wavefunction, &w[2].wavefunction, pot, units, window)?;
        worst = worst.max(r);
    }
    Ok(worst)
}

/// ⟨x²⟩ − ⟨x⟩² of the density.
pub fn position_variance(psi: &WaveFunction) -> f64 {
    let g = psi.grid();
    let rho = psi.density();
    let norm = g.integrate(&rho);
    let xs = g.points();
    let m1 = g.integrate(&rho.iter().zip(&xs).map(|(r, x)| r * x).collect::<Vec<_>>()) / norm;
    let m2 = g.integrate(&rho.iter().zip(&xs).map(|(r, x)| r * x * x).collect::<Vec<_>>()) / norm;
    m2 - m1 * m1
}

/// ‖a − b‖ / ‖b‖ over the window.
pub fn relative_l2_error(a: &WaveFunction, b: &WaveFunction, window: &AnalysisWindow) -> Result<f64> {
    if a.grid() != b.grid() {
        return Err(Error::GridMismatch);
    }
    let (lo, hi) = window.indices(a.grid());
    let (mut num, mut den) = (0.0, 0.0);
    for i in lo..=hi {
        num += (a.values()[i] - b.values()[i]).norm_sqr();
        den += b.values()[i].norm_sqr();
    }
    Ok((num / den).sqrt())
}
