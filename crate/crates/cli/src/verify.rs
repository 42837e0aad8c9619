//! construct → assemble → propagate → analyze.

use std::collections::VecDeque;
use std::path::Path;
use std::sync::Arc;

use nonspread_core::analysis::{energy_expectation, residual_at, snapshot_metrics, EnergyReport, SnapshotMetrics};
use nonspread_core::constructor::{assemble_packet, PhaseTrack, ShapeSolution};
use nonspread_core::propagator::{Boundary, Propagator};
use nonspread_core::specs::{ForceSpec, MotionSpec, PotentialSpec};
use nonspread_core::{Grid, WaveFunction};
use num_complex::Complex64;
use serde::Serialize;

use crate::config::{BoundaryChoice, References, ScenarioConfig, Thresholds};
use crate::error::{exit, CliError};
use crate::output::{ensure_dir, num, opt, write_file, Csv};
use crate::scenario::{consistency_csv, construct, phase_csv, shape_csv, UniformForceCheck};

pub const METRICS_HEADER: [&str; 8] =
    ["t", "shape_err_L2", "shape_err_Linf", "centroid_err", "norm", "flux_residual", "phase_residual", "residual_schrodinger"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricsRow {
    pub step: usize,
    pub metrics: SnapshotMetrics,
    pub residual_schrodinger: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Verdicts {
    pub consistency: bool,
    pub nonspreading: bool,
    pub flux_ok: bool,
    pub phase_ok: bool,
    pub energy_ok: bool,
}

impl Verdicts {
    pub fn all(&self) -> bool {
        self.consistency && self.nonspreading && self.flux_ok && self.phase_ok && self.energy_ok
    }
}

/// How energy_ok was decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyCheck {
    /// |⟨H⟩ − (E_n + E_cl)| within `energy`, and drift within `energy_drift`.
    Reference,
    /// Time-independent potential: drift within `energy_drift`.
    Drift,
    /// Driven or non-normalizable case; no energy claim is made.
    NotApplicable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[allow(non_snake_case)]
pub struct Summary {
    pub max_shape_err_L2: f64,
    pub max_shape_err_Linf: f64,
    pub max_abs_centroid_err: f64,
    pub max_flux_residual: f64,
    pub max_phase_residual: f64,
    pub max_residual_schrodinger: f64,
    pub initial_norm: f64,
    pub final_norm: f64,
    pub max_energy_drift: Option<f64>,
    pub max_energy_reference_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencySummary {
    pub powers_checked: usize,
    pub offending_powers: Vec<usize>,
    pub tolerance_used: f64,
    pub samplewise_variation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub name: Option<String>,
    pub version: &'static str,
    pub verdicts: Verdicts,
    pub thresholds: Thresholds,
    pub energy_check: EnergyCheck,
    pub references: References,
    pub boundary: &'static str,
    pub consistency: ConsistencySummary,
    pub uniform_force: Option<UniformForceCheck>,
    pub summary: Option<Summary>,
    pub files: Vec<String>,
    pub exit_code: i32,
}

#[derive(Debug, Clone)]
pub struct VerifyOutcome {
    pub report: RunReport,
    pub rows: Vec<MetricsRow>,
    pub energies: Vec<(f64, EnergyReport)>,
    /// Final propagated state.
    pub final_state: Option<WaveFunction>,
}

impl VerifyOutcome {
    pub fn exit_code(&self) -> i32 {
        self.report.exit_code
    }
}

pub fn run_verify(cfg: &ScenarioConfig, out: &Path) -> Result<VerifyOutcome, CliError> {
    let time = cfg.time.ok_or_else(|| CliError::Config("verify needs a time block".into()))?;
    let lattice = cfg.lattice_for(&time)?;
    let n_steps = lattice.n_steps();
    if n_steps < 2 {
        return Err(CliError::Config("verify needs at least two time steps".into()));
    }
    let c = construct(cfg, &lattice)?;
    ensure_dir(out)?;
    let mut files = vec!["consistency.csv".to_string()];
    consistency_csv(&c.consistency).write(out, "consistency.csv")?;
    let consistency = ConsistencySummary {
        powers_checked: c.consistency.powers_checked,
        offending_powers: c.consistency.offending_powers.clone(),
        tolerance_used: c.consistency.tolerance_used,
        samplewise_variation: c.consistency.samplewise_variation,
    };
    let mut report = RunReport {
        name: cfg.name.clone(),
        version: env!("CARGO_PKG_VERSION"),
        verdicts: Verdicts { consistency: false, nonspreading: false, flux_ok: false, phase_ok: false, energy_ok: false },
        thresholds: cfg.thresholds,
        energy_check: EnergyCheck::NotApplicable,
        references: cfg.references,
        boundary: "none",
        consistency,
        uniform_force: c.uniform_force,
        summary: None,
        files: Vec::new(),
        exit_code: exit::VERDICT,
    };
    let Some((shape, phase)) = &c.packet else {
        files.push("report.json".into());
        report.files = files;
        write_report(out, &report)?;
        return Ok(VerifyOutcome { report, rows: Vec::new(), energies: Vec::new(), final_state: None });
    };
    shape_csv(shape).write(out, "shape.csv")?;
    phase_csv(phase).write(out, "phase.csv")?;
    files.push("shape.csv".into());
    files.push("phase.csv".into());

    let psi0 = assemble_packet(shape, &c.motion, phase, &c.grid, 0.0)?;
    let (boundary, boundary_name) = match (cfg.boundary, shape.normalizable()) {
        (BoundaryChoice::Dirichlet, _) | (BoundaryChoice::Auto, true) => (Boundary::Dirichlet, "dirichlet"),
        (BoundaryChoice::Waived, _) => (Boundary::Waived, "waived"),
        (BoundaryChoice::Driven, _) | (BoundaryChoice::Auto, false) => {
            (driven(shape.clone(), c.motion.clone(), phase.clone(), c.grid), "driven")
        }
    };
    report.boundary = boundary_name;
    let mut stepper = Propagator::new(&psi0, cfg.potential.clone(), c.units, lattice.dt(), boundary)?;

    let stride = time.snapshot_stride;
    let is_snapshot = |s: usize| s.is_multiple_of(stride) || s == n_steps;
    let real = cfg.potential.real_part();
    let energy_check = energy_mode(cfg, shape);
    let mut rows: Vec<MetricsRow> = Vec::new();
    let mut energies = Vec::new();
    // Rows still waiting for the state after their residual centre.
    let mut pending: Vec<(usize, usize)> = Vec::new();
    let mut recent: VecDeque<WaveFunction> = VecDeque::with_capacity(3);

    for s in 0..=n_steps {
        if s > 0 {
            stepper.step()?;
        }
        let psi = stepper.state()?;
        if is_snapshot(s) {
            let m = snapshot_metrics(&psi, shape, &c.motion, &cfg.window, c.units)?;
            if energy_check != EnergyCheck::NotApplicable || cfg.references.e_n.is_some() {
                let mut e = energy_expectation(&psi, real, psi.time(), c.units)?;
                e.e_n_reference = cfg.references.e_n;
                e.e_cl_reference = cfg.references.e_cl;
                energies.push((psi.time(), e));
            }
            density_csv(&psi).write(out, &format!("density_{s}.csv"))?;
            files.push(format!("density_{s}.csv"));
            pending.push((rows.len(), s.clamp(1, n_steps - 1)));
            rows.push(MetricsRow { step: s, metrics: m, residual_schrodinger: f64::NAN });
        }
        if recent.len() == 3 {
            recent.pop_front();
        }
        recent.push_back(psi);
        if s >= 2 && pending.iter().any(|&(_, centre)| centre + 1 == s) {
            let r = residual_at(&recent[0], &recent[1], &recent[2], &cfg.potential, c.units, &cfg.window)?;
            pending.retain(|&(row, centre)| {
                if centre + 1 == s {
                    rows[row].residual_schrodinger = r;
                    false
                } else {
                    true
                }
            });
        }
    }
    let final_state = recent.pop_back();

    let th = &cfg.thresholds;
    let max_of = |f: &dyn Fn(&MetricsRow) -> f64| rows.iter().map(f).fold(0.0f64, f64::max);
    let e_totals: Vec<f64> = energies.iter().map(|(_, e)| e.total).collect();
    let max_energy_drift = e_totals.first().map(|e0| e_totals.iter().map(|e| (e - e0).abs()).fold(0.0, f64::max));
    let reference_total = match (cfg.references.e_n, cfg.references.e_cl) {
        (None, None) => None,
        (a, b) => Some(a.unwrap_or(0.0) + b.unwrap_or(0.0)),
    };
    let max_energy_reference_error =
        reference_total.map(|r| e_totals.iter().map(|e| (e - r).abs()).fold(0.0, f64::max));
    let summary = Summary {
        max_shape_err_L2: max_of(&|r| r.metrics.shape_err_l2),
        max_shape_err_Linf: max_of(&|r| r.metrics.shape_err_linf),
        max_abs_centroid_err: max_of(&|r| r.metrics.centroid_err.abs()),
        max_flux_residual: max_of(&|r| r.metrics.flux_residual),
        max_phase_residual: max_of(&|r| r.metrics.phase_residual),
        max_residual_schrodinger: max_of(&|r| r.residual_schrodinger),
        initial_norm: rows[0].metrics.norm,
        final_norm: rows[rows.len() - 1].metrics.norm,
        max_energy_drift,
        max_energy_reference_error,
    };
    let all = |f: &dyn Fn(&MetricsRow) -> bool| rows.iter().all(f);
    let energy_ok = match energy_check {
        EnergyCheck::Reference => {
            summary.max_energy_reference_error.is_some_and(|e| e <= th.energy)
                && summary.max_energy_drift.is_some_and(|e| e <= th.energy_drift)
        }
        EnergyCheck::Drift => summary.max_energy_drift.is_some_and(|e| e <= th.energy_drift),
        EnergyCheck::NotApplicable => true,
    };
    report.verdicts = Verdicts {
        consistency: true,
        nonspreading: all(&|r| r.metrics.shape_err_linf <= th.shape_linf),
        flux_ok: all(&|r| r.metrics.flux_residual <= th.flux),
        phase_ok: all(&|r| r.metrics.phase_residual <= th.phase),
        energy_ok,
    };
    report.energy_check = energy_check;
    report.summary = Some(summary);
    report.exit_code = if report.verdicts.all() { exit::OK } else { exit::VERDICT };

    metrics_csv(&rows).write(out, "metrics.csv")?;
    files.push("metrics.csv".into());
    if !energies.is_empty() {
        energy_csv(&energies).write(out, "energy.csv")?;
        files.push("energy.csv".into());
    }
    files.push("report.json".into());
    report.files = files;
    write_report(out, &report)?;
    Ok(VerifyOutcome { report, rows, energies, final_state })
}

/// Endpoint values taken from the constructed packet at each new time.
fn driven(shape: ShapeSolution, motion: MotionSpec, phase: PhaseTrack, grid: Grid) -> Boundary {
    let (xl, xr) = (grid.x_min(), grid.x_max());
    Boundary::Driven(Arc::new(move |t| {
        let d = motion.eval(t)?.d;
        let p = phase.at(t)?;
        let v = |x: f64| Complex64::from_polar(shape.value_at(x - d), p.phi1 * x + p.phi0);
        Ok((v(xl), v(xr)))
    }))
}

fn energy_mode(cfg: &ScenarioConfig, shape: &ShapeSolution) -> EnergyCheck {
    if !shape.normalizable() {
        EnergyCheck::NotApplicable
    } else if cfg.references.e_n.is_some() || cfg.references.e_cl.is_some() {
        EnergyCheck::Reference
    } else if time_independent(&cfg.potential) {
        EnergyCheck::Drift
    } else {
        EnergyCheck::NotApplicable
    }
}

fn time_independent(p: &PotentialSpec) -> bool {
    match p {
        PotentialSpec::FreeSpace | PotentialSpec::PowerLaw { .. } => true,
        PotentialSpec::Harmonic { omega_ramp, .. } => *omega_ramp == 0.0,
        PotentialSpec::UniformForce { force } => matches!(force, ForceSpec::Constant { .. }),
        PotentialSpec::ComplexAbsorber { base, .. } => time_independent(base),
        PotentialSpec::MovingHarmonicDriven { .. } | PotentialSpec::MovingQuarticDriven { .. } => false,
    }
}

pub fn metrics_csv(rows: &[MetricsRow]) -> Csv {
    let mut csv = Csv::new(&METRICS_HEADER);
    for r in rows {
        let m = &r.metrics;
        csv.row(&[
            num(m.t),
            num(m.shape_err_l2),
            num(m.shape_err_linf),
            num(m.centroid_err),
            num(m.norm),
            num(m.flux_residual),
            num(m.phase_residual),
            num(r.residual_schrodinger),
        ]);
    }
    csv
}

pub fn energy_csv(energies: &[(f64, EnergyReport)]) -> Csv {
    let mut csv = Csv::new(&["t", "kinetic", "potential", "total", "E_n_reference", "E_cl_reference"]);
    for (t, e) in energies {
        csv.row(&[num(*t), num(e.kinetic), num(e.potential), num(e.total), opt(e.e_n_reference), opt(e.e_cl_reference)]);
    }
    csv
}

pub fn density_csv(psi: &WaveFunction) -> Csv {
    let mut csv = Csv::new(&["x", "re", "im", "density"]);
    for (x, v) in psi.grid().points().iter().zip(psi.values()) {
        csv.row(&[num(*x), num(v.re), num(v.im), num(v.norm_sqr())]);
    }
    csv
}

fn write_report(out: &Path, report: &RunReport) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(report).map_err(|e| CliError::Config(format!("report: {e}")))?;
    text.push('\n');
    write_file(out, "report.json", &text)?;
    Ok(())
}
