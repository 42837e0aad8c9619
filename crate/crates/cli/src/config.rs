//! JSON scenario configuration.

use std::path::Path;

use nonspread_core::analysis::AnalysisWindow;
use nonspread_core::constructor::{ConstraintParams, DEFAULT_CONSISTENCY_TOL, DEFAULT_FIT_DEGREE, MIN_TIME_SAMPLES};
use nonspread_core::specs::{MotionSpec, PotentialSpec};
use nonspread_core::{Grid, TimeLattice, UnitSystem};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default = "UnitSystem::natural")]
    pub units: UnitSystem,
    pub grid: Grid,
    pub potential: PotentialSpec,
    pub motion: MotionConfig,
    pub shape: ShapeConfig,
    #[serde(default)]
    pub time: Option<TimeConfig>,
    #[serde(default)]
    pub window: AnalysisWindow,
    #[serde(default)]
    pub references: References,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default)]
    pub boundary: BoundaryChoice,
    #[serde(default)]
    pub consistency: ConsistencyConfig,
}

/// Either an explicit trajectory or the one implied by the potential.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum MotionConfig {
    FromConstraint(FromConstraint),
    Explicit(MotionSpec),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FromConstraint {
    pub kind: FromConstraintTag,
    #[serde(default)]
    pub b: f64,
    #[serde(default)]
    pub v0: f64,
    #[serde(default)]
    pub accel_offset: f64,
}

impl FromConstraint {
    pub fn params(&self) -> ConstraintParams {
        ConstraintParams { b: self.b, v0: self.v0, accel_offset: self.accel_offset }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FromConstraintTag {
    FromConstraint,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum ShapeConfig {
    Named(NamedShape),
    Eigen { eigen_index: usize },
    Gaussian { gaussian: GaussianShape },
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedShape {
    Airy,
}

/// Gaussian trial profile with density variance σ²; not a shape-equation solution.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianShape {
    pub sigma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub t_final: f64,
    pub dt: f64,
    #[serde(default = "default_stride")]
    pub snapshot_stride: usize,
}

fn default_stride() -> usize {
    100
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct References {
    #[serde(rename = "E_n", default)]
    pub e_n: Option<f64>,
    #[serde(rename = "E_cl", default)]
    pub e_cl: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Thresholds {
    /// Bound on shape_err_Linf for the nonspreading verdict.
    pub shape_linf: f64,
    /// Bound on flux_residual.
    pub flux: f64,
    /// Bound on phase_residual in radians.
    pub phase: f64,
    /// Bound on |⟨H⟩ − (E_n + E_cl)| when references are given.
    pub energy: f64,
    /// Bound on max |⟨H⟩(t) − ⟨H⟩(0)| for time-independent potentials.
    pub energy_drift: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { shape_linf: 1e-3, flux: 1e-3, phase: 1e-3, energy: 1e-5, energy_drift: 1e-6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryChoice {
    /// Driven for non-normalizable shapes, Dirichlet otherwise.
    #[default]
    Auto,
    Dirichlet,
    Waived,
    Driven,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConsistencyConfig {
    pub tolerance: f64,
    /// Number of time samples over [0, t_final].
    pub samples: usize,
    pub max_degree: usize,
}

impl Default for ConsistencyConfig {
    fn default() -> Self {
        Self { tolerance: DEFAULT_CONSISTENCY_TOL, samples: 16, max_degree: DEFAULT_FIT_DEGREE }
    }
}

/// Time span used by `construct` when the config has no time block.
pub const DEFAULT_CONSTRUCT_TIME: TimeConfig = TimeConfig { t_final: 1.0, dt: 1e-3, snapshot_stride: 100 };

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        self.potential.validate().map_err(|e| CliError::Config(format!("potential: {e}")))?;
        self.window.validate().map_err(|e| CliError::Config(format!("window: {e}")))?;
        if let Some(t) = &self.time {
            self.lattice_for(t)?;
            if t.snapshot_stride == 0 {
                return bad("time.snapshot_stride must be at least 1".into());
            }
        }
        if let ShapeConfig::Gaussian { gaussian } = self.shape {
            if !(gaussian.sigma.is_finite() && gaussian.sigma > 0.0) {
                return bad(format!("shape.gaussian.sigma must be positive, got {}", gaussian.sigma));
            }
        }
        if let MotionConfig::FromConstraint(fc) = &self.motion {
            let p = fc.params();
            if ![p.b, p.v0, p.accel_offset].iter().all(|v| v.is_finite()) {
                return bad("motion parameters must be finite".into());
            }
        }
        let th = &self.thresholds;
        if ![th.shape_linf, th.flux, th.phase, th.energy, th.energy_drift].iter().all(|v| v.is_finite() && *v > 0.0) {
            return bad("thresholds must be finite and positive".into());
        }
        for v in [self.references.e_n, self.references.e_cl].into_iter().flatten() {
            if !v.is_finite() {
                return bad("references must be finite".into());
            }
        }
        let c = &self.consistency;
        if !(c.tolerance.is_finite() && c.tolerance > 0.0) {
            return bad("consistency.tolerance must be positive".into());
        }
        if c.samples < MIN_TIME_SAMPLES {
            return bad(format!("consistency.samples must be at least {MIN_TIME_SAMPLES}"));
        }
        if c.max_degree == 0 || c.max_degree > 16 {
            return bad("consistency.max_degree must lie in 1..=16".into());
        }
        Ok(())
    }

    pub fn lattice_for(&self, t: &TimeConfig) -> Result<TimeLattice, CliError> {
        TimeLattice::new(t.t_final, t.dt).map_err(|e| CliError::Config(format!("time: {e}")))
    }

    /// Time block, or the construct default when absent.
    pub fn time_or_default(&self) -> TimeConfig {
        self.time.unwrap_or(DEFAULT_CONSTRUCT_TIME)
    }

    pub fn constraint_params(&self) -> Option<ConstraintParams> {
        match &self.motion {
            MotionConfig::FromConstraint(fc) => Some(fc.params()),
            MotionConfig::Explicit(_) => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SHO: &str = r#"{
        "grid": {"x_min": -12, "x_max": 12, "n_points": 512},
        "potential": {"kind": "harmonic", "omega0": 1.0},
        "motion": {"kind": "from_constraint", "v0": 1.0},
        "shape": {"eigen_index": 0},
        "time": {"t_final": 1.0, "dt": 0.01, "snapshot_stride": 10}
    }"#;

    #[test]
    fn parses_minimal_config() {
        let c = ScenarioConfig::parse(SHO).unwrap();
        assert_eq!(c.shape, ShapeConfig::Eigen { eigen_index: 0 });
        assert_eq!(c.constraint_params().unwrap().v0, 1.0);
        assert_eq!(c.units, UnitSystem::natural());
        assert_eq!(c.boundary, BoundaryChoice::Auto);
        assert_eq!(c.window, AnalysisWindow::default());
    }

    #[test]
    fn explicit_motion_and_named_shapes() {
        let text = SHO
            .replace(r#"{"kind": "from_constraint", "v0": 1.0}"#, r#"{"kind": "sinusoid", "x0": 1.0, "omega": 1.0}"#)
            .replace(r#"{"eigen_index": 0}"#, r#""airy""#);
        let c = ScenarioConfig::parse(&text).unwrap();
        assert!(matches!(c.motion, MotionConfig::Explicit(_)));
        assert_eq!(c.shape, ShapeConfig::Named(NamedShape::Airy));
        let g = SHO.replace(r#"{"eigen_index": 0}"#, r#"{"gaussian": {"sigma": 1.0}}"#);
        assert!(matches!(ScenarioConfig::parse(&g).unwrap().shape, ShapeConfig::Gaussian { .. }));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ScenarioConfig::parse("{not json").is_err());
        assert!(ScenarioConfig::parse(&SHO.replace("\"n_points\": 512", "\"n_points\": 4")).is_err());
        assert!(ScenarioConfig::parse(&SHO.replace("\"dt\": 0.01", "\"dt\": 0.3")).is_err());
        assert!(ScenarioConfig::parse(&SHO.replace("\"shape\"", "\"shap\"")).is_err());
        assert!(ScenarioConfig::parse(&SHO.replace(r#"{"kind": "harmonic", "omega0": 1.0}"#, r#"{"kind": "power_law", "lambda": 1.0, "n": 2}"#)).is_err());
        assert!(ScenarioConfig::parse(&SHO.replace("\"snapshot_stride\": 10", "\"snapshot_stride\": 0")).is_err());
    }
}
