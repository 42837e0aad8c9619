use super::effective::EffectivePotential;
use crate::error::{Error, Result};
use crate::grid::{Grid, UnitSystem};
use crate::numerov::NumerovOperator;
use crate::specfun::airy_ai;

/// First zero of Ai′, where Ai has its global maximum.
pub const AIRY_PEAK_ARGUMENT: f64 = -1.018_792_971_647_471;

/// Samples below this fraction of the peak magnitude do not count toward nodes.
const NODE_FLOOR: f64 = 1e-8;

/// A real shape profile f(q) with its eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeSolution {
    q_grid: Grid,
    f: Vec<f64>,
    e_eff: f64,
    node_count: usize,
    normalizable: bool,
    airy_scale: Option<f64>,
}

impl ShapeSolution {
    /// A profile supplied directly as samples, e.g. a probe packet that is not
    /// an eigenstate. It is taken as normalizable and its sign is fixed.
    pub fn sampled(q_grid: Grid, f: Vec<f64>, e_eff: f64) -> Result<Self> {
        if f.len() != q_grid.len() {
            return Err(Error::GridMismatch);
        }
        if !f.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidSpec("shape samples must be finite".into()));
        }
        let f = fix_sign(f);
        let node_count = count_nodes(&f);
        Ok(Self { q_grid, f, e_eff, node_count, normalizable: true, airy_scale: None })
    }

    /// f(q) = Ai(scale·q) with E_eff = 0.
    pub fn airy(q_grid: Grid, scale: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidSpec("Airy scale must be positive".into()));
        }
        let f = q_grid.points().iter().map(|q| airy_ai(scale * q)).collect::<Result<Vec<_>>>()?;
        let node_count = count_nodes(&f);
        Ok(Self { q_grid, f, e_eff: 0.0, node_count, normalizable: false, airy_scale: Some(scale) })
    }

    pub fn q_grid(&self) -> &Grid {
        &self.q_grid
    }

    pub fn f(&self) -> &[f64] {
        &self.f
    }

    pub fn e_eff(&self) -> f64 {
        self.e_eff
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn normalizable(&self) -> bool {
        self.normalizable
    }

    /// Scale of the Airy branch, if this is one.
    pub fn airy_scale(&self) -> Option<f64> {
        self.airy_scale
    }

    /// f at an arbitrary q: closed form for Airy shapes, cubic interpolation
    /// otherwise, zero outside the sampled range.
    pub fn value_at(&self, q: f64) -> f64 {
        match self.airy_scale {
            Some(s) => airy_ai(s * q).unwrap_or(0.0),
            None => self.q_grid.interpolate(&self.f, q).unwrap_or(0.0),
        }
    }

    /// Location of max |f|.
    pub fn peak_position(&self) -> f64 {
        if let Some(s) = self.airy_scale {
            return AIRY_PEAK_ARGUMENT / s;
        }
        let mags: Vec<f64> = self.f.iter().map(|v| v * v).collect();
        parabolic_peak(&self.q_grid, &mags)
    }

    /// ∫q f² / ∫f², or None for non-normalizable shapes.
    pub fn mean_position(&self) -> Option<f64> {
        if !self.normalizable {
            return None;
        }
        let rho: Vec<f64> = self.f.iter().map(|v| v * v).collect();
        let qrho: Vec<f64> = rho.iter().zip(self.q_grid.points()).map(|(r, q)| r * q).collect();
        Some(self.q_grid.integrate(&qrho) / self.q_grid.integrate(&rho))
    }

    /// q-range where f² exceeds `floor` times its peak.
    pub fn support(&self, floor: f64) -> (f64, f64) {
        let peak = self.f.iter().map(|v| v * v).fold(0.0, f64::max);
        let mut idx = (0..self.f.len()).filter(|&i| self.f[i] * self.f[i] > floor * peak);
        let first = idx.next().unwrap_or(0);
        let last = idx.next_back().unwrap_or(first);
        (self.q_grid.x(first), self.q_grid.x(last))
    }
}

/// Sub-grid location of the maximum of `values` by a three-point parabola.
pub fn parabolic_peak(grid: &Grid, values: &[f64]) -> f64 {
    let (i, _) = values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) });
    if i == 0 || i + 1 >= values.len() {
        return grid.x(i);
    }
    let (a, b, c) = (values[i - 1], values[i], values[i + 1]);
    let denom = a - 2.0 * b + c;
    let shift = if denom != 0.0 { 0.5 * (a - c) / denom } else { 0.0 };
    grid.x(i) + shift * grid.dx()
}

fn fix_sign(mut f: Vec<f64>) -> Vec<f64> {
    let peak = f.iter().copied().fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
    if peak < 0.0 {
        f.iter_mut().for_each(|v| *v = -*v);
    }
    f
}

fn count_nodes(f: &[f64]) -> usize {
    let peak = f.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let floor = NODE_FLOOR * peak;
    let mut last_sign = 0.0;
    let mut nodes = 0;
    for &v in f {
        if v.abs() <= floor {
            continue;
        }
        let s = v.signum();
        if last_sign != 0.0 && s != last_sign {
            nodes += 1;
        }
        last_sign = s;
    }
    nodes
}

/// Lowest `k` shape solutions of −(ħ²/2m)f″ + V_eff f = E_eff f, or the single
/// Airy solution when V_eff is linear.
pub fn solve_shape(veff: &EffectivePotential, k: usize, units: UnitSystem) -> Result<Vec<ShapeSolution>> {
    solve_shape_with(veff, k, units, 0.0)
}

/// `solve_shape` with the kinetic stencil perturbed by a relative amount.
pub fn solve_shape_with(veff: &EffectivePotential, k: usize, units: UnitSystem, stencil_error: f64) -> Result<Vec<ShapeSolution>> {
    let grid = *veff.q_grid();
    if let Some(c1) = veff.linear_slope() {
        let scale = (2.0 * units.mass() * c1 / (units.hbar() * units.hbar())).cbrt();
        if c1 < 0.0 {
            // Mirror image of the Airy profile; the closed form only covers c₁ > 0.
            return Err(Error::NotConfining);
        }
        return Ok(vec![ShapeSolution::airy(grid, scale)?]);
    }
    if !veff.is_confining() {
        return Err(Error::NotConfining);
    }
    let op = NumerovOperator::with_perturbed_stencil(&grid, veff.samples(), units, stencil_error)?;
    let values = op.eigenvalues(k)?;
    let vectors = op.eigenvectors(&values)?;
    let norm_factor = 1.0 / grid.dx().sqrt();
    values
        .into_iter()
        .zip(vectors)
        .map(|(e, interior)| {
            let mut f = Vec::with_capacity(grid.len());
            f.push(0.0);
            f.extend(interior.iter().map(|v| v * norm_factor));
            f.push(0.0);
            let f = fix_sign(f);
            let node_count = count_nodes(&f);
            Ok(ShapeSolution { q_grid: grid, f, e_eff: e, node_count, normalizable: true, airy_scale: None })
        })
        .collect()
}
