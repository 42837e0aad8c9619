//! Airy function Ai and normalized harmonic-oscillator eigenfunctions.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::UnitSystem;

/// Highest oscillator index accepted by [`sho_eigenfunction`].
pub const MAX_SHO_INDEX: usize = 50;

/// Below this argument the Ai asymptotic expansion is no longer evaluated.
pub const AIRY_MIN_ARGUMENT: f64 = -1e6;

/// Ai(0) as an unevaluated double-double sum.
const AI0: (f64, f64) = (0.3550280538878172, 2.05233632436212e-17);
/// −Ai′(0) as an unevaluated double-double sum.
const MINUS_AIP0: (f64, f64) = (0.2588194037928068, -2.522243111610832e-17);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpecFunAccuracy {
    pub abs_tol: f64,
    /// |x| at which Ai switches from the Maclaurin series to the asymptotic
    /// expansion on the positive axis. On the negative axis the switch sits at
    /// 1.5 times this value, where the oscillatory expansion reaches `abs_tol`.
    pub series_asymptotic_switch: f64,
}

impl Default for SpecFunAccuracy {
    fn default() -> Self {
        Self { abs_tol: 1e-10, series_asymptotic_switch: 5.0 }
    }
}

impl SpecFunAccuracy {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.series_asymptotic_switch > 0.0) {
            return Err(Error::InvalidSpec("accuracy parameters must be positive".into()));
        }
        Ok(())
    }
}

/// Ai(x) with the default accuracy settings.
pub fn airy_ai(x: f64) -> Result<f64> {
    airy_ai_with(x, &SpecFunAccuracy::default())
}

pub fn airy_ai_with(x: f64, acc: &SpecFunAccuracy) -> Result<f64> {
    if !x.is_finite() || x < AIRY_MIN_ARGUMENT {
        return Err(Error::DomainOverflow(x));
    }
    let switch = acc.series_asymptotic_switch;
    if x >= switch {
        Ok(ai_asymptotic_positive(x))
    } else if x <= -1.5 * switch {
        Ok(ai_asymptotic_negative(-x))
    } else {
        Ok(ai_maclaurin(x))
    }
}

/// Ai = Ai(0)·f(x) − (−Ai′(0))·g(x) with
/// f = Σ 3ᵏ(1/3)ₖ x³ᵏ/(3k)!, g = Σ 3ᵏ(2/3)ₖ x³ᵏ⁺¹/(3k+1)!.
/// Summed in double-double so cancellation at |x| ≈ 7 stays below 1e-15.
fn ai_maclaurin(x: f64) -> f64 {
    let x3 = DoubleDouble::from(x).mul(DoubleDouble::from(x)).mul_f64(x);
    let mut tf = DoubleDouble::from(1.0);
    let mut tg = DoubleDouble::from(x);
    let mut f = tf;
    let mut g = tg;
    for k in 1..400 {
        let k3 = 3.0 * k as f64;
        tf = tf.mul(x3).div_f64((k3 - 1.0) * k3);
        tg = tg.mul(x3).div_f64(k3 * (k3 + 1.0));
        f = f.add(tf);
        g = g.add(tg);
        let scale = f.hi.abs().max(g.hi.abs()).max(1.0);
        if tf.hi.abs() < 1e-34 * scale && tg.hi.abs() < 1e-34 * scale {
            break;
        }
    }
    let c1 = DoubleDouble { hi: AI0.0, lo: AI0.1 };
    let c2 = DoubleDouble { hi: MINUS_AIP0.0, lo: MINUS_AIP0.1 };
    c1.mul(f).sub(c2.mul(g)).hi
}

/// Coefficients u_k of the Ai asymptotic series.
fn asymptotic_coefficient(k: usize, prev: f64) -> f64 {
    let k = k as f64;
    prev * (6.0 * k - 5.0) * (6.0 * k - 3.0) * (6.0 * k - 1.0) / ((2.0 * k - 1.0) * 216.0 * k)
}

fn ai_asymptotic_positive(x: f64) -> f64 {
    let zeta = 2.0 / 3.0 * x.powf(1.5);
    if zeta > 745.0 {
        return 0.0;
    }
    let mut sum = 1.0;
    let mut u = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..60 {
        u = asymptotic_coefficient(k, u);
        let term = u / zeta.powi(k as i32);
        if term >= last || term < 1e-17 {
            break;
        }
        sum += if k % 2 == 1 { -term } else { term };
        last = term;
    }
    (-zeta).exp() / (2.0 * PI.sqrt() * x.powf(0.25)) * sum
}

/// Ai(−z) = π^(−1/2) z^(−1/4) [sin(ζ + π/4)·P − cos(ζ + π/4)·Q].
fn ai_asymptotic_negative(z: f64) -> f64 {
    let zeta = 2.0 / 3.0 * z.powf(1.5);
    let mut p = 1.0;
    let mut q = 0.0;
    let mut u = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..60 {
        u = asymptotic_coefficient(k, u);
        let term = u / zeta.powi(k as i32);
        if term >= last || term < 1e-17 {
            break;
        }
        // P collects even k with alternating signs, Q the odd ones.
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * term;
        } else {
            q += sign * term;
        }
        last = term;
    }
    let theta = zeta + PI / 4.0;
    (theta.sin() * p - theta.cos() * q) / (PI.sqrt() * z.powf(0.25))
}

/// L²-normalized oscillator eigenfunction ψ_n(x) for V = ½mω²x².
///
/// Uses the normalized Hermite-function recurrence, so ψ_n is positive on the
/// x → +∞ side for every n.
pub fn sho_eigenfunction(n: usize, x: f64, units: UnitSystem, omega: f64) -> Result<f64> {
    if n > MAX_SHO_INDEX {
        return Err(Error::IndexTooLarge { index: n, max: MAX_SHO_INDEX });
    }
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::InvalidSpec(format!("oscillator frequency must be positive, got {omega}")));
    }
    let alpha = units.mass() * omega / units.hbar();
    let xi = alpha.sqrt() * x;
    let mut prev = 0.0;
    let mut cur = PI.powf(-0.25) * (-0.5 * xi * xi).exp();
    for k in 0..n {
        let k = k as f64;
        let next = (2.0 / (k + 1.0)).sqrt() * xi * cur - (k / (k + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    Ok(alpha.powf(0.25) * cur)
}

/// Oscillator energy ħω(n + ½).
pub fn sho_energy(n: usize, units: UnitSystem, omega: f64) -> f64 {
    units.hbar() * omega * (n as f64 + 0.5)
}

#[derive(Debug, Clone, Copy)]
struct DoubleDouble {
    hi: f64,
    lo: f64,
}

impl From<f64> for DoubleDouble {
    fn from(v: f64) -> Self {
        Self { hi: v, lo: 0.0 }
    }
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> DoubleDouble {
    let s = a + b;
    DoubleDouble { hi: s, lo: b - (s - a) }
}

impl DoubleDouble {
    fn add(self, o: Self) -> Self {
        let (s, e) = two_sum(self.hi, o.hi);
        quick_two_sum(s, e + self.lo + o.lo)
    }

    fn sub(self, o: Self) -> Self {
        self.add(DoubleDouble { hi: -o.hi, lo: -o.lo })
    }

    fn mul(self, o: Self) -> Self {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p);
        quick_two_sum(p, e + self.hi * o.lo + self.lo * o.hi)
    }

    fn mul_f64(self, b: f64) -> Self {
        self.mul(DoubleDouble::from(b))
    }

    fn div_f64(self, d: f64) -> Self {
        let q1 = self.hi / d;
        let p = q1 * d;
        let e = q1.mul_add(d, -p);
        let r = (self.hi - p - e + self.lo) / d;
        quick_two_sum(q1, r)
    }
}
