//! Periodic orbits of ½κ(v)v_x² + W(v) = μ: well selection, turning points,
//! period and orbit moments by deflated Gauss–Legendre quadrature, and
//! sampled profiles from the regular second-order ODE.

use crate::error::{Error, Result};
use crate::models::{self, Family, Model, PotentialEvaluator, WaveParams};
use crate::ode::{self, OdeOptions};
use crate::poly::Poly;
use crate::quadrature::GaussRule;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

/// Relative width of the band around a saddle level treated as homoclinic.
pub const HOMOCLINIC_TOL: f64 = 1e-10;
const KAPPA_SAMPLES: usize = 1024;
const PROFILE_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OrbitClass {
    Periodic,
    HomoclinicBoundary,
    NoOrbit,
}

/// A local minimum of W together with the maxima bounding its basin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Well {
    pub bottom: f64,
    pub bottom_value: f64,
    pub left_max: Option<f64>,
    pub right_max: Option<f64>,
    /// Lowest bounding maximum value, +∞ when the well is unbounded on both sides.
    pub saddle_level: f64,
}

impl Well {
    fn contains(&self, v: f64) -> bool {
        self.left_max.is_none_or(|l| v > l) && self.right_max.is_none_or(|r| v < r)
    }
}

/// All wells of W, ordered by abscissa.
pub fn wells(w: &Poly) -> Vec<Well> {
    let dw = w.deriv();
    if dw.is_zero() {
        return Vec::new();
    }
    let crit = dw.real_roots();
    // Sign of W' on each gap between consecutive critical points.
    let gap_sign = |i: usize| -> f64 {
        let probe = if crit.is_empty() {
            0.0
        } else if i == 0 {
            crit[0] - 1.0 - crit[0].abs()
        } else if i == crit.len() {
            crit[i - 1] + 1.0 + crit[i - 1].abs()
        } else {
            0.5 * (crit[i - 1] + crit[i])
        };
        dw.eval(probe).signum()
    };
    let signs: Vec<f64> = (0..=crit.len()).map(gap_sign).collect();
    let is_min = |j: usize| signs[j] < 0.0 && signs[j + 1] > 0.0;
    let is_max = |j: usize| signs[j] > 0.0 && signs[j + 1] < 0.0;
    let mut out = Vec::new();
    for j in 0..crit.len() {
        if !is_min(j) {
            continue;
        }
        let left_max = (0..j).rev().find(|&i| is_max(i)).map(|i| crit[i]);
        let right_max = ((j + 1)..crit.len()).find(|&i| is_max(i)).map(|i| crit[i]);
        let saddle_level = [left_max, right_max]
            .iter()
            .flatten()
            .map(|&m| w.eval(m))
            .fold(f64::INFINITY, f64::min);
        out.push(Well {
            bottom: crit[j],
            bottom_value: w.eval(crit[j]),
            left_max,
            right_max,
            saddle_level,
        });
    }
    out
}

/// The well holding the midpoint of `hint`, else the lowest one (smallest
/// abscissa on ties).
pub fn select_well(w: &Poly, hint: Option<(f64, f64)>) -> Option<Well> {
    let all = wells(w);
    match hint {
        Some((a, b)) => {
            let mid = 0.5 * (a + b);
            all.into_iter().find(|well| well.contains(mid))
        }
        None => all.into_iter().reduce(|best, well| {
            if well.bottom_value < best.bottom_value {
                well
            } else {
                best
            }
        }),
    }
}

fn classify_in_well(well: &Well, mu: f64) -> OrbitClass {
    if well.saddle_level.is_finite() {
        let band = HOMOCLINIC_TOL * well.saddle_level.abs().max(well.saddle_level - well.bottom_value);
        if (mu - well.saddle_level).abs() <= band {
            return OrbitClass::HomoclinicBoundary;
        }
    }
    if mu > well.bottom_value && mu < well.saddle_level {
        OrbitClass::Periodic
    } else {
        OrbitClass::NoOrbit
    }
}

/// Classifies the level μ in the default well of W.
pub fn classify_orbit(potential: &PotentialEvaluator, mu: f64) -> OrbitClass {
    classify_orbit_in(potential, mu, None)
}

pub fn classify_orbit_in(
    potential: &PotentialEvaluator,
    mu: f64,
    hint: Option<(f64, f64)>,
) -> OrbitClass {
    match select_well(&potential.w, hint) {
        Some(well) => classify_in_well(&well, mu),
        None => OrbitClass::NoOrbit,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurningPoints {
    pub v1: f64,
    pub v2: f64,
    pub well_bottom: f64,
}

/// Simple roots of W(v) = μ enclosing the selected well.
pub fn find_turning_points(
    potential: &PotentialEvaluator,
    mu: f64,
    hint: Option<(f64, f64)>,
) -> Result<TurningPoints> {
    let well = select_well(&potential.w, hint)
        .ok_or_else(|| Error::NoOrbit("the potential has no local minimum".into()))?;
    match classify_in_well(&well, mu) {
        OrbitClass::Periodic => {}
        OrbitClass::HomoclinicBoundary => {
            return Err(Error::NoOrbit(format!(
                "mu = {mu} is at the homoclinic level {} of the well at {}",
                well.saddle_level, well.bottom
            )))
        }
        OrbitClass::NoOrbit => {
            return Err(Error::NoOrbit(format!(
                "mu = {mu} outside ({}, {}) for the well at {}",
                well.bottom_value, well.saddle_level, well.bottom
            )))
        }
    }
    let h = |v: f64| potential.w(v) - mu;
    let dh = |v: f64| potential.dw(v);
    let outward = |from: f64, bound: Option<f64>, dir: f64| -> f64 {
        match bound {
            Some(b) => b,
            None => {
                let mut step = 1.0 + from.abs();
                let mut v = from + dir * step;
                while h(v) <= 0.0 {
                    step *= 2.0;
                    v = from + dir * step;
                }
                v
            }
        }
    };
    let left = outward(well.bottom, well.left_max, -1.0);
    let right = outward(well.bottom, well.right_max, 1.0);
    let v1 = safeguarded_newton(&h, &dh, left, well.bottom)?;
    let v2 = safeguarded_newton(&h, &dh, well.bottom, right)?;
    Ok(TurningPoints { v1, v2, well_bottom: well.bottom })
}

/// Root of `f` in [a, b] (opposite signs at the ends) by Newton steps that
/// fall back to bisection whenever they leave the bracket.
fn safeguarded_newton(f: &dyn Fn(f64) -> f64, df: &dyn Fn(f64) -> f64, a: f64, b: f64) -> Result<f64> {
    let (mut lo, mut hi) = (a, b);
    let (flo, fhi) = (f(lo), f(hi));
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::NoOrbit(format!("no sign change of W - mu on [{a}, {b}]")));
    }
    let neg_at_lo = flo < 0.0;
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if (fx < 0.0) == neg_at_lo {
            lo = x;
        } else {
            hi = x;
        }
        let d = df(x);
        let newton = x - fx / d;
        let next = if d != 0.0 && newton > lo.min(hi) && newton < lo.max(hi) {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= 1e-15 * x.abs().max(1e-300) || (hi - lo).abs() <= 1e-15 * x.abs() {
            return Ok(next);
        }
        x = next;
    }
    Ok(x)
}

/// A located periodic orbit with its deflated quadrature factor.
#[derive(Debug, Clone)]
pub struct Orbit {
    pub model: Model,
    pub params: WaveParams,
    pub potential: PotentialEvaluator,
    pub v1: f64,
    pub v2: f64,
    pub well_bottom: f64,
    pub xi: f64,
    /// g with μ − W(v) = (v − v1)(v2 − v)·g(v).
    pub deflated: Poly,
    pub quad_nodes: usize,
}

/// Locates the orbit, checks κ > 0 and g > 0 along it, and computes Ξ.
pub fn compute_orbit(
    model: &Model,
    params: &WaveParams,
    hint: Option<(f64, f64)>,
    quad_nodes: usize,
) -> Result<Orbit> {
    let potential = models::reduced_potential(model, params)?;
    let tp = find_turning_points(&potential, params.mu, hint)?;
    let kmin = (0..=KAPPA_SAMPLES)
        .map(|j| potential.kappa(tp.v1 + (tp.v2 - tp.v1) * j as f64 / KAPPA_SAMPLES as f64))
        .fold(f64::INFINITY, f64::min);
    if !(kmin > 0.0) {
        return Err(Error::NonPositiveKappa(kmin));
    }
    let gap = &Poly::constant(params.mu) - &potential.w;
    let (q1, _) = gap.div_linear(tp.v1);
    let (q2, _) = q1.div_linear(tp.v2);
    let deflated = -&q2;
    let mut orbit = Orbit {
        model: model.clone(),
        params: params.clone(),
        potential,
        v1: tp.v1,
        v2: tp.v2,
        well_bottom: tp.well_bottom,
        xi: 0.0,
        deflated,
        quad_nodes,
    };
    orbit.xi = compute_period(&orbit)?;
    Ok(orbit)
}

/// Ξ = 2∫ √(κ/(2(μ − W))) dv over [v1, v2].
pub fn compute_period(orbit: &Orbit) -> Result<f64> {
    orbit.moment(|_| 1.0)
}

impl Orbit {
    pub fn amplitude(&self) -> f64 {
        0.5 * (self.v2 - self.v1)
    }

    fn v_of(&self, theta: f64) -> f64 {
        let s = theta.sin();
        self.v1 + (self.v2 - self.v1) * s * s
    }

    fn checked_g(&self, v: f64) -> Result<f64> {
        let g = self.deflated.eval(v);
        if g > 0.0 && g.is_finite() {
            Ok(g)
        } else {
            Err(Error::QuadratureFailure(format!(
                "deflated factor g({v}) = {g:e} is not positive; turning points are not simple"
            )))
        }
    }

    /// ∫ φ(v̄(x)) dx over one period.
    pub fn moment(&self, phi: impl Fn(f64) -> f64) -> Result<f64> {
        let rule = GaussRule::new(self.quad_nodes);
        let mut sum = 0.0;
        for (theta, w) in rule.mapped(0.0, FRAC_PI_2) {
            let v = self.v_of(theta);
            let g = self.checked_g(v)?;
            sum += w * phi(v) * (self.potential.kappa(v) / (2.0 * g)).sqrt();
        }
        Ok(4.0 * sum)
    }

    /// Θ = 2∫ √(2κ(μ − W)) dv over [v1, v2].
    pub fn action(&self) -> Result<f64> {
        let rule = GaussRule::new(self.quad_nodes);
        let d = self.v2 - self.v1;
        let mut sum = 0.0;
        for (theta, w) in rule.mapped(0.0, FRAC_PI_2) {
            let v = self.v_of(theta);
            let g = self.checked_g(v)?;
            let sc = theta.sin() * theta.cos();
            sum += w * (2.0 * self.potential.kappa(v) * g).sqrt() * sc * sc;
        }
        Ok(4.0 * d * d * sum)
    }

    /// (Ξ, ∫Ū_α dx…, ∫𝒬 dx): the moments making up ∇Θ in (μ, λ, c) order.
    pub fn gradient_moments(&self) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.potential.param_densities.len() + 1);
        out.push(self.xi);
        for dens in &self.potential.param_densities {
            out.push(self.moment(|v| dens.eval(v))?);
        }
        Ok(out)
    }
}

/// Sampled profile on [0, Ξ) with v̄(0) = v1, v̄_x(0) = 0.
#[derive(Debug, Clone)]
pub struct Profile {
    pub n: usize,
    pub x: Vec<f64>,
    pub vbar: Vec<f64>,
    pub vbar_x: Vec<f64>,
    pub ubar: Option<Vec<f64>>,
    pub orbit: Orbit,
    /// Largest |½κv̄_x² + W(v̄) − μ| over the samples.
    pub energy_residual: f64,
    /// |v(Ξ) − v1| + |v_x(Ξ)| of the integrated trajectory.
    pub return_residual: f64,
}

impl Profile {
    pub fn xi(&self) -> f64 {
        self.orbit.xi
    }

    /// v̄_xx from the profile ODE.
    pub fn vbar_xx(&self) -> Vec<f64> {
        self.vbar
            .iter()
            .zip(&self.vbar_x)
            .map(|(&v, &vx)| self.orbit.potential.second_derivative(v, vx))
            .collect()
    }
}

/// Integrates the profile ODE from (v1, 0) and returns (v̄, v̄_x) at the
/// ascending abscissae `xs` (any x ≥ 0).
pub fn sample_profile_at(orbit: &Orbit, xs: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let pot = &orbit.potential;
    let delta = 1e-3 * (orbit.v2 - orbit.v1);
    let (lo, hi) = (orbit.v1 - delta, orbit.v2 + delta);
    let out = ode::integrate(
        |_, y, dy| {
            dy[0] = y[1];
            dy[1] = pot.second_derivative(y[0], y[1]);
        },
        0.0,
        &[orbit.v1, 0.0],
        xs,
        &OdeOptions { atol: PROFILE_RTOL * (orbit.v2 - orbit.v1).abs().max(1e-300), ..OdeOptions::with_rtol(PROFILE_RTOL) },
        |x, y| {
            if y[0] < lo || y[0] > hi {
                Err(Error::OrbitEscape(x))
            } else {
                Ok(())
            }
        },
    )?;
    Ok(out.states.into_iter().map(|s| (s[0], s[1])).unzip())
}

/// Uniformly sampled profile with `n` points (a power of two, at least 32).
pub fn compute_profile(orbit: &Orbit, n: usize) -> Result<Profile> {
    if n < 32 || !n.is_power_of_two() {
        return Err(Error::GridTooCoarse(format!("profile grid {n} must be a power of two >= 32")));
    }
    let xi = orbit.xi;
    let mut xs: Vec<f64> = (0..n).map(|j| xi * j as f64 / n as f64).collect();
    xs.push(xi);
    let (mut v, mut vx) = sample_profile_at(orbit, &xs)?;
    let (v_end, vx_end) = (v.pop().unwrap(), vx.pop().unwrap());
    // First-order estimate of the return-time offset from v_x(Ξ) = v_xx(v1)·δ.
    let vxx0 = orbit.potential.second_derivative(orbit.v1, 0.0);
    let offset = vx_end / vxx0;
    if !(offset.abs() <= 1e-6 * xi) {
        return Err(Error::PeriodMismatch(offset));
    }
    let pot = &orbit.potential;
    let mu = orbit.params.mu;
    let energy_residual = v
        .iter()
        .zip(&vx)
        .map(|(&v, &vx)| (0.5 * pot.kappa(v) * vx * vx + pot.w(v) - mu).abs())
        .fold(0.0, f64::max);
    let ubar = match orbit.model.family {
        Family::Kdv => None,
        Family::Ekl => Some(
            v.iter()
                .map(|&v| models::eliminate_velocity(&orbit.model, &orbit.params, v))
                .collect::<Result<Vec<f64>>>()?,
        ),
    };
    xs.pop();
    Ok(Profile {
        n,
        x: xs,
        vbar: v,
        vbar_x: vx,
        ubar,
        orbit: orbit.clone(),
        energy_residual,
        return_residual: (v_end - orbit.v1).abs() + vx_end.abs(),
    })
}
