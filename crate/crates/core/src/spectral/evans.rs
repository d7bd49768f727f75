use crate::error::{Error, Result};
use crate::grid::MIN_GRID_POINTS;
use crate::models::Family;
use crate::ode::{self, OdeOptions};
use crate::profile::Orbit;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

/// Offset of the straight side of the sideband contour, relative to its radius.
pub const DEFAULT_CONTOUR_OFFSET: f64 = 1e-3;
const MIN_SCAN_POINTS: usize = 2 * MIN_GRID_POINTS;
const MAX_CONTOUR_DOUBLINGS: usize = 6;
const WINDING_TOL: f64 = 0.05;

#[derive(Debug, Clone)]
pub struct MonodromyResult {
    pub tau: Complex64,
    /// Fundamental matrix at x = Ξ, columns started from the identity.
    pub f: DMatrix<Complex64>,
    pub step_count: usize,
    pub error_estimate: f64,
}

impl MonodromyResult {
    pub fn dim(&self) -> usize {
        self.f.nrows()
    }

    /// (1 + ‖F‖∞)^d, the natural size of det(F − e^{iν}I).
    pub fn scale(&self) -> f64 {
        let norm = self
            .f
            .row_iter()
            .map(|r| r.iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max);
        (1.0 + norm).powi(self.dim() as i32)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvansSample {
    pub tau: Complex64,
    pub nu: f64,
    pub d: Complex64,
    pub scale: f64,
}

/// Coefficient matrix of the first-order eigenvalue system at one point.
///
/// KdV states (u, κu′, 𝒜u) for ∂_x(𝒜u) = τu; EKL states (v, κv′, (𝒜U)₁, u)
/// for B∂_x(𝒜U) = τU.
fn coefficient_matrix(orbit: &Orbit, v: f64, vx: f64, tau: Complex64, a: &mut [Complex64]) {
    let pot = &orbit.potential;
    let c = orbit.params.c;
    let kappa = pot.kappa(v);
    let vxx = pot.second_derivative(v, vx);
    let q0 = orbit.model.energy.deriv().deriv().eval(v)
        - 0.5 * pot.d2kappa.eval(v) * vx * vx
        - pot.dkappa.eval(v) * vxx;
    let one = Complex64::new(1.0, 0.0);
    a.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
    match orbit.model.family {
        Family::Kdv => {
            a[1] = one / kappa;
            a[3] = Complex64::new(q0 + c, 0.0);
            a[5] = -one;
            a[6] = tau;
        }
        Family::Ekl => {
            a[1] = one / kappa;
            a[4] = Complex64::new(q0, 0.0);
            a[6] = -one;
            a[7] = Complex64::new(c, 0.0);
            a[11] = tau;
            a[12] = tau;
            a[13] = Complex64::new(-c / kappa, 0.0);
        }
    }
}

/// Fundamental matrix of the eigenvalue system over one period, integrated
/// jointly with the profile from (v1, 0).
pub fn monodromy(orbit: &Orbit, tau: Complex64, rtol: f64) -> Result<MonodromyResult> {
    let d = match orbit.model.family {
        Family::Kdv => 3,
        Family::Ekl => 4,
    };
    let mut y0 = vec![0.0; 2 + 2 * d * d];
    y0[0] = orbit.v1;
    for j in 0..d {
        y0[2 + 2 * (j * d + j)] = 1.0;
    }
    let mut a = vec![Complex64::new(0.0, 0.0); d * d];
    let out = ode::integrate(
        |_, y, dy| {
            let (v, vx) = (y[0], y[1]);
            dy[0] = vx;
            dy[1] = orbit.potential.second_derivative(v, vx);
            coefficient_matrix(orbit, v, vx, tau, &mut a);
            for j in 0..d {
                for i in 0..d {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for k in 0..d {
                        let idx = 2 + 2 * (j * d + k);
                        acc += a[i * d + k] * Complex64::new(y[idx], y[idx + 1]);
                    }
                    let idx = 2 + 2 * (j * d + i);
                    dy[idx] = acc.re;
                    dy[idx + 1] = acc.im;
                }
            }
        },
        0.0,
        &y0,
        &[orbit.xi],
        &OdeOptions::with_rtol(rtol),
        ode::no_guard,
    )?;
    let y = &out.states[0];
    let f = DMatrix::from_fn(d, d, |i, j| {
        let idx = 2 + 2 * (j * d + i);
        Complex64::new(y[idx], y[idx + 1])
    });
    Ok(MonodromyResult {
        tau,
        f,
        step_count: out.accepted_steps + out.rejected_steps,
        error_estimate: out.error_estimate,
    })
}

/// D(τ, ν) = det(F(Ξ; τ) − e^{iν}I), unnormalized.
pub fn evans_eval(orbit: &Orbit, tau: Complex64, nu: f64, rtol: f64) -> Result<EvansSample> {
    let m = monodromy(orbit, tau, rtol)?;
    Ok(evans_from_monodromy(&m, nu))
}

fn evans_from_monodromy(m: &MonodromyResult, nu: f64) -> EvansSample {
    let shift = Complex64::from_polar(1.0, nu);
    let mut f = m.f.clone();
    for i in 0..m.dim() {
        f[(i, i)] -= shift;
    }
    EvansSample { tau: m.tau, nu, d: f.determinant(), scale: m.scale() }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealRoot {
    pub tau: f64,
    pub bracket: (f64, f64),
}

/// Real roots of D(·, 0) in (0, τ_max]: sign changes on a geometric grid from
/// τ_max·10⁻⁴, refined by bisection to 1e-8 relative. Values below the
/// integration noise floor carry no sign and are skipped.
pub fn real_coperiodic_scan(orbit: &Orbit, tau_max: f64, n_grid: usize, rtol: f64) -> Result<Vec<RealRoot>> {
    if n_grid < MIN_SCAN_POINTS {
        return Err(Error::GridTooCoarse(format!("{n_grid} scan points < {MIN_SCAN_POINTS}")));
    }
    if !(tau_max > 0.0) {
        return Err(Error::InvalidInput(format!("tau_max = {tau_max} must be positive")));
    }
    let signed = |tau: f64| -> Result<f64> {
        let s = evans_eval(orbit, Complex64::new(tau, 0.0), 0.0, rtol)?;
        let floor = noise_floor(rtol, s.scale);
        Ok(if s.d.re.abs() <= floor { 0.0 } else { s.d.re.signum() })
    };
    let grid: Vec<f64> = (0..n_grid)
        .map(|k| tau_max * 10f64.powf(-4.0 * (1.0 - k as f64 / (n_grid - 1) as f64)))
        .collect();
    let signs: Vec<f64> = grid.par_iter().map(|&t| signed(t)).collect::<Result<_>>()?;
    let mut roots = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for (&t, &s) in grid.iter().zip(&signs) {
        if s == 0.0 {
            continue;
        }
        if let Some((tp, sp)) = prev {
            if sp != s {
                let (mut lo, mut hi, s_lo) = (tp, t, sp);
                while hi - lo > 1e-8 * hi {
                    let mid = 0.5 * (lo + hi);
                    let sm = signed(mid)?;
                    if sm == 0.0 {
                        lo = mid;
                        hi = mid;
                        break;
                    }
                    if sm == s_lo {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                roots.push(RealRoot { tau: 0.5 * (lo + hi), bracket: (tp, t) });
            }
        }
        prev = Some((t, s));
    }
    Ok(roots)
}

/// Size below which |D| is indistinguishable from integration error.
fn noise_floor(rtol: f64, scale: f64) -> f64 {
    1e2 * rtol * scale
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SidebandCount {
    pub nu: f64,
    pub count: usize,
    pub winding: f64,
    pub contour_points: usize,
}

/// Boundary of {|τ| < r, Re τ > δ}, counter-clockwise, parametrized by s ∈ [0, 1).
fn contour_point(s: f64, radius: f64, offset: f64) -> Complex64 {
    let phi0 = (offset / radius).acos();
    let arc = 2.0 * radius * phi0;
    let seg = 2.0 * radius * phi0.sin();
    let l = s * (arc + seg);
    if l < arc {
        Complex64::from_polar(radius, -phi0 + l / radius)
    } else {
        let h = radius * phi0.sin();
        Complex64::new(offset, h - (l - arc))
    }
}

/// Zeros of D(·, ν) in the right half-disc of radius `radius`, by the winding
/// of arg D along its boundary. The straight side sits at Re τ = offset·radius
/// so that neutral spectrum on the imaginary axis stays outside.
pub fn sideband_scan(
    orbit: &Orbit,
    nus: &[f64],
    radius: f64,
    contour_points: usize,
    rtol: f64,
) -> Result<Vec<SidebandCount>> {
    if !(radius > 0.0) {
        return Err(Error::InvalidInput(format!("contour radius {radius} must be positive")));
    }
    if contour_points < 8 {
        return Err(Error::GridTooCoarse(format!("{contour_points} contour points")));
    }
    for &nu in nus {
        if !(nu > 0.0 && nu < 2.0 * PI) {
            return Err(Error::InvalidInput(format!("Floquet exponent {nu} outside (0, 2pi)")));
        }
    }
    let offset = DEFAULT_CONTOUR_OFFSET * radius;
    let mut out = Vec::with_capacity(nus.len());
    for &nu in nus {
        out.push(winding_count(orbit, nu, radius, offset, contour_points, rtol)?);
    }
    Ok(out)
}

fn winding_count(
    orbit: &Orbit,
    nu: f64,
    radius: f64,
    offset: f64,
    initial: usize,
    rtol: f64,
) -> Result<SidebandCount> {
    let eval = |s: f64| -> Result<Complex64> {
        let e = evans_eval(orbit, contour_point(s, radius, offset), nu, rtol)?;
        if e.d.norm() < 1e-12 * e.scale {
            return Err(Error::ContourThroughZero(e.d.norm()));
        }
        Ok(e.d)
    };
    let mut values: Vec<Complex64> = (0..initial)
        .into_par_iter()
        .map(|k| eval(k as f64 / initial as f64))
        .collect::<Result<_>>()?;
    let mut winding = 0.0;
    for _ in 0..=MAX_CONTOUR_DOUBLINGS {
        let n = values.len();
        let mut total = 0.0;
        let mut largest_step: f64 = 0.0;
        for k in 0..n {
            let step = (values[(k + 1) % n] / values[k]).arg();
            largest_step = largest_step.max(step.abs());
            total += step;
        }
        winding = total / (2.0 * PI);
        if (winding - winding.round()).abs() <= WINDING_TOL && largest_step < 0.5 * PI {
            return Ok(SidebandCount {
                nu,
                count: winding.round().max(0.0) as usize,
                winding,
                contour_points: n,
            });
        }
        let mids: Vec<Complex64> = (0..n)
            .into_par_iter()
            .map(|k| eval((k as f64 + 0.5) / n as f64))
            .collect::<Result<_>>()?;
        values = values.into_iter().zip(mids).flat_map(|(a, b)| [a, b]).collect();
    }
    Err(Error::Degenerate(format!(
        "winding number {winding} did not settle for nu = {nu} with {} contour points",
        values.len()
    )))
}
