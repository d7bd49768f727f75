//! Pseudo-spectral integration of ∂_t v = ∂_x(f′(v)) − κ v_xxx (constant κ)
//! with an integrating-factor RK4 scheme and 2/3-rule dealiasing.

use crate::error::{Error, Result};
use crate::grid;
use crate::models::{Family, Model};
use crate::profile::{sample_profile_at, Orbit};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

const BLOW_UP: f64 = 1e6;

/// Conserved integrals over the domain: ∫v, ∫½v², ∫(f(v) + ½κv_x²).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Invariants {
    pub mass: f64,
    pub impulse: f64,
    pub energy: f64,
}

#[derive(Debug, Clone)]
pub struct SimState {
    pub modes: usize,
    pub length: f64,
    pub t: f64,
    pub coeffs: Vec<Complex64>,
    pub baselines: Invariants,
}

impl SimState {
    pub fn values(&self) -> Vec<f64> {
        let mut buf = self.coeffs.clone();
        FftPlanner::new().plan_fft_inverse(self.modes).process(&mut buf);
        buf.iter().map(|z| z.re / self.modes as f64).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    pub dt: f64,
    pub t_max: f64,
    /// Steps between recorded samples.
    pub output_every: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimSample {
    pub t: f64,
    /// Orbital distance to the reference, when one was given.
    pub dist_to_orbit: Option<f64>,
    pub d_energy: f64,
    pub d_impulse: f64,
    pub d_mass: f64,
}

#[derive(Debug, Clone)]
pub struct SimResult {
    pub samples: Vec<SimSample>,
    pub final_state: SimState,
    pub steps: usize,
}

struct Solver {
    n: usize,
    length: f64,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    /// i·k with the Nyquist entry removed.
    ik: Vec<Complex64>,
    dealias: Vec<bool>,
    df: crate::poly::Poly,
    kappa: f64,
    energy_density: crate::poly::Poly,
}

impl Solver {
    fn new(model: &Model, n: usize, length: f64) -> Result<Self> {
        if model.family != Family::Kdv {
            return Err(Error::UnsupportedFamily(model.family.name()));
        }
        if model.kappa.degree() != 0 {
            return Err(Error::InvalidInput("direct simulation needs a constant kappa".into()));
        }
        if n < grid::MIN_GRID_POINTS || !n.is_power_of_two() {
            return Err(Error::GridTooCoarse(format!("simulation grid {n} must be a power of two >= 8")));
        }
        let mut planner = FftPlanner::new();
        let ks = grid::wavenumbers(n, length, true);
        let cutoff = n / 3;
        Ok(Solver {
            n,
            length,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
            ik: ks.iter().map(|&k| Complex64::new(0.0, k)).collect(),
            dealias: (0..n).map(|j| j.min(n - j) <= cutoff).collect(),
            df: model.energy.deriv(),
            kappa: model.kappa.coeffs()[0],
            energy_density: model.energy.clone(),
        })
    }

    fn forward(&self, v: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.fwd.process(&mut buf);
        buf
    }

    fn inverse(&self, c: &[Complex64]) -> Vec<f64> {
        let mut buf = c.to_vec();
        self.inv.process(&mut buf);
        buf.iter().map(|z| z.re / self.n as f64).collect()
    }

    /// Linear symbol L(k) = iκk³ of −κ∂_x³.
    fn linear(&self, j: usize) -> Complex64 {
        let k = self.ik[j].im;
        Complex64::new(0.0, self.kappa * k * k * k)
    }

    /// ∂_x f′(v), dealiased.
    fn nonlinear(&self, c: &[Complex64]) -> Vec<Complex64> {
        let v = self.inverse(c);
        let fp: Vec<f64> = v.iter().map(|&x| self.df.eval(x)).collect();
        let mut out = self.forward(&fp);
        for j in 0..self.n {
            out[j] = if self.dealias[j] { out[j] * self.ik[j] } else { Complex64::new(0.0, 0.0) };
        }
        out
    }

    fn invariants(&self, c: &[Complex64]) -> Invariants {
        let v = self.inverse(c);
        let vx_hat: Vec<Complex64> = c.iter().zip(&self.ik).map(|(a, k)| a * k).collect();
        let vx = self.inverse(&vx_hat);
        let h = self.length / self.n as f64;
        Invariants {
            mass: v.iter().sum::<f64>() * h,
            impulse: v.iter().map(|x| 0.5 * x * x).sum::<f64>() * h,
            energy: v
                .iter()
                .zip(&vx)
                .map(|(&x, &d)| self.energy_density.eval(x) + 0.5 * self.kappa * d * d)
                .sum::<f64>()
                * h,
        }
    }

    /// One Lawson (integrating-factor) RK4 step.
    fn step(&self, c: &[Complex64], dt: f64, half: &[Complex64], full: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let a = self.nonlinear(c);
        let s: Vec<Complex64> = (0..n).map(|j| half[j] * (c[j] + 0.5 * dt * a[j])).collect();
        let b = self.nonlinear(&s);
        let s: Vec<Complex64> = (0..n).map(|j| half[j] * c[j] + 0.5 * dt * b[j]).collect();
        let cc = self.nonlinear(&s);
        let s: Vec<Complex64> = (0..n).map(|j| full[j] * c[j] + dt * half[j] * cc[j]).collect();
        let d = self.nonlinear(&s);
        (0..n)
            .map(|j| full[j] * c[j] + dt / 6.0 * (full[j] * a[j] + 2.0 * half[j] * (b[j] + cc[j]) + d[j]))
            .collect()
    }
}

/// Shift s maximizing the correlation of `v` with `w(· − s)`, and the
/// resulting L² distance.
pub fn orbital_distance(v: &[f64], w: &[f64], length: f64) -> (f64, f64) {
    let n = v.len();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let spectrum = |x: &[f64]| {
        let mut b: Vec<Complex64> = x.iter().map(|&r| Complex64::new(r, 0.0)).collect();
        fwd.process(&mut b);
        b
    };
    let vh = spectrum(v);
    let wh = spectrum(w);
    let ks = grid::wavenumbers(n, length, true);
    let a: Vec<Complex64> = vh.iter().zip(&wh).map(|(x, y)| x * y.conj()).collect();
    let mut corr = a.clone();
    inv.process(&mut corr);
    let h = length / n as f64;
    let best = (0..n).max_by(|&i, &j| corr[i].re.total_cmp(&corr[j].re)).unwrap();
    // Newton refinement of g(s) = Re Σ a_k e^{iks}.
    let mut s = best as f64 * h;
    for _ in 0..8 {
        let (mut g1, mut g2) = (0.0, 0.0);
        for (ak, &k) in a.iter().zip(&ks) {
            let e = ak * Complex64::from_polar(1.0, k * s);
            g1 -= k * e.im;
            g2 -= k * k * e.re;
        }
        if g2 >= 0.0 {
            break;
        }
        let ds = -g1 / g2;
        s += ds;
        if ds.abs() < 1e-15 * length {
            break;
        }
    }
    let shifted: Vec<Complex64> = wh
        .iter()
        .zip(&ks)
        .map(|(c, &k)| c * Complex64::from_polar(1.0, -k * s))
        .collect();
    let mut ws = shifted;
    inv.process(&mut ws);
    let d2: f64 = v.iter().zip(&ws).map(|(x, y)| (x - y.re / n as f64).powi(2)).sum::<f64>() * h;
    (s.rem_euclid(length), d2.sqrt())
}

/// Integrates from the sampled `initial` data on a periodic domain of the
/// given length. `reference` enables the orbital-distance diagnostic.
pub fn simulate(
    model: &Model,
    initial: &[f64],
    length: f64,
    opts: &SimOptions,
    reference: Option<&[f64]>,
) -> Result<SimResult> {
    integrate(model, initial, length, opts, reference, f64::INFINITY)
}

/// As `simulate`, stopping after the first sample whose orbital distance
/// exceeds `stop_distance`.
fn integrate(
    model: &Model,
    initial: &[f64],
    length: f64,
    opts: &SimOptions,
    reference: Option<&[f64]>,
    stop_distance: f64,
) -> Result<SimResult> {
    let n = initial.len();
    let solver = Solver::new(model, n, length)?;
    if !(opts.dt > 0.0) || !(opts.t_max >= 0.0) || opts.output_every == 0 {
        return Err(Error::InvalidInput("dt must be positive, t_max non-negative, output_every >= 1".into()));
    }
    if let Some(r) = reference {
        if r.len() != n {
            return Err(Error::GridMismatch(format!("reference has {} points, state {n}", r.len())));
        }
    }
    let steps = (opts.t_max / opts.dt).ceil().max(0.0) as usize;
    let dt = if steps > 0 { opts.t_max / steps as f64 } else { opts.dt };
    let max_rate = solver.ik.iter().fold(0.0_f64, |m, k| m.max(k.im.abs()))
        * initial.iter().fold(0.0_f64, |m, &x| m.max(solver.df.deriv().eval(x).abs()));
    if max_rate * dt > 1.0 {
        log::warn!("time step {dt} likely violates the advective stability limit ({max_rate})");
    }
    let half: Vec<Complex64> = (0..n).map(|j| (solver.linear(j) * (0.5 * dt)).exp()).collect();
    let full: Vec<Complex64> = half.iter().map(|z| z * z).collect();
    let mut c = solver.forward(initial);
    let baselines = solver.invariants(&c);
    let sample = |t: f64, c: &[Complex64]| -> SimSample {
        let inv = solver.invariants(c);
        SimSample {
            t,
            dist_to_orbit: reference.map(|r| orbital_distance(&solver.inverse(c), r, length).1),
            d_energy: inv.energy - baselines.energy,
            d_impulse: inv.impulse - baselines.impulse,
            d_mass: inv.mass - baselines.mass,
        }
    };
    let mut samples = vec![sample(0.0, &c)];
    for step in 1..=steps {
        c = solver.step(&c, dt, &half, &full);
        let t = step as f64 * dt;
        if step % opts.output_every == 0 || step == steps {
            if solver.inverse(&c).iter().any(|x| !(x.abs() <= BLOW_UP)) {
                return Err(Error::BlowUp(t));
            }
            let s = sample(t, &c);
            samples.push(s);
            if s.dist_to_orbit.is_some_and(|d| d > stop_distance) {
                return Ok(SimResult {
                    samples,
                    final_state: SimState { modes: n, length, t, coeffs: c, baselines },
                    steps: step,
                });
            }
        }
    }
    Ok(SimResult {
        samples,
        final_state: SimState { modes: n, length, t: steps as f64 * dt, coeffs: c, baselines },
        steps,
    })
}

/// Profile values on `modes` points per period, tiled `multiplier` times.
pub fn tiled_profile(orbit: &Orbit, modes: usize, multiplier: usize) -> Result<Vec<f64>> {
    let xs: Vec<f64> = (0..modes).map(|j| orbit.xi * j as f64 / modes as f64).collect();
    let (v, _) = sample_profile_at(orbit, &xs)?;
    Ok((0..multiplier).flat_map(|_| v.iter().copied()).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthOptions {
    pub perturbation: f64,
    /// Domain of `multiplier` periods, realizing the Floquet class ν = 2π/multiplier.
    pub multiplier: usize,
    pub modes: usize,
    pub t_max: f64,
    pub dt: f64,
    pub seed: u64,
    /// Highest perturbed wave index on the extended domain.
    pub bandwidth: usize,
}

#[derive(Debug, Clone)]
pub struct GrowthResult {
    pub rate: f64,
    pub fit_residual: f64,
    pub no_growth: bool,
    pub window: Option<(f64, f64)>,
    pub distances: Vec<(f64, f64)>,
}

/// Least-squares slope and RMS residual of y against t.
fn line_fit(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let (mt, my) = points.iter().fold((0.0, 0.0), |(a, b), &(t, y)| (a + t / n, b + y / n));
    let (sty, stt) = points
        .iter()
        .fold((0.0, 0.0), |(a, b), &(t, y)| (a + (t - mt) * (y - my), b + (t - mt) * (t - mt)));
    let slope = sty / stt;
    let rms = (points.iter().map(|&(t, y)| (y - my - slope * (t - mt)).powi(2)).sum::<f64>() / n).sqrt();
    (slope, rms)
}

/// Tiled profile and the same plus ε times a seeded random combination of
/// the lowest `bandwidth` Fourier modes of the extended domain, scaled to
/// sup-norm ε.
pub fn perturbed_profile(orbit: &Orbit, opts: &GrowthOptions) -> Result<(Vec<f64>, Vec<f64>)> {
    if opts.multiplier == 0 || opts.bandwidth == 0 {
        return Err(Error::InvalidInput("multiplier and bandwidth must be positive".into()));
    }
    let m = opts.multiplier;
    let n = opts.modes * m;
    let length = orbit.xi * m as f64;
    let base = tiled_profile(orbit, opts.modes, m)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let modes: Vec<(f64, f64)> = (0..opts.bandwidth)
        .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(0.0..2.0 * PI)))
        .collect();
    let mut pert: Vec<f64> = (0..n)
        .map(|j| {
            let x = length * j as f64 / n as f64;
            modes
                .iter()
                .enumerate()
                .map(|(i, &(a, ph))| a * (2.0 * PI * (i + 1) as f64 * x / length + ph).cos())
                .sum()
        })
        .collect();
    let peak = pert.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    pert.iter_mut().for_each(|p| *p *= opts.perturbation / peak);
    let initial = base.iter().zip(&pert).map(|(a, b)| a + b).collect();
    Ok((base, initial))
}

/// Seeds v̄ + ε·(random band-limited perturbation), tracks the orbital
/// distance and fits its exponential growth rate.
pub fn growth_rate_experiment(orbit: &Orbit, opts: &GrowthOptions) -> Result<GrowthResult> {
    let amplitude = orbit.amplitude();
    if !(opts.perturbation > 0.0 && opts.perturbation <= 1e-4 * amplitude) {
        return Err(Error::InvalidInput(format!(
            "perturbation {} must lie in (0, 1e-4 * amplitude = {}]",
            opts.perturbation,
            1e-4 * amplitude
        )));
    }
    let (base, initial) = perturbed_profile(orbit, opts)?;
    let length = orbit.xi * opts.multiplier as f64;
    let every = ((0.05 * orbit.xi / opts.dt).round() as usize).max(1);
    let upper = 1e-2 * amplitude * (length / orbit.xi).sqrt();
    let res = integrate(
        &orbit.model,
        &initial,
        length,
        &SimOptions { dt: opts.dt, t_max: opts.t_max, output_every: every },
        Some(&base),
        upper,
    )?;
    let distances: Vec<(f64, f64)> = res.samples.iter().map(|s| (s.t, s.dist_to_orbit.unwrap())).collect();
    let d0 = distances[0].1;
    // The lower half of the logarithmic range is left to the transient.
    let lower = (30.0 * d0).max((d0 * upper).sqrt());
    let start = distances.iter().position(|&(_, d)| d >= lower);
    let no_growth = GrowthResult {
        rate: 0.0,
        fit_residual: 0.0,
        no_growth: true,
        window: None,
        distances: distances.clone(),
    };
    let Some(start) = start else {
        return Ok(no_growth);
    };
    let end = distances[start..]
        .iter()
        .position(|&(_, d)| d >= upper)
        .map_or(distances.len(), |p| start + p);
    let window: Vec<(f64, f64)> = distances[start..end].iter().map(|&(t, d)| (t, d.ln())).collect();
    if window.len() < 3 {
        return Ok(no_growth);
    }
    let (rate, fit_residual) = line_fit(&window);
    // Slopes below the resolution of the sampled log-distance count as no growth.
    let span = window.last().unwrap().0 - window[0].0;
    if rate < 10.0 * fit_residual.max(f64::EPSILON) / span {
        return Ok(GrowthResult { fit_residual, window: Some((window[0].0, span + window[0].0)), ..no_growth });
    }
    Ok(GrowthResult {
        rate,
        fit_residual,
        no_growth: false,
        window: Some((window[0].0, window.last().unwrap().0)),
        distances,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Poly;

    #[test]
    fn single_mode_linear_dispersion() {
        let model = Model::kdv(Poly::zero(), Poly::constant(1.0));
        let n = 32;
        let l = 2.0 * PI;
        let x: Vec<f64> = (0..n).map(|j| l * j as f64 / n as f64).collect();
        let v0: Vec<f64> = x.iter().map(|x| x.cos()).collect();
        let t = 1.7;
        let r = simulate(&model, &v0, l, &SimOptions { dt: 0.1, t_max: t, output_every: 5 }, None).unwrap();
        let v = r.final_state.values();
        for j in 0..n {
            assert!((v[j] - (x[j] + t).cos()).abs() < 1e-10);
        }
    }

    #[test]
    fn orbital_distance_recovers_shift() {
        let n = 64;
        let l = 5.0;
        let f = |x: f64| (2.0 * PI * x / l).sin() + 0.3 * (4.0 * PI * x / l).cos();
        let w: Vec<f64> = (0..n).map(|j| f(l * j as f64 / n as f64)).collect();
        let v: Vec<f64> = (0..n).map(|j| f(l * j as f64 / n as f64 - 0.37)).collect();
        let (s, d) = orbital_distance(&v, &w, l);
        assert!((s - 0.37).abs() < 1e-10, "{s}");
        assert!(d < 1e-10);
    }

    #[test]
    fn rejects_ekl_and_variable_kappa() {
        let v = vec![0.0; 16];
        let o = SimOptions { dt: 0.1, t_max: 1.0, output_every: 1 };
        assert!(simulate(&Model::ekl(Poly::zero(), Poly::constant(1.0)), &v, 1.0, &o, None).is_err());
        assert!(simulate(&Model::kdv(Poly::zero(), Poly::linear(1.0, 0.1)), &v, 1.0, &o, None).is_err());
    }

    #[test]
    fn line_fit_exact() {
        let pts: Vec<(f64, f64)> = (0..10).map(|i| (i as f64, 0.5 * i as f64 - 2.0)).collect();
        let (s, r) = line_fit(&pts);
        assert!((s - 0.5).abs() < 1e-14 && r < 1e-14);
    }
}
