//! Adaptive Dormand–Prince 5(4) integrator for real first-order systems.
//!
//! Steps are clipped so that every requested output abscissa is hit exactly,
//! which gives full-accuracy samples without interpolation.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Largest step allowed (defaults to the whole span).
    pub max_step: Option<f64>,
}

impl OdeOptions {
    pub fn with_rtol(rtol: f64) -> Self {
        OdeOptions {
            rtol,
            atol: rtol * 1e-2,
            max_steps: 2_000_000,
            max_step: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OdeOutput {
    /// State at each requested output abscissa.
    pub states: Vec<Vec<f64>>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    /// Sum of accepted local error norms (a crude global error indicator).
    pub error_estimate: f64,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrates `y' = rhs(t, y)` from `t0`, returning the state at each of the
/// ascending `outputs` (all must be >= t0). `guard(t, y)` is called after every
/// accepted step; returning an error aborts the integration.
pub fn integrate<F, G>(
    mut rhs: F,
    t0: f64,
    y0: &[f64],
    outputs: &[f64],
    opts: &OdeOptions,
    mut guard: G,
) -> Result<OdeOutput>
where
    F: FnMut(f64, &[f64], &mut [f64]),
    G: FnMut(f64, &[f64]) -> Result<()>,
{
    let n = y0.len();
    let mut states = Vec::with_capacity(outputs.len());
    if outputs.windows(2).any(|w| w[1] < w[0]) || outputs.first().is_some_and(|&t| t < t0) {
        return Err(Error::InvalidInput("ODE outputs must be ascending and >= t0".into()));
    }
    let t_end = outputs.last().copied().unwrap_or(t0);
    let span = t_end - t0;
    let max_step = opts.max_step.unwrap_or(f64::INFINITY).min(span.max(f64::MIN_POSITIVE));

    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut k5 = vec![0.0; n];
    let mut k6 = vec![0.0; n];
    let mut k7 = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    let mut ynew = vec![0.0; n];
    rhs(t, &y, &mut k1);

    // Starting step from the first-derivative scale.
    let mut h = {
        let d0 = rms_scaled(&y, &y, opts);
        let d1 = rms_scaled(&k1, &y, opts);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        h0.min(max_step).max(1e-12 * span.abs().max(1.0))
    };

    let mut accepted = 0usize;
    let mut rejected = 0usize;
    let mut err_sum = 0.0;
    let mut out_idx = 0usize;
    while out_idx < outputs.len() && outputs[out_idx] <= t0 {
        states.push(y.clone());
        out_idx += 1;
    }

    while out_idx < outputs.len() {
        if accepted + rejected >= opts.max_steps {
            return Err(Error::IntegrationFailure(format!(
                "maximum step count {} reached at t = {t}",
                opts.max_steps
            )));
        }
        let target = outputs[out_idx];
        let mut hit = false;
        let mut hs = h.min(max_step);
        if t + hs >= target - 1e-14 * target.abs().max(1.0) {
            hs = target - t;
            hit = true;
        }

        for i in 0..n {
            tmp[i] = y[i] + hs * A21 * k1[i];
        }
        rhs(t + C2 * hs, &tmp, &mut k2);
        for i in 0..n {
            tmp[i] = y[i] + hs * (A31 * k1[i] + A32 * k2[i]);
        }
        rhs(t + C3 * hs, &tmp, &mut k3);
        for i in 0..n {
            tmp[i] = y[i] + hs * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        rhs(t + C4 * hs, &tmp, &mut k4);
        for i in 0..n {
            tmp[i] = y[i] + hs * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        rhs(t + C5 * hs, &tmp, &mut k5);
        for i in 0..n {
            tmp[i] = y[i]
                + hs * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        rhs(t + hs, &tmp, &mut k6);
        for i in 0..n {
            ynew[i] = y[i] + hs * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
        }
        rhs(t + hs, &ynew, &mut k7);

        let mut err = 0.0;
        for i in 0..n {
            let e = hs
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = opts.atol + opts.rtol * y[i].abs().max(ynew[i].abs());
            err += (e / sc).powi(2);
        }
        let err = (err / n as f64).sqrt();
        if !err.is_finite() {
            return Err(Error::IntegrationFailure(format!("non-finite state near t = {t}")));
        }

        if err <= 1.0 {
            accepted += 1;
            err_sum += err * opts.rtol;
            t = if hit { target } else { t + hs };
            std::mem::swap(&mut y, &mut ynew);
            std::mem::swap(&mut k1, &mut k7);
            guard(t, &y)?;
            if hit {
                states.push(y.clone());
                out_idx += 1;
                while out_idx < outputs.len() && outputs[out_idx] <= t {
                    states.push(y.clone());
                    out_idx += 1;
                }
            }
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            // A clipped step says nothing about the natural step size.
            if !hit || fac < 1.0 {
                h = hs * fac;
            }
        } else {
            rejected += 1;
            h = hs * (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
        }
        if h < 1e-14 * t.abs().max(1.0) {
            return Err(Error::IntegrationFailure(format!("step size underflow at t = {t}")));
        }
    }

    Ok(OdeOutput {
        states,
        accepted_steps: accepted,
        rejected_steps: rejected,
        error_estimate: err_sum,
    })
}

fn rms_scaled(v: &[f64], y: &[f64], opts: &OdeOptions) -> f64 {
    let s: f64 = v
        .iter()
        .zip(y)
        .map(|(a, b)| (a / (opts.atol + opts.rtol * b.abs())).powi(2))
        .sum();
    (s / v.len().max(1) as f64).sqrt()
}

/// Guard that never aborts.
pub fn no_guard(_t: f64, _y: &[f64]) -> Result<()> {
    Ok(())
}
