//! Derivatives of sampled periodic fields.

use crate::error::{Error, Result};
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeScheme {
    #[default]
    Spectral,
    FourthOrderFd,
}

pub const MIN_GRID_POINTS: usize = 8;

/// Angular wavenumbers 2πj/L in FFT order; the Nyquist entry is set to zero
/// when `zero_nyquist` holds (odd-derivative convention).
pub fn wavenumbers(n: usize, length: f64, zero_nyquist: bool) -> Vec<f64> {
    (0..n)
        .map(|j| {
            let m = if j <= n / 2 { j as isize } else { j as isize - n as isize };
            if zero_nyquist && n % 2 == 0 && j == n / 2 {
                0.0
            } else {
                2.0 * PI * m as f64 / length
            }
        })
        .collect()
}

/// First derivative of a periodic sample on `[0, length)`.
pub fn derivative(values: &[f64], length: f64, scheme: DerivativeScheme) -> Result<Vec<f64>> {
    let n = values.len();
    if n < MIN_GRID_POINTS {
        return Err(Error::GridTooCoarse(format!("{n} points < {MIN_GRID_POINTS}")));
    }
    match scheme {
        DerivativeScheme::Spectral => Ok(spectral_derivative(values, length, 1)),
        DerivativeScheme::FourthOrderFd => {
            let h = length / n as f64;
            Ok((0..n)
                .map(|j| {
                    let at = |o: isize| values[(j as isize + o).rem_euclid(n as isize) as usize];
                    (-at(2) + 8.0 * at(1) - 8.0 * at(-1) + at(-2)) / (12.0 * h)
                })
                .collect())
        }
    }
}

/// Order-`order` spectral derivative via FFT.
pub fn spectral_derivative(values: &[f64], length: f64, order: u32) -> Vec<f64> {
    let n = values.len();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fwd.process(&mut buf);
    let ks = wavenumbers(n, length, order % 2 == 1);
    for (b, &k) in buf.iter_mut().zip(&ks) {
        *b *= Complex64::new(0.0, k).powu(order);
    }
    inv.process(&mut buf);
    buf.iter().map(|c| c.re / n as f64).collect()
}

/// Trapezoid (spectrally accurate for periodic data) integral over one period.
pub fn periodic_integral(values: &[f64], length: f64) -> f64 {
    values.iter().sum::<f64>() * length / values.len() as f64
}
