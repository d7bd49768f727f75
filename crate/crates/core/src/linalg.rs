//! Small dense linear-algebra helpers: symmetric-indefinite inertia and
//! Fourier collocation differentiation.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use std::f64::consts::PI;

/// Sylvester inertia of a symmetric matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Inertia {
    pub negative: usize,
    pub zero: usize,
    pub positive: usize,
}

/// Infinity norm (max absolute row sum).
pub fn norm_inf(m: &DMatrix<f64>) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Inertia of the symmetric matrix `a` from the block-diagonal factor of a
/// Bunch–Kaufman LDLᵀ factorization. Exactly-zero pivots count as zero.
pub fn ldl_inertia(a: &DMatrix<f64>) -> Result<Inertia> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::BadDimension(format!("{}x{} is not square", n, a.ncols())));
    }
    let alpha = (1.0 + 17f64.sqrt()) / 8.0;
    let mut w = a.clone();
    let mut inertia = Inertia { negative: 0, zero: 0, positive: 0 };
    let mut k = 0;
    while k < n {
        let absakk = w[(k, k)].abs();
        let (imax, colmax) = ((k + 1)..n)
            .map(|i| (i, w[(i, k)].abs()))
            .fold((k, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if !absakk.is_finite() || !colmax.is_finite() {
            return Err(Error::FactorizationBreakdown(k));
        }
        if absakk.max(colmax) == 0.0 {
            inertia.zero += 1;
            k += 1;
            continue;
        }
        let (kp, kstep) = if absakk >= alpha * colmax {
            (k, 1)
        } else {
            let rowmax = (k..n)
                .filter(|&j| j != imax)
                .map(|j| w[(imax, j)].abs())
                .fold(0.0, f64::max);
            if absakk * rowmax >= alpha * colmax * colmax {
                (k, 1)
            } else if w[(imax, imax)].abs() >= alpha * rowmax {
                (imax, 1)
            } else {
                (imax, 2)
            }
        };
        let kk = k + kstep - 1;
        if kp != kk {
            w.swap_rows(kk, kp);
            w.swap_columns(kk, kp);
        }
        if kstep == 1 {
            let d = w[(k, k)];
            if d > 0.0 {
                inertia.positive += 1;
            } else if d < 0.0 {
                inertia.negative += 1;
            } else {
                return Err(Error::FactorizationBreakdown(k));
            }
            for j in (k + 1)..n {
                let ljd = w[(j, k)] / d;
                if ljd == 0.0 {
                    continue;
                }
                for i in (k + 1)..n {
                    w[(i, j)] -= w[(i, k)] * ljd;
                }
            }
        } else {
            let d11 = w[(k, k)];
            let d21 = w[(k + 1, k)];
            let d22 = w[(k + 1, k + 1)];
            let det = d11 * d22 - d21 * d21;
            if det == 0.0 || !det.is_finite() {
                return Err(Error::FactorizationBreakdown(k));
            }
            if det < 0.0 {
                inertia.negative += 1;
                inertia.positive += 1;
            } else if d11 + d22 > 0.0 {
                inertia.positive += 2;
            } else {
                inertia.negative += 2;
            }
            // Schur complement: W22 -= [c1 c2] D^{-1} [c1 c2]^T
            for j in (k + 2)..n {
                let (cj1, cj2) = (w[(j, k)], w[(j, k + 1)]);
                let x1 = (d22 * cj1 - d21 * cj2) / det;
                let x2 = (-d21 * cj1 + d11 * cj2) / det;
                for i in (k + 2)..n {
                    w[(i, j)] -= w[(i, k)] * x1 + w[(i, k + 1)] * x2;
                }
            }
        }
        k += kstep;
    }
    Ok(inertia)
}

/// Inertia with eigenvalues in [-zero_tol, zero_tol] counted as zero, from two
/// shifted factorizations: #eig < -tol and #eig < +tol.
pub fn shifted_inertia(a: &DMatrix<f64>, zero_tol: f64) -> Result<Inertia> {
    let n = a.nrows();
    let shift = |s: f64| {
        let mut m = a.clone();
        for i in 0..n {
            m[(i, i)] += s;
        }
        m
    };
    let below_minus = ldl_inertia(&shift(zero_tol))?.negative;
    let below_plus = {
        let i = ldl_inertia(&shift(-zero_tol))?;
        i.negative + i.zero
    };
    Ok(Inertia {
        negative: below_minus,
        zero: below_plus - below_minus,
        positive: n - below_plus,
    })
}

/// Fourier collocation first-derivative matrix on `n` (odd) equispaced points
/// x_j = j·L/n of a period-L domain.
pub fn fourier_diff_matrix(n: usize, length: f64) -> Result<DMatrix<f64>> {
    if n % 2 == 0 || n < 3 {
        return Err(Error::GridMismatch(format!("collocation size {n} must be odd and >= 3")));
    }
    let h = 2.0 * PI / n as f64;
    let scale = 2.0 * PI / length;
    Ok(DMatrix::from_fn(n, n, |j, k| {
        if j == k {
            0.0
        } else {
            let m = j as isize - k as isize;
            let sign = if m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            scale * 0.5 * sign / (0.5 * m as f64 * h).sin()
        }
    }))
}
