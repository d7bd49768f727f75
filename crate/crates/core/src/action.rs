//! Action integral Θ(μ, λ, c), its gradient (orbit moments), its Hessian Σ,
//! the constraints matrix C and the Whitham modulation matrices.

use crate::error::{Error, Result};
use crate::linalg::norm_inf;
use crate::models::{self, Family, Model, StructureMatrices, WaveParams};
use crate::numerics::Numerics;
use crate::profile::{self, Orbit};
use crate::spectral;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

/// Attempts at halving the finite-difference step before giving up.
const MAX_STEP_HALVINGS: usize = 8;
/// Relative asymmetry tolerated in Σ before symmetrization.
const HESSIAN_SYMMETRY_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct ActionData {
    pub theta: f64,
    /// ∇Θ in (μ, λ₁…λ_N, c) order; grad[0] = Ξ.
    pub grad: Vec<f64>,
    /// Σ = Hess Θ, symmetrized.
    pub hess: DMatrix<f64>,
    pub k: f64,
    pub m: Vec<f64>,
    pub p: f64,
    pub params: WaveParams,
    /// Asymmetry ‖Σ − Σᵀ‖∞ / ‖Σ‖∞ before symmetrization.
    pub asymmetry: f64,
}

impl ActionData {
    pub fn n(&self) -> usize {
        self.grad.len() - 2
    }
    pub fn theta_mu(&self) -> f64 {
        self.grad[0]
    }
    pub fn theta_mumu(&self) -> f64 {
        self.hess[(0, 0)]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintsMatrix {
    pub c: DMatrix<f64>,
    pub xi_mu: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WhithamSystem {
    pub sigma: DMatrix<f64>,
    pub s: DMatrix<f64>,
    pub c: f64,
    pub theta_mu: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveCoordinates<'a> {
    pub k: f64,
    pub m: &'a [f64],
    pub p: f64,
    pub omega: f64,
}

/// Θ = ∮ ∂ℋ/∂v_x dv.
pub fn action_value(model: &Model, params: &WaveParams, hint: Option<(f64, f64)>, quad_nodes: usize) -> Result<f64> {
    profile::compute_orbit(model, params, hint, quad_nodes)?.action()
}

/// (Θ_μ, ∇_λΘ, Θ_c) = (Ξ, ∫Ū dx, ∫𝒬(Ū) dx).
pub fn action_gradient(
    model: &Model,
    params: &WaveParams,
    hint: Option<(f64, f64)>,
    quad_nodes: usize,
) -> Result<Vec<f64>> {
    profile::compute_orbit(model, params, hint, quad_nodes)?.gradient_moments()
}

fn fd_step(p: f64, rel: f64) -> f64 {
    (rel * p.abs()).max(1e-6)
}

/// Whether an error means the stencil left the periodic region.
fn crosses_boundary(e: &Error) -> bool {
    matches!(e, Error::NoOrbit(_) | Error::QuadratureFailure(_) | Error::NonPositiveKappa(_))
}

/// Central difference of `f` along `dir` with one Richardson level, halving
/// the step while the stencil leaves the periodic region.
fn richardson<F>(f: &F, base: &[f64], dir: &[f64], h0: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let shifted = |h: f64| -> Vec<f64> { base.iter().zip(dir).map(|(b, d)| b + h * d).collect() };
    let central = |h: f64| -> Result<Vec<f64>> {
        let fp = f(&shifted(h))?;
        let fm = f(&shifted(-h))?;
        Ok(fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * h)).collect())
    };
    let mut h = h0;
    let mut last = None;
    for _ in 0..=MAX_STEP_HALVINGS {
        match central(h).and_then(|d1| central(0.5 * h).map(|d2| (d1, d2))) {
            Ok((d1, d2)) => {
                return Ok(d1.iter().zip(&d2).map(|(a, b)| (4.0 * b - a) / 3.0).collect());
            }
            Err(e) if crosses_boundary(&e) => {
                last = Some(e);
                h *= 0.5;
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::DegenerateParametrization(format!(
        "finite-difference stencil leaves the periodic region ({})",
        last.map(|e| e.to_string()).unwrap_or_default()
    )))
}

/// Hint selecting the base orbit's well for perturbed parameters.
pub fn well_hint(orbit: &Orbit) -> Option<(f64, f64)> {
    Some((orbit.well_bottom, orbit.well_bottom))
}

/// Θ, ∇Θ and Σ = Hess Θ by differencing the closed-form gradient.
pub fn action_hessian(
    model: &Model,
    params: &WaveParams,
    hint: Option<(f64, f64)>,
    numerics: &Numerics,
) -> Result<ActionData> {
    let orbit = profile::compute_orbit(model, params, hint, numerics.quad_nodes)?;
    action_hessian_at(&orbit, numerics)
}

pub fn action_hessian_at(orbit: &Orbit, numerics: &Numerics) -> Result<ActionData> {
    let theta = orbit.action()?;
    let grad = orbit.gradient_moments()?;
    let base = orbit.params.to_vec();
    let n = base.len();
    let hint = well_hint(orbit);
    let model = &orbit.model;
    let nodes = numerics.quad_nodes;
    let gradient = |p: &[f64]| action_gradient(model, &WaveParams::from_slice(p), hint, nodes);
    let columns: Vec<Result<Vec<f64>>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut dir = vec![0.0; n];
            dir[j] = 1.0;
            richardson(&gradient, &base, &dir, fd_step(base[j], numerics.fd_rel_step))
        })
        .collect();
    let mut hess = DMatrix::zeros(n, n);
    for (j, col) in columns.into_iter().enumerate() {
        let col = col?;
        for i in 0..n {
            hess[(i, j)] = col[i];
        }
    }
    let scale = norm_inf(&hess);
    let asym = norm_inf(&(&hess - hess.transpose()));
    let asymmetry = if scale > 0.0 { asym / scale } else { 0.0 };
    if asymmetry > HESSIAN_SYMMETRY_TOL {
        return Err(Error::HessianAsymmetry(asymmetry));
    }
    let hess = (&hess + hess.transpose()) * 0.5;
    let k = 1.0 / grad[0];
    Ok(ActionData {
        theta,
        m: grad[1..n - 1].iter().map(|g| k * g).collect(),
        p: k * grad[n - 1],
        k,
        grad,
        hess,
        params: orbit.params.clone(),
        asymmetry,
    })
}

/// C = ∇̌²Θ − ∇̌Θ_μ ⊗ ∇̌Θ_μ / Θ_μμ over the (λ, c) slots.
pub fn constraints_matrix(data: &ActionData, sign_tol: f64) -> Result<ConstraintsMatrix> {
    constraints_from_sigma(&data.hess, sign_tol)
}

pub fn constraints_from_sigma(sigma: &DMatrix<f64>, sign_tol: f64) -> Result<ConstraintsMatrix> {
    let n = sigma.nrows();
    if n < 2 || sigma.ncols() != n {
        return Err(Error::BadDimension(format!("Sigma is {}x{}", n, sigma.ncols())));
    }
    let xi_mu = sigma[(0, 0)];
    if xi_mu.abs() <= sign_tol * norm_inf(sigma) {
        return Err(Error::DegenerateParametrization(format!(
            "Theta_mumu = {xi_mu:e} is within tolerance of zero"
        )));
    }
    let m = n - 1;
    let c = DMatrix::from_fn(m, m, |i, j| sigma[(i + 1, j + 1)] - sigma[(0, i + 1)] * sigma[(0, j + 1)] / xi_mu);
    Ok(ConstraintsMatrix { c, xi_mu })
}

pub fn wave_coordinates(data: &ActionData) -> WaveCoordinates<'_> {
    WaveCoordinates {
        k: data.k,
        m: &data.m,
        p: data.p,
        omega: -data.k * data.params.c,
    }
}

/// S with −1 in the (μ, c) corners and B in the λ block.
pub fn structure_s(structure: &StructureMatrices) -> DMatrix<f64> {
    let n = structure.b.nrows();
    let mut s = DMatrix::zeros(n + 2, n + 2);
    s[(0, n + 1)] = -1.0;
    s[(n + 1, 0)] = -1.0;
    s.view_mut((1, 1), (n, n)).copy_from(&structure.b);
    s
}

/// Σ∂_T W + (cΣ + Θ_μS)∂_X W = 0.
pub fn whitham_system(data: &ActionData, structure: &StructureMatrices) -> WhithamSystem {
    WhithamSystem {
        sigma: data.hess.clone(),
        s: structure_s(structure),
        c: data.params.c,
        theta_mu: data.theta_mu(),
    }
}

/// C from the quadratic form −⟨Ũ_β, 𝒜Ũ_α⟩, where Ũ_α are profile derivatives
/// along the fixed-period directions e_α − (Θ_μα/Θ_μμ)e_μ, on a
/// (2M+1)-point collocation grid.
pub fn dual_constraints_matrix(orbit: &Orbit, data: &ActionData, numerics: &Numerics) -> Result<DMatrix<f64>> {
    let sigma = &data.hess;
    let n = sigma.nrows();
    let xi_mu = sigma[(0, 0)];
    if xi_mu.abs() <= numerics.sign_tol * norm_inf(sigma) {
        return Err(Error::DegenerateParametrization("Theta_mumu is within tolerance of zero".into()));
    }
    let hill = spectral::hill_assemble_orbit(orbit, 0.0, numerics.hill_modes)?;
    let a = hill.real_matrix();
    let npts = hill.points.len();
    let xs = hill.points.clone();
    let base = orbit.params.to_vec();
    let hint = well_hint(orbit);
    let model = &orbit.model;
    let sample = |p: &[f64]| -> Result<Vec<f64>> {
        let params = WaveParams::from_slice(p);
        let o = profile::compute_orbit(model, &params, hint, numerics.quad_nodes)?;
        let (v, _) = profile::sample_profile_at(&o, &xs)?;
        let mut out = v.clone();
        if model.family == Family::Ekl {
            for &vj in &v {
                out.push(models::eliminate_velocity(model, &params, vj)?);
            }
        }
        Ok(out)
    };
    let dirs: Vec<Vec<f64>> = (1..n)
        .map(|alpha| {
            let mut d = vec![0.0; n];
            d[alpha] = 1.0;
            d[0] = -sigma[(0, alpha)] / xi_mu;
            d
        })
        .collect();
    let tilde: Vec<DVector<f64>> = dirs
        .par_iter()
        .enumerate()
        .map(|(i, d)| {
            let h = fd_step(base[i + 1], numerics.fd_rel_step);
            richardson(&sample, &base, d, h).map(DVector::from_vec)
        })
        .collect::<Result<Vec<_>>>()?;
    let weight = orbit.xi / npts as f64;
    let m = n - 1;
    let mut c = DMatrix::zeros(m, m);
    for alpha in 0..m {
        let au = &a * &tilde[alpha];
        for beta in 0..m {
            c[(alpha, beta)] = -weight * tilde[beta].dot(&au);
        }
    }
    Ok(c)
}
