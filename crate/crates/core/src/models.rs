//! The two supported Hamiltonian families and their reduced profile potentials.
//!
//! * `Kdv`: scalar `v`, ℋ = f(v) + ½κ(v)v_x², 𝒬 = ½v², B = [1].
//! * `Ekl`: `(v, u)`, ℋ = ½u² + F(v) + ½κ(v)v_x², 𝒬 = v·u, B = [[0,1],[1,0]].
//!
//! Travelling profiles satisfy ½κ(v)v_x² + W(v; c, λ) = μ with
//! W = −f − ½cv² − λ₁v (KdV) or W = −F + ½(cv + λ₂)² − λ₁v (EKL, after
//! eliminating ū = −(cv + λ₂)).

use crate::error::{Error, Result};
use crate::grid::{self, DerivativeScheme};
use crate::poly::Poly;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "KDV", alias = "KdV", alias = "kdv")]
    Kdv,
    #[serde(rename = "EKL", alias = "ekl")]
    Ekl,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Kdv => "KDV",
            Family::Ekl => "EKL",
        }
    }

    /// Number of dependent variables.
    pub fn dim(self) -> usize {
        match self {
            Family::Kdv => 1,
            Family::Ekl => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub family: Family,
    /// f(v) for KdV, F(v) for EKL.
    pub energy: Poly,
    pub kappa: Poly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveParams {
    pub mu: f64,
    pub lambda: Vec<f64>,
    pub c: f64,
}

impl WaveParams {
    pub fn new(mu: f64, lambda: impl Into<Vec<f64>>, c: f64) -> Self {
        WaveParams { mu, lambda: lambda.into(), c }
    }

    /// Parameters in the canonical order (μ, λ₁…λ_N, c).
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.lambda.len() + 2);
        v.push(self.mu);
        v.extend_from_slice(&self.lambda);
        v.push(self.c);
        v
    }

    pub fn from_slice(p: &[f64]) -> Self {
        let n = p.len();
        WaveParams {
            mu: p[0],
            lambda: p[1..n - 1].to_vec(),
            c: p[n - 1],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StructureMatrices {
    pub b: DMatrix<f64>,
    pub binv: DMatrix<f64>,
}

impl Model {
    pub fn kdv(f: Poly, kappa: Poly) -> Self {
        Model { family: Family::Kdv, energy: f, kappa }
    }

    pub fn ekl(bulk: Poly, kappa: Poly) -> Self {
        Model { family: Family::Ekl, energy: bulk, kappa }
    }

    pub fn n(&self) -> usize {
        self.family.dim()
    }

    pub fn structure(&self) -> StructureMatrices {
        match self.family {
            Family::Kdv => StructureMatrices {
                b: DMatrix::from_element(1, 1, 1.0),
                binv: DMatrix::from_element(1, 1, 1.0),
            },
            Family::Ekl => {
                let b = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
                StructureMatrices { binv: b.clone(), b }
            }
        }
    }

    pub fn check_params(&self, p: &WaveParams) -> Result<()> {
        if p.lambda.len() != self.n() {
            return Err(Error::BadDimension(format!(
                "{} expects {} Lagrange multipliers, got {}",
                self.family.name(),
                self.n(),
                p.lambda.len()
            )));
        }
        if !(p.mu.is_finite() && p.c.is_finite() && p.lambda.iter().all(|l| l.is_finite())) {
            return Err(Error::InvalidInput("non-finite wave parameter".into()));
        }
        Ok(())
    }

    /// Impulse density 𝒬(U) = ½ U·B⁻¹U.
    pub fn impulse(&self, v: f64, u: f64) -> f64 {
        match self.family {
            Family::Kdv => 0.5 * v * v,
            Family::Ekl => v * u,
        }
    }
}

/// Closed-form W, W′, W″ and κ with derivatives for one parameter point.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialEvaluator {
    pub w: Poly,
    pub dw: Poly,
    pub d2w: Poly,
    pub kappa: Poly,
    pub dkappa: Poly,
    pub d2kappa: Poly,
    /// −∂W/∂p for p = λ₁…λ_N, c: the profile densities Ū_α(v) and 𝒬(Ū(v)).
    pub param_densities: Vec<Poly>,
}

impl PotentialEvaluator {
    pub fn w(&self, v: f64) -> f64 {
        self.w.eval(v)
    }
    pub fn dw(&self, v: f64) -> f64 {
        self.dw.eval(v)
    }
    pub fn d2w(&self, v: f64) -> f64 {
        self.d2w.eval(v)
    }
    pub fn kappa(&self, v: f64) -> f64 {
        self.kappa.eval(v)
    }

    /// v'' of the reduced profile ODE, regular at turning points.
    pub fn second_derivative(&self, v: f64, vx: f64) -> f64 {
        -(self.dw.eval(v) + 0.5 * self.dkappa.eval(v) * vx * vx) / self.kappa.eval(v)
    }
}

pub fn reduced_potential(model: &Model, params: &WaveParams) -> Result<PotentialEvaluator> {
    model.check_params(params)?;
    let c = params.c;
    let lam1 = params.lambda[0];
    let (w, param_densities) = match model.family {
        Family::Kdv => {
            let w = &(-&model.energy) - &Poly::new(vec![0.0, lam1, 0.5 * c]);
            (w, vec![Poly::linear(0.0, 1.0), Poly::monomial(2, 0.5)])
        }
        Family::Ekl => {
            let lam2 = params.lambda[1];
            let flux = Poly::linear(lam2, c); // cv + λ₂ = −ū
            let w = &(&(-&model.energy) + &(&flux * &flux).scale(0.5)) - &Poly::linear(0.0, lam1);
            let u = -&flux;
            let q = &Poly::linear(0.0, 1.0) * &u;
            (w, vec![Poly::linear(0.0, 1.0), u, q])
        }
    };
    let dw = w.deriv();
    let d2w = dw.deriv();
    let dkappa = model.kappa.deriv();
    let d2kappa = dkappa.deriv();
    Ok(PotentialEvaluator {
        w,
        dw,
        d2w,
        kappa: model.kappa.clone(),
        dkappa,
        d2kappa,
        param_densities,
    })
}

/// ū = −(cv + λ₂) for EKL (T ≡ 1, a = 0, b = 1).
pub fn eliminate_velocity(model: &Model, params: &WaveParams, v: f64) -> Result<f64> {
    match model.family {
        Family::Kdv => Err(Error::UnsupportedFamily("KDV")),
        Family::Ekl => {
            model.check_params(params)?;
            Ok(-(params.c * v + params.lambda[1]))
        }
    }
}

/// Sampled periodic state: `v` and, for EKL, `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct Fields {
    pub v: Vec<f64>,
    pub u: Option<Vec<f64>>,
}

impl Fields {
    pub fn scalar(v: Vec<f64>) -> Self {
        Fields { v, u: None }
    }
    pub fn pair(v: Vec<f64>, u: Vec<f64>) -> Self {
        Fields { v, u: Some(u) }
    }
}

fn check_fields(model: &Model, f: &Fields) -> Result<()> {
    if f.v.len() < grid::MIN_GRID_POINTS {
        return Err(Error::GridTooCoarse(format!("{} points", f.v.len())));
    }
    match (model.family, &f.u) {
        (Family::Kdv, None) => Ok(()),
        (Family::Ekl, Some(u)) if u.len() == f.v.len() => Ok(()),
        _ => Err(Error::GridMismatch("field components do not match the model".into())),
    }
}

/// 𝖤ℋ[U] sampled on the grid.
pub fn variational_derivative(
    model: &Model,
    fields: &Fields,
    length: f64,
    scheme: DerivativeScheme,
) -> Result<Fields> {
    check_fields(model, fields)?;
    let v = &fields.v;
    let vx = grid::derivative(v, length, scheme)?;
    let flux: Vec<f64> = v.iter().zip(&vx).map(|(&v, &vx)| model.kappa.eval(v) * vx).collect();
    let dflux = grid::derivative(&flux, length, scheme)?;
    let df = model.energy.deriv();
    let dk = model.kappa.deriv();
    let ev: Vec<f64> = (0..v.len())
        .map(|j| df.eval(v[j]) + 0.5 * dk.eval(v[j]) * vx[j] * vx[j] - dflux[j])
        .collect();
    Ok(Fields { v: ev, u: fields.u.clone() })
}

/// Pointwise (𝒬, 𝒮, ℋ) with 𝒮 = U·𝖤ℋ + 𝖫ℋ and 𝖫ℋ = v_x ∂ℋ/∂v_x − ℋ.
#[derive(Debug, Clone, PartialEq)]
pub struct Densities {
    pub impulse: Vec<f64>,
    pub impulse_flux: Vec<f64>,
    pub hamiltonian: Vec<f64>,
}

pub fn conserved_densities(
    model: &Model,
    fields: &Fields,
    length: f64,
    scheme: DerivativeScheme,
) -> Result<Densities> {
    check_fields(model, fields)?;
    let e = variational_derivative(model, fields, length, scheme)?;
    let v = &fields.v;
    let vx = grid::derivative(v, length, scheme)?;
    let n = v.len();
    let mut impulse = Vec::with_capacity(n);
    let mut impulse_flux = Vec::with_capacity(n);
    let mut hamiltonian = Vec::with_capacity(n);
    for j in 0..n {
        let grad = 0.5 * model.kappa.eval(v[j]) * vx[j] * vx[j];
        let u = fields.u.as_ref().map_or(0.0, |u| u[j]);
        let h = match model.family {
            Family::Kdv => model.energy.eval(v[j]) + grad,
            Family::Ekl => 0.5 * u * u + model.energy.eval(v[j]) + grad,
        };
        let legendre = 2.0 * grad - h;
        let u_dot_e = v[j] * e.v[j] + fields.u.as_ref().map_or(0.0, |_| u * u);
        impulse.push(model.impulse(v[j], u));
        impulse_flux.push(u_dot_e + legendre);
        hamiltonian.push(h);
    }
    Ok(Densities { impulse, impulse_flux, hamiltonian })
}
