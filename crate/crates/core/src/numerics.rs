use crate::grid::DerivativeScheme;
use serde::{Deserialize, Serialize};

/// Numerical knobs shared by the whole pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Numerics {
    /// Gauss–Legendre nodes for orbit integrals.
    pub quad_nodes: usize,
    /// Relative finite-difference step for the action Hessian.
    pub fd_rel_step: f64,
    /// Relative tolerance of the monodromy integration.
    pub ode_rel_tol: f64,
    /// Fourier modes M of the Hill discretization (2M+1 collocation points).
    pub hill_modes: usize,
    /// Relative tolerance band for all sign decisions.
    pub sign_tol: f64,
    /// Grid size of the direct simulation.
    pub sim_modes: usize,
    /// Profile grid size for emitted samples and moment checks.
    pub profile_points: usize,
    /// Points on the argument-principle contour.
    pub contour_points: usize,
    pub derivative_scheme: DerivativeScheme,
}

impl Default for Numerics {
    fn default() -> Self {
        Numerics {
            quad_nodes: 200,
            fd_rel_step: 1e-4,
            ode_rel_tol: 1e-10,
            hill_modes: 64,
            sign_tol: 1e-8,
            sim_modes: 256,
            profile_points: 256,
            contour_points: 128,
            derivative_scheme: DerivativeScheme::Spectral,
        }
    }
}

impl Numerics {
    /// Names of fields that must be strictly positive and violate it.
    pub fn non_positive_fields(&self) -> Vec<&'static str> {
        let mut bad = Vec::new();
        if self.quad_nodes == 0 {
            bad.push("quad_nodes");
        }
        if !(self.fd_rel_step > 0.0) {
            bad.push("fd_rel_step");
        }
        if !(self.ode_rel_tol > 0.0) {
            bad.push("ode_rel_tol");
        }
        if self.hill_modes == 0 {
            bad.push("hill_modes");
        }
        if !(self.sign_tol > 0.0) {
            bad.push("sign_tol");
        }
        if self.sim_modes == 0 {
            bad.push("sim_modes");
        }
        if self.profile_points == 0 {
            bad.push("profile_points");
        }
        if self.contour_points == 0 {
            bad.push("contour_points");
        }
        bad
    }
}
