//! Full pipeline run with per-stage error containment.

use crate::config::Config;
use nalgebra::DMatrix;
use pwstab_core::action::{self, ActionData};
use pwstab_core::criteria::{self, JohnsonVerdict, StabilityReport};
use pwstab_core::models::reduced_potential;
use pwstab_core::profile::{self, OrbitClass};
use pwstab_core::spectral;
use pwstab_core::{Error, Numerics};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Complete,
    Partial,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageError {
    pub stage: &'static str,
    pub kind: &'static str,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitSummary {
    pub v1: f64,
    pub v2: f64,
    #[serde(rename = "Xi")]
    pub xi: f64,
    pub classification: OrbitClass,
    pub well_bottom: f64,
    pub amplitude: f64,
    pub energy_residual: f64,
    pub return_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ActionSummary {
    pub theta: f64,
    pub grad: Vec<f64>,
    /// Σ as a list of rows.
    pub hess: Vec<Vec<f64>>,
    pub hess_asymmetry: f64,
    pub det_sigma: f64,
    pub k: f64,
    #[serde(rename = "M")]
    pub m: Vec<f64>,
    #[serde(rename = "P")]
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SidebandSummary {
    pub nu: f64,
    pub unstable_count: usize,
    pub winding: f64,
    pub contour_points: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SpectralSummary {
    /// Negative eigenvalues of the Hessian operator at ν = 0.
    #[serde(rename = "negA")]
    pub neg_a: Option<usize>,
    /// Negative eigenvalues of the reduced Sturm–Liouville operator.
    pub n_neg_a: Option<usize>,
    pub sl_kernel_residual: Option<f64>,
    pub real_roots: Option<Vec<f64>>,
    pub sidebands: Option<Vec<SidebandSummary>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub timestamp: String,
    pub numerics: Numerics,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub status: Status,
    pub config: Config,
    pub orbit: Option<OrbitSummary>,
    #[serde(flatten)]
    pub action: Option<ActionSummary>,
    #[serde(rename = "C")]
    pub c: Option<Vec<Vec<f64>>>,
    #[serde(rename = "S")]
    pub s: Vec<Vec<f64>>,
    #[serde(flatten)]
    pub stability: Option<StabilityReport>,
    pub spectral: SpectralSummary,
    pub errors: Vec<StageError>,
    pub provenance: Provenance,
}

impl Report {
    /// 0 when every stage succeeded, 2 when some stage failed.
    pub fn exit_code(&self) -> i32 {
        match self.status {
            Status::Complete => 0,
            Status::Partial => 2,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReportOptions {
    /// Run the real co-periodic and side-band Evans scans.
    pub scans: bool,
    /// Run the spectral inertia and Sturm–Liouville checks.
    pub spectral: bool,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions { scans: true, spectral: true }
    }
}

pub fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

struct Errors(Vec<StageError>);

impl Errors {
    fn record<T>(&mut self, stage: &'static str, r: pwstab_core::Result<T>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                log::warn!("stage {stage} failed: {e}");
                self.0.push(StageError { stage, kind: e.kind(), message: e.to_string() });
                None
            }
        }
    }
}

fn action_summary(data: &ActionData) -> ActionSummary {
    ActionSummary {
        theta: data.theta,
        grad: data.grad.clone(),
        hess: rows(&data.hess),
        hess_asymmetry: data.asymmetry,
        det_sigma: data.hess.determinant(),
        k: data.k,
        m: data.m.clone(),
        p: data.p,
    }
}

/// models → profile → action → criteria → spectral, keeping whatever
/// succeeds.
pub fn run_report(config: &Config, opts: &ReportOptions) -> Report {
    let model = config.model();
    let params = config.params();
    let num = &config.numerics;
    let mut errors = Errors(Vec::new());
    let s = action::structure_s(&model.structure());

    let classification = errors
        .record("models", reduced_potential(&model, &params))
        .map(|pot| profile::classify_orbit(&pot, params.mu));
    let orbit = classification.and_then(|_| errors.record("profile", profile::compute_orbit(&model, &params, None, num.quad_nodes)));
    let profile = orbit
        .as_ref()
        .and_then(|o| errors.record("profile", profile::compute_profile(o, num.profile_points)));
    let orbit_summary = profile.as_ref().map(|p| OrbitSummary {
        v1: p.orbit.v1,
        v2: p.orbit.v2,
        xi: p.orbit.xi,
        classification: classification.unwrap_or(OrbitClass::Periodic),
        well_bottom: p.orbit.well_bottom,
        amplitude: p.orbit.amplitude(),
        energy_residual: p.energy_residual,
        return_residual: p.return_residual,
    });

    let data = orbit.as_ref().and_then(|o| errors.record("action", action::action_hessian_at(o, num)));
    let constraints = data
        .as_ref()
        .and_then(|d| errors.record("constraints", action::constraints_matrix(d, num.sign_tol)));

    let mut spectral_summary = SpectralSummary::default();
    if let (Some(orbit), true) = (orbit.as_ref(), opts.spectral) {
        let hill = errors.record("spectral.hessian_operator", spectral::hill_assemble_orbit(orbit, 0.0, num.hill_modes));
        spectral_summary.neg_a = hill.and_then(|h| {
            let tol = h.zero_tol(num.sign_tol);
            errors.record("spectral.hessian_operator", spectral::inertia(&h, tol)).map(|i| i.negative)
        });
        if let Some(sl) = errors.record(
            "spectral.sturm_liouville",
            spectral::sturm_liouville_check(orbit, num.hill_modes, num.sign_tol),
        ) {
            spectral_summary.n_neg_a = Some(sl.negative);
            spectral_summary.sl_kernel_residual = Some(sl.kernel_residual);
        }
        if opts.scans {
            let scan = &config.scan;
            spectral_summary.real_roots = errors
                .record(
                    "spectral.real_scan",
                    spectral::real_coperiodic_scan(orbit, scan.tau_max, scan.tau_grid, num.ode_rel_tol),
                )
                .map(|roots| roots.iter().map(|r| r.tau).collect());
            let nus = config.sideband_nus();
            if !nus.is_empty() {
                spectral_summary.sidebands = errors
                    .record(
                        "spectral.sideband_scan",
                        spectral::sideband_scan(orbit, &nus, scan.tau_max, num.contour_points, num.ode_rel_tol),
                    )
                    .map(|counts| {
                        counts
                            .iter()
                            .map(|c| SidebandSummary {
                                nu: c.nu,
                                unstable_count: c.count,
                                winding: c.winding,
                                contour_points: c.contour_points,
                            })
                            .collect()
                    });
            }
        }
    }

    let stability = data.as_ref().and_then(|d| {
        let n = d.n();
        let coperiodic = errors.record("criteria.coperiodic", criteria::coperiodic_test(&d.hess, n, num.sign_tol))?;
        let johnson = match criteria::johnson_test(&d.hess, num.sign_tol) {
            Err(Error::NotApplicable(_)) => JohnsonVerdict::NotApplicable,
            r => errors.record("criteria.johnson", r)?,
        };
        let whitham = action::whitham_system(d, &model.structure());
        let modulational = errors.record("criteria.modulational", criteria::modulational_speeds(&whitham, num.sign_tol))?;
        let signatures = constraints.as_ref().and_then(|c| {
            errors.record(
                "criteria.signatures",
                criteria::signature_report(&c.c, spectral_summary.neg_a, num.sign_tol),
            )
        });
        let cross_identity_residual = match (&constraints, n) {
            (Some(c), 1) => errors.record("criteria.cross_identity", criteria::cross_identity_check(&d.hess, &c.c)),
            _ => None,
        };
        if cross_identity_residual.is_some_and(|r| r > 1e-4) {
            log::warn!("cross identity residual {:e} exceeds 1e-4", cross_identity_residual.unwrap());
        }
        Some(StabilityReport {
            coperiodic,
            johnson,
            modulational,
            signatures,
            cross_identity_residual,
            sign_tol: num.sign_tol,
        })
    });

    let errors = errors.0;
    Report {
        status: if errors.is_empty() { Status::Complete } else { Status::Partial },
        config: config.clone(),
        orbit: orbit_summary,
        action: data.as_ref().map(action_summary),
        c: constraints.as_ref().map(|c| rows(&c.c)),
        s: rows(&s),
        stability,
        spectral: spectral_summary,
        errors,
        provenance: Provenance {
            tool: "pwstab",
            version: env!("CARGO_PKG_VERSION"),
            timestamp: chrono::Utc::now().to_rfc3339(),
            numerics: num.clone(),
        },
    }
}
