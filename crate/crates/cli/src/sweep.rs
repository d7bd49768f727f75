//! One-parameter sweeps of the report pipeline.

use crate::config::{Config, ConfigError};
use crate::report::{run_report, Report, ReportOptions, Status};
use crate::tables::{num, opt_num, Table};
use pwstab_core::criteria::{CoperiodicVerdict, JohnsonVerdict, ModulationalVerdict};
use rayon::prelude::*;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Vary {
    Mu,
    C,
    Lambda1,
    Lambda2,
}

impl FromStr for Vary {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s {
            "mu" => Ok(Vary::Mu),
            "c" => Ok(Vary::C),
            "lambda1" => Ok(Vary::Lambda1),
            "lambda2" => Ok(Vary::Lambda2),
            other => Err(ConfigError::Invalid(format!("cannot sweep '{other}' (mu, c, lambda1, lambda2)"))),
        }
    }
}

impl Vary {
    pub fn name(self) -> &'static str {
        match self {
            Vary::Mu => "mu",
            Vary::C => "c",
            Vary::Lambda1 => "lambda1",
            Vary::Lambda2 => "lambda2",
        }
    }

    fn apply(self, config: &mut Config, value: f64) {
        match self {
            Vary::Mu => config.params.mu = value,
            Vary::C => config.params.c = value,
            Vary::Lambda1 => config.params.lambda[0] = value,
            Vary::Lambda2 => config.params.lambda[1] = value,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub vary: Vary,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

impl SweepSpec {
    pub fn values(&self) -> Vec<f64> {
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| self.from + (self.to - self.from) * i as f64 / last)
            .collect()
    }
}

pub fn coperiodic_code(v: CoperiodicVerdict) -> i32 {
    match v {
        CoperiodicVerdict::InconclusiveByDet => 0,
        CoperiodicVerdict::UnstableByDet => 1,
        CoperiodicVerdict::Degenerate => 2,
    }
}

pub fn johnson_code(v: JohnsonVerdict) -> i32 {
    match v {
        JohnsonVerdict::Inconclusive => 0,
        JohnsonVerdict::OrbitallyStable => 1,
        JohnsonVerdict::Degenerate => 2,
        JohnsonVerdict::NotApplicable => 3,
    }
}

pub fn modulational_code(v: ModulationalVerdict) -> i32 {
    match v {
        ModulationalVerdict::Hyperbolic => 0,
        ModulationalVerdict::WeaklyHyperbolic => 1,
        ModulationalVerdict::NotHyperbolic => 2,
        ModulationalVerdict::Degenerate => 3,
    }
}

/// Reports at every grid point, in grid order, evaluated on up to `jobs`
/// threads.
pub fn run_sweep(
    config: &Config,
    spec: &SweepSpec,
    opts: &ReportOptions,
    jobs: Option<usize>,
) -> Result<Vec<(f64, Report)>, ConfigError> {
    if spec.steps < 2 {
        return Err(ConfigError::Invalid(format!("sweep needs at least 2 steps, got {}", spec.steps)));
    }
    if !spec.from.is_finite() || !spec.to.is_finite() {
        return Err(ConfigError::Invalid("sweep bounds must be finite".into()));
    }
    let dim = config.model.family.dim();
    if (spec.vary == Vary::Lambda2 && dim < 2) || (spec.vary == Vary::Lambda1 && dim < 1) {
        return Err(ConfigError::Invalid(format!(
            "family {} has no {}",
            config.model.family.name(),
            spec.vary.name()
        )));
    }
    config.validate()?;
    let points: Vec<(f64, Config)> = spec
        .values()
        .into_iter()
        .map(|v| {
            let mut c = config.clone();
            spec.vary.apply(&mut c, v);
            (v, c)
        })
        .collect();
    let evaluate = || -> Vec<(f64, Report)> {
        points.par_iter().map(|(v, c)| (*v, run_report(c, opts))).collect()
    };
    let reports = match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| ConfigError::Invalid(format!("thread pool: {e}")))?
            .install(evaluate),
        None => evaluate(),
    };
    Ok(reports)
}

/// One row per point; failed stages leave their columns empty.
pub fn sweep_table(vary: Vary, n: usize, reports: &[(f64, Report)]) -> Table {
    let mut header: Vec<String> = [
        vary.name(),
        "status",
        "errors",
        "Xi",
        "theta",
        "detSigma",
        "theta_mumu",
        "coperiodic",
        "johnson",
        "modulational",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for i in 0..n + 2 {
        header.push(format!("speed{i}_re"));
        header.push(format!("speed{i}_im"));
    }
    header.push("negA".into());
    header.push("neg_C".into());
    let mut table = Table { header, rows: Vec::new() };
    for (value, r) in reports {
        let status = match r.status {
            Status::Complete => "complete",
            Status::Partial => "partial",
        };
        let kinds: Vec<&str> = r.errors.iter().map(|e| e.kind).collect();
        let mut row = vec![num(*value), status.to_string(), kinds.join(";")];
        row.push(opt_num(r.orbit.as_ref().map(|o| o.xi)));
        row.push(opt_num(r.action.as_ref().map(|a| a.theta)));
        row.push(opt_num(r.action.as_ref().map(|a| a.det_sigma)));
        row.push(opt_num(r.action.as_ref().map(|a| a.hess[0][0])));
        let st = r.stability.as_ref();
        let code = |x: Option<i32>| x.map(|c| c.to_string()).unwrap_or_default();
        row.push(code(st.map(|s| coperiodic_code(s.coperiodic))));
        row.push(code(st.map(|s| johnson_code(s.johnson))));
        row.push(code(st.map(|s| modulational_code(s.modulational.verdict))));
        let speeds = st.map(|s| s.modulational.speeds.as_slice()).unwrap_or(&[]);
        for i in 0..n + 2 {
            row.push(opt_num(speeds.get(i).map(|z| z.re)));
            row.push(opt_num(speeds.get(i).map(|z| z.im)));
        }
        row.push(r.spectral.neg_a.map(|x| x.to_string()).unwrap_or_default());
        let neg_c = st.and_then(|s| s.signatures.as_ref()).map(|s| s.neg_c);
        row.push(neg_c.map(|x| x.to_string()).unwrap_or_default());
        table.rows.push(row);
    }
    table
}
