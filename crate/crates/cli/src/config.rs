//! JSON run configuration.

use pwstab_core::{Family, Model, Numerics, Poly, WaveParams};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub family: Family,
    /// Ascending coefficients of f (KDV) or F (EKL).
    #[serde(alias = "F")]
    pub f: Vec<f64>,
    #[serde(default = "unit_kappa")]
    pub kappa: Vec<f64>,
}

fn unit_kappa() -> Vec<f64> {
    vec![1.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub mu: f64,
    pub lambda: Vec<f64>,
    pub c: f64,
}

/// Evans-function scan settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanConfig {
    /// Upper end of the real co-periodic scan, and radius of the side-band contour.
    pub tau_max: f64,
    pub tau_grid: usize,
    /// Floquet exponents 2πj/(nu_steps + 1), j = 1..nu_steps, for side-band counts.
    pub nu_steps: usize,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig { tau_max: 5.0, tau_grid: 200, nu_steps: 4 }
    }
}

/// Direct-simulation settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    pub dt: f64,
    pub t_max: f64,
    /// Steps between emitted samples.
    pub output_every: usize,
    /// Perturbation sup-norm ε; zero runs the bare profile.
    pub perturbation: f64,
    pub multiplier: usize,
    pub bandwidth: usize,
    pub seed: u64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            dt: 1e-3,
            t_max: 10.0,
            output_every: 100,
            perturbation: 0.0,
            multiplier: 1,
            bandwidth: 8,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub model: ModelConfig,
    pub params: ParamsConfig,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default)]
    pub scan: ScanConfig,
    #[serde(default)]
    pub simulation: SimulationConfig,
}

impl Config {
    pub fn from_json(text: &str) -> Result<Config, ConfigError> {
        let config: Config = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Config, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Config::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: String| Err(ConfigError::Invalid(m));
        let finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
        if self.model.f.is_empty() || !finite(&self.model.f) {
            return invalid("model.f must be a non-empty list of finite coefficients".into());
        }
        if self.model.kappa.is_empty() || !finite(&self.model.kappa) {
            return invalid("model.kappa must be a non-empty list of finite coefficients".into());
        }
        let n = self.model.family.dim();
        if self.params.lambda.len() != n {
            return invalid(format!(
                "params.lambda has {} entries, family {} needs {n}",
                self.params.lambda.len(),
                self.model.family.name()
            ));
        }
        if !self.params.mu.is_finite() || !self.params.c.is_finite() || !finite(&self.params.lambda) {
            return invalid("params must be finite".into());
        }
        let bad = self.numerics.non_positive_fields();
        if !bad.is_empty() {
            return invalid(format!("numerics must be positive: {}", bad.join(", ")));
        }
        let s = &self.scan;
        if !(s.tau_max > 0.0) || s.tau_grid == 0 {
            return invalid("scan.tau_max and scan.tau_grid must be positive".into());
        }
        let m = &self.simulation;
        if !(m.dt > 0.0) || !(m.t_max >= 0.0) || m.output_every == 0 || m.multiplier == 0 || m.bandwidth == 0 {
            return invalid("simulation.dt, output_every, multiplier and bandwidth must be positive".into());
        }
        if !(m.perturbation >= 0.0) {
            return invalid("simulation.perturbation must be non-negative".into());
        }
        Ok(())
    }

    pub fn model(&self) -> Model {
        let f = Poly::new(self.model.f.clone());
        let kappa = Poly::new(self.model.kappa.clone());
        match self.model.family {
            Family::Kdv => Model::kdv(f, kappa),
            Family::Ekl => Model::ekl(f, kappa),
        }
    }

    pub fn params(&self) -> WaveParams {
        WaveParams::new(self.params.mu, self.params.lambda.clone(), self.params.c)
    }

    /// Side-band Floquet exponents in (0, 2π).
    pub fn sideband_nus(&self) -> Vec<f64> {
        let k = self.scan.nu_steps;
        (1..=k)
            .map(|j| 2.0 * std::f64::consts::PI * j as f64 / (k + 1) as f64)
            .collect()
    }
}
