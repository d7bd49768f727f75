//! CSV tables: comma-separated, LF line endings, 17 significant digits.

use crate::config::Config;
use num_complex::Complex64;
use pwstab_core::directsim::{self, GrowthOptions, GrowthResult, SimOptions};
use pwstab_core::profile::{self, Orbit};
use pwstab_core::{spectral, Result};
use std::f64::consts::PI;
use std::io::Write;

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn write<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("CSV is UTF-8")
    }
}

/// Scientific notation with 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn orbit_of(config: &Config) -> Result<Orbit> {
    profile::compute_orbit(&config.model(), &config.params(), None, config.numerics.quad_nodes)
}

/// `x,v,vx[,u]` on the configured profile grid.
pub fn profile_table(config: &Config) -> Result<Table> {
    let orbit = orbit_of(config)?;
    let p = profile::compute_profile(&orbit, config.numerics.profile_points)?;
    let mut t = match &p.ubar {
        Some(_) => Table::new(&["x", "v", "vx", "u"]),
        None => Table::new(&["x", "v", "vx"]),
    };
    for j in 0..p.n {
        let mut row = vec![num(p.x[j]), num(p.vbar[j]), num(p.vbar_x[j])];
        if let Some(u) = &p.ubar {
            row.push(num(u[j]));
        }
        t.rows.push(row);
    }
    Ok(t)
}

/// D(τ, ν) on real τ ∈ [0, τ_max] times ν = 2πk/nu_steps, k = 0..nu_steps.
pub fn evans_table(config: &Config) -> Result<Table> {
    let orbit = orbit_of(config)?;
    let scan = &config.scan;
    let n_tau = scan.tau_grid.max(2);
    let n_nu = scan.nu_steps.max(1);
    let mut t = Table::new(&["tau_re", "tau_im", "nu", "D_re", "D_im"]);
    for k in 0..n_nu {
        let nu = 2.0 * PI * k as f64 / n_nu as f64;
        for j in 0..n_tau {
            let tau = Complex64::new(scan.tau_max * j as f64 / (n_tau - 1) as f64, 0.0);
            let s = spectral::evans_eval(&orbit, tau, nu, config.numerics.ode_rel_tol)?;
            t.rows.push(vec![num(tau.re), num(tau.im), num(nu), num(s.d.re), num(s.d.im)]);
        }
    }
    Ok(t)
}

/// Side-band unstable counts in the right half-disc of radius τ_max.
pub fn floquet_table(config: &Config) -> Result<Table> {
    let orbit = orbit_of(config)?;
    let scan = &config.scan;
    let counts = spectral::sideband_scan(
        &orbit,
        &config.sideband_nus(),
        scan.tau_max,
        config.numerics.contour_points,
        config.numerics.ode_rel_tol,
    )?;
    let mut t = Table::new(&["nu", "unstable_count", "contour_radius"]);
    for c in counts {
        t.rows.push(vec![num(c.nu), c.count.to_string(), num(scan.tau_max)]);
    }
    Ok(t)
}

fn growth_options(config: &Config) -> GrowthOptions {
    let s = &config.simulation;
    GrowthOptions {
        perturbation: s.perturbation,
        multiplier: s.multiplier,
        modes: config.numerics.sim_modes,
        t_max: s.t_max,
        dt: s.dt,
        seed: s.seed,
        bandwidth: s.bandwidth,
    }
}

/// `t,dist_to_orbit,dH,dQ,dM` from a run started at the (perturbed) profile.
pub fn simulate_table(config: &Config) -> Result<Table> {
    let orbit = orbit_of(config)?;
    let s = &config.simulation;
    let opts = growth_options(config);
    let (base, initial) = if s.perturbation > 0.0 {
        directsim::perturbed_profile(&orbit, &opts)?
    } else {
        let v = directsim::tiled_profile(&orbit, opts.modes, opts.multiplier)?;
        (v.clone(), v)
    };
    let length = orbit.xi * s.multiplier as f64;
    let run = directsim::simulate(
        &orbit.model,
        &initial,
        length,
        &SimOptions { dt: s.dt, t_max: s.t_max, output_every: s.output_every },
        Some(&base),
    )?;
    let mut t = Table::new(&["t", "dist_to_orbit", "dH", "dQ", "dM"]);
    for p in run.samples {
        t.rows.push(vec![num(p.t), opt_num(p.dist_to_orbit), num(p.d_energy), num(p.d_impulse), num(p.d_mass)]);
    }
    Ok(t)
}

/// Exponential growth fit for the configured perturbation.
pub fn growth_fit(config: &Config) -> Result<GrowthResult> {
    directsim::growth_rate_experiment(&orbit_of(config)?, &growth_options(config))
}
