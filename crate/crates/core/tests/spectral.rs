mod common;

use common::{cubic_ekl, cubic_kdv, nonic_kdv, point_in_well};
use num_complex::Complex64;
use pwstab_core::profile::{compute_orbit, Orbit};
use pwstab_core::spectral::*;
use pwstab_core::{Model, Poly, WaveParams};

fn orbits() -> Vec<Orbit> {
    let mut out = Vec::new();
    for frac in [0.1, 0.5, 0.9] {
        let m = cubic_kdv();
        out.push(compute_orbit(&m, &point_in_well(&m, &[0.02], -1.0, frac), None, 200).unwrap());
        let m = cubic_ekl();
        out.push(compute_orbit(&m, &point_in_well(&m, &[0.0, 0.1], 1.0, frac), None, 200).unwrap());
    }
    let (m, p) = nonic_kdv();
    out.push(compute_orbit(&m, &p, None, 200).unwrap());
    let m = Model::kdv(Poly::monomial(3, 1.0), Poly::new(vec![1.0, 0.3]));
    out.push(compute_orbit(&m, &point_in_well(&m, &[0.0], -1.0, 0.6), None, 200).unwrap());
    out
}

#[test]
fn evans_function_vanishes_at_origin() {
    for orbit in orbits() {
        let s = evans_eval(&orbit, Complex64::new(0.0, 0.0), 0.0, 1e-10).unwrap();
        assert!(s.d.norm() < 1e-8 * s.scale, "{} vs scale {}", s.d, s.scale);
    }
}

#[test]
fn hessian_operator_has_negative_direction() {
    for orbit in orbits() {
        let hill = hill_assemble_orbit(&orbit, 0.0, 64).unwrap();
        let counts = inertia(&hill, hill.zero_tol(1e-8)).unwrap();
        assert!(counts.negative >= 1);
        let sl = sturm_liouville_check(&orbit, 64, 1e-8).unwrap();
        assert!(sl.kernel_residual < 1e-6);
        assert!((1..=2).contains(&sl.negative));
    }
}

#[test]
fn harmonic_origin_has_multiplicity_three() {
    let model = Model::kdv(Poly::zero(), Poly::constant(1.0));
    let orbit = compute_orbit(&model, &WaveParams::new(0.5, vec![0.0], -1.0), None, 200).unwrap();
    let ratios: Vec<f64> = [0.2, 0.1, 0.05, 0.025]
        .iter()
        .map(|&t| evans_eval(&orbit, Complex64::new(t, 0.0), 0.0, 1e-12).unwrap().d.norm() / t.powi(3))
        .collect();
    for r in &ratios {
        assert!(*r > 0.5 * ratios[0] && *r < 2.0 * ratios[0], "{ratios:?}");
    }
}

#[test]
fn real_roots_are_generator_eigenvalues() {
    let (m, p) = nonic_kdv();
    let orbit = compute_orbit(&m, &p, None, 200).unwrap();
    let roots = real_coperiodic_scan(&orbit, 10.0, 200, 1e-10).unwrap();
    assert!(!roots.is_empty());
    let hill = hill_assemble_orbit(&orbit, 0.0, 64).unwrap();
    for r in roots {
        assert!(generator_min_singular_value(&hill, r.tau).unwrap() < 1e-4);
    }
}

#[test]
fn cnoidal_waves_have_no_real_unstable_roots() {
    let m = cubic_kdv();
    for frac in [0.3, 0.9] {
        let orbit = compute_orbit(&m, &point_in_well(&m, &[0.0], -1.0, frac), None, 200).unwrap();
        assert!(real_coperiodic_scan(&orbit, 5.0, 100, 1e-10).unwrap().is_empty());
        let counts = sideband_scan(&orbit, &[0.5, 2.0], 2.0, 64, 1e-10).unwrap();
        assert!(counts.iter().all(|c| c.count == 0), "{counts:?}");
    }
}
