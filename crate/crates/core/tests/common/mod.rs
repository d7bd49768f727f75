#![allow(dead_code)]

use pwstab_core::models::reduced_potential;
use pwstab_core::profile::select_well;
use pwstab_core::{Model, Poly, WaveParams};

/// f(v) = v³, κ = 1.
pub fn cubic_kdv() -> Model {
    Model::kdv(Poly::monomial(3, 1.0), Poly::constant(1.0))
}

/// F(v) = v³, κ = 1.
pub fn cubic_ekl() -> Model {
    Model::ekl(Poly::monomial(3, 1.0), Poly::constant(1.0))
}

/// Parameters with μ a fraction `frac` of the way from the well bottom to
/// the saddle level.
pub fn point_in_well(model: &Model, lambda: &[f64], c: f64, frac: f64) -> WaveParams {
    let pot = reduced_potential(model, &WaveParams::new(0.0, lambda.to_vec(), c)).unwrap();
    let well = select_well(&pot.w, None).expect("no well");
    let mu = well.bottom_value + frac * (well.saddle_level - well.bottom_value);
    WaveParams::new(mu, lambda.to_vec(), c)
}

/// A co-periodically unstable KdV wave: f(v) = v⁹, λ = −0.4, c = −1.
pub fn nonic_kdv() -> (Model, WaveParams) {
    (
        Model::kdv(Poly::monomial(9, 1.0), Poly::constant(1.0)),
        WaveParams::new(0.45, vec![-0.4], -1.0),
    )
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}
