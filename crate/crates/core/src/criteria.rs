//! Stability verdicts from Σ = Hess Θ, the constraints matrix C and the
//! negative count of 𝒜.

use crate::action::WhithamSystem;
use crate::error::{Error, Result};
use crate::linalg::norm_inf;
use crate::poly::Poly;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Relative distance under which computed characteristic speeds are merged.
const SPEED_CLUSTER_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoperiodicVerdict {
    UnstableByDet,
    InconclusiveByDet,
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum JohnsonVerdict {
    OrbitallyStable,
    Inconclusive,
    Degenerate,
    NotApplicable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModulationalVerdict {
    Hyperbolic,
    WeaklyHyperbolic,
    NotHyperbolic,
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Signatures {
    /// Negative eigenvalues of −C.
    #[serde(rename = "neg_C")]
    pub neg_c: usize,
    #[serde(rename = "neg_A")]
    pub neg_a: Option<usize>,
    pub neg_constrained: Option<usize>,
    pub orbital_by_signature: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Modulational {
    pub verdict: ModulationalVerdict,
    pub speeds: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub coperiodic: CoperiodicVerdict,
    pub johnson: JohnsonVerdict,
    pub modulational: Modulational,
    pub signatures: Option<Signatures>,
    pub cross_identity_residual: Option<f64>,
    pub sign_tol: f64,
}

fn check_square(sigma: &DMatrix<f64>, n: usize) -> Result<()> {
    if sigma.nrows() != n || sigma.ncols() != n {
        return Err(Error::BadDimension(format!(
            "expected {n}x{n}, got {}x{}",
            sigma.nrows(),
            sigma.ncols()
        )));
    }
    Ok(())
}

/// Sign of det Σ: N = 1 unstable when positive, N = 2 unstable when negative.
pub fn coperiodic_test(sigma: &DMatrix<f64>, n: usize, sign_tol: f64) -> Result<CoperiodicVerdict> {
    if !(1..=2).contains(&n) {
        return Err(Error::BadDimension(format!("N = {n} is not 1 or 2")));
    }
    check_square(sigma, n + 2)?;
    let det = sigma.determinant();
    let band = sign_tol * norm_inf(sigma).powi(n as i32 + 2);
    if det.abs() <= band {
        return Ok(CoperiodicVerdict::Degenerate);
    }
    let unstable_sign = if n == 1 { 1.0 } else { -1.0 };
    Ok(if det * unstable_sign > 0.0 {
        CoperiodicVerdict::UnstableByDet
    } else {
        CoperiodicVerdict::InconclusiveByDet
    })
}

/// Θ_μμ > 0 and det Σ < 0 (N = 1 only).
pub fn johnson_test(sigma: &DMatrix<f64>, sign_tol: f64) -> Result<JohnsonVerdict> {
    if sigma.nrows() == 4 {
        return Err(Error::NotApplicable("the Johnson criterion is stated for N = 1".into()));
    }
    check_square(sigma, 3)?;
    let norm = norm_inf(sigma);
    let theta_mumu = sigma[(0, 0)];
    let det = sigma.determinant();
    if theta_mumu.abs() <= sign_tol * norm || det.abs() <= sign_tol * norm.powi(3) {
        return Ok(JohnsonVerdict::Degenerate);
    }
    Ok(if theta_mumu > 0.0 && det < 0.0 {
        JohnsonVerdict::OrbitallyStable
    } else {
        JohnsonVerdict::Inconclusive
    })
}

/// det M(s) for a matrix of polynomial entries, by cofactor expansion.
fn poly_det(m: &[Vec<Poly>]) -> Poly {
    let n = m.len();
    if n == 1 {
        return m[0][0].clone();
    }
    let mut acc = Poly::zero();
    for (j, entry) in m[0].iter().enumerate() {
        if entry.is_zero() {
            continue;
        }
        let minor: Vec<Vec<Poly>> = m[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, p)| p.clone()).collect())
            .collect();
        let term = entry * &poly_det(&minor);
        acc = if j % 2 == 0 { &acc + &term } else { &acc - &term };
    }
    acc
}

/// Characteristic polynomial det((c − s)Σ + Θ_μS) in s.
pub fn characteristic_polynomial(w: &WhithamSystem) -> Poly {
    let n = w.sigma.nrows();
    let m: Vec<Vec<Poly>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| Poly::linear(w.c * w.sigma[(i, j)] + w.theta_mu * w.s[(i, j)], -w.sigma[(i, j)]))
                .collect()
        })
        .collect();
    poly_det(&m)
}

/// Groups nearly equal roots and replaces each group by its mean.
fn cluster_roots(mut roots: Vec<Complex64>) -> Vec<(Complex64, usize)> {
    roots.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
    let scale = roots.iter().fold(1.0_f64, |m, z| m.max(z.norm()));
    let mut groups: Vec<Vec<Complex64>> = Vec::new();
    for z in roots {
        match groups.iter_mut().find(|g| (g[0] - z).norm() <= SPEED_CLUSTER_TOL * scale) {
            Some(g) => g.push(z),
            None => groups.push(vec![z]),
        }
    }
    groups
        .into_iter()
        .map(|g| {
            let mean = g.iter().sum::<Complex64>() / g.len() as f64;
            (mean, g.len())
        })
        .collect()
}

/// Characteristic speeds of the Whitham system and its hyperbolicity verdict.
pub fn modulational_speeds(w: &WhithamSystem, sign_tol: f64) -> Result<Modulational> {
    let n = w.sigma.nrows();
    check_square(&w.s, n)?;
    let norm = norm_inf(&w.sigma);
    if w.sigma.determinant().abs() <= sign_tol * norm.powi(n as i32) {
        return Ok(Modulational { verdict: ModulationalVerdict::Degenerate, speeds: Vec::new() });
    }
    let poly = characteristic_polynomial(w);
    let clusters = cluster_roots(poly.complex_roots());
    let smax = clusters.iter().fold(0.0_f64, |m, (z, _)| m.max(z.norm()));
    let mut speeds = Vec::with_capacity(n);
    let mut any_nonreal = false;
    let mut defective = false;
    let mut repeated = false;
    for &(z, mult) in &clusters {
        let real = z.im.abs() <= sign_tol * smax.max(f64::MIN_POSITIVE);
        let z = if real { Complex64::new(z.re, 0.0) } else { z };
        if !real {
            any_nonreal = true;
        } else if mult > 1 {
            repeated = true;
            let pencil = (&w.sigma * (w.c - z.re)) + (&w.s * w.theta_mu);
            let sv = pencil.singular_values();
            let top = sv.max();
            let kernel = sv.iter().filter(|&&s| s <= 1e-6 * top).count();
            if kernel < mult {
                defective = true;
            }
        }
        speeds.extend(std::iter::repeat(z).take(mult));
    }
    let verdict = if any_nonreal || defective {
        ModulationalVerdict::NotHyperbolic
    } else if repeated {
        ModulationalVerdict::WeaklyHyperbolic
    } else {
        ModulationalVerdict::Hyperbolic
    };
    Ok(Modulational { verdict, speeds })
}

/// ¬(−C), and with ¬(𝒜) supplied, ¬(𝒜|T𝒞) = ¬(𝒜) − ¬(−C).
pub fn signature_report(c: &DMatrix<f64>, neg_a: Option<usize>, sign_tol: f64) -> Result<Signatures> {
    let eig = c.clone().symmetric_eigenvalues();
    let tol = sign_tol * norm_inf(c).max(f64::MIN_POSITIVE);
    if eig.iter().any(|e| e.abs() <= tol) {
        return Err(Error::SingularC);
    }
    let neg_c = eig.iter().filter(|&&e| e > 0.0).count();
    let (neg_constrained, orbital) = match neg_a {
        Some(a) => {
            if a < neg_c {
                return Err(Error::SignatureContradiction { neg_a: a, neg_c });
            }
            (Some(a - neg_c), Some(a == neg_c))
        }
        None => (None, None),
    };
    Ok(Signatures { neg_c, neg_a, neg_constrained, orbital_by_signature: orbital })
}

/// |Θ_μμ det C − det Σ| / max(|det Σ|, ε) for N = 1.
pub fn cross_identity_check(sigma: &DMatrix<f64>, c: &DMatrix<f64>) -> Result<f64> {
    if sigma.nrows() != 3 {
        return Err(Error::NotApplicable("the identity is established for N = 1".into()));
    }
    check_square(c, 2)?;
    let det = sigma.determinant();
    Ok((sigma[(0, 0)] * c.determinant() - det).abs() / det.abs().max(f64::MIN_POSITIVE))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::{constraints_from_sigma, structure_s};
    use crate::models::Model;
    use crate::poly::Poly as P;
    use proptest::prelude::*;

    fn kdv_s() -> DMatrix<f64> {
        structure_s(&Model::kdv(P::zero(), P::constant(1.0)).structure())
    }

    fn sys(sigma: DMatrix<f64>, c: f64, theta_mu: f64) -> WhithamSystem {
        WhithamSystem { s: kdv_s(), sigma, c, theta_mu }
    }

    #[test]
    fn coperiodic_signs() {
        let d = |x: f64, n: usize| DMatrix::from_diagonal(&nalgebra::DVector::from_fn(n, |i, _| if i == 0 { x } else { 1.0 }));
        assert_eq!(coperiodic_test(&d(2.0, 3), 1, 1e-8).unwrap(), CoperiodicVerdict::UnstableByDet);
        assert_eq!(coperiodic_test(&d(-3.0, 4), 2, 1e-8).unwrap(), CoperiodicVerdict::UnstableByDet);
        assert_eq!(coperiodic_test(&d(-1.0, 3), 1, 1e-8).unwrap(), CoperiodicVerdict::InconclusiveByDet);
        assert_eq!(coperiodic_test(&d(1e-12, 3), 1, 1e-8).unwrap(), CoperiodicVerdict::Degenerate);
        assert!(matches!(coperiodic_test(&d(1.0, 3), 2, 1e-8), Err(Error::BadDimension(_))));
    }

    fn johnson_sigma(theta: f64, det: f64) -> DMatrix<f64> {
        let b = (-det).sqrt();
        DMatrix::from_row_slice(3, 3, &[theta, 0.0, b, 0.0, 1.0, 0.0, b, 0.0, 0.0])
    }

    #[test]
    fn johnson_cases() {
        assert_eq!(johnson_test(&johnson_sigma(0.3, -0.2), 1e-8).unwrap(), JohnsonVerdict::OrbitallyStable);
        assert_eq!(johnson_test(&johnson_sigma(-0.1, -0.2), 1e-8).unwrap(), JohnsonVerdict::Inconclusive);
        assert_eq!(johnson_test(&johnson_sigma(1e-12, -0.2), 1e-8).unwrap(), JohnsonVerdict::Degenerate);
        assert!(matches!(johnson_test(&DMatrix::identity(4, 4), 1e-8), Err(Error::NotApplicable(_))));
    }

    #[test]
    fn identity_sigma_is_weakly_hyperbolic() {
        let m = modulational_speeds(&sys(DMatrix::identity(3, 3), 0.0, 1.0), 1e-8).unwrap();
        let mut re: Vec<f64> = m.speeds.iter().map(|z| z.re).collect();
        re.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((re[0] + 1.0).abs() < 1e-12 && (re[1] - 1.0).abs() < 1e-12 && (re[2] - 1.0).abs() < 1e-12);
        assert!(m.speeds.iter().all(|z| z.im == 0.0));
        assert_eq!(m.verdict, ModulationalVerdict::WeaklyHyperbolic);
    }

    #[test]
    fn indefinite_sigma_is_not_hyperbolic() {
        let sigma = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 1.0, -1.0]));
        let m = modulational_speeds(&sys(sigma, 0.0, 1.0), 1e-8).unwrap();
        assert_eq!(m.verdict, ModulationalVerdict::NotHyperbolic);
        let mut found = [false; 3];
        for z in &m.speeds {
            for (k, t) in [Complex64::new(1.0, 0.0), Complex64::i(), -Complex64::i()].iter().enumerate() {
                if (z - t).norm() < 1e-10 {
                    found[k] = true;
                }
            }
        }
        assert_eq!(found, [true; 3]);
    }

    #[test]
    fn singular_sigma_is_degenerate() {
        let sigma = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 0.0, 1.0]));
        let m = modulational_speeds(&sys(sigma, 0.0, 1.0), 1e-8).unwrap();
        assert_eq!(m.verdict, ModulationalVerdict::Degenerate);
    }

    /// Speeds from the pencil agree with s = c + Θ_μ/η, η ∈ spec(S⁻¹Σ), where
    /// S⁻¹Σ is written out entrywise for N = 1.
    #[test]
    fn pencil_matches_explicit_n1_matrix() {
        #[rustfmt::skip]
        let sigma = DMatrix::from_row_slice(3, 3, &[
            0.7, 0.2, -0.4,
            0.2, 1.3, 0.5,
            -0.4, 0.5, -0.9,
        ]);
        let (c, theta_mu) = (-0.6, 2.1);
        let t = |i: usize, j: usize| sigma[(i, j)];
        #[rustfmt::skip]
        let explicit = DMatrix::from_row_slice(3, 3, &[
            -t(2, 0), -t(2, 1), -t(2, 2),
            t(1, 0), t(1, 1), t(1, 2),
            -t(0, 0), -t(0, 1), -t(0, 2),
        ]);
        assert!((&explicit - kdv_s() * &sigma).abs().max() < 1e-15);
        let eta = explicit.complex_eigenvalues();
        let m = modulational_speeds(&sys(sigma, c, theta_mu), 1e-8).unwrap();
        for e in eta.iter() {
            let s = Complex64::new(c, 0.0) + theta_mu / e;
            assert!(m.speeds.iter().any(|z| (z - s).norm() < 1e-9 * (1.0 + s.norm())), "{s}");
        }
    }

    fn cubic_discriminant(m: &DMatrix<f64>) -> f64 {
        // characteristic polynomial x³ + a x² + b x + c
        let a = -m.trace();
        let b = 0.5 * (m.trace().powi(2) - (m * m).trace());
        let c = -m.determinant();
        18.0 * a * b * c - 4.0 * a.powi(3) * c + a * a * b * b - 4.0 * b.powi(3) - 27.0 * c * c
    }

    #[test]
    fn signatures() {
        let s = signature_report(&DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-1.0, 1.0])), None, 1e-8).unwrap();
        assert_eq!(s.neg_c, 1);
        let s = signature_report(&DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-1.0, -2.0])), Some(2), 1e-8).unwrap();
        assert_eq!((s.neg_c, s.neg_constrained, s.orbital_by_signature), (0, Some(2), Some(false)));
        assert!(matches!(
            signature_report(&DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 2.0])), Some(1), 1e-8),
            Err(Error::SignatureContradiction { neg_a: 1, neg_c: 2 })
        ));
        assert!(matches!(
            signature_report(&DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.0, 2.0])), None, 1e-8),
            Err(Error::SingularC)
        ));
    }

    #[test]
    fn cross_identity_examples() {
        let s = DMatrix::from_row_slice(3, 3, &[2.0, 0.0, 1.0, 0.0, 3.0, 0.0, 1.0, 0.0, 4.0]);
        let c = constraints_from_sigma(&s, 1e-8).unwrap().c;
        assert!(cross_identity_check(&s, &c).unwrap() < 1e-15);
        let s = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![2.0, -3.0, 5.0]));
        let c = constraints_from_sigma(&s, 1e-8).unwrap().c;
        assert_eq!(cross_identity_check(&s, &c).unwrap(), 0.0);
        assert!(matches!(cross_identity_check(&DMatrix::identity(4, 4), &c), Err(Error::NotApplicable(_))));
    }

    fn sym3() -> impl Strategy<Value = DMatrix<f64>> {
        proptest::collection::vec(-2.0..2.0f64, 6).prop_map(|v| {
            DMatrix::from_row_slice(3, 3, &[v[0], v[1], v[2], v[1], v[3], v[4], v[2], v[4], v[5]])
        })
    }

    proptest! {
        #[test]
        fn verdicts_invariant_under_positive_scaling(sigma in sym3(), k in 0.01..100.0f64) {
            let scaled = &sigma * k;
            prop_assert_eq!(coperiodic_test(&sigma, 1, 1e-8).unwrap(), coperiodic_test(&scaled, 1, 1e-8).unwrap());
            prop_assert_eq!(johnson_test(&sigma, 1e-8).unwrap(), johnson_test(&scaled, 1e-8).unwrap());
            if let (Ok(c1), Ok(c2)) = (constraints_from_sigma(&sigma, 1e-8), constraints_from_sigma(&scaled, 1e-8)) {
                if let (Ok(a), Ok(b)) = (signature_report(&c1.c, None, 1e-8), signature_report(&c2.c, None, 1e-8)) {
                    prop_assert_eq!(a.neg_c, b.neg_c);
                }
            }
        }

        #[test]
        fn speeds_shift_with_galilean_boost(sigma in sym3(), c in -2.0..2.0f64, gamma in -2.0..2.0f64, theta_mu in 0.5..5.0f64) {
            prop_assume!(sigma.determinant().abs() > 1e-2);
            let a = modulational_speeds(&sys(sigma.clone(), c, theta_mu), 1e-8).unwrap();
            let b = modulational_speeds(&sys(sigma, c + gamma, theta_mu), 1e-8).unwrap();
            for z in &a.speeds {
                let shifted = z + gamma;
                prop_assert!(b.speeds.iter().any(|w| (w - shifted).norm() < 1e-8 * (1.0 + shifted.norm())));
            }
        }

        #[test]
        fn nonreal_speeds_iff_negative_discriminant(sigma in sym3(), c in -2.0..2.0f64, theta_mu in 0.5..5.0f64) {
            prop_assume!(sigma.determinant().abs() > 1e-2);
            let m = kdv_s() * &sigma;
            let disc = cubic_discriminant(&m);
            prop_assume!(disc.abs() > 1e-6);
            let v = modulational_speeds(&sys(sigma, c, theta_mu), 1e-8).unwrap();
            prop_assert_eq!(v.verdict == ModulationalVerdict::NotHyperbolic, disc < 0.0);
        }

        #[test]
        fn constraints_identity_n1(sigma in sym3()) {
            if let Ok(c) = constraints_from_sigma(&sigma, 1e-8) {
                let r = cross_identity_check(&sigma, &c.c).unwrap();
                let det = sigma.determinant();
                prop_assert!(r * det.abs().max(f64::MIN_POSITIVE) <= 1e-10 * (1.0 + norm_inf(&sigma).powi(3) / sigma[(0,0)].abs()));
            }
        }
    }
}
