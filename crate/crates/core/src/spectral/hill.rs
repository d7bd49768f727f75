use crate::error::{Error, Result};
use crate::linalg::{fourier_diff_matrix, norm_inf, shifted_inertia, Inertia};
use crate::models::Family;
use crate::profile::{sample_profile_at, Orbit, Profile};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub const MIN_HILL_MODES: usize = 16;

/// Collocation of 𝒜^ν = e^{−iνx/Ξ} 𝒜 e^{iνx/Ξ} on 2M+1 points per component,
/// ordered [v block; u block] for EKL.
#[derive(Debug, Clone)]
pub struct HillOperator {
    pub modes: usize,
    pub nu: f64,
    pub xi: f64,
    pub family: Family,
    pub c: f64,
    pub points: Vec<f64>,
    pub vbar_x: Vec<f64>,
    pub matrix: DMatrix<Complex64>,
}

impl HillOperator {
    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    /// Real part of the matrix (the whole matrix when ν = 0).
    pub fn real_matrix(&self) -> DMatrix<f64> {
        self.matrix.map(|z| z.re)
    }

    /// Largest |A_ij − conj A_ji|.
    pub fn hermitian_defect(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Zero band used for inertia counts: `sign_tol`·‖A‖∞.
    pub fn zero_tol(&self, sign_tol: f64) -> f64 {
        sign_tol * norm_inf(&self.real_matrix())
    }

    /// Samples of the kernel direction Ū_x.
    pub fn translation_mode(&self) -> DVector<f64> {
        match self.family {
            Family::Kdv => DVector::from_column_slice(&self.vbar_x),
            Family::Ekl => DVector::from_iterator(
                2 * self.vbar_x.len(),
                self.vbar_x.iter().copied().chain(self.vbar_x.iter().map(|vx| -self.c * vx)),
            ),
        }
    }
}

/// Pointwise coefficients of the second variation along the profile.
struct Coefficients {
    kappa: Vec<f64>,
    /// q(x) = f″ − ½κ″v̄_x² − κ′v̄_xx (+ c for KdV), i.e. the potential of 𝒜 (v block).
    q: Vec<f64>,
    /// Potential of the reduced Sturm–Liouville operator a.
    q_reduced: Vec<f64>,
    vbar_x: Vec<f64>,
}

fn coefficients(orbit: &Orbit, points: &[f64]) -> Result<Coefficients> {
    let (v, vx) = sample_profile_at(orbit, points)?;
    let pot = &orbit.potential;
    let d2f = orbit.model.energy.deriv().deriv();
    let c = orbit.params.c;
    let mut kappa = Vec::with_capacity(v.len());
    let mut q = Vec::with_capacity(v.len());
    let mut q_reduced = Vec::with_capacity(v.len());
    for (&v, &vx) in v.iter().zip(&vx) {
        let vxx = pot.second_derivative(v, vx);
        let k1 = pot.dkappa.eval(v);
        let k2 = pot.d2kappa.eval(v);
        // ½κ″v_x² − (κ′v_x)_x with (κ′v_x)_x = κ″v_x² + κ′v_xx
        let grad_terms = -0.5 * k2 * vx * vx - k1 * vxx;
        kappa.push(pot.kappa(v));
        q.push(
            d2f.eval(v)
                + grad_terms
                + match orbit.model.family {
                    Family::Kdv => c,
                    Family::Ekl => 0.0,
                },
        );
        q_reduced.push(-pot.d2w(v) + grad_terms);
    }
    Ok(Coefficients { kappa, q, q_reduced, vbar_x: vx })
}

fn collocation_points(xi: f64, modes: usize) -> Vec<f64> {
    let n = 2 * modes + 1;
    (0..n).map(|j| xi * j as f64 / n as f64).collect()
}

/// D_ν^H K D_ν + diag(q) with D_ν = D + i(ν/Ξ)I.
fn sturm_liouville_block(d: &DMatrix<f64>, kappa: &[f64], q: &[f64], theta: f64) -> DMatrix<Complex64> {
    let n = d.nrows();
    let dnu = DMatrix::from_fn(n, n, |i, j| {
        Complex64::new(d[(i, j)], if i == j { theta } else { 0.0 })
    });
    let mut kd = dnu.clone();
    for i in 0..n {
        for j in 0..n {
            kd[(i, j)] *= kappa[i];
        }
    }
    let mut m = dnu.adjoint() * kd;
    for i in 0..n {
        m[(i, i)] += q[i];
    }
    m
}

pub fn hill_assemble(profile: &Profile, nu: f64, modes: usize) -> Result<HillOperator> {
    hill_assemble_orbit(&profile.orbit, nu, modes)
}

pub fn hill_assemble_orbit(orbit: &Orbit, nu: f64, modes: usize) -> Result<HillOperator> {
    if modes < MIN_HILL_MODES {
        return Err(Error::GridMismatch(format!("{modes} Hill modes < {MIN_HILL_MODES}")));
    }
    let xi = orbit.xi;
    let points = collocation_points(xi, modes);
    let n = points.len();
    let coef = coefficients(orbit, &points)?;
    let d = fourier_diff_matrix(n, xi)?;
    let block = sturm_liouville_block(&d, &coef.kappa, &coef.q, nu / xi);
    let c = orbit.params.c;
    let matrix = match orbit.model.family {
        Family::Kdv => block,
        Family::Ekl => {
            let mut m = DMatrix::from_element(2 * n, 2 * n, Complex64::new(0.0, 0.0));
            m.view_mut((0, 0), (n, n)).copy_from(&block);
            for i in 0..n {
                m[(i, n + i)] = Complex64::new(c, 0.0);
                m[(n + i, i)] = Complex64::new(c, 0.0);
                m[(n + i, n + i)] = Complex64::new(1.0, 0.0);
            }
            m
        }
    };
    Ok(HillOperator {
        modes,
        nu,
        xi,
        family: orbit.model.family,
        c,
        points,
        vbar_x: coef.vbar_x,
        matrix,
    })
}

/// Negative, near-zero and positive eigenvalue counts of the co-periodic 𝒜.
pub fn inertia(hill: &HillOperator, zero_tol: f64) -> Result<Inertia> {
    if hill.nu != 0.0 {
        return Err(Error::InvalidInput("inertia requires the co-periodic operator (nu = 0)".into()));
    }
    shifted_inertia(&hill.real_matrix(), zero_tol)
}

/// ‖𝒜Ū_x‖₂ / ‖Ū_x‖₂ on the collocation grid.
pub fn kernel_residual(hill: &HillOperator) -> f64 {
    let u = hill.translation_mode();
    let au = hill.real_matrix() * &u;
    au.norm() / u.norm()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SturmLiouville {
    pub negative: usize,
    pub zero: usize,
    /// ‖a v̄_x‖₂ / ‖v̄_x‖₂.
    pub kernel_residual: f64,
}

/// Negative count and kernel residual of a = −∂κ(v̄)∂ + q, the second
/// variation of the reduced Lagrangian ℓ = ½κv_x² − W(v).
pub fn sturm_liouville_check(orbit: &Orbit, modes: usize, sign_tol: f64) -> Result<SturmLiouville> {
    if modes < MIN_HILL_MODES {
        return Err(Error::GridMismatch(format!("{modes} Hill modes < {MIN_HILL_MODES}")));
    }
    if orbit.v2 - orbit.v1 <= 1e-12 * orbit.v1.abs().max(orbit.v2.abs()).max(1.0) {
        return Err(Error::ConstantProfile);
    }
    let xi = orbit.xi;
    let points = collocation_points(xi, modes);
    let coef = coefficients(orbit, &points)?;
    let d = fourier_diff_matrix(points.len(), xi)?;
    let a = sturm_liouville_block(&d, &coef.kappa, &coef.q_reduced, 0.0).map(|z| z.re);
    let vx = DVector::from_column_slice(&coef.vbar_x);
    let kernel_residual = (&a * &vx).norm() / vx.norm();
    let counts = shifted_inertia(&a, sign_tol * norm_inf(&a))?;
    if !(1..=2).contains(&counts.negative) {
        log::warn!("reduced operator has {} negative eigenvalues", counts.negative);
    }
    Ok(SturmLiouville {
        negative: counts.negative,
        zero: counts.zero,
        kernel_residual,
    })
}

/// Smallest singular value of the collocated generator B∂_x𝒜 − τ at ν = 0,
/// relative to the generator's norm.
pub fn generator_min_singular_value(hill: &HillOperator, tau: f64) -> Result<f64> {
    if hill.nu != 0.0 {
        return Err(Error::InvalidInput("generator check requires nu = 0".into()));
    }
    let n = hill.points.len();
    let d = fourier_diff_matrix(n, hill.xi)?;
    let a = hill.real_matrix();
    let mut l = match hill.family {
        Family::Kdv => &d * &a,
        Family::Ekl => {
            let mut bd = DMatrix::zeros(2 * n, 2 * n);
            bd.view_mut((0, n), (n, n)).copy_from(&d);
            bd.view_mut((n, 0), (n, n)).copy_from(&d);
            bd * a
        }
    };
    let scale = norm_inf(&l);
    for i in 0..l.nrows() {
        l[(i, i)] -= tau;
    }
    let sv = l.singular_values();
    Ok(sv.iter().fold(f64::INFINITY, |m, &s| m.min(s)) / scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{Model, WaveParams};
    use crate::poly::Poly;
    use crate::profile::compute_orbit;

    fn orbit(f: Poly, mu: f64, c: f64) -> Orbit {
        compute_orbit(&Model::kdv(f, Poly::constant(1.0)), &WaveParams::new(mu, [0.0], c), None, 200).unwrap()
    }

    #[test]
    fn harmonic_symbol() {
        let o = orbit(Poly::zero(), 0.5, -1.0);
        let h = hill_assemble_orbit(&o, 0.0, 16).unwrap();
        let mut eig: Vec<f64> = h.real_matrix().symmetric_eigenvalues().iter().copied().collect();
        eig.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut expect: Vec<f64> = (-16i32..=16).map(|n| (n * n) as f64 - 1.0).collect();
        expect.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (e, x) in eig.iter().zip(&expect) {
            assert!((e - x).abs() < 1e-9, "{e} vs {x}");
        }
        let tol = h.zero_tol(1e-8);
        let i = inertia(&h, tol).unwrap();
        assert_eq!((i.negative, i.zero), (1, 2));
    }

    #[test]
    fn floquet_operator_is_hermitian_not_symmetric() {
        let o = orbit(Poly::monomial(3, 1.0), 0.01, -1.0);
        let h = hill_assemble_orbit(&o, std::f64::consts::PI, 16).unwrap();
        assert!(h.hermitian_defect() < 1e-10);
        let asym = (&h.matrix - h.matrix.transpose()).iter().fold(0.0, |m: f64, z| m.max(z.norm()));
        assert!(asym > 1e-3);
        assert!(inertia(&h, 1e-6).is_err());
    }

    #[test]
    fn cnoidal_kernel_and_counts() {
        let o = orbit(Poly::monomial(3, 1.0), 0.01, -1.0);
        let h = hill_assemble_orbit(&o, 0.0, 64).unwrap();
        assert!(kernel_residual(&h) < 1e-6, "{}", kernel_residual(&h));
        let i = inertia(&h, h.zero_tol(1e-8)).unwrap();
        assert!(i.negative >= 1);
        let sl = sturm_liouville_check(&o, 64, 1e-8).unwrap();
        assert!((1..=2).contains(&sl.negative));
        assert!(sl.kernel_residual < 1e-6);
    }

    #[test]
    fn harmonic_reduced_operator() {
        let o = orbit(Poly::zero(), 1e-4, -1.0);
        let sl = sturm_liouville_check(&o, 16, 1e-8).unwrap();
        assert_eq!(sl.negative, 1);
    }

    #[test]
    fn too_few_modes() {
        let o = orbit(Poly::zero(), 0.5, -1.0);
        assert!(matches!(hill_assemble_orbit(&o, 0.0, 8), Err(Error::GridMismatch(_))));
    }
}
