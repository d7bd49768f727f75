//! Dense real polynomials in ascending-coefficient form.

use nalgebra::DMatrix;
use num_complex::Complex64;
use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    coeffs: Vec<f64>,
}

impl Poly {
    /// Builds a polynomial from ascending coefficients; trailing zeros are dropped.
    pub fn new(coeffs: impl Into<Vec<f64>>) -> Self {
        let mut coeffs = coeffs.into();
        while coeffs.len() > 1 && *coeffs.last().unwrap() == 0.0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: vec![0.0] }
    }

    pub fn constant(c: f64) -> Self {
        Poly::new(vec![c])
    }

    /// a + b v
    pub fn linear(a: f64, b: f64) -> Self {
        Poly::new(vec![a, b])
    }

    pub fn monomial(degree: usize, coeff: f64) -> Self {
        let mut c = vec![0.0; degree + 1];
        c[degree] = coeff;
        Poly::new(c)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == 0.0
    }

    pub fn leading(&self) -> f64 {
        *self.coeffs.last().unwrap()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    pub fn deriv(&self) -> Poly {
        if self.coeffs.len() == 1 {
            return Poly::zero();
        }
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| k as f64 * c)
                .collect::<Vec<_>>(),
        )
    }

    pub fn scale(&self, s: f64) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| c * s).collect::<Vec<_>>())
    }

    /// Synthetic division by (v - root): returns (quotient, remainder).
    pub fn div_linear(&self, root: f64) -> (Poly, f64) {
        let n = self.coeffs.len();
        if n == 1 {
            return (Poly::zero(), self.coeffs[0]);
        }
        let mut q = vec![0.0; n - 1];
        let mut carry = self.coeffs[n - 1];
        for k in (0..n - 1).rev() {
            q[k] = carry;
            carry = self.coeffs[k] + carry * root;
        }
        (Poly::new(q), carry)
    }

    /// Largest coefficient magnitude, used as a scale for tolerances.
    pub fn coeff_scale(&self) -> f64 {
        self.coeffs.iter().fold(0.0_f64, |m, c| m.max(c.abs()))
    }

    /// All complex roots: companion-matrix eigenvalues polished by Newton steps.
    pub fn complex_roots(&self) -> Vec<Complex64> {
        let n = self.degree();
        if n == 0 {
            return Vec::new();
        }
        let lead = self.leading();
        if n == 1 {
            return vec![Complex64::new(-self.coeffs[0] / lead, 0.0)];
        }
        if n == 2 {
            let (a, b, c) = (lead, self.coeffs[1], self.coeffs[0]);
            let disc = Complex64::new(b * b - 4.0 * a * c, 0.0).sqrt();
            // Stable form avoiding cancellation.
            let sgn = if b >= 0.0 { 1.0 } else { -1.0 };
            let q = -0.5 * (b + sgn * disc);
            if q.norm() == 0.0 {
                return vec![Complex64::new(0.0, 0.0); 2];
            }
            return vec![q / a, c / q];
        }
        let mut comp = DMatrix::<f64>::zeros(n, n);
        for i in 1..n {
            comp[(i, i - 1)] = 1.0;
        }
        for i in 0..n {
            comp[(i, n - 1)] = -self.coeffs[i] / lead;
        }
        let eig = match comp.try_schur(f64::EPSILON, 10_000) {
            Some(schur) => schur.complex_eigenvalues().iter().copied().collect(),
            None => self.aberth_roots(),
        };
        let dp = self.deriv();
        eig.iter()
            .map(|&z0| {
                let mut z = z0;
                for _ in 0..4 {
                    let p = self.eval_complex(z);
                    let d = dp.eval_complex(z);
                    if d.norm() == 0.0 {
                        break;
                    }
                    let step = p / d;
                    let zn = z - step;
                    if !zn.re.is_finite() || !zn.im.is_finite() {
                        break;
                    }
                    // Only accept steps that reduce the residual.
                    if self.eval_complex(zn).norm() <= p.norm() {
                        z = zn;
                    } else {
                        break;
                    }
                }
                z
            })
            .collect()
    }

    /// Simultaneous Aberth–Ehrlich iteration, used when the companion QR stalls.
    fn aberth_roots(&self) -> Vec<Complex64> {
        let n = self.degree();
        let dp = self.deriv();
        let lead = self.leading().abs();
        // Cauchy bound on the root moduli.
        let radius = 1.0 + self.coeffs[..n].iter().fold(0.0_f64, |m, c| m.max(c.abs())) / lead;
        let mut z: Vec<Complex64> = (0..n)
            .map(|k| Complex64::from_polar(0.5 * radius, 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64))
            .collect();
        for _ in 0..500 {
            let mut moved = 0.0_f64;
            for k in 0..n {
                let ratio = self.eval_complex(z[k]) / dp.eval_complex(z[k]);
                let repulsion: Complex64 = (0..n).filter(|&j| j != k).map(|j| 1.0 / (z[k] - z[j])).sum();
                let step = ratio / (1.0 - ratio * repulsion);
                if step.re.is_finite() && step.im.is_finite() {
                    z[k] -= step;
                    moved = moved.max(step.norm() / (1.0 + z[k].norm()));
                }
            }
            if moved < 1e-15 {
                break;
            }
        }
        z
    }

    /// Distinct real roots in ascending order. Near-real complex roots (as produced
    /// by multiple roots) are kept and clustered.
    pub fn real_roots(&self) -> Vec<f64> {
        let mut re: Vec<f64> = self
            .complex_roots()
            .into_iter()
            .filter(|z| z.im.abs() <= 1e-6 * (1.0 + z.re.abs()))
            .map(|z| z.re)
            .collect();
        re.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut out: Vec<f64> = Vec::with_capacity(re.len());
        let mut cluster: Vec<f64> = Vec::new();
        for r in re {
            if let Some(&last) = cluster.last() {
                if (r - last).abs() > 1e-7 * (1.0 + r.abs()) {
                    out.push(cluster.iter().sum::<f64>() / cluster.len() as f64);
                    cluster.clear();
                }
            }
            cluster.push(r);
        }
        if !cluster.is_empty() {
            out.push(cluster.iter().sum::<f64>() / cluster.len() as f64);
        }
        out
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let c: Vec<f64> = (0..n)
            .map(|k| self.coeffs.get(k).unwrap_or(&0.0) + rhs.coeffs.get(k).unwrap_or(&0.0))
            .collect();
        Poly::new(c)
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self + &(-rhs)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(-1.0)
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut c = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Poly::new(c)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Poly {
            type Output = Poly;
            fn $m(self, rhs: Poly) -> Poly {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
