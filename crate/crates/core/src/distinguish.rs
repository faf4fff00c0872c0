//! Closed-form Gaussian fidelity and s-overlap, Chernoff and Bhattacharyya
//! bounds, and QFI from the fidelity curvature.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{s_overlap_fock, FockOperator};
use crate::gaussian::{block_williamson, symplectic_form, GaussianState, Ordering};
use crate::optimize::golden_section;

pub const S_MIN: f64 = 1e-9;
pub const S_MAX: f64 = 1.0 - 1e-9;
const CHERNOFF_TOL: f64 = 1e-6;
const CHERNOFF_ITERS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapResult {
    pub value: f64,
    pub s_star: f64,
    pub exponent: f64,
}

impl OverlapResult {
    pub fn new(value: f64, s_star: f64) -> Self {
        OverlapResult { value, s_star, exponent: -value.ln() }
    }
}

fn check_pair(s0: &GaussianState, s1: &GaussianState) -> Result<(GaussianState, GaussianState)> {
    if s0.modes != s1.modes {
        return Err(Error::DimensionMismatch(format!("{} vs {} modes", s0.modes, s1.modes)));
    }
    Ok((s0.xxpp(), s1.xxpp()))
}

/// Root fidelity Tr√(√ρ₀ρ₁√ρ₀) of two Gaussian states.
pub fn fidelity_gaussian(s0: &GaussianState, s1: &GaussianState) -> Result<f64> {
    let (a, b) = check_pair(s0, s1)?;
    let n = a.modes;
    let om = symplectic_form(n, Ordering::Xxpp);
    let sum = &a.cov + &b.cov;
    let det_sum = sum.determinant();
    let inv = sum.clone().try_inverse().filter(|_| det_sum > 0.0).ok_or(Error::SingularSum)?;
    let aux = om.transpose() * &inv * (&om * 0.25 + &b.cov * &om * &a.cov);
    // det[2(√(I + (V_aux Ω)^{-2}/4) + I) V_aux] through the spectrum of V_aux Ω
    let lam = (&aux * &om).complex_eigenvalues();
    let mut prod = Complex64::new(1.0, 0.0);
    for l in lam.iter() {
        let mut w = Complex64::new(1.0, 0.0) + (l * l * 4.0).inv();
        if w.re.abs() < 1e-13 && w.im.abs() < 1e-13 {
            w = Complex64::new(0.0, 0.0);
        }
        prod *= w.sqrt() + 1.0;
    }
    let f_tot4 = 2f64.powi(2 * n as i32) * aux.determinant() * prod.re;
    let d = &b.mean - &a.mean;
    let quad = (d.transpose() * &inv * &d)[(0, 0)];
    Ok(f_tot4.max(0.0).powf(0.25) / det_sum.powf(0.25) * (-0.25 * quad).exp())
}

fn g_fn(x: f64, s: f64) -> f64 {
    1.0 / ((x + 0.5).powf(s) - (x - 0.5).max(0.0).powf(s))
}

fn lambda_fn(x: f64, s: f64) -> f64 {
    let (p, m) = ((x + 0.5).powf(s), (x - 0.5).max(0.0).powf(s));
    (p + m) / (p - m)
}

/// Gaussian s-overlap Tr(ρ₀^s ρ₁^{1−s}) for states built from one- and
/// two-mode standard-form blocks.
pub fn s_overlap_gaussian(s0: &GaussianState, s1: &GaussianState, s: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::OutOfRange { what: "s in [0, 1]", value: s });
    }
    let s = s.clamp(S_MIN, S_MAX);
    let (a, b) = check_pair(s0, s1)?;
    let n = a.modes;
    let w0 = block_williamson(&a)?;
    let w1 = block_williamson(&b)?;
    let diag = |nus: &[f64], t: f64| {
        DMatrix::from_diagonal(&DVector::from_fn(2 * n, |i, _| lambda_fn(nus[i % n].max(0.5), t)))
    };
    let sigma = &w0.s * diag(&w0.nus, s) * w0.s.transpose() + &w1.s * diag(&w1.nus, 1.0 - s) * w1.s.transpose();
    let pi: f64 = (0..n).map(|k| g_fn(w0.nus[k].max(0.5), s) * g_fn(w1.nus[k].max(0.5), 1.0 - s)).product();
    let det = sigma.determinant();
    let inv = sigma.try_inverse().ok_or(Error::SingularSum)?;
    let d = &b.mean - &a.mean;
    let quad = (d.transpose() * inv * &d)[(0, 0)];
    Ok(2f64.powi(n as i32) * pi / det.sqrt() * (-quad).exp())
}

/// Minimises an s-overlap curve over [1e-9, 1 − 1e-9].
pub fn minimize_overlap<F: FnMut(f64) -> Result<f64>>(mut c: F) -> Result<OverlapResult> {
    let half = c(0.5)?;
    let mut err = None;
    let m = golden_section(
        |s| match c(s) {
            Ok(v) => v,
            Err(e) => {
                err.get_or_insert(e);
                f64::INFINITY
            }
        },
        S_MIN,
        S_MAX,
        CHERNOFF_TOL,
        CHERNOFF_ITERS,
    );
    if let Some(e) = err {
        return Err(e);
    }
    if m.value <= half {
        Ok(OverlapResult::new(m.value, m.x))
    } else {
        Ok(OverlapResult::new(half, 0.5))
    }
}

pub fn chernoff(s0: &GaussianState, s1: &GaussianState) -> Result<OverlapResult> {
    minimize_overlap(|s| s_overlap_gaussian(s0, s1, s))
}

pub fn bhattacharyya(s0: &GaussianState, s1: &GaussianState) -> Result<OverlapResult> {
    Ok(OverlapResult::new(s_overlap_gaussian(s0, s1, 0.5)?, 0.5))
}

pub fn chernoff_fock(rho0: &FockOperator, rho1: &FockOperator) -> Result<OverlapResult> {
    minimize_overlap(|s| Ok(s_overlap_fock(rho0, rho1, s)))
}

/// Fuchs–van de Graaf bounds on the equal-prior Helstrom error.
pub fn fvg_bounds(f: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&f) {
        return Err(Error::OutOfRange { what: "fidelity in [0, 1]", value: f });
    }
    Ok(((1.0 - (1.0 - f * f).sqrt()) / 2.0, f / 2.0))
}

fn second_derivative<F: Fn(f64) -> f64>(f: &F, x: f64, h: f64) -> f64 {
    (-f(x + 2.0 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h) - f(x - 2.0 * h)) / (12.0 * h * h)
}

/// K = −4 ∂²F(θ′)/∂θ′² at θ′ = θ.
pub fn qfi_from_fidelity<F: Fn(f64) -> f64>(f: F, theta: f64, h: f64) -> Result<f64> {
    let coarse = -4.0 * second_derivative(&f, theta, h);
    let fine = -4.0 * second_derivative(&f, theta, 0.5 * h);
    if (coarse - fine).abs() > 1e-4 * fine.abs().max(f64::MIN_POSITIVE) {
        return Err(Error::NoisyDerivative { coarse, fine });
    }
    Ok(fine)
}
