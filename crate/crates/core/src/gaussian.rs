//! Gaussian states: first and second moments, symplectic spectra and the
//! standard probe/background constructors.
//!
//! Quadratures are x = (a + a†)/√2 and p = (a − a†)/(i√2), so the vacuum has
//! covariance I/2.

use nalgebra::{DMatrix, DVector, Matrix2, Matrix4};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub const PSD_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ordering {
    /// (x₁…x_M, p₁…p_M)
    Xxpp,
    /// (x₁, p₁, …, x_M, p_M)
    Xpxp,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    pub modes: usize,
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
    pub ordering: Ordering,
}

/// Index of quadrature `q` (0 = x, 1 = p) of mode `k` in the given layout.
pub fn quad_index(ordering: Ordering, modes: usize, k: usize, q: usize) -> usize {
    match ordering {
        Ordering::Xxpp => q * modes + k,
        Ordering::Xpxp => 2 * k + q,
    }
}

/// Permutation taking `from` layout indices to `to` layout indices.
fn permutation(modes: usize, from: Ordering, to: Ordering) -> Vec<usize> {
    let mut p = vec![0; 2 * modes];
    for k in 0..modes {
        for q in 0..2 {
            p[quad_index(from, modes, k, q)] = quad_index(to, modes, k, q);
        }
    }
    p
}

pub fn symplectic_form(modes: usize, ordering: Ordering) -> DMatrix<f64> {
    let mut om = DMatrix::zeros(2 * modes, 2 * modes);
    for k in 0..modes {
        let x = quad_index(ordering, modes, k, 0);
        let p = quad_index(ordering, modes, k, 1);
        om[(x, p)] = 1.0;
        om[(p, x)] = -1.0;
    }
    om
}

fn is_symmetric(m: &DMatrix<f64>) -> bool {
    let scale = m.amax().max(1.0);
    (m - m.transpose()).amax() <= 1e-12 * scale
}

/// Hermitian matrix V + iΩ/2; PSD iff the covariance is physical.
fn uncertainty_matrix(cov: &DMatrix<f64>, omega: &DMatrix<f64>) -> DMatrix<Complex64> {
    DMatrix::from_fn(cov.nrows(), cov.ncols(), |i, j| {
        Complex64::new(cov[(i, j)], 0.5 * omega[(i, j)])
    })
}

fn sym_sqrt(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let eig = m.clone().symmetric_eigen();
    if eig.eigenvalues.iter().any(|&l| l <= 0.0) {
        return None;
    }
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
    Some(&eig.eigenvectors * d * eig.eigenvectors.transpose())
}

impl GaussianState {
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>, ordering: Ordering) -> Result<Self> {
        let n = cov.nrows();
        if n % 2 != 0 || cov.ncols() != n || mean.len() != n || n == 0 {
            return Err(Error::DimensionMismatch(format!(
                "mean {} / cov {}x{}",
                mean.len(),
                cov.nrows(),
                cov.ncols()
            )));
        }
        if !is_symmetric(&cov) {
            return Err(Error::DimensionMismatch("covariance is not symmetric".into()));
        }
        let s = GaussianState { modes: n / 2, mean, cov, ordering };
        let m = s.uncertainty_min_eigenvalue();
        if m < -PSD_TOL {
            return Err(Error::NonPositiveDefinite(m));
        }
        Ok(s)
    }

    pub fn reorder(&self, to: Ordering) -> GaussianState {
        if to == self.ordering {
            return self.clone();
        }
        let p = permutation(self.modes, self.ordering, to);
        let n = 2 * self.modes;
        let mut mean = DVector::zeros(n);
        let mut cov = DMatrix::zeros(n, n);
        for i in 0..n {
            mean[p[i]] = self.mean[i];
            for j in 0..n {
                cov[(p[i], p[j])] = self.cov[(i, j)];
            }
        }
        GaussianState { modes: self.modes, mean, cov, ordering: to }
    }

    pub fn xxpp(&self) -> GaussianState {
        self.reorder(Ordering::Xxpp)
    }

    pub fn uncertainty_min_eigenvalue(&self) -> f64 {
        let om = symplectic_form(self.modes, self.ordering);
        let h = uncertainty_matrix(&self.cov, &om);
        h.symmetric_eigen().eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Mean photon number of mode `k`: (Vxx + Vpp + x̄² + p̄² − 1)/2.
    pub fn mean_photons(&self, k: usize) -> f64 {
        let x = quad_index(self.ordering, self.modes, k, 0);
        let p = quad_index(self.ordering, self.modes, k, 1);
        0.5 * (self.cov[(x, x)] + self.cov[(p, p)] + self.mean[x].powi(2) + self.mean[p].powi(2) - 1.0)
    }

    /// Direct sum (tensor product of the states); result in XXPP.
    pub fn product(&self, other: &GaussianState) -> GaussianState {
        let a = self.xxpp();
        let b = other.xxpp();
        let (ma, mb) = (a.modes, b.modes);
        let m = ma + mb;
        let mut mean = DVector::zeros(2 * m);
        let mut cov = DMatrix::zeros(2 * m, 2 * m);
        let ia = |i: usize| if i < ma { i } else { i - ma + m };
        let ib = |i: usize| if i < mb { i + ma } else { i - mb + m + ma };
        for i in 0..2 * ma {
            mean[ia(i)] = a.mean[i];
            for j in 0..2 * ma {
                cov[(ia(i), ia(j))] = a.cov[(i, j)];
            }
        }
        for i in 0..2 * mb {
            mean[ib(i)] = b.mean[i];
            for j in 0..2 * mb {
                cov[(ib(i), ib(j))] = b.cov[(i, j)];
            }
        }
        GaussianState { modes: m, mean, cov, ordering: Ordering::Xxpp }
    }
}

/// Symplectic eigenvalues, descending, from the spectrum of iΩV made
/// Hermitian as V^{1/2}(iΩ)V^{1/2}.
pub fn symplectic_eigenvalues(state: &GaussianState) -> Result<Vec<f64>> {
    let m = state.uncertainty_min_eigenvalue();
    if m < -PSD_TOL {
        return Err(Error::NonPositiveDefinite(m));
    }
    let root = sym_sqrt(&state.cov).ok_or(Error::NonPositiveDefinite(m))?;
    let om = symplectic_form(state.modes, state.ordering);
    let rc = root.map(|v| Complex64::new(v, 0.0));
    let iom = om.map(|v| Complex64::new(0.0, v));
    let h = &rc * iom * &rc;
    let h = (&h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let mut ev: Vec<f64> = h.symmetric_eigen().eigenvalues.iter().map(|v| v.abs()).collect();
    ev.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(ev.chunks(2).map(|c| 0.5 * (c[0] + c[1])).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoModeStandardForm {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StandardDecomposition {
    pub nu_plus: f64,
    pub nu_minus: f64,
    /// Symplectic matrix in XPXP layout (x₁, p₁, x₂, p₂).
    pub s: Matrix4<f64>,
}

impl TwoModeStandardForm {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        if a < 0.5 - PSD_TOL || b < 0.5 - PSD_TOL {
            return Err(Error::OutOfRange { what: "local variances >= 1/2", value: a.min(b) });
        }
        if c < 0.0 {
            return Err(Error::OutOfRange { what: "correlation c >= 0", value: c });
        }
        Ok(TwoModeStandardForm { a, b, c })
    }

    /// Ṽ = [[aI, cZ], [cZ, bI]] in XPXP layout.
    pub fn matrix(&self) -> Matrix4<f64> {
        let (a, b, c) = (self.a, self.b, self.c);
        Matrix4::new(
            a, 0.0, c, 0.0, //
            0.0, a, 0.0, -c, //
            c, 0.0, b, 0.0, //
            0.0, -c, 0.0, b,
        )
    }

    pub fn state(&self) -> GaussianState {
        let v = self.matrix();
        GaussianState {
            modes: 2,
            mean: DVector::zeros(4),
            cov: DMatrix::from_fn(4, 4, |i, j| v[(i, j)]),
            ordering: Ordering::Xpxp,
        }
    }
}

pub fn two_mode_standard_decomposition(f: &TwoModeStandardForm) -> Result<StandardDecomposition> {
    let (a, b, c) = (f.a, f.b, f.c);
    let y = (a + b).powi(2) - 4.0 * c * c;
    if y <= 0.0 {
        return Err(Error::DegenerateForm);
    }
    let sy = y.sqrt();
    let nu_plus = (sy + (b - a)) / 2.0;
    let nu_minus = (sy - (b - a)) / 2.0;
    if nu_plus.min(nu_minus) < 0.5 - PSD_TOL {
        return Err(Error::NonPositiveDefinite(nu_plus.min(nu_minus) - 0.5));
    }
    let wp = ((a + b + sy) / (2.0 * sy)).sqrt();
    let wm = ((a + b - sy) / (2.0 * sy)).max(0.0).sqrt();
    let s = Matrix4::new(
        wp, 0.0, wm, 0.0, //
        0.0, wp, 0.0, -wm, //
        wm, 0.0, wp, 0.0, //
        0.0, -wm, 0.0, wp,
    );
    Ok(StandardDecomposition { nu_plus, nu_minus, s })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StateKind {
    Vacuum,
    Thermal(f64),
    Coherent(Complex64),
    /// Two-mode squeezed vacuum; mode 0 is the signal, mode 1 the idler.
    Tmsv(f64),
}

pub fn make_state(kind: StateKind) -> Result<GaussianState> {
    match kind {
        StateKind::Vacuum => Ok(thermal(0.0)),
        StateKind::Thermal(n) => {
            if n < 0.0 {
                return Err(Error::NegativeEnergy(n));
            }
            Ok(thermal(n))
        }
        StateKind::Coherent(alpha) => Ok(displaced_thermal(0.0, alpha)),
        StateKind::Tmsv(ns) => {
            if ns < 0.0 {
                return Err(Error::NegativeEnergy(ns));
            }
            Ok(correlated_pair(ns + 0.5, ns + 0.5, (ns * (ns + 1.0)).sqrt()))
        }
    }
}

pub fn thermal(n: f64) -> GaussianState {
    displaced_thermal(n, Complex64::new(0.0, 0.0))
}

/// Thermal state with `n` mean photons displaced by `alpha`.
pub fn displaced_thermal(n: f64, alpha: Complex64) -> GaussianState {
    let r2 = std::f64::consts::SQRT_2;
    GaussianState {
        modes: 1,
        mean: DVector::from_vec(vec![r2 * alpha.re, r2 * alpha.im]),
        cov: DMatrix::identity(2, 2) * (n + 0.5),
        ordering: Ordering::Xxpp,
    }
}

/// Zero-mean two-mode state with local variances `a`, `b` and x/p
/// correlations `+c` / `−c` (XXPP).
pub fn correlated_pair(a: f64, b: f64, c: f64) -> GaussianState {
    let mut cov = DMatrix::zeros(4, 4);
    cov[(0, 0)] = a;
    cov[(2, 2)] = a;
    cov[(1, 1)] = b;
    cov[(3, 3)] = b;
    cov[(0, 1)] = c;
    cov[(1, 0)] = c;
    cov[(2, 3)] = -c;
    cov[(3, 2)] = -c;
    GaussianState { modes: 2, mean: DVector::zeros(4), cov, ordering: Ordering::Xxpp }
}

/// Williamson data restricted to products of one- and two-mode blocks:
/// V = S diag(ν, ν) Sᵀ in XXPP with ν listed per mode.
#[derive(Debug, Clone)]
pub struct BlockWilliamson {
    pub nus: Vec<f64>,
    pub s: DMatrix<f64>,
}

fn mode_components(cov: &DMatrix<f64>, modes: usize, tol: f64) -> Vec<Vec<usize>> {
    let coupled = |i: usize, j: usize| {
        (0..2).any(|q| (0..2).any(|r| cov[(q * modes + i, r * modes + j)].abs() > tol))
    };
    let mut comp = vec![usize::MAX; modes];
    let mut out = Vec::new();
    for start in 0..modes {
        if comp[start] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut stack = vec![start];
        let mut members = Vec::new();
        comp[start] = id;
        while let Some(i) = stack.pop() {
            members.push(i);
            for j in 0..modes {
                if comp[j] == usize::MAX && coupled(i, j) {
                    comp[j] = id;
                    stack.push(j);
                }
            }
        }
        members.sort();
        out.push(members);
    }
    out
}

pub fn block_williamson(state: &GaussianState) -> Result<BlockWilliamson> {
    let st = state.xxpp();
    let n = st.modes;
    let v = &st.cov;
    let scale = v.amax().max(1.0);
    let tol = 1e-12 * scale;
    let mut s = DMatrix::zeros(2 * n, 2 * n);
    let mut nus = vec![0.0; n];
    for block in mode_components(v, n, tol) {
        match block.as_slice() {
            &[k] => {
                let vk = Matrix2::new(v[(k, k)], v[(k, n + k)], v[(n + k, k)], v[(n + k, n + k)]);
                let det = vk.determinant();
                if det <= 0.0 {
                    return Err(Error::NonPositiveDefinite(det));
                }
                let nu = det.sqrt();
                let eig = (vk / nu).symmetric_eigen();
                let root = eig.eigenvectors
                    * Matrix2::from_diagonal(&eig.eigenvalues.map(f64::sqrt))
                    * eig.eigenvectors.transpose();
                nus[k] = nu;
                s[(k, k)] = root[(0, 0)];
                s[(k, n + k)] = root[(0, 1)];
                s[(n + k, k)] = root[(1, 0)];
                s[(n + k, n + k)] = root[(1, 1)];
            }
            &[i, j] => {
                let (xi, xj, pi, pj) = (i, j, n + i, n + j);
                let a = v[(xi, xi)];
                let b = v[(xj, xj)];
                let c1 = v[(xi, xj)];
                let c2 = v[(pi, pj)];
                let ok = (v[(pi, pi)] - a).abs() <= tol
                    && (v[(pj, pj)] - b).abs() <= tol
                    && (c1 + c2).abs() <= tol
                    && [(xi, pi), (xj, pj), (xi, pj), (xj, pi)]
                        .iter()
                        .all(|&(r, c)| v[(r, c)].abs() <= tol);
                if !ok {
                    return Err(Error::StandardFormUnavailable);
                }
                let sign = if c1 < 0.0 { -1.0 } else { 1.0 };
                let f = TwoModeStandardForm::new(a, b, c1.abs())?;
                let dec = two_mode_standard_decomposition(&f)?;
                nus[i] = dec.nu_minus;
                nus[j] = dec.nu_plus;
                // local XPXP (x_i, p_i, x_j, p_j) -> global XXPP
                let g = [xi, pi, xj, pj];
                let flip = [1.0, 1.0, sign, sign];
                for r in 0..4 {
                    for c in 0..4 {
                        s[(g[r], g[c])] = flip[r] * dec.s[(r, c)];
                    }
                }
            }
            _ => return Err(Error::StandardFormUnavailable),
        }
    }
    Ok(BlockWilliamson { nus, s })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn omega_single_mode() {
        let om = symplectic_form(1, Ordering::Xxpp);
        assert_eq!(om, DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]));
    }

    #[test]
    fn omega_two_mode_blocks() {
        let om = symplectic_form(2, Ordering::Xxpp);
        let want = DMatrix::from_row_slice(
            4,
            4,
            &[
                0.0, 0.0, 1.0, 0.0, //
                0.0, 0.0, 0.0, 1.0, //
                -1.0, 0.0, 0.0, 0.0, //
                0.0, -1.0, 0.0, 0.0,
            ],
        );
        assert_eq!(om, want);
    }

    #[test]
    fn omega_orthogonal() {
        for ord in [Ordering::Xxpp, Ordering::Xpxp] {
            let om = symplectic_form(3, ord);
            assert_eq!(&om * om.transpose(), DMatrix::identity(6, 6));
            assert_eq!(&om * &om, -DMatrix::identity(6, 6));
        }
    }

    #[test]
    fn spectra_of_standard_states() {
        let v = symplectic_eigenvalues(&make_state(StateKind::Vacuum).unwrap()).unwrap();
        assert!((v[0] - 0.5).abs() < 1e-12);
        let t = symplectic_eigenvalues(&make_state(StateKind::Thermal(1.0)).unwrap()).unwrap();
        assert!((t[0] - 1.5).abs() < 1e-12);
        let s = symplectic_eigenvalues(&make_state(StateKind::Tmsv(0.3)).unwrap()).unwrap();
        assert!(s.iter().all(|x| (x - 0.5).abs() < 1e-9), "{s:?}");
    }

    #[test]
    fn constructors() {
        assert_eq!(make_state(StateKind::Thermal(0.0)).unwrap(), make_state(StateKind::Vacuum).unwrap());
        let c = make_state(StateKind::Coherent(Complex64::new(1.0, 0.0))).unwrap();
        assert!((c.mean[0] - 2f64.sqrt()).abs() < 1e-15 && c.mean[1] == 0.0);
        assert_eq!(c.cov, DMatrix::identity(2, 2) * 0.5);
        let t = make_state(StateKind::Tmsv(0.5)).unwrap();
        assert!((t.cov.determinant() - 1.0 / 16.0).abs() < 1e-12);
        assert!(matches!(make_state(StateKind::Thermal(-1.0)), Err(Error::NegativeEnergy(_))));
    }

    #[test]
    fn standard_form_examples() {
        let d = two_mode_standard_decomposition(&TwoModeStandardForm::new(0.8, 0.8, 0.0).unwrap()).unwrap();
        assert!((d.nu_plus - 0.8).abs() < 1e-12 && (d.nu_minus - 0.8).abs() < 1e-12);
        assert!((d.s - Matrix4::identity()).amax() < 1e-12);
        let ns: f64 = 1.0;
        let f = TwoModeStandardForm::new(ns + 0.5, ns + 0.5, (ns * (ns + 1.0)).sqrt()).unwrap();
        let d = two_mode_standard_decomposition(&f).unwrap();
        assert!((d.nu_plus - 0.5).abs() < 1e-9 && (d.nu_minus - 0.5).abs() < 1e-9);
    }

    #[test]
    fn degenerate_rejected() {
        let f = TwoModeStandardForm { a: 1.0, b: 1.0, c: 1.0 };
        assert_eq!(two_mode_standard_decomposition(&f), Err(Error::DegenerateForm));
    }

    #[test]
    fn reorder_round_trip() {
        let t = make_state(StateKind::Tmsv(0.4)).unwrap();
        let back = t.reorder(Ordering::Xpxp).reorder(Ordering::Xxpp);
        assert_eq!(back, t);
    }

    #[test]
    fn williamson_reconstructs_tmsv_return() {
        let st = correlated_pair(0.7, 0.9, -0.2);
        let w = block_williamson(&st).unwrap();
        let d = DMatrix::from_fn(4, 4, |i, j| if i == j { w.nus[i % 2] } else { 0.0 });
        let rec = &w.s * d * w.s.transpose();
        assert!((rec - &st.cov).amax() < 1e-12);
        let om = symplectic_form(2, Ordering::Xxpp);
        assert!((&w.s * &om * w.s.transpose() - om).amax() < 1e-12);
    }

    #[test]
    fn williamson_rejects_unsupported() {
        let mut st = correlated_pair(0.7, 0.9, 0.2);
        st.cov[(0, 0)] = 0.8;
        assert_eq!(block_williamson(&st).unwrap_err(), Error::StandardFormUnavailable);
    }
}
