//! Truncated Fock-space density operators and brute-force distinguishability.
//!
//! Multimode operators use the Kronecker layout: mode 0 is the slowest index.
//! Matrix functions act block by block on the connected components of the
//! nonzero pattern, which keeps number-diagonal and phase-insensitive states
//! cheap at large cutoffs.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::special::thermal_quantile;

pub type CMatrix = DMatrix<Complex64>;

pub const SUPPORT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    pub mode_dims: Vec<usize>,
    pub matrix: CMatrix,
    pub trace_target: f64,
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

impl FockOperator {
    pub fn new(mode_dims: Vec<usize>, matrix: CMatrix) -> Self {
        assert_eq!(mode_dims.iter().product::<usize>(), matrix.nrows(), "dimension mismatch");
        FockOperator { mode_dims, matrix, trace_target: 1.0 }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let m = CMatrix::from_fn(n, n, |i, j| if i == j { c(diag[i]) } else { c(0.0) });
        FockOperator::new(vec![n], m)
    }

    /// Thermal state with mean `n` truncated to `dim` levels (not renormalised).
    pub fn thermal(n: f64, dim: usize) -> Self {
        let r = n / (n + 1.0);
        let d: Vec<f64> = (0..dim).map(|k| r.powi(k as i32) / (n + 1.0)).collect();
        FockOperator::from_diagonal(&d)
    }

    pub fn number(k: usize, dim: usize) -> Self {
        let mut d = vec![0.0; dim];
        d[k] = 1.0;
        FockOperator::from_diagonal(&d)
    }

    pub fn coherent(alpha: Complex64, dim: usize) -> Self {
        FockOperator::pure(vec![dim], &coherent_amplitudes(alpha, dim))
    }

    /// D(α) ρ_th(n) D(α)†, built column by column from D|k⟩ = (a† − α*) D|k−1⟩ / √k.
    pub fn displaced_thermal(n: f64, alpha: Complex64, dim: usize) -> Self {
        let mut col = nalgebra::DVector::from_vec(coherent_amplitudes(alpha, dim));
        let r = n / (n + 1.0);
        let mut m = CMatrix::zeros(dim, dim);
        for k in 0..dim {
            if k > 0 {
                let mut next = col.map(|v| -v * alpha.conj());
                for j in 1..dim {
                    next[j] += col[j - 1] * (j as f64).sqrt();
                }
                col = next / c((k as f64).sqrt());
            }
            let p = r.powi(k as i32) / (n + 1.0);
            if p < 1e-300 {
                break;
            }
            m += &col * col.adjoint() * c(p);
        }
        FockOperator::new(vec![dim], m)
    }

    pub fn pure(mode_dims: Vec<usize>, psi: &[Complex64]) -> Self {
        let n = psi.len();
        let m = CMatrix::from_fn(n, n, |i, j| psi[i] * psi[j].conj());
        FockOperator::new(mode_dims, m)
    }

    pub fn tensor(&self, other: &FockOperator) -> FockOperator {
        let m = self.matrix.kronecker(&other.matrix);
        let mut dims = self.mode_dims.clone();
        dims.extend_from_slice(&other.mode_dims);
        FockOperator { mode_dims: dims, matrix: m, trace_target: self.trace_target * other.trace_target }
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (&self.matrix - self.matrix.adjoint()).camax() <= tol
    }

    pub fn min_eigenvalue(&self) -> f64 {
        blockwise_eigen(&[&self.matrix])
            .iter()
            .flat_map(|(_, ev, _)| ev.iter().cloned())
            .fold(f64::INFINITY, f64::min)
    }

    /// Occupation of mode `k` for flat index `i`.
    pub fn level(&self, i: usize, k: usize) -> usize {
        let stride: usize = self.mode_dims[k + 1..].iter().product();
        (i / stride) % self.mode_dims[k]
    }

    pub fn mean_photons(&self, k: usize) -> f64 {
        (0..self.dim()).map(|i| self.level(i, k) as f64 * self.matrix[(i, i)].re).sum()
    }

    /// Distribution of the total photon number (diagonal weights summed).
    pub fn total_photon_pmf(&self) -> Vec<f64> {
        let nmax: usize = self.mode_dims.iter().map(|d| d - 1).sum();
        let mut p = vec![0.0; nmax + 1];
        for i in 0..self.dim() {
            let n: usize = (0..self.mode_dims.len()).map(|k| self.level(i, k)).sum();
            p[n] += self.matrix[(i, i)].re;
        }
        p
    }

    pub fn partial_trace(&self, keep: &[usize]) -> FockOperator {
        let dims_keep: Vec<usize> = keep.iter().map(|&k| self.mode_dims[k]).collect();
        let dk: usize = dims_keep.iter().product();
        let mut out = CMatrix::zeros(dk, dk);
        let nm = self.mode_dims.len();
        let reduced = |i: usize| -> usize {
            keep.iter().fold(0, |acc, &k| acc * self.mode_dims[k] + self.level(i, k))
        };
        let traced_eq = |i: usize, j: usize| -> bool {
            (0..nm).filter(|k| !keep.contains(k)).all(|k| self.level(i, k) == self.level(j, k))
        };
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                let v = self.matrix[(i, j)];
                if v != c(0.0) && traced_eq(i, j) {
                    out[(reduced(i), reduced(j))] += v;
                }
            }
        }
        FockOperator { mode_dims: dims_keep, matrix: out, trace_target: self.trace_target }
    }
}

fn coherent_amplitudes(alpha: Complex64, dim: usize) -> Vec<Complex64> {
    let mut amp = Vec::with_capacity(dim);
    let mut a = Complex64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    for k in 0..dim {
        amp.push(a);
        a = a * alpha / ((k + 1) as f64).sqrt();
    }
    amp
}

/// Connected components of the union of nonzero patterns.
pub fn components(ms: &[&CMatrix]) -> Vec<Vec<usize>> {
    let n = ms[0].nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for m in ms {
        for j in 0..n {
            for i in 0..n {
                if i != j && m[(i, j)] != c(0.0) {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    if a != b {
                        parent[a] = b;
                    }
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    groups.into_values().collect()
}

fn sub(m: &CMatrix, idx: &[usize]) -> CMatrix {
    CMatrix::from_fn(idx.len(), idx.len(), |i, j| m[(idx[i], idx[j])])
}

/// Per-block eigendecomposition of the first matrix on the shared block pattern.
fn blockwise_eigen(ms: &[&CMatrix]) -> Vec<(Vec<usize>, Vec<f64>, CMatrix)> {
    components(ms)
        .into_iter()
        .map(|idx| {
            let b = sub(ms[0], &idx);
            let (ev, vecs) = herm_eigen(&b);
            (idx, ev, vecs)
        })
        .collect()
}

fn herm_eigen(b: &CMatrix) -> (Vec<f64>, CMatrix) {
    if b.nrows() == 1 {
        return (vec![b[(0, 0)].re], CMatrix::from_element(1, 1, c(1.0)));
    }
    let mut h = (b + b.adjoint()) * c(0.5);
    let tiny = h.camax() * 1e-60;
    h.apply(|x| {
        if x.norm() < tiny {
            *x = c(0.0)
        }
    });
    let e = h.symmetric_eigen();
    (e.eigenvalues.iter().cloned().collect(), e.eigenvectors)
}

fn apply_fn(b: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (ev, v) = herm_eigen(b);
    // rounding-level eigenvalues of dense blocks count as zeros
    let floor = if ev.len() == 1 {
        0.0
    } else {
        8.0 * f64::EPSILON * ev.len() as f64 * ev.iter().fold(0.0f64, |m, l| m.max(l.abs()))
    };
    let d = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        ev.len(),
        ev.iter().map(|&l| c(f(if l.abs() <= floor { 0.0 } else { l }))),
    ));
    &v * d * v.adjoint()
}

fn power_fn(s: f64) -> impl Fn(f64) -> f64 {
    move |l: f64| {
        if s == 0.0 {
            if l > SUPPORT_TOL {
                1.0
            } else {
                0.0
            }
        } else {
            l.max(0.0).powf(s)
        }
    }
}

pub fn hermitian_power(rho: &FockOperator, s: f64) -> FockOperator {
    let n = rho.dim();
    let mut out = CMatrix::zeros(n, n);
    for idx in components(&[&rho.matrix]) {
        let p = apply_fn(&sub(&rho.matrix, &idx), power_fn(s));
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                out[(i, j)] = p[(a, b)];
            }
        }
    }
    FockOperator { mode_dims: rho.mode_dims.clone(), matrix: out, trace_target: rho.trace_target }
}

pub fn trace_norm(a: &CMatrix) -> f64 {
    blockwise_eigen(&[a]).iter().map(|(_, ev, _)| ev.iter().map(|l| l.abs()).sum::<f64>()).sum()
}

pub fn helstrom_error(rho0: &FockOperator, rho1: &FockOperator, pi0: f64) -> f64 {
    let pi1 = 1.0 - pi0;
    let d = &rho1.matrix * c(pi1) - &rho0.matrix * c(pi0);
    (0.5 - 0.5 * trace_norm(&d)).clamp(0.0, 0.5)
}

/// Root fidelity Tr√(√ρ₀ ρ₁ √ρ₀).
pub fn fidelity_fock(rho0: &FockOperator, rho1: &FockOperator) -> f64 {
    let mut f = 0.0;
    for idx in components(&[&rho0.matrix, &rho1.matrix]) {
        let a = sub(&rho0.matrix, &idx);
        let b = sub(&rho1.matrix, &idx);
        let ra = apply_fn(&a, |l| l.max(0.0).sqrt());
        let inner = &ra * b * &ra;
        let (ev, _) = herm_eigen(&inner);
        let floor = 8.0 * f64::EPSILON * ev.len() as f64 * ev.iter().fold(0.0f64, |m, l| m.max(l.abs()));
        f += ev.iter().filter(|&&l| l > floor).map(|l| l.sqrt()).sum::<f64>();
    }
    f
}

/// Tr(ρ₀^s ρ₁^{1−s}); ρ^0 is the projector onto eigenvalues above 1e-12.
pub fn s_overlap_fock(rho0: &FockOperator, rho1: &FockOperator, s: f64) -> f64 {
    let mut acc = 0.0;
    for idx in components(&[&rho0.matrix, &rho1.matrix]) {
        let a = apply_fn(&sub(&rho0.matrix, &idx), power_fn(s));
        let b = apply_fn(&sub(&rho1.matrix, &idx), power_fn(1.0 - s));
        acc += (a * b).trace().re;
    }
    acc
}

/// Smallest cutoff (number of levels) with thermal tail mass below `tail_tol`.
pub fn cutoff_for_tail(mean_photons: f64, tail_tol: f64) -> usize {
    thermal_quantile(1.0, mean_photons, tail_tol) + 1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn displaced_thermal_moments() {
        let alpha = Complex64::new(0.7, -0.4);
        let r = FockOperator::displaced_thermal(0.6, alpha, 60);
        assert!((r.trace() - 1.0).abs() < 1e-10);
        assert!((r.mean_photons(0) - (0.6 + alpha.norm_sqr())).abs() < 1e-9);
        let a = CMatrix::from_fn(60, 60, |i, j| if j == i + 1 { c((j as f64).sqrt()) } else { c(0.0) });
        assert!(((&r.matrix * a).trace() - alpha).norm() < 1e-9);
        let coh = FockOperator::coherent(alpha, 60);
        assert!((&FockOperator::displaced_thermal(0.0, alpha, 60).matrix - &coh.matrix).camax() < 1e-14);
    }

    #[test]
    fn power_examples() {
        let half = FockOperator::from_diagonal(&[0.5, 0.5]);
        let sq = hermitian_power(&half, 2.0);
        assert!((sq.matrix[(0, 0)].re - 0.25).abs() < 1e-15);
        let th = FockOperator::thermal(1.0, 40);
        let r = hermitian_power(&th, 0.5);
        for k in 0..40 {
            assert!((r.matrix[(k, k)].re - 0.5f64.powf((k as f64 + 1.0) / 2.0)).abs() < 1e-15);
        }
        let coh = FockOperator::coherent(Complex64::new(0.6, -0.3), 30);
        let mixed = FockOperator::new(vec![30], (&coh.matrix + &th.matrix.clone().resize(30, 30, c(0.0))) * c(0.5));
        let back = hermitian_power(&mixed, 1.0);
        assert!((back.matrix - mixed.matrix).camax() < 1e-12);
    }

    #[test]
    fn trace_norm_examples() {
        let d = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(0.5), c(-0.5)]));
        assert!((trace_norm(&d) - 1.0).abs() < 1e-15);
        let v = FockOperator::number(0, 60);
        let t = FockOperator::thermal(1.0, 60);
        assert!((trace_norm(&(&v.matrix - &t.matrix)) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn helstrom_examples() {
        let v = FockOperator::number(0, 60);
        let t = FockOperator::thermal(1.0, 60);
        assert!((helstrom_error(&v, &v, 0.5) - 0.5).abs() < 1e-15);
        assert!(helstrom_error(&v, &FockOperator::number(1, 60), 0.5).abs() < 1e-15);
        assert!((helstrom_error(&v, &t, 0.5) - 0.25).abs() < 1e-9);
    }

    #[test]
    fn fidelity_examples() {
        let v = FockOperator::number(0, 60);
        let t = FockOperator::thermal(1.0, 60);
        assert!((fidelity_fock(&t, &t) - 1.0).abs() < 1e-9);
        assert!((fidelity_fock(&v, &t) - 0.5f64.sqrt()).abs() < 1e-9);
        let a = FockOperator::coherent(Complex64::new(1.0, 0.0), 40);
        let v40 = FockOperator::number(0, 40);
        assert!((fidelity_fock(&a, &v40) - (-0.5f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn overlap_examples() {
        let v = FockOperator::number(0, 60);
        let t = FockOperator::thermal(1.0, 60);
        for s in [0.1, 0.5, 0.9] {
            assert!((s_overlap_fock(&t, &t, s) - 1.0).abs() < 1e-9);
        }
        assert!((s_overlap_fock(&v, &t, 0.0) - 0.5).abs() < 1e-12);
        let a = FockOperator::coherent(Complex64::new(0.4, 0.2), 30);
        let b = FockOperator::thermal(0.3, 30);
        assert!((s_overlap_fock(&a, &b, 0.5) - s_overlap_fock(&b, &a, 0.5)).abs() < 1e-12);
    }

    #[test]
    fn cutoff_examples() {
        assert_eq!(cutoff_for_tail(0.0, 1e-12), 1);
        assert_eq!(cutoff_for_tail(1.0, 1e-9), 30);
        let d = cutoff_for_tail(20.0, 1e-10);
        let r: f64 = 20.0 / 21.0;
        assert!(r.powi(d as i32) <= 1e-10 && r.powi(d as i32 - 1) > 1e-10);
    }

    #[test]
    fn partial_trace_of_product() {
        let a = FockOperator::thermal(0.3, 5);
        let b = FockOperator::coherent(Complex64::new(0.2, 0.1), 4);
        let ab = a.tensor(&b);
        let ra = ab.partial_trace(&[0]);
        assert!((ra.matrix - a.matrix * c(b.trace())).camax() < 1e-15);
    }
}
