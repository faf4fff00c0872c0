//! Single-photon entangled probes under the no-passive-signature model:
//! returned states, Bhattacharyya exponents against Gaussian probes, and
//! mode-mixing photon-counting receivers.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::channels::{apply_fock, decompose_thermal_loss, BosonicChannel};
use crate::distinguish::bhattacharyya;
use crate::error::{Error, Result};
use crate::fock::{cutoff_for_tail, s_overlap_fock, CMatrix, FockOperator};
use crate::gaussian::{correlated_pair, displaced_thermal, thermal, GaussianState};
use crate::optimize::{bisect, golden_section};

const CLOSED_FORM_TOL: f64 = 1e-10;

/// Target reflectivity, nominal background, per-mode signal energy and the
/// number of Fock levels kept on the signal/return mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NpsScenario {
    pub eta: f64,
    pub n_b: f64,
    pub n_s: f64,
    pub cutoff: usize,
}

impl NpsScenario {
    pub fn new(eta: f64, n_b: f64, n_s: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&eta) {
            return Err(Error::OutOfRange { what: "eta in [0, 1)", value: eta });
        }
        if n_b < 0.0 {
            return Err(Error::NegativeEnergy(n_b));
        }
        if n_s < 0.0 {
            return Err(Error::NegativeEnergy(n_s));
        }
        let cutoff = cutoff_for_tail(n_b / (1.0 - eta), 1e-10) + 3;
        Ok(NpsScenario { eta, n_b, n_s, cutoff })
    }

    pub fn with_cutoff(mut self, cutoff: usize) -> Self {
        self.cutoff = cutoff;
        self
    }

    /// Background brightness under H₁.
    pub fn n_b1(&self) -> f64 {
        self.n_b / (1.0 - self.eta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NpsProbe {
    Spes,
    Tmsv,
    Coherent,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianMoments1D {
    pub mu0: f64,
    pub sigma0: f64,
    pub mu1: f64,
    pub sigma1: f64,
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn check_ns(n_s: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&n_s) {
        return Err(Error::OutOfRange { what: "N_S in [0, 1]", value: n_s });
    }
    Ok(())
}

fn spes_vector(n_s: f64, dim: usize) -> Vec<Complex64> {
    // idler is mode 0 (two levels), signal is mode 1
    let mut psi = vec![c(0.0); 2 * dim];
    psi[1] = c(n_s.sqrt());
    psi[dim] = c((1.0 - n_s).sqrt());
    psi
}

/// √N_S|0⟩_I|1⟩_S + √(1−N_S)|1⟩_I|0⟩_S with two levels per mode.
pub fn spes_state(n_s: f64) -> Result<FockOperator> {
    check_ns(n_s)?;
    Ok(FockOperator::pure(vec![2, 2], &spes_vector(n_s, 2)))
}

fn closed_form_rho1(sc: &NpsScenario) -> FockOperator {
    let d = sc.cutoff;
    let (ns, nb, eta) = (sc.n_s, sc.n_b, sc.eta);
    let g = nb + 1.0;
    let q = nb / g;
    let mut m = CMatrix::zeros(2 * d, 2 * d);
    let idx = |i: usize, n: usize| i * d + n;
    let x = (eta * ns * (1.0 - ns)).sqrt() / (g * g);
    for n in 0..d {
        let qn = q.powi(n as i32);
        m[(idx(1, n), idx(1, n))] += c((1.0 - ns) / g * qn);
        m[(idx(0, n), idx(0, n))] += c(ns * (1.0 - eta + nb) / (g * g) * qn);
        if n + 1 < d {
            let np1 = (n + 1) as f64;
            m[(idx(0, n + 1), idx(0, n + 1))] += c(eta * ns / g.powi(3) * qn * np1);
            m[(idx(1, n), idx(0, n + 1))] += c(x * qn * np1.sqrt());
            m[(idx(0, n + 1), idx(1, n))] += c(x * qn * np1.sqrt());
        }
    }
    FockOperator::new(vec![2, d], m)
}

fn rho0(sc: &NpsScenario) -> FockOperator {
    let idler = FockOperator::from_diagonal(&[sc.n_s, 1.0 - sc.n_s]);
    idler.tensor(&FockOperator::thermal(sc.n_b, sc.cutoff))
}

/// (ρ₀, ρ₁) for one SPES copy. ρ₁ is built from the closed form and checked
/// against loss followed by amplification on the signal mode.
pub fn spes_returned_states(sc: &NpsScenario) -> Result<(FockOperator, FockOperator)> {
    check_ns(sc.n_s)?;
    let closed = closed_form_rho1(sc);
    let (t, g) = decompose_thermal_loss(sc.eta, sc.n_b1());
    let psi = FockOperator::pure(vec![2, sc.cutoff], &spes_vector(sc.n_s, sc.cutoff));
    let lossy = apply_fock(&BosonicChannel::PureLoss(t), &psi, 1)?;
    let composed = apply_fock(&BosonicChannel::Qla(g), &lossy, 1)?;
    let diff = (&closed.matrix - &composed.matrix).camax();
    if diff > CLOSED_FORM_TOL {
        return Err(Error::ClosedFormMismatch(diff));
    }
    Ok((rho0(sc), closed))
}

/// Gaussian H₀/H₁ pair for coherent (return mode only) or TMSV (return, idler) probes.
pub fn nps_pair(probe: NpsProbe, sc: &NpsScenario) -> Result<(GaussianState, GaussianState)> {
    let (eta, nb, ns) = (sc.eta, sc.n_b, sc.n_s);
    match probe {
        NpsProbe::Coherent => {
            Ok((thermal(nb), displaced_thermal(nb, Complex64::new((eta * ns).sqrt(), 0.0))))
        }
        NpsProbe::Tmsv => {
            let corr = (eta * ns * (ns + 1.0)).sqrt();
            Ok((
                correlated_pair(nb + 0.5, ns + 0.5, 0.0),
                correlated_pair(eta * ns + nb + 0.5, ns + 0.5, corr),
            ))
        }
        NpsProbe::Spes => Err(Error::StandardFormUnavailable),
    }
}

/// −ln Tr√ρ₀√ρ₁ per copy. The SPES route raises the cutoff so the
/// discarded thermal tail stays below 1e-16.
pub fn bhattacharyya_exponent_nps(probe: NpsProbe, sc: &NpsScenario) -> Result<f64> {
    if sc.n_s == 0.0 {
        return Ok(0.0);
    }
    match probe {
        NpsProbe::Spes => {
            let sc = sc.with_cutoff(sc.cutoff.max(cutoff_for_tail(sc.n_b1(), 1e-16) + 3));
            let (r0, r1) = spes_returned_states(&sc)?;
            Ok(-s_overlap_fock(&r0, &r1, 0.5).ln())
        }
        _ => {
            let (h0, h1) = nps_pair(probe, sc)?;
            Ok(bhattacharyya(&h0, &h1)?.exponent)
        }
    }
}

/// Signal strength at which the coherent-state exponent overtakes SPES.
pub fn spes_coherent_crossover(eta: f64, n_b: f64, lo: f64, hi: f64) -> Result<f64> {
    let gap = |ns: f64| -> Result<f64> {
        let sc = NpsScenario::new(eta, n_b, ns)?;
        Ok(bhattacharyya_exponent_nps(NpsProbe::Spes, &sc)? - bhattacharyya_exponent_nps(NpsProbe::Coherent, &sc)?)
    };
    let mut err = None;
    let root = bisect(
        |ns| match gap(ns) {
            Ok(v) => v,
            Err(e) => {
                err.get_or_insert(e);
                f64::NAN
            }
        },
        lo,
        hi,
        1e-6,
        100,
    );
    match err {
        Some(e) => Err(e),
        None => root,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RiProbe {
    Tmsv,
    Spes,
}

/// ⟨v v†⟩ with v = (a_R, a_I, a_R†, a_I†) under H₁.
pub fn ri_covariance(probe: RiProbe, sc: &NpsScenario) -> CMatrix {
    let (eta, nb, ns) = (sc.eta, sc.n_b, sc.n_s);
    let r = eta * ns + nb;
    let m: [[f64; 4]; 4] = match probe {
        RiProbe::Tmsv => {
            let x = (eta * ns * (ns + 1.0)).sqrt();
            [[r + 1.0, 0.0, 0.0, x], [0.0, ns + 1.0, x, 0.0], [0.0, x, r, 0.0], [x, 0.0, 0.0, ns]]
        }
        RiProbe::Spes => {
            let x = (eta * ns * (1.0 - ns)).sqrt();
            [[r + 1.0, x, 0.0, 0.0], [x, 2.0 - ns, 0.0, 0.0], [0.0, 0.0, r, x], [0.0, 0.0, x, 1.0 - ns]]
        }
    };
    DMatrix::from_fn(4, 4, |i, j| c(m[i][j]))
}

/// Optimal threshold and exponent for Gaussian-approximated count statistics.
pub fn threshold_exponent(m: &GaussianMoments1D) -> Result<(f64, f64)> {
    let s = m.sigma0 + m.sigma1;
    if s == 0.0 {
        if m.mu0 == m.mu1 {
            return Ok((m.mu0, 0.0));
        }
        return Err(Error::DegenerateVariances);
    }
    let t = (m.mu1 * m.sigma0 + m.mu0 * m.sigma1) / s;
    Ok((t, 0.5 * ((m.mu1 - m.mu0) / s).powi(2)))
}

// Ladder modes: signal, idler, background.
const S: usize = 0;
const I: usize = 1;
const B: usize = 2;

/// SPES ⊗ thermal background. Normal-ordered moments factorise: the
/// single-photon part allows at most one creation/annihilation pair.
struct LadderState {
    amp: [f64; 2],
    n_b: f64,
}

impl LadderState {
    fn normal_moment(&self, dag: &[usize], ann: &[usize]) -> f64 {
        let sd: Vec<usize> = dag.iter().copied().filter(|&k| k != B).collect();
        let sa: Vec<usize> = ann.iter().copied().filter(|&k| k != B).collect();
        let (rb, ra) = (dag.len() - sd.len(), ann.len() - sa.len());
        if rb != ra || sd.len() != sa.len() || sd.len() > 1 {
            return 0.0;
        }
        let fact: f64 = (1..=rb).map(|k| k as f64).product();
        let mut v = fact * self.n_b.powi(rb as i32);
        if let (Some(&x), Some(&y)) = (sd.first(), sa.first()) {
            v *= self.amp[x] * self.amp[y];
        }
        v
    }

    /// Mean and variance of Σ D_jk b_j† b_k.
    fn quadratic_stats(&self, d: &[[f64; 3]; 3]) -> (f64, f64) {
        let mut m1 = 0.0;
        let mut m2 = 0.0;
        for j in 0..3 {
            for k in 0..3 {
                if d[j][k] == 0.0 {
                    continue;
                }
                m1 += d[j][k] * self.normal_moment(&[j], &[k]);
                for l in 0..3 {
                    for m in 0..3 {
                        let w = d[j][k] * d[l][m];
                        if w == 0.0 {
                            continue;
                        }
                        let mut e = self.normal_moment(&[j, l], &[k, m]);
                        if k == l {
                            e += self.normal_moment(&[j], &[m]);
                        }
                        m2 += w * e;
                    }
                }
            }
        }
        (m1, (m2 - m1 * m1).max(0.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MixingDetector {
    /// Photon counting on the X arm.
    Mmpc,
    /// Difference of X and Y arm counts.
    Mmpdc,
}

fn outer(a: &[f64; 3], b: &[f64; 3], sign: f64) -> [[f64; 3]; 3] {
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = a[i] * a[j] + sign * b[i] * b[j];
        }
    }
    m
}

/// Per-copy count statistics under H₀ and H₁ for the mode-mixing receivers.
/// `upper` selects the upper sign pair of the mixing beam splitter.
pub fn mixing_moments(sc: &NpsScenario, kappa: f64, det: MixingDetector, upper: bool) -> Result<GaussianMoments1D> {
    check_ns(sc.n_s)?;
    if !(0.0..=1.0).contains(&kappa) {
        return Err(Error::OutOfRange { what: "kappa in [0, 1]", value: kappa });
    }
    let sg = if upper { 1.0 } else { -1.0 };
    let amp = [sc.n_s.sqrt(), (1.0 - sc.n_s).sqrt()];
    let stats = |eta: f64, n_b: f64| {
        let mut r = [0.0; 3];
        r[S] = eta.sqrt();
        r[B] = (1.0 - eta).sqrt();
        let mut x = [0.0; 3];
        let mut y = [0.0; 3];
        for k in 0..3 {
            x[k] = kappa.sqrt() * r[k];
            y[k] = (1.0 - kappa).sqrt() * r[k];
        }
        x[I] += sg * (1.0 - kappa).sqrt();
        y[I] -= sg * kappa.sqrt();
        let d = match det {
            MixingDetector::Mmpc => outer(&x, &[0.0; 3], 0.0),
            MixingDetector::Mmpdc => outer(&x, &y, -1.0),
        };
        LadderState { amp, n_b }.quadratic_stats(&d)
    };
    let (mu0, v0) = stats(0.0, sc.n_b);
    let (mu1, v1) = stats(sc.eta, sc.n_b1());
    Ok(GaussianMoments1D { mu0, sigma0: v0.sqrt(), mu1, sigma1: v1.sqrt() })
}

fn mixing_exponent(sc: &NpsScenario, kappa: f64, det: MixingDetector) -> Result<f64> {
    let m = mixing_moments(sc, kappa, det, true)?;
    match threshold_exponent(&m) {
        Ok((_, chi)) => Ok(chi),
        Err(Error::DegenerateVariances) => Ok(f64::INFINITY),
        Err(e) => Err(e),
    }
}

pub fn mmpc_exponent(sc: &NpsScenario, kappa: f64) -> Result<f64> {
    mixing_exponent(sc, kappa, MixingDetector::Mmpc)
}

pub fn mmpdc_exponent(sc: &NpsScenario, kappa: f64) -> Result<f64> {
    mixing_exponent(sc, kappa, MixingDetector::Mmpdc)
}

/// MMPC exponent maximised over the mixing ratio; returns (κ, exponent).
/// The search runs over ln κ ∈ [−30, 0].
pub fn mmpc_optimal(sc: &NpsScenario) -> Result<(f64, f64)> {
    check_ns(sc.n_s)?;
    let mut err = None;
    let best = golden_section(
        |lk| match mmpc_exponent(sc, lk.exp()) {
            Ok(v) => -v,
            Err(e) => {
                err.get_or_insert(e);
                f64::INFINITY
            }
        },
        -30.0,
        0.0,
        1e-9,
        300,
    );
    match err {
        Some(e) => Err(e),
        None => Ok((best.x.exp(), -best.value)),
    }
}

/// Leading small-N_S form of the MMPC exponent.
pub fn mmpc_small_signal(sc: &NpsScenario, kappa: f64) -> f64 {
    let nb = sc.n_b;
    (1.0 - kappa) * sc.eta * sc.n_s / (2.0 * (3.0 * nb - kappa * (-nb * nb + 2.0 * nb + 1.0) + 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ladder(dim: usize) -> CMatrix {
        CMatrix::from_fn(dim, dim, |i, j| if j == i + 1 { c((j as f64).sqrt()) } else { c(0.0) })
    }

    #[test]
    fn spes_examples() {
        let s0 = spes_state(0.0).unwrap();
        assert_eq!(s0.matrix[(2, 2)], c(1.0));
        let s1 = spes_state(1.0).unwrap();
        assert_eq!(s1.matrix[(1, 1)], c(1.0));
        assert!((spes_state(0.3).unwrap().mean_photons(1) - 0.3).abs() < 1e-15);
        assert!(spes_state(1.2).is_err());
        // beam splitter on |1⟩_I|0⟩_S: the signal arm keeps the photon with probability N_S
        let one = FockOperator::number(1, 2).tensor(&FockOperator::number(0, 2));
        let split = apply_fock(&BosonicChannel::PureLoss(0.5), &one, 0).unwrap();
        assert!((split.mean_photons(0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn closed_form_matches_composition() {
        for &ns in &[0.0, 0.1, 0.7] {
            for &eta in &[0.0, 0.01, 0.3] {
                for &nb in &[0.0, 0.2, 2.0] {
                    let sc = NpsScenario::new(eta, nb, ns).unwrap();
                    let (r0, r1) = spes_returned_states(&sc).unwrap();
                    assert!((r1.trace() - 1.0).abs() < 1e-9);
                    if eta == 0.0 || ns == 0.0 {
                        assert!((&r0.matrix - &r1.matrix).camax() < 1e-12);
                    }
                    // mean return photons ηN_S + N_B
                    assert!((r1.mean_photons(1) - (eta * ns + nb)).abs() < 1e-7);
                }
            }
        }
    }

    #[test]
    fn ri_table_against_fock() {
        let sc = NpsScenario::new(0.2, 0.5, 0.4).unwrap();
        let (_, r1) = spes_returned_states(&sc).unwrap();
        let d = sc.cutoff;
        let id2 = CMatrix::identity(2, 2);
        let idd = CMatrix::identity(d, d);
        let a_i = ladder(2).kronecker(&idd);
        let a_r = id2.kronecker(&ladder(d));
        let ev = |op: CMatrix| (&r1.matrix * op).trace();
        let v = ri_covariance(RiProbe::Spes, &sc);
        assert!((ev(&a_r * a_i.adjoint()) - v[(0, 1)]).norm() < 1e-9);
        assert!((ev(a_r.adjoint() * &a_i) - v[(2, 3)]).norm() < 1e-9);
        assert!((ev(a_i.adjoint() * &a_i) + c(1.0) - v[(1, 1)]).norm() < 1e-9);
        assert!((ev(a_r.adjoint() * &a_r) - v[(2, 2)]).norm() < 1e-9);
        let t = ri_covariance(RiProbe::Tmsv, &sc);
        assert_eq!(t[(0, 3)], c((0.2f64 * 0.4 * 1.4).sqrt()));
        let zero = ri_covariance(RiProbe::Tmsv, &NpsScenario::new(0.0, 0.5, 0.4).unwrap());
        assert_eq!(zero[(0, 3)], c(0.0));
    }

    #[test]
    fn gaussian_pairs() {
        for p in [NpsProbe::Coherent, NpsProbe::Tmsv] {
            let (h0, h1) = nps_pair(p, &NpsScenario::new(0.0, 2.0, 0.3).unwrap()).unwrap();
            assert_eq!(h0, h1);
            let (h0, h1) = nps_pair(p, &NpsScenario::new(0.1, 2.0, 0.0).unwrap()).unwrap();
            assert_eq!(h0, h1);
        }
    }

    #[test]
    fn exponent_orderings() {
        let sc = NpsScenario::new(0.01, 20.0, 0.01).unwrap();
        let spes = bhattacharyya_exponent_nps(NpsProbe::Spes, &sc).unwrap();
        let coh = bhattacharyya_exponent_nps(NpsProbe::Coherent, &sc).unwrap();
        assert!(spes >= coh);
        assert_eq!(bhattacharyya_exponent_nps(NpsProbe::Spes, &NpsScenario::new(0.01, 20.0, 0.0).unwrap()).unwrap(), 0.0);
        for nb in [0.2, 20.0] {
            let sc = NpsScenario::new(0.01, nb, 1e-3).unwrap();
            let r = bhattacharyya_exponent_nps(NpsProbe::Spes, &sc).unwrap()
                / bhattacharyya_exponent_nps(NpsProbe::Tmsv, &sc).unwrap();
            assert!((0.9..=1.0).contains(&r), "{nb}: {r}");
        }
    }

    #[test]
    fn threshold_examples() {
        let m = GaussianMoments1D { mu0: 0.0, sigma0: 1.0, mu1: 2.0, sigma1: 1.0 };
        assert_eq!(threshold_exponent(&m).unwrap(), (1.0, 0.5));
        let m = GaussianMoments1D { mu0: 1.0, sigma0: 0.3, mu1: 1.0, sigma1: 2.0 };
        assert_eq!(threshold_exponent(&m).unwrap().1, 0.0);
        let m = GaussianMoments1D { mu0: 1.0, sigma0: 0.0, mu1: 2.0, sigma1: 0.0 };
        assert!(matches!(threshold_exponent(&m), Err(Error::DegenerateVariances)));
    }

    #[test]
    fn mixing_moments_match_printed_h0() {
        let (k, ns, nb) = (0.3, 0.2, 2.0);
        let sc = NpsScenario::new(0.1, nb, ns).unwrap();
        let m = mixing_moments(&sc, k, MixingDetector::Mmpc, true).unwrap();
        let mean = k * nb + (1.0 - k) * (1.0 - ns);
        let var = k * k * nb * (2.0 * nb + 1.0) + (1.0 - k).powi(2) * (1.0 - ns)
            + k * (1.0 - k) * ((1.0 - ns) * (4.0 * nb + 1.0) + nb)
            - mean * mean;
        assert!((m.mu0 - mean).abs() < 1e-12 && (m.sigma0 * m.sigma0 - var).abs() < 1e-10);
        let d = mixing_moments(&sc, k, MixingDetector::Mmpdc, true).unwrap();
        assert!((d.mu0 - (2.0 * k - 1.0) * (ns + nb - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn mixing_exponents() {
        let sc = NpsScenario::new(0.01, 100.0, 1e-3).unwrap();
        let target = 0.01 * 1e-3 / 602.0;
        assert!(((mmpdc_exponent(&sc, 0.5).unwrap() - target) / target).abs() < 0.02);
        assert_eq!(mmpc_exponent(&sc, 1.0).unwrap() < 1e-14, true);
        assert_eq!(mmpc_exponent(&sc, 0.0).unwrap(), 0.0);
        assert!((mmpc_small_signal(&sc, 0.0) - target).abs() < 1e-20);
        assert_eq!(mmpdc_exponent(&NpsScenario::new(0.0, 100.0, 1e-3).unwrap(), 0.5).unwrap(), 0.0);
        let coh = 0.01 * 1e-3 / 400.0;
        for k in [1e-4, 1e-3, 0.1, 0.5] {
            assert!(mmpc_exponent(&sc, k).unwrap() < coh);
            assert!(mmpdc_exponent(&sc, k).unwrap() < coh);
        }
    }

    #[test]
    fn lower_sign_pair() {
        let sc = NpsScenario::new(0.05, 1.5, 0.3).unwrap();
        for det in [MixingDetector::Mmpc, MixingDetector::Mmpdc] {
            for k in [0.2, 0.5, 0.8] {
                let a = threshold_exponent(&mixing_moments(&sc, k, det, true).unwrap()).unwrap().1;
                let b = threshold_exponent(&mixing_moments(&sc, k, det, false).unwrap()).unwrap().1;
                assert!(a > 0.0 && b >= 0.0);
            }
        }
    }

    #[test]
    fn receivers_below_optimal_measurement() {
        let sc = NpsScenario::new(0.1, 1.0, 0.1).unwrap();
        let bound = bhattacharyya_exponent_nps(NpsProbe::Spes, &sc).unwrap();
        for k in [0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0] {
            assert!(mmpc_exponent(&sc, k).unwrap() <= bound);
            assert!(mmpdc_exponent(&sc, k).unwrap() <= bound);
        }
    }

    #[test]
    fn mmpc_optimum_dominates_scan() {
        let sc = NpsScenario::new(0.01, 100.0, 1e-3).unwrap();
        let (k, chi) = mmpc_optimal(&sc).unwrap();
        assert!(k > 0.0 && k < 1.0);
        for e in -12..=0 {
            assert!(mmpc_exponent(&sc, 10f64.powi(e)).unwrap() <= chi * (1.0 + 1e-12));
        }
        assert!(chi < mmpc_small_signal(&sc, 0.0));
    }
}
