//! Covert target detection: perfect-covertness exponents, ε-covert energy
//! bands, probe-independent error floors and Willie's trace norm.

use crate::channels::BosonicChannel;
use crate::distinguish::{chernoff, OverlapResult, S_MAX, S_MIN};
use crate::error::{Error, Result};
use crate::gaussian::{correlated_pair, GaussianState};
use crate::genfun::{pgf_from_pmf, pgf_through_channel, Pgf, PhotonPmf};
use crate::optimize::{bisect, gauss_laguerre, golden_section};
use crate::special::{ln_thermal_pmf, thermal_quantile};

pub const GCS_NODES: usize = 64;
pub const GCS_CHECK_NODES: usize = 96;
const KKT_MAX_ITER: usize = 200;
const KKT_TAIL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum Probe {
    Tmsv(f64),
    Gcs(f64),
    Pmf(PhotonPmf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CovertScenario {
    pub eta: f64,
    pub n_b: f64,
    pub m: usize,
    pub eps: f64,
    pub probe: Probe,
}

/// What Willie sees on his M modes.
#[derive(Debug, Clone, PartialEq)]
pub enum WillieState {
    /// Product of M identical thermal modes with the given mean.
    Thermal(f64),
    /// Total-photon-number generating function.
    Pgf(Pgf),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBand {
    pub ns_min: f64,
    pub ns_max: f64,
    /// (λ₁, λ₂) of the lower and upper branch.
    pub lambda_lower: (f64, f64),
    pub lambda_upper: (f64, f64),
    pub d: usize,
}

pub fn willie_states(sc: &CovertScenario) -> Result<(WillieState, WillieState)> {
    let s0 = WillieState::Thermal(sc.n_b);
    let s1 = match &sc.probe {
        Probe::Tmsv(n) | Probe::Gcs(n) => WillieState::Thermal((1.0 - sc.eta) * n + sc.eta * sc.n_b),
        Probe::Pmf(p) => WillieState::Pgf(pgf_through_channel(
            &pgf_from_pmf(p),
            &BosonicChannel::ThermalLoss { eta: 1.0 - sc.eta, n_b: sc.n_b },
        )?),
    };
    Ok((s0, s1))
}

/// Alice's returned (mode 0) and idler (mode 1) states for a TMSV probe.
pub fn tmsv_return_states(eta: f64, n_b: f64, n_s: f64) -> (GaussianState, GaussianState) {
    let s = n_s + 0.5;
    let c = (n_s * (n_s + 1.0)).sqrt();
    let a = eta * n_s + (1.0 - eta) * n_b + 0.5;
    let b = n_b + 0.5;
    (correlated_pair(b, s, 0.0), correlated_pair(a, s, eta.sqrt() * c))
}

pub fn tmsv_exponent(eta: f64, n_b: f64, n_s: f64) -> Result<OverlapResult> {
    check_scenario(eta, n_b)?;
    if n_s < 0.0 {
        return Err(Error::NegativeEnergy(n_s));
    }
    let (v0, v1) = tmsv_return_states(eta, n_b, n_s);
    chernoff(&v0, &v1)
}

pub fn perfect_tmsv_exponent(eta: f64, n_b: f64) -> Result<OverlapResult> {
    tmsv_exponent(eta, n_b, n_b)
}

fn check_scenario(eta: f64, n_b: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::OutOfRange { what: "reflectivity in [0, 1]", value: eta });
    }
    if n_b < 0.0 {
        return Err(Error::NegativeEnergy(n_b));
    }
    Ok(())
}

fn lambda_s(x: f64, s: f64) -> f64 {
    let (p, m) = ((x + 0.5).powf(s), (x - 0.5).max(0.0).powf(s));
    (p + m) / (p - m)
}

fn g_s(x: f64, s: f64) -> f64 {
    1.0 / ((x + 0.5).powf(s) - (x - 0.5).max(0.0).powf(s))
}

/// s-overlap of thermal(n0) against thermal(n1) displaced by |δ|² in
/// quadrature units.
pub fn thermal_pair_overlap(n0: f64, n1: f64, delta2: f64, s: f64) -> f64 {
    let (v0, v1) = (n0 + 0.5, n1 + 0.5);
    let sig = lambda_s(v0, s) + lambda_s(v1, 1.0 - s);
    2.0 * g_s(v0, s) * g_s(v1, 1.0 - s) / sig * (-delta2 / sig).exp()
}

fn gcs_integral(eta: f64, n_b: f64, n_t: f64, nodes: usize) -> f64 {
    let (t, w) = gauss_laguerre(nodes);
    let n1 = (1.0 - eta) * n_b;
    let mut warm: f64 = 0.5;
    let mut acc = 0.0;
    for (ti, wi) in t.iter().zip(&w) {
        let d2 = 2.0 * eta * n_t * ti;
        let f = |s: f64| thermal_pair_overlap(n_b, n1, d2, s);
        let (lo, hi) = ((warm - 0.1).max(S_MIN), (warm + 0.1).min(S_MAX));
        let mut m = golden_section(f, lo, hi, 1e-10, 200);
        let at_edge = (m.x - lo).abs() < 1e-8 && lo > S_MIN || (hi - m.x).abs() < 1e-8 && hi < S_MAX;
        if at_edge {
            m = golden_section(f, S_MIN, S_MAX, 1e-10, 200);
        }
        warm = m.x;
        acc += wi * m.value;
    }
    acc / w.iter().sum::<f64>()
}

/// Chernoff exponent −ln ∫P(α) inf_s C_s[α] d²α of a Gaussian-distributed
/// coherent probe with per-mode energy `n_t`.
pub fn gcs_exponent(eta: f64, n_b: f64, n_t: f64) -> Result<f64> {
    check_scenario(eta, n_b)?;
    if n_t < 0.0 {
        return Err(Error::NegativeEnergy(n_t));
    }
    if eta == 0.0 {
        return Ok(0.0);
    }
    let v1 = gcs_integral(eta, n_b, n_t, GCS_NODES);
    let v2 = gcs_integral(eta, n_b, n_t, GCS_CHECK_NODES);
    let (c1, c2) = (-v1.ln(), -v2.ln());
    if (c1 - c2).abs() > 1e-8 * c2.abs() + 1e-15 {
        return Err(Error::QuadratureNonConverged { n1: GCS_NODES, v1: c1, n2: GCS_CHECK_NODES, v2: c2 });
    }
    Ok(c1.max(0.0))
}

/// Bhattacharyya exponent of the GCS probe; at s = ½ the amplitude
/// average is a Laplace transform and has a closed form.
pub fn gcs_bhattacharyya_exponent(eta: f64, n_b: f64, n_t: f64) -> Result<f64> {
    check_scenario(eta, n_b)?;
    if n_t < 0.0 {
        return Err(Error::NegativeEnergy(n_t));
    }
    let n1 = (1.0 - eta) * n_b;
    let sig = lambda_s(n_b + 0.5, 0.5) + lambda_s(n1 + 0.5, 0.5);
    let a = thermal_pair_overlap(n_b, n1, 0.0, 0.5);
    Ok(-(a / (1.0 + 2.0 * eta * n_t / sig)).ln())
}

pub fn perfect_gcs_exponent(eta: f64, n_b: f64) -> Result<f64> {
    gcs_exponent(eta, n_b, n_b)
}

/// Small-η Bhattacharyya approximations and their ratio.
pub fn analytic_exponents(eta: f64, n_b: f64) -> (f64, f64, f64) {
    let tmsv = -(1.0 - eta / 4.0 * (1.0 - 1.0 / (2.0 * n_b + 1.0).powi(2))).ln();
    let root = (n_b * (n_b + 1.0)).sqrt();
    let gcs = -(1.0 - 2.0 * eta * n_b * (n_b - root + 0.5)).ln();
    let ratio = (n_b + 1.0) * (2.0 * (n_b + root) + 1.0) / (2.0 * n_b + 1.0).powi(2);
    (tmsv, gcs, ratio)
}

/// Truncation for the M-mode thermal photon law: the 1 − 1e-12 quantile, doubled.
pub fn kkt_truncation(n_b: f64, m: usize) -> usize {
    2 * thermal_quantile(m as f64, n_b, KKT_TAIL).max(1)
}

fn thermal_weights(n_b: f64, m: usize, d: usize) -> Vec<f64> {
    (0..=d).map(|n| ln_thermal_pmf(n, m as f64, n_b).exp()).collect()
}

/// Solution of the truncated stationarity system
/// q_n = 𝒩 λ₁² w_n / (4 (s_n − λ₂)²),  Σ q_n = 1,  Σ √(w_n q_n) = 1 − 2ε.
#[derive(Debug, Clone)]
struct KktSolution {
    lambda1: f64,
    lambda2: f64,
    q: Vec<f64>,
}

fn kkt_residual(w: &[f64], s: &[f64], norm: f64, target: f64, l1: f64, l2: f64) -> ([f64; 2], [[f64; 2]; 2]) {
    let (mut s2, mut s3, mut sa, mut sb) = (0.0, 0.0, 0.0, 0.0);
    for (wn, sn) in w.iter().zip(s) {
        let u = 1.0 / (sn - l2);
        s2 += wn * u * u;
        s3 += wn * u * u * u;
        sa += wn * u.abs();
        sb += wn * u.signum() * u * u;
    }
    let f1 = 0.25 * l1 * l1 * norm * s2 - 1.0;
    let f2 = 0.5 * l1.abs() * norm * sa - target;
    let j = [
        [0.5 * l1 * norm * s2, 0.5 * l1 * l1 * norm * s3],
        [0.5 * l1.signum() * norm * sa, 0.5 * l1.abs() * norm * sb],
    ];
    ([f1, f2], j)
}

fn kkt_solve(w: &[f64], s: &[f64], eps: f64, upper: bool) -> Result<KktSolution> {
    let norm = 1.0 / w.iter().sum::<f64>();
    let target = 1.0 - 2.0 * eps;
    let mean: f64 = norm * w.iter().zip(s).map(|(w, s)| w * s).sum::<f64>();
    let var: f64 = norm * w.iter().zip(s).map(|(w, s)| w * (s - mean).powi(2)).sum::<f64>();
    let shift = var.sqrt() / (1.0 - target * target).sqrt();
    let mut l2 = if upper { mean + shift } else { mean - shift };
    let l1_from = |l2: f64| {
        let s2: f64 = w.iter().zip(s).map(|(w, s)| w / (s - l2).powi(2)).sum();
        2.0 / (norm * s2).sqrt()
    };
    let mut l1 = l1_from(l2);
    let (mut f, mut j) = kkt_residual(w, s, norm, target, l1, l2);
    for _ in 0..KKT_MAX_ITER {
        let fnorm = f[0].abs().max(f[1].abs());
        if fnorm < 1e-13 {
            let q = w.iter().zip(s).map(|(w, s)| norm * l1 * l1 * w / (4.0 * (s - l2).powi(2))).collect();
            return Ok(KktSolution { lambda1: l1, lambda2: l2, q });
        }
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        let d1 = (j[1][1] * f[0] - j[0][1] * f[1]) / det;
        let d2 = (j[0][0] * f[1] - j[1][0] * f[0]) / det;
        let mut step = 1.0;
        loop {
            let (n1, n2) = (l1 - step * d1, l2 - step * d2);
            let (fn_, jn) = kkt_residual(w, s, norm, target, n1, n2);
            if fn_[0].abs().max(fn_[1].abs()) < fnorm || step < 1e-12 {
                l1 = n1;
                l2 = n2;
                f = fn_;
                j = jn;
                break;
            }
            step *= 0.5;
        }
    }
    Err(Error::NoConvergence(KKT_MAX_ITER))
}

fn check_eps(eps: f64) -> Result<()> {
    if !(0.0..=0.5).contains(&eps) {
        return Err(Error::OutOfRange { what: "covertness in [0, 1/2]", value: eps });
    }
    if eps == 0.5 {
        return Err(Error::ConstraintVacuous);
    }
    Ok(())
}

/// Per-mode probe energies allowed by the necessary ε-covertness condition.
pub fn kkt_energy_band(n_b: f64, m: usize, eps: f64, eta: f64, d: Option<usize>) -> Result<EnergyBand> {
    check_eps(eps)?;
    check_scenario(eta, n_b)?;
    let d = d.unwrap_or_else(|| kkt_truncation(n_b, m));
    if eps == 0.0 || n_b == 0.0 {
        let nan = (f64::NAN, f64::NAN);
        return Ok(EnergyBand { ns_min: n_b, ns_max: n_b, lambda_lower: nan, lambda_upper: nan, d });
    }
    let w = thermal_weights(n_b, m, d);
    let s: Vec<f64> = (0..=d).map(|n| n as f64).collect();
    let to_ns = |sol: &KktSolution| -> Result<f64> {
        if sol.q[d] > 1e-9 {
            return Err(Error::TruncationTooSmall(sol.q[d]));
        }
        let e: f64 = sol.q.iter().enumerate().map(|(n, q)| n as f64 * q).sum();
        Ok((e / m as f64 - eta * n_b) / (1.0 - eta))
    };
    let lo = kkt_solve(&w, &s, eps, false)?;
    let hi = kkt_solve(&w, &s, eps, true)?;
    Ok(EnergyBand {
        ns_min: to_ns(&lo)?,
        ns_max: to_ns(&hi)?,
        lambda_lower: (lo.lambda1, lo.lambda2),
        lambda_upper: (hi.lambda1, hi.lambda2),
        d,
    })
}

/// ν = (√(G₀G₁) − √((G₀−1)(G₁−1)))⁻¹ with G₀ = N_B+1, G₁ = (1−η)N_B+1.
pub fn nu_factor(eta: f64, n_b: f64) -> f64 {
    let (g0, g1) = (n_b + 1.0, (1.0 - eta) * n_b + 1.0);
    1.0 / ((g0 * g1).sqrt() - ((g0 - 1.0) * (g1 - 1.0)).sqrt())
}

fn alice_ratio(eta: f64, n_b: f64) -> f64 {
    1.0 - eta / ((1.0 - eta) * n_b + 1.0)
}

#[derive(Debug, Clone, Copy)]
pub enum ProbeEnergy<'a> {
    Pmf(&'a PhotonPmf),
    Total(f64),
}

/// Lower bound on the fidelity between Alice's hypothesis states.
pub fn alice_fidelity_lower_bound(probe: ProbeEnergy<'_>, eta: f64, n_b: f64, m: usize) -> f64 {
    let r = alice_ratio(eta, n_b).sqrt();
    let nu_m = nu_factor(eta, n_b).powi(m as i32);
    match probe {
        ProbeEnergy::Pmf(p) => nu_m * p.p.iter().rev().fold(0.0, |acc, c| acc * r + c),
        ProbeEnergy::Total(ns) => nu_m * r.powf(ns),
    }
}

/// Matching point x of the Willie-side PGF argument with Alice's fidelity bound.
pub fn floor_matching_point(eta: f64, n_b: f64) -> f64 {
    let theta = alice_ratio(eta, n_b).sqrt();
    1.0 - (1.0 - theta) / (1.0 - eta - eta * n_b * (1.0 - theta))
}

/// ln of ν(N_B+1−N_B/x)(ηN_B(1−x)+1), the per-mode factor of the floor fidelity.
fn floor_log_factor(eta: f64, n_b: f64) -> Result<(f64, f64)> {
    check_scenario(eta, n_b)?;
    let x = floor_matching_point(eta, n_b);
    let lo = n_b / (n_b + 1.0);
    if eta > 0.4 || !(lo..=1.0).contains(&x) {
        return Err(Error::ConvergenceConditionViolated { x, lo });
    }
    let v = nu_factor(eta, n_b).ln() + (n_b + 1.0 - n_b / x).ln() + (eta * n_b * (1.0 - x) + 1.0).ln();
    Ok((v, x))
}

/// Probe-independent lower bound on Alice's error probability under ε-covertness.
pub fn ecovert_error_floor(eta: f64, n_b: f64, m: usize, eps: f64) -> Result<f64> {
    if !(0.0..=0.5).contains(&eps) {
        return Err(Error::OutOfRange { what: "covertness in [0, 1/2]", value: eps });
    }
    let (lf, _) = floor_log_factor(eta, n_b)?;
    let a = (1.0 - 2.0 * eps).powi(4) * (2.0 * m as f64 * lf).exp();
    Ok(a / (2.0 * (1.0 + (1.0 - a).max(0.0).sqrt())))
}

/// lim −ln(2·floor)/M.
pub fn ecovert_floor_exponent(eta: f64, n_b: f64) -> Result<f64> {
    Ok(-2.0 * floor_log_factor(eta, n_b)?.0)
}

fn ln_nb(n: usize, m: f64, nb: f64) -> f64 {
    ln_thermal_pmf(n, m, nb)
}

/// ‖σ₀ − σ₁‖₁ for Willie's M-mode thermal hypotheses.
pub fn willie_trace_norm(n_s: f64, eta: f64, n_b: f64, m: usize) -> f64 {
    let n = (1.0 - eta) * n_s + eta * n_b;
    let mf = m as f64;
    if n == n_b {
        return 0.0;
    }
    if n_b == 0.0 || n == 0.0 {
        let other = if n_b == 0.0 { n } else { n_b };
        return 2.0 * (1.0 - (-mf * (other + 1.0).ln()).exp());
    }
    let nt = (mf * ((n + 1.0) / (n_b + 1.0)).ln() / (n * (n_b + 1.0) / ((n + 1.0) * n_b)).ln()).floor();
    let nt = nt.max(-1.0);
    // below n_t the lower-brightness law dominates
    let (lo, hi) = if n > n_b { (n_b, n) } else { (n, n_b) };
    let mut acc = 0.0;
    if nt >= 0.0 {
        for k in 0..=nt as usize {
            acc += ln_nb(k, mf, lo).exp() - ln_nb(k, mf, hi).exp();
        }
    }
    (2.0 * acc).clamp(0.0, 2.0)
}

/// Largest per-mode TMSV/GCS brightness with ‖σ₀ − σ₁‖₁ ≤ 4ε.
pub fn max_covert_brightness(eta: f64, n_b: f64, m: usize, eps: f64) -> Result<f64> {
    if !(0.0..=0.5).contains(&eps) {
        return Err(Error::OutOfRange { what: "covertness in [0, 1/2]", value: eps });
    }
    check_scenario(eta, n_b)?;
    if eps == 0.0 || n_b == 0.0 {
        return Ok(n_b);
    }
    let hi = n_b * (1.0 + 1.0 / (m as f64).sqrt()) * 2.0;
    bisect(|ns| willie_trace_norm(ns, eta, n_b, m) - 4.0 * eps, n_b, hi, 1e-8, 200)
}

/// Per-copy Chernoff exponent of a TMSV or GCS probe at its ε-covert brightness.
pub fn ecovert_probe_exponent(sc: &CovertScenario) -> Result<f64> {
    let ns = max_covert_brightness(sc.eta, sc.n_b, sc.m, sc.eps)?;
    match sc.probe {
        Probe::Tmsv(_) => Ok(tmsv_exponent(sc.eta, sc.n_b, ns)?.exponent),
        Probe::Gcs(_) => gcs_exponent(sc.eta, sc.n_b, ns),
        Probe::Pmf(_) => Err(Error::OutOfRange { what: "TMSV or GCS probe", value: f64::NAN }),
    }
}

/// Ratio of the ε-covert fidelity bound to the numerically minimised fidelity.
pub fn kkt_fidelity_tightness(eta: f64, n_b: f64, m: usize, eps: f64, d: Option<usize>) -> Result<f64> {
    check_eps(eps)?;
    let (_, x) = floor_log_factor(eta, n_b)?;
    let mf = m as f64;
    let d = d.unwrap_or_else(|| kkt_truncation(n_b, m));
    let w = thermal_weights(n_b, m, d);
    let norm = 1.0 / w.iter().sum::<f64>();
    let n0 = (mf * n_b).round();
    let s: Vec<f64> = (0..=d).map(|n| x.powf(n as f64 - n0)).collect();
    let ln_sum = if eps == 0.0 || n_b == 0.0 {
        (norm * w.iter().zip(&s).map(|(w, s)| w * s).sum::<f64>()).ln()
    } else {
        let mut best = f64::INFINITY;
        for upper in [false, true] {
            if let Ok(sol) = kkt_solve(&w, &s, eps, upper) {
                let v: f64 = sol.q.iter().zip(&s).map(|(q, s)| q * s).sum();
                best = best.min(v);
            }
        }
        if !best.is_finite() {
            return Err(Error::NoConvergence(KKT_MAX_ITER));
        }
        best.ln()
    } + n0 * x.ln();
    let ln_bound = 2.0 * (1.0 - 2.0 * eps).ln() + mf * (n_b + 1.0 - n_b / x).ln();
    Ok((ln_bound - ln_sum).exp())
}

/// exp(−β𝒩_S)/4 with β = −ln[1 − η/(N_B+1)].
pub fn nps_error_lower_bound(n_s_total: f64, eta: f64, n_b: f64) -> f64 {
    let beta = -(1.0 - eta / (n_b + 1.0)).ln();
    (-beta * n_s_total).exp() / 4.0
}
