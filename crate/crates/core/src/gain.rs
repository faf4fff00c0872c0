//! Gain sensing of a quantum-limited amplifier: Fisher information of
//! number-diagonal and coherent probes, photon-counting estimators, and
//! energy-constrained Bures distances.

use crate::channels::DEFAULT_TRACE_TOL;
use crate::error::{Error, Result};
use crate::genfun::PhotonPmf;
use crate::optimize::bisect;
use crate::special::{ln_binom, ln_thermal_pmf, thermal_quantile};

const THRESHOLD_G_MAX: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainScenario {
    pub n: f64,
    pub m: usize,
    pub g: f64,
    pub eta_d: f64,
    pub tau: f64,
}

impl GainScenario {
    pub fn new(n: f64, m: usize, g: f64, eta_d: f64) -> Result<Self> {
        if n < 0.0 {
            return Err(Error::NegativeEnergy(n));
        }
        if m == 0 {
            return Err(Error::OutOfRange { what: "M >= 1", value: 0.0 });
        }
        if !(g >= 1.0) {
            return Err(Error::OutOfRange { what: "G >= 1", value: g });
        }
        if !(eta_d > 0.0 && eta_d <= 1.0) {
            return Err(Error::OutOfRange { what: "eta_d in (0, 1]", value: eta_d });
        }
        Ok(GainScenario { n, m, g, eta_d, tau: tau_of_gain(g) })
    }
}

pub fn tau_of_gain(g: f64) -> f64 {
    g.sqrt().acosh()
}

/// sech(τ′ − τ) written in terms of the gains.
pub fn nu(g: f64, g_prime: f64) -> f64 {
    1.0 / ((g * g_prime).sqrt() - ((g - 1.0) * (g_prime - 1.0)).max(0.0).sqrt())
}

fn unity_check(g: f64) -> Result<()> {
    if g <= 1.0 {
        Err(Error::GainAtUnity)
    } else {
        Ok(())
    }
}

/// Fidelity between the QLA outputs at gains G and G′ for a number-diagonal probe.
pub fn nds_output_fidelity(p_n: &PhotonPmf, g: f64, g_prime: f64) -> f64 {
    let v = nu(g, g_prime);
    let m = p_n.modes as i32;
    p_n.p.iter().enumerate().map(|(n, p)| p * v.powi(n as i32 + m)).sum()
}

/// (K_τ, K_G) for any number-diagonal probe.
pub fn qfi_nds(n: f64, m: usize, g: f64) -> Result<(f64, f64)> {
    unity_check(g)?;
    let k_tau = 4.0 * (n + m as f64);
    Ok((k_tau, k_tau / (4.0 * g * (g - 1.0))))
}

pub fn qfi_coherent(n: f64, m: usize, g: f64) -> Result<f64> {
    unity_check(g)?;
    Ok(n / (g * (2.0 * g - 1.0)) + m as f64 / (g * (g - 1.0)))
}

/// (J_hom, J_het) on G for coherent probes.
pub fn fi_homodyne_heterodyne(n: f64, m: usize, g: f64) -> (f64, f64) {
    (n / (g * (2.0 * g - 1.0)), (n / 2.0 + m as f64) / (g * g))
}

pub fn estimate_gain(y_total: u64, n: f64, m: usize, eta_d: f64) -> f64 {
    (y_total as f64 / eta_d + m as f64) / (n + m as f64)
}

pub fn mse_number(n: f64, m: usize, g: f64, eta_d: f64) -> f64 {
    let nm = n + m as f64;
    g * (g - 1.0) / nm + (1.0 - eta_d) / (eta_d * nm) * (g - m as f64 / nm)
}

pub fn mse_coherent(n: f64, m: usize, g: f64, eta_d: f64) -> f64 {
    let nm = n + m as f64;
    mse_number(n, m, g, eta_d) + g * g * n / (nm * nm)
}

pub fn qfi_coherent_lossy(n: f64, m: usize, g: f64, eta_d: f64) -> Result<f64> {
    unity_check(g)?;
    let gm = g - 1.0;
    Ok(eta_d * n / (g * (2.0 * eta_d * gm + 1.0)) + eta_d * m as f64 / (gm * (eta_d * gm + 1.0)))
}

/// Single-mode Fisher information on τ of photodetection after loss η_d,
/// for a number state |n⟩ at the amplifier input.
fn lossy_mode_fi(n: usize, tau: f64, eta_d: f64, cutoff: usize) -> Result<f64> {
    let (sh, ch) = (tau.sinh(), tau.cosh());
    let (s2, c2) = (sh * sh, ch * ch);
    let g = c2;
    let nf = n as f64;
    let a_max = thermal_quantile(nf + 1.0, g - 1.0, 1e-17);
    let kmax = cutoff.min(n + a_max);
    let (mut p, mut dp, mut d2p) = (vec![0.0; kmax + 1], vec![0.0; kmax + 1], vec![0.0; kmax + 1]);
    let (ln_eta, ln_loss) = (eta_d.ln(), (1.0 - eta_d).ln());
    let mut small = 0;
    for a in 0..=a_max.max(1) {
        let af = a as f64;
        let w = ln_thermal_pmf(a, nf + 1.0, g - 1.0).exp();
        // ∂_τ ln w_a and ∂²_τ w_a / w_a
        let f1 = 2.0 * (af - (nf + 1.0) * s2) / (sh * ch);
        let f2 = 2.0 * (2.0 * (nf + 1.0).powi(2) * s2 * s2 - (4.0 * af * nf + 6.0 * af + nf + 1.0) * s2 + 2.0 * af * af - af)
            / (s2 * c2);
        let total = n + a;
        for k in 0..=total.min(kmax) {
            let lb = if eta_d == 1.0 {
                if k == total {
                    0.0
                } else {
                    continue;
                }
            } else {
                ln_binom(total as f64, k as f64) + k as f64 * ln_eta + (total - k) as f64 * ln_loss
            };
            let wb = w * lb.exp();
            if wb == 0.0 {
                continue;
            }
            p[k] += wb;
            dp[k] += wb * f1;
            d2p[k] += wb * f2;
        }
        if a > 3 && w < 1e-14 * p.iter().sum::<f64>() {
            small += 1;
            if small >= 3 {
                break;
            }
        } else {
            small = 0;
        }
    }
    let mass: f64 = p.iter().sum();
    if 1.0 - mass > 1e-12 {
        return Err(Error::CutoffOverflow { lost: 1.0 - mass, tol: 1e-12 });
    }
    Ok(p.iter()
        .zip(&dp)
        .zip(&d2p)
        .filter(|((p, _), _)| **p > 0.0)
        .map(|((p, d), d2)| d * d / p - d2)
        .sum())
}

/// K_G of a product number-state probe measured after detector loss η_d,
/// summed over modes.
pub fn qfi_number_lossy(n_per_mode: &[usize], g: f64, eta_d: f64, cutoff: usize) -> Result<f64> {
    unity_check(g)?;
    if !(0.0..=1.0).contains(&eta_d) {
        return Err(Error::OutOfRange { what: "eta_d in [0, 1]", value: eta_d });
    }
    if eta_d == 0.0 {
        return Ok(0.0);
    }
    let tau = tau_of_gain(g);
    let mut k_tau = 0.0;
    for &n in n_per_mode {
        k_tau += lossy_mode_fi(n, tau, eta_d, cutoff)?;
    }
    Ok(k_tau / (4.0 * g * (g - 1.0)))
}

/// Gain above which single-photon probes with photon counting beat the
/// coherent-state QCRB. Returns 1 when they beat it for every G > 1.
pub fn threshold_gain(eta_d: f64, n: f64, m: usize) -> Result<f64> {
    let h = |g: f64| mse_number(n, m, g, eta_d) - 1.0 / qfi_coherent(n, m, g).unwrap_or(f64::INFINITY);
    let lo = 1.0 + 1e-9;
    if h(lo) <= 0.0 {
        return Ok(1.0);
    }
    if h(THRESHOLD_G_MAX) > 0.0 {
        return Err(Error::NoCrossing(THRESHOLD_G_MAX));
    }
    bisect(h, lo, THRESHOLD_G_MAX, 1e-12, 200)
}

/// (B, F_min) for the energy-constrained Bures distance over all probes.
pub fn ecb_distance(n: f64, m: usize, g: f64, g_prime: f64) -> (f64, f64) {
    let v = nu(g, g_prime);
    let fl = n.floor();
    let frac = n - fl;
    let f = v.powi(m as i32) * ((1.0 - frac) * v.powf(fl) + frac * v.powf(fl + 1.0));
    let f = f.min(1.0);
    ((1.0 - f).sqrt(), f)
}

/// (B, F_min) restricted to classical probes.
pub fn cecb_distance(n: f64, m: usize, g: f64, g_prime: f64) -> (f64, f64) {
    let v = nu(g, g_prime);
    let (ch, chp) = (g.sqrt(), g_prime.sqrt());
    let (sh2, shp2) = (g - 1.0, g_prime - 1.0);
    let f = v.powi(m as i32) * (-n * (chp - ch).powi(2) / (2.0 * (shp2 + sh2 + 1.0))).exp();
    let f = f.min(1.0);
    ((1.0 - f).sqrt(), f)
}

/// Classical Fisher information on τ of the joint ancilla/signal
/// photon-number record. Depends on the totals only.
pub fn schmidt_fisher_information(p_n: &PhotonPmf, g: f64, cutoff: usize) -> Result<f64> {
    unity_check(g)?;
    let tau = tau_of_gain(g);
    let (th, shch) = (tau.tanh(), tau.sinh() * tau.cosh());
    let m = p_n.modes as f64;
    let mut fi = 0.0;
    let mut lost = p_n.tail;
    for (x, &px) in p_n.p.iter().enumerate() {
        if px == 0.0 {
            continue;
        }
        if x > cutoff {
            lost += px;
            continue;
        }
        let xm = x as f64 + m;
        let mut mass = 0.0;
        for j in 0..=(cutoff - x) {
            let a = ln_thermal_pmf(j, xm, g - 1.0).exp();
            let score = -2.0 * xm * th + 2.0 * j as f64 / shch;
            fi += px * a * score * score;
            mass += a;
        }
        lost += px * (1.0 - mass).max(0.0);
    }
    if lost > DEFAULT_TRACE_TOL {
        return Err(Error::CutoffOverflow { lost, tol: DEFAULT_TRACE_TOL });
    }
    Ok(fi)
}
