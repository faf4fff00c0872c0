//! Phase-insensitive bosonic channels on Gaussian moments and on truncated
//! Fock operators.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{cutoff_for_tail, CMatrix, FockOperator};
use crate::gaussian::GaussianState;
use crate::special::ln_binom;

pub const DEFAULT_TRACE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BosonicChannel {
    /// a → √η̃ a + √(1−η̃) e
    PureLoss(f64),
    /// a → √G a + √(G−1) e†
    Qla(f64),
    /// transmittance η with thermal environment of N_B photons
    ThermalLoss { eta: f64, n_b: f64 },
}

impl BosonicChannel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            BosonicChannel::PureLoss(t) if !(0.0..=1.0).contains(&t) => {
                Err(Error::OutOfRange { what: "transmittance in [0, 1]", value: t })
            }
            BosonicChannel::Qla(g) if g < 1.0 => Err(Error::OutOfRange { what: "gain >= 1", value: g }),
            BosonicChannel::ThermalLoss { eta, .. } if !(0.0..=1.0).contains(&eta) => {
                Err(Error::OutOfRange { what: "transmittance in [0, 1]", value: eta })
            }
            BosonicChannel::ThermalLoss { n_b, .. } if n_b < 0.0 => Err(Error::NegativeEnergy(n_b)),
            _ => Ok(()),
        }
    }

    /// Loss-then-amplifier cascade (η̃, G) for a thermal-loss channel.
    pub fn cascade(&self) -> Option<(f64, f64)> {
        match *self {
            BosonicChannel::ThermalLoss { eta, n_b } => Some(decompose_thermal_loss(eta, n_b)),
            _ => None,
        }
    }

    /// Mean output photons for a single mode carrying `n` input photons.
    pub fn output_mean(&self, n: f64) -> f64 {
        match *self {
            BosonicChannel::PureLoss(t) => t * n,
            BosonicChannel::Qla(g) => g * n + g - 1.0,
            BosonicChannel::ThermalLoss { eta, n_b } => eta * n + (1.0 - eta) * n_b,
        }
    }
}

/// G = (1−η)N_B + 1, η̃ = η/G.
pub fn decompose_thermal_loss(eta: f64, n_b: f64) -> (f64, f64) {
    let g = (1.0 - eta) * n_b + 1.0;
    (eta / g, g)
}

fn scale_mode(state: &mut GaussianState, mode: usize, t: f64, noise: f64) {
    let n = state.modes;
    let idx = [mode, n + mode];
    let r = t.sqrt();
    for &i in &idx {
        state.mean[i] *= r;
        for j in 0..2 * n {
            state.cov[(i, j)] *= r;
            state.cov[(j, i)] *= r;
        }
        state.cov[(i, i)] += noise;
    }
}

pub fn apply_gaussian(ch: &BosonicChannel, state: &GaussianState, mode: usize) -> Result<GaussianState> {
    ch.validate()?;
    if mode >= state.modes {
        return Err(Error::BadModeIndex { index: mode, modes: state.modes });
    }
    let mut out = state.xxpp();
    match *ch {
        BosonicChannel::PureLoss(t) => scale_mode(&mut out, mode, t, 0.5 * (1.0 - t)),
        BosonicChannel::Qla(g) => scale_mode(&mut out, mode, g, 0.5 * (g - 1.0)),
        BosonicChannel::ThermalLoss { eta, n_b } => {
            let (t, g) = decompose_thermal_loss(eta, n_b);
            scale_mode(&mut out, mode, t, 0.5 * (1.0 - t));
            scale_mode(&mut out, mode, g, 0.5 * (g - 1.0));
        }
    }
    Ok(out)
}

/// Direct Bogoliubov form of the thermal-loss channel, without the cascade.
pub fn apply_thermal_loss_direct(eta: f64, n_b: f64, state: &GaussianState, mode: usize) -> GaussianState {
    let mut out = state.xxpp();
    scale_mode(&mut out, mode, eta, (1.0 - eta) * (n_b + 0.5));
    out
}

fn ln_pow(x: f64, k: f64) -> f64 {
    if k == 0.0 {
        0.0
    } else {
        k * x.ln()
    }
}

/// Single-mode Kraus operators as sparse maps: for each operator, a list of
/// (input level, output level, amplitude).
pub fn kraus_maps(ch: &BosonicChannel, dim: usize) -> Vec<Vec<(usize, usize, f64)>> {
    match *ch {
        BosonicChannel::PureLoss(t) => (0..dim)
            .map(|l| {
                (l..dim)
                    .filter_map(|n| {
                        let (nf, lf) = (n as f64, l as f64);
                        let ln_a = 0.5 * (ln_binom(nf, lf) + ln_pow(t, nf - lf) + ln_pow(1.0 - t, lf));
                        let a = ln_a.exp();
                        (a > 0.0).then_some((n, n - l, a))
                    })
                    .collect()
            })
            .collect(),
        BosonicChannel::Qla(g) => {
            let ln_sech2 = -g.ln();
            let ln_tanh2 = (1.0 - 1.0 / g).ln();
            (0..dim)
                .map(|a| {
                    (0..dim.saturating_sub(a))
                        .filter_map(|n| {
                            let (nf, af) = (n as f64, a as f64);
                            let ln_amp = 0.5 * (ln_binom(nf + af, af) + (nf + 1.0) * ln_sech2)
                                + if a == 0 { 0.0 } else { 0.5 * af * ln_tanh2 };
                            let v = ln_amp.exp();
                            (v > 0.0).then_some((n, n + a, v))
                        })
                        .collect()
                })
                .collect()
        }
        BosonicChannel::ThermalLoss { .. } => unreachable!("thermal loss acts through its cascade"),
    }
}

fn apply_kraus(rho: &FockOperator, mode: usize, maps: &[Vec<(usize, usize, f64)>]) -> FockOperator {
    let dims = &rho.mode_dims;
    let d = dims[mode];
    let inner: usize = dims[mode + 1..].iter().product();
    let n = rho.dim();
    let mut out = CMatrix::zeros(n, n);
    let level = |i: usize| (i / inner) % d;
    let mut nz = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let v = rho.matrix[(i, j)];
            if v.re != 0.0 || v.im != 0.0 {
                nz.push((i, j, v));
            }
        }
    }
    let mut lookup: Vec<Option<(usize, f64)>> = vec![None; d];
    for map in maps {
        lookup.iter_mut().for_each(|x| *x = None);
        for &(lin, lout, amp) in map {
            lookup[lin] = Some((lout, amp));
        }
        for &(i, j, v) in &nz {
            let (li, lj) = (level(i), level(j));
            if let (Some((oi, ai)), Some((oj, aj))) = (lookup[li], lookup[lj]) {
                let io = i + oi * inner - li * inner;
                let jo = j + oj * inner - lj * inner;
                out[(io, jo)] += v * (ai * aj);
            }
        }
    }
    FockOperator { mode_dims: dims.clone(), matrix: out, trace_target: rho.trace_target }
}

pub fn apply_fock(ch: &BosonicChannel, rho: &FockOperator, mode: usize) -> Result<FockOperator> {
    apply_fock_with_tol(ch, rho, mode, DEFAULT_TRACE_TOL)
}

pub fn apply_fock_with_tol(ch: &BosonicChannel, rho: &FockOperator, mode: usize, tol: f64) -> Result<FockOperator> {
    ch.validate()?;
    if mode >= rho.mode_dims.len() {
        return Err(Error::BadModeIndex { index: mode, modes: rho.mode_dims.len() });
    }
    let out = match *ch {
        BosonicChannel::ThermalLoss { eta, n_b } => {
            let (t, g) = decompose_thermal_loss(eta, n_b);
            let lossy = apply_kraus(rho, mode, &kraus_maps(&BosonicChannel::PureLoss(t), rho.mode_dims[mode]));
            apply_kraus(&lossy, mode, &kraus_maps(&BosonicChannel::Qla(g), rho.mode_dims[mode]))
        }
        _ => apply_kraus(rho, mode, &kraus_maps(ch, rho.mode_dims[mode])),
    };
    let tin = rho.trace();
    let lost = tin - out.trace();
    if lost > tol * tin.abs().max(f64::MIN_POSITIVE) {
        return Err(Error::CutoffOverflow { lost, tol });
    }
    Ok(out)
}

/// Advisory cutoff (levels) for a channel output given the input mean photons.
pub fn cutoff_for(ch: &BosonicChannel, input_mean_photons: f64, tail_tol: f64) -> usize {
    cutoff_for_tail(ch.output_mean(input_mean_photons), tail_tol)
}

/// Complex helper used by tests and callers building coherent inputs.
pub fn amplitude(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{make_state, thermal, StateKind};

    #[test]
    fn decomposition_examples() {
        let (t, g) = decompose_thermal_loss(0.01, 0.2);
        assert!((g - 1.198).abs() < 1e-12);
        assert!((t - 0.00834724540901502).abs() < 1e-12);
        assert_eq!(decompose_thermal_loss(1.0, 3.0), (1.0, 1.0));
        assert_eq!(decompose_thermal_loss(0.3, 0.0), (0.3, 1.0));
    }

    #[test]
    fn gaussian_examples() {
        let vac = make_state(StateKind::Vacuum).unwrap();
        let out = apply_gaussian(&BosonicChannel::ThermalLoss { eta: 0.3, n_b: 2.0 }, &vac, 0).unwrap();
        assert!((out.mean_photons(0) - 1.4).abs() < 1e-12);
        let q = apply_gaussian(&BosonicChannel::Qla(1.7), &vac, 0).unwrap();
        assert!((q.cov.clone() - thermal(0.7).cov).amax() < 1e-12);
        let a = amplitude(0.3, -0.8);
        let coh = make_state(StateKind::Coherent(a)).unwrap();
        let l = apply_gaussian(&BosonicChannel::PureLoss(0.64), &coh, 0).unwrap();
        let want = make_state(StateKind::Coherent(a * 0.8)).unwrap();
        assert!((l.mean - want.mean).amax() < 1e-12 && (l.cov - want.cov).amax() < 1e-12);
        assert!(matches!(
            apply_gaussian(&BosonicChannel::Qla(2.0), &vac, 1),
            Err(Error::BadModeIndex { .. })
        ));
    }

    #[test]
    fn cascade_matches_direct() {
        let st = make_state(StateKind::Tmsv(0.7)).unwrap();
        let a = apply_gaussian(&BosonicChannel::ThermalLoss { eta: 0.2, n_b: 1.3 }, &st, 0).unwrap();
        let b = apply_thermal_loss_direct(0.2, 1.3, &st, 0);
        assert!((a.cov - b.cov).amax() < 1e-14);
    }

    #[test]
    fn fock_single_photon_loss() {
        let one = FockOperator::number(1, 3);
        let out = apply_fock(&BosonicChannel::PureLoss(0.3), &one, 0).unwrap();
        assert!((out.matrix[(1, 1)].re - 0.3).abs() < 1e-15);
        assert!((out.matrix[(0, 0)].re - 0.7).abs() < 1e-15);
    }

    #[test]
    fn fock_qla_on_vacuum_is_thermal() {
        let g: f64 = 1.5;
        let out = apply_fock(&BosonicChannel::Qla(g), &FockOperator::number(0, 80), 0).unwrap();
        for n in 0..80 {
            let want = (1.0 / g) * (1.0 - 1.0 / g).powi(n as i32);
            assert!((out.matrix[(n, n)].re - want).abs() < 1e-15);
        }
        assert!((out.mean_photons(0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn fock_overflow_detected() {
        let r = apply_fock(&BosonicChannel::Qla(3.0), &FockOperator::number(2, 6), 0);
        assert!(matches!(r, Err(Error::CutoffOverflow { .. })));
    }

    #[test]
    fn thermal_loss_moments_match_gaussian() {
        let a = amplitude(0.7, 0.4);
        let (eta, n_b) = (0.35, 0.8);
        let rho = FockOperator::coherent(a, 70);
        let out = apply_fock(&BosonicChannel::ThermalLoss { eta, n_b }, &rho, 0).unwrap();
        let g = apply_gaussian(
            &BosonicChannel::ThermalLoss { eta, n_b },
            &make_state(StateKind::Coherent(a)).unwrap(),
            0,
        )
        .unwrap();
        assert!((out.mean_photons(0) - g.mean_photons(0)).abs() < 1e-8);
        // number variance of a displaced thermal state: n̄_th(n̄_th+1) + |β|²(2n̄_th+1)
        let nth = (1.0 - eta) * n_b;
        let b2 = eta * a.norm_sqr();
        let var_g = nth * (nth + 1.0) + b2 * (2.0 * nth + 1.0);
        let m2: f64 = (0..70).map(|k| (k * k) as f64 * out.matrix[(k, k)].re).sum();
        let var_f = m2 - out.mean_photons(0).powi(2);
        assert!((var_f - var_g).abs() < 1e-8);
    }
}
