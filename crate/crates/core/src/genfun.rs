//! Total-photon-number PMFs and probability generating functions, with their
//! exact transforms through loss, amplification and thermal loss.

use crate::channels::{decompose_thermal_loss, BosonicChannel};
use crate::error::{Error, Result};
use crate::special::{ln_thermal_pmf, thermal_quantile};

/// Distribution of the total photon number over `modes` modes, truncated at
/// `p.len() − 1` with at most `tail` mass discarded.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonPmf {
    pub p: Vec<f64>,
    pub modes: usize,
    pub tail: f64,
}

impl PhotonPmf {
    pub fn new(p: Vec<f64>, modes: usize, tail: f64) -> Self {
        PhotonPmf { p, modes, tail }
    }

    pub fn point(n: usize, modes: usize) -> Self {
        let mut p = vec![0.0; n + 1];
        p[n] = 1.0;
        PhotonPmf { p, modes, tail: 0.0 }
    }

    /// Negative-binomial law of `m` thermal modes, cut where the tail drops below `tail_tol`.
    pub fn thermal(n_b: f64, m: usize, tail_tol: f64) -> Self {
        let d = thermal_quantile(m as f64, n_b, tail_tol);
        let p: Vec<f64> = (0..=d).map(|n| ln_thermal_pmf(n, m as f64, n_b).exp()).collect();
        let tail = (1.0 - p.iter().sum::<f64>()).max(0.0);
        PhotonPmf { p, modes: m, tail }
    }

    pub fn mean(&self) -> f64 {
        self.p.iter().enumerate().map(|(n, p)| n as f64 * p).sum()
    }

    pub fn total(&self) -> f64 {
        self.p.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    Thermal { n_b: f64 },
    Numeric { p: Vec<f64>, tail: f64 },
    Loss { inner: Box<Pgf>, t: f64 },
    Qla { inner: Box<Pgf>, g: f64 },
    ThermalLoss { inner: Box<Pgf>, eta: f64, n_b: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pgf {
    pub modes: usize,
    repr: Repr,
}

/// Evaluation with the propagated truncation error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PgfValue {
    pub value: f64,
    pub error: f64,
}

pub fn pgf_thermal(n_b: f64, m: usize) -> Pgf {
    Pgf { modes: m, repr: Repr::Thermal { n_b } }
}

pub fn pgf_from_pmf(pmf: &PhotonPmf) -> Pgf {
    Pgf { modes: pmf.modes, repr: Repr::Numeric { p: pmf.p.clone(), tail: pmf.tail } }
}

pub fn pgf_through_channel(p: &Pgf, ch: &BosonicChannel) -> Result<Pgf> {
    ch.validate()?;
    let inner = Box::new(p.clone());
    let repr = match *ch {
        BosonicChannel::PureLoss(t) => Repr::Loss { inner, t },
        BosonicChannel::Qla(g) => Repr::Qla { inner, g },
        BosonicChannel::ThermalLoss { eta, n_b } => Repr::ThermalLoss { inner, eta, n_b },
    };
    Ok(Pgf { modes: p.modes, repr })
}

fn amp_prefactor(g: f64, xi: f64, m: usize) -> Result<(f64, f64)> {
    let den = g - xi * (g - 1.0);
    if den <= 0.0 {
        return Err(Error::RadiusViolation(xi));
    }
    Ok((den.recip().powi(m as i32), xi / den))
}

impl Pgf {
    pub fn eval(&self, xi: f64) -> Result<f64> {
        Ok(self.eval_with_error(xi)?.value)
    }

    pub fn eval_with_error(&self, xi: f64) -> Result<PgfValue> {
        match &self.repr {
            Repr::Thermal { n_b } => {
                let den = n_b + 1.0 - n_b * xi;
                if den <= 0.0 {
                    return Err(Error::RadiusViolation(xi));
                }
                Ok(PgfValue { value: den.recip().powi(self.modes as i32), error: 0.0 })
            }
            Repr::Numeric { p, tail } => {
                if *tail > 0.0 && xi.abs() > 1.0 {
                    return Err(Error::RadiusViolation(xi));
                }
                let value = p.iter().rev().fold(0.0, |acc, c| acc * xi + c);
                Ok(PgfValue { value, error: *tail })
            }
            Repr::Loss { inner, t } => inner.eval_with_error(1.0 + t * (xi - 1.0)),
            Repr::Qla { inner, g } => {
                let (pre, u) = amp_prefactor(*g, xi, self.modes)?;
                let v = inner.eval_with_error(u)?;
                Ok(PgfValue { value: pre * v.value, error: pre * v.error })
            }
            Repr::ThermalLoss { inner, eta, n_b } => {
                let (t, g) = decompose_thermal_loss(*eta, *n_b);
                let (pre, u) = amp_prefactor(g, xi, self.modes)?;
                let v = inner.eval_with_error(1.0 - t + t * u)?;
                Ok(PgfValue { value: pre * v.value, error: pre * v.error })
            }
        }
    }

    /// Mean total photon number, propagated exactly through the transforms.
    pub fn mean(&self) -> f64 {
        let m = self.modes as f64;
        match &self.repr {
            Repr::Thermal { n_b } => m * n_b,
            Repr::Numeric { p, .. } => p.iter().enumerate().map(|(n, p)| n as f64 * p).sum(),
            Repr::Loss { inner, t } => t * inner.mean(),
            Repr::Qla { inner, g } => g * inner.mean() + m * (g - 1.0),
            Repr::ThermalLoss { inner, eta, n_b } => eta * inner.mean() + m * (1.0 - eta) * n_b,
        }
    }
}

/// Falling- and rising-factorial moment generating views of a PGF.
#[derive(Debug, Clone, Copy)]
pub struct MgfViews<'a> {
    pgf: &'a Pgf,
}

pub fn mgf_views(p: &Pgf) -> MgfViews<'_> {
    MgfViews { pgf: p }
}

impl MgfViews<'_> {
    /// ξ ↦ P(1+ξ)
    pub fn falling(&self, xi: f64) -> Result<f64> {
        self.pgf.eval(1.0 + xi)
    }

    /// ξ ↦ (1/(1−ξ))^M P(1/(1−ξ))
    pub fn rising(&self, xi: f64) -> Result<f64> {
        if xi >= 1.0 {
            return Err(Error::RadiusViolation(xi));
        }
        let u = 1.0 / (1.0 - xi);
        Ok(u.powi(self.pgf.modes as i32) * self.pgf.eval(u)?)
    }
}
