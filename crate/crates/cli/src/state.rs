use std::path::Path;

use nalgebra::{DMatrix, DVector};
use qilab::gaussian::{GaussianState, Ordering};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderingName {
    #[default]
    Xxpp,
    Xpxp,
}

/// On-disk Gaussian state: first moments, covariance rows, quadrature layout.
/// Vacuum variance is ½.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub mean: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
    #[serde(default)]
    pub ordering: OrderingName,
}

impl StateFile {
    pub fn from_state(s: &GaussianState) -> Self {
        let n = s.cov.nrows();
        StateFile {
            mean: s.mean.iter().copied().collect(),
            cov: (0..n).map(|i| (0..n).map(|j| s.cov[(i, j)]).collect()).collect(),
            ordering: match s.ordering {
                Ordering::Xxpp => OrderingName::Xxpp,
                Ordering::Xpxp => OrderingName::Xpxp,
            },
        }
    }

    pub fn to_state(&self) -> Result<GaussianState> {
        let n = self.cov.len();
        if self.cov.iter().any(|r| r.len() != n) {
            return Err(CliError::Config("covariance must be square".into()));
        }
        let cov = DMatrix::from_fn(n, n, |i, j| self.cov[i][j]);
        let ordering = match self.ordering {
            OrderingName::Xxpp => Ordering::Xxpp,
            OrderingName::Xpxp => Ordering::Xpxp,
        };
        GaussianState::new(DVector::from_vec(self.mean.clone()), cov, ordering)
            .map_err(|e| CliError::Config(format!("invalid state: {e}")))
    }
}

pub fn load_state(path: &Path) -> Result<GaussianState> {
    let text = std::fs::read_to_string(path)?;
    let f: StateFile = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    f.to_state()
}

#[cfg(test)]
mod tests {
    use super::*;
    use qilab::gaussian::{make_state, StateKind};

    #[test]
    fn state_round_trip() {
        let s = make_state(StateKind::Tmsv(0.4)).unwrap();
        let f = StateFile::from_state(&s);
        let text = serde_json::to_string(&f).unwrap();
        let back: StateFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_state().unwrap(), s);
    }

    #[test]
    fn rejects_unphysical() {
        let f = StateFile { mean: vec![0.0, 0.0], cov: vec![vec![0.1, 0.0], vec![0.0, 0.1]], ordering: OrderingName::Xxpp };
        assert!(f.to_state().is_err());
        let f = StateFile { mean: vec![0.0, 0.0], cov: vec![vec![0.5, 0.0]], ordering: OrderingName::Xxpp };
        assert!(f.to_state().is_err());
    }
}
