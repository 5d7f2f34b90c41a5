use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

use super::linalg::{c, shannon};
use super::{QState, SystemLayout};

/// Squared Schmidt coefficients, descending, summing to one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SchmidtVector {
    probs: Vec<f64>,
}

impl SchmidtVector {
    /// Sorts descending. Entries must be non-negative and sum to one within
    /// 1e-12.
    pub fn new(mut probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidState("empty Schmidt vector".into()));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidState("Schmidt coefficients must be non-negative".into()));
        }
        let s: f64 = probs.iter().sum();
        if (s - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidState(format!("Schmidt coefficients sum to {s}")));
        }
        probs.sort_by(|a, b| b.total_cmp(a));
        Ok(SchmidtVector { probs })
    }

    /// Like [`SchmidtVector::new`] but rescales the input to unit sum.
    pub fn normalized(probs: Vec<f64>) -> Result<Self> {
        let s: f64 = probs.iter().sum();
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::InvalidState("Schmidt coefficients sum to zero".into()));
        }
        Self::new(probs.into_iter().map(|p| p / s).collect())
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Number of strictly positive coefficients.
    pub fn rank(&self) -> usize {
        self.probs.iter().filter(|&&p| p > 0.0).count()
    }

    /// Entanglement entropy in bits.
    pub fn entropy(&self) -> f64 {
        shannon(&self.probs)
    }

    /// Coefficients of the tensor product state.
    pub fn tensor(&self, other: &SchmidtVector) -> SchmidtVector {
        let mut p = Vec::with_capacity(self.len() * other.len());
        for a in &self.probs {
            for b in &other.probs {
                p.push(a * b);
            }
        }
        p.sort_by(|a, b| b.total_cmp(a));
        SchmidtVector { probs: p }
    }

    /// Zero-padded to length `d` (never truncates).
    pub fn padded(&self, d: usize) -> Vec<f64> {
        let mut p = self.probs.clone();
        if p.len() < d {
            p.resize(d, 0.0);
        }
        p
    }

    /// `Σ_i √p_i |ii⟩` on an Alice/Bob pair of dimension `d`, where `d` is
    /// the vector length.
    pub fn canonical_state(&self) -> Result<QState> {
        self.canonical_state_dim(self.len())
    }

    /// Same as [`SchmidtVector::canonical_state`] on local dimension `d`.
    pub fn canonical_state_dim(&self, d: usize) -> Result<QState> {
        if d < self.rank() {
            return Err(Error::InvalidDimension(format!(
                "rank {} does not fit in dimension {d}",
                self.rank()
            )));
        }
        let layout = SystemLayout::bipartite(d, d)?;
        QState::from_ket(layout, &self.canonical_ket(d))
    }

    pub(crate) fn canonical_ket(&self, d: usize) -> DVector<crate::C64> {
        let mut v = DVector::zeros(d * d);
        for (i, p) in self.probs.iter().enumerate().take(d) {
            v[i * d + i] = c(p.sqrt());
        }
        v
    }
}

impl TryFrom<Vec<f64>> for SchmidtVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        SchmidtVector::new(v)
    }
}

impl From<SchmidtVector> for Vec<f64> {
    fn from(s: SchmidtVector) -> Self {
        s.probs
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{schmidt_decompose, Bipartition};

    #[test]
    fn sorts_and_validates() {
        let s = SchmidtVector::new(vec![0.1, 0.9]).unwrap();
        assert_eq!(s.probs(), &[0.9, 0.1]);
        assert!(SchmidtVector::new(vec![0.5, 0.4]).is_err());
        assert!(SchmidtVector::new(vec![1.2, -0.2]).is_err());
        assert!((s.entropy() - 0.4690).abs() < 1e-3);
    }

    #[test]
    fn canonical_state_round_trips() {
        let s = SchmidtVector::new(vec![0.6, 0.3, 0.1]).unwrap();
        let st = s.canonical_state().unwrap();
        let back = schmidt_decompose(&st, &Bipartition::alice(st.layout())).unwrap();
        for (a, b) in back.probs().iter().zip(s.probs()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn tensor_multiplies() {
        let a = SchmidtVector::new(vec![0.6, 0.4]).unwrap();
        let t = a.tensor(&a);
        assert_eq!(t.len(), 4);
        assert!((t.probs()[0] - 0.36).abs() < 1e-15);
        assert!((t.entropy() - 2.0 * a.entropy()).abs() < 1e-12);
    }
}
