use serde::Serialize;

use crate::qstate::{QState, SystemLayout};
use crate::{Error, Result};

/// `F |ψ⁻⟩⟨ψ⁻| + (1 − F)/3 (I − |ψ⁻⟩⟨ψ⁻|)` on two qubits.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WernerState {
    fidelity: f64,
}

impl WernerState {
    /// `F` must lie in `[1/4, 1]`; `F = 1/4` is the maximally mixed state.
    pub fn new(fidelity: f64) -> Result<Self> {
        if !(fidelity.is_finite() && (0.25..=1.0).contains(&fidelity)) {
            return Err(Error::OutOfRange(format!("Werner fidelity {fidelity} not in [1/4, 1]")));
        }
        Ok(WernerState { fidelity })
    }

    pub fn fidelity(&self) -> f64 {
        self.fidelity
    }

    /// Entangled, and distillable, exactly when `F > 1/2`.
    pub fn is_entangled(&self) -> bool {
        self.fidelity > 0.5
    }

    pub fn state(&self) -> QState {
        let f = self.fidelity;
        let psi = QState::singlet();
        let mixed = QState::maximally_mixed(SystemLayout::two_qubits());
        // I − ψ⁻ = 4·(I/4) − ψ⁻
        let w_singlet = f - (1.0 - f) / 3.0;
        let w_mixed = 4.0 * (1.0 - f) / 3.0;
        // both weights are non-negative for F ≥ 1/4
        QState::mixture(&[(w_singlet, &psi), (w_mixed, &mixed)]).expect("valid Werner weights")
    }

    /// Singlet fidelity `⟨ψ⁻|ρ|ψ⁻⟩` of any two-qubit state.
    pub fn singlet_fidelity(rho: &QState) -> Result<f64> {
        if !rho.layout().same_dims(&SystemLayout::two_qubits()) {
            return Err(Error::LayoutMismatch(format!("{} is not two qubits", rho.layout())));
        }
        let psi = QState::singlet();
        Ok((psi.matrix() * rho.matrix()).trace().re)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectrum_is_f_and_three_equal() {
        let w = WernerState::new(0.9).unwrap().state();
        let ev = w.eigenvalues();
        assert!((ev[0] - 0.9).abs() < 1e-12);
        for e in &ev[1..] {
            assert!((e - 0.1 / 3.0).abs() < 1e-12);
        }
        assert!(WernerState::new(0.2).is_err());
        let m = WernerState::new(0.25).unwrap().state();
        assert!((m.max_eigenvalue() - 0.25).abs() < 1e-12);
    }
}
